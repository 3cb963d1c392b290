#pragma once

#include <boost/multiprecision/cpp_int.hpp>

#include <cmath>
#include <sstream>
#include <string>
#include <type_traits>

namespace chainbound {

// Exact scalar used whenever bit-for-bit reproducible arithmetic matters.
using Rational = boost::multiprecision::cpp_rational;

template <typename S>
inline constexpr bool is_exact_scalar_v = !std::is_floating_point_v<S>;

template <typename S>
S scalar_abs(const S& x) {
  if constexpr (std::is_floating_point_v<S>) {
    return std::fabs(x);
  } else {
    return x < 0 ? S(-x) : x;
  }
}

// Sign with sgn(0) = +1; callers that need the strict sign test against zero
// themselves.
template <typename S>
int sgn_or_positive(const S& x) {
  return x < 0 ? -1 : 1;
}

template <typename S>
double to_double(const S& x) {
  if constexpr (std::is_floating_point_v<S>) {
    return static_cast<double>(x);
  } else {
    return x.template convert_to<double>();
  }
}

inline std::string rational_to_string(const Rational& x) {
  std::ostringstream os;
  os << x;
  return os.str();  // "p/q", or just "p" when the denominator is 1
}

// Accepts "p", "-p" and "p/q" forms.
inline Rational rational_from_string(const std::string& s) {
  return Rational(s);
}

}  // namespace chainbound
