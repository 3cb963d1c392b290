#pragma once

#include <algorithm>
#include <bit>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "scalar.hpp"

namespace chainbound {

/// Ising problem  E(s) = sum_i h_i s_i + sum_{(i,j)} J_ij s_i s_j  over
/// spins s_i in {-1,+1}.  Couplers are stored once with i < j.
template <typename S>
struct IsingProblem {
  struct Coupler {
    int i = 0;
    int j = 0;
    S value{};
  };

  int num_qubits = 0;
  std::vector<S> fields;      // h_i, one per qubit
  std::vector<Coupler> couplers;

  IsingProblem() = default;
  explicit IsingProblem(int n) : num_qubits(n), fields(static_cast<std::size_t>(n), S(0)) {}

  // Normalises endpoint order; validate() catches duplicates and self loops.
  void add_coupler(int i, int j, S value) {
    if (i > j) std::swap(i, j);
    couplers.push_back(Coupler{i, j, std::move(value)});
  }

  void validate() const {
    if (num_qubits < 0) throw validation_error("negative qubit count");
    if (fields.size() != static_cast<std::size_t>(num_qubits))
      throw validation_error("field vector length does not match qubit count");
    std::vector<std::pair<int, int>> seen;
    seen.reserve(couplers.size());
    for (const auto& c : couplers) {
      if (c.i < 0 || c.j < 0 || c.i >= num_qubits || c.j >= num_qubits)
        throw validation_error("coupler endpoint out of range: (" + std::to_string(c.i) +
                               "," + std::to_string(c.j) + ")");
      if (c.i == c.j)
        throw validation_error("self coupler on qubit " + std::to_string(c.i));
      if (c.i > c.j) throw validation_error("coupler endpoints not ordered");
      seen.emplace_back(c.i, c.j);
    }
    std::sort(seen.begin(), seen.end());
    if (std::adjacent_find(seen.begin(), seen.end()) != seen.end())
      throw validation_error("duplicate coupler");
  }

  // Neighbour lists: adjacency()[i] = {(j, J_ij), ...}.
  std::vector<std::vector<std::pair<int, S>>> adjacency() const {
    std::vector<std::vector<std::pair<int, S>>> adj(static_cast<std::size_t>(num_qubits));
    for (const auto& c : couplers) {
      adj[static_cast<std::size_t>(c.i)].emplace_back(c.j, c.value);
      adj[static_cast<std::size_t>(c.j)].emplace_back(c.i, c.value);
    }
    return adj;
  }
};

/// One spin per qubit, values strictly in {-1,+1}.
struct SpinConfig {
  std::vector<std::int8_t> spins;

  SpinConfig() = default;
  explicit SpinConfig(std::vector<std::int8_t> s) : spins(std::move(s)) {}

  int size() const { return static_cast<int>(spins.size()); }

  // Index encoding: bit i set  <=>  s_i = +1.
  static SpinConfig from_index(std::uint64_t index, int n) {
    SpinConfig c;
    c.spins.resize(static_cast<std::size_t>(n));
    for (int i = 0; i < n; ++i)
      c.spins[static_cast<std::size_t>(i)] = (index >> i) & 1u ? std::int8_t{1} : std::int8_t{-1};
    return c;
  }

  std::uint64_t to_index() const {
    std::uint64_t index = 0;
    for (int i = 0; i < size(); ++i)
      if (spins[static_cast<std::size_t>(i)] > 0) index |= std::uint64_t{1} << i;
    return index;
  }

  void check_valid(int expected_qubits) const {
    if (size() != expected_qubits)
      throw validation_error("configuration length " + std::to_string(size()) +
                             " does not match qubit count " + std::to_string(expected_qubits));
    for (auto s : spins)
      if (s != 1 && s != -1) throw validation_error("spin value outside {-1,+1}");
  }

  bool operator==(const SpinConfig& o) const { return spins == o.spins; }
};

template <typename S>
S energy(const IsingProblem<S>& p, const SpinConfig& c) {
  c.check_valid(p.num_qubits);
  S e(0);
  for (int i = 0; i < p.num_qubits; ++i)
    if (c.spins[static_cast<std::size_t>(i)] > 0)
      e += p.fields[static_cast<std::size_t>(i)];
    else
      e -= p.fields[static_cast<std::size_t>(i)];
  for (const auto& cp : p.couplers) {
    const int prod = int(c.spins[static_cast<std::size_t>(cp.i)]) *
                     int(c.spins[static_cast<std::size_t>(cp.j)]);
    if (prod > 0)
      e += cp.value;
    else
      e -= cp.value;
  }
  return e;
}

/// All minimisers of an Ising problem, sorted by configuration index.
template <typename S>
struct GroundStateSet {
  S min_energy{};
  std::vector<SpinConfig> configs;

  bool contains(const SpinConfig& c) const {
    return std::find(configs.begin(), configs.end(), c) != configs.end();
  }
};

/// Exhaustive ground-state enumeration via a Gray-code walk: successive
/// configurations differ in one spin, so each step costs one local energy
/// delta instead of a full evaluation.  Exact for rational scalars.
template <typename S>
GroundStateSet<S> enumerate_ground_states(const IsingProblem<S>& p, int max_qubits = 24) {
  p.validate();
  const int n = p.num_qubits;
  if (n > max_qubits)
    throw size_cap_error("refusing exhaustive enumeration over " + std::to_string(n) +
                         " qubits (cap " + std::to_string(max_qubits) + ")");
  if (n == 0) return GroundStateSet<S>{S(0), {SpinConfig{}}};

  const auto adj = p.adjacency();
  std::vector<std::int8_t> s(static_cast<std::size_t>(n), -1);

  // Energy of the all-down start.
  S e(0);
  for (const auto& h : p.fields) e -= h;
  for (const auto& c : p.couplers) e += c.value;

  S best = e;
  std::vector<std::uint64_t> minima{0};

  const std::uint64_t total = std::uint64_t{1} << n;
  std::uint64_t gray = 0;
  for (std::uint64_t t = 1; t < total; ++t) {
    const std::uint64_t next_gray = t ^ (t >> 1);
    const int k = std::countr_zero(gray ^ next_gray);
    gray = next_gray;

    // Flip spin k: delta = -2 s_k (h_k + sum_j J_kj s_j).
    S local = p.fields[static_cast<std::size_t>(k)];
    for (const auto& [j, v] : adj[static_cast<std::size_t>(k)])
      if (s[static_cast<std::size_t>(j)] > 0)
        local += v;
      else
        local -= v;
    if (s[static_cast<std::size_t>(k)] > 0) {
      e -= local + local;
    } else {
      e += local + local;
    }
    s[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(-s[static_cast<std::size_t>(k)]);

    if (e < best) {
      best = e;
      minima.clear();
      minima.push_back(gray);
    } else if (e == best) {
      minima.push_back(gray);
    }
  }

  std::sort(minima.begin(), minima.end());
  GroundStateSet<S> out;
  out.min_energy = best;
  out.configs.reserve(minima.size());
  for (auto m : minima) out.configs.push_back(SpinConfig::from_index(m, n));
  return out;
}

}  // namespace chainbound
