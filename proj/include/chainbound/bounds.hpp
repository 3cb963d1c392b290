#pragma once

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "embedding.hpp"
#include "errors.hpp"
#include "ising.hpp"
#include "scalar.hpp"

namespace chainbound {

/// Coupling weight minus field magnitude: C_i = sum_j |J_ij| - |h_i|.
/// Negative C_i means the optimal orientation of spin i is forced by its own
/// field regardless of the neighbours.
template <typename S>
S c_value(const IsingProblem<S>& p, int i) {
  S coupling(0);
  for (const auto& c : p.couplers)
    if (c.i == i || c.j == i) coupling += scalar_abs(c.value);
  return coupling - scalar_abs(p.fields[static_cast<std::size_t>(i)]);
}

template <typename S>
bool locally_determinable(const IsingProblem<S>& p, int i) {
  return c_value(p, i) < 0;
}

/// First classical bound: |F_i| >= |h_i| + sum_j |J_ij|.  Distribution-free.
template <typename S>
S choi1_bound(const IsingProblem<S>& p, int i) {
  S coupling(0);
  for (const auto& c : p.couplers)
    if (c.i == i || c.j == i) coupling += scalar_abs(c.value);
  return coupling + scalar_abs(p.fields[static_cast<std::size_t>(i)]);
}

template <typename S>
struct Choi2Bound {
  S value{};
  int leaf_count = 1;
  bool locally_determinable = false;  // C_i < 0: bound not applicable, value 0
};

/// Second classical bound: |F_i| >= (l-1)/l * C_i with l the number of chain
/// tree leaves.  Only valid together with the matching leaf-weighted field
/// distribution (make_choi2_distribution).  Singleton chains give 0.
template <typename S>
Choi2Bound<S> choi2_bound(const EmbeddingContext<S>& ctx, int i) {
  const auto& lay = ctx.layout(i);
  Choi2Bound<S> out;
  out.leaf_count = lay.leaf_count;
  const S c = c_value(ctx.problem(), i);
  if (c < 0) {
    out.locally_determinable = true;
    out.value = S(0);
    return out;
  }
  if (lay.size() < 2) {
    out.value = S(0);
    return out;
  }
  out.value = S(lay.leaf_count - 1) * c / S(lay.leaf_count);
  return out;
}

/// One enumerated chain subset W with its candidate bound
/// min(|h(W)-J(W)|, |h(W)-h_i-J(complement)|) / |boundary(W)|.
template <typename S>
struct SubsetWitness {
  int qubit = 0;
  std::uint32_t mask = 0;          // bit k = local node k of the sorted chain
  std::vector<int> subset_nodes;   // physical ids, ascending
  int boundary_size = 0;
  S h_w{};
  S j_w{};
  S value{};
};

namespace detail {

// Subset sums over all 2^L masks by peeling the lowest set bit.
template <typename S>
std::vector<S> subset_sums(const std::vector<S>& per_node) {
  const int L = static_cast<int>(per_node.size());
  std::vector<S> out(std::size_t{1} << L, S(0));
  for (std::uint32_t m = 1; m < (std::uint32_t{1} << L); ++m) {
    const int k = std::countr_zero(m);
    out[m] = out[m & (m - 1)] + per_node[static_cast<std::size_t>(k)];
  }
  return out;
}

// Number of chain tree edges with endpoints on opposite sides of each mask.
inline std::vector<int> boundary_sizes(int L, const std::vector<std::pair<int, int>>& tree_edges) {
  std::vector<int> out(std::size_t{1} << L, 0);
  for (std::uint32_t m = 0; m < (std::uint32_t{1} << L); ++m) {
    int b = 0;
    for (const auto& [a, c] : tree_edges) b += int(((m >> a) ^ (m >> c)) & 1u);
    out[m] = b;
  }
  return out;
}

template <typename S>
void check_chain_cap(const ChainLayout<S>& lay, int max_chain) {
  if (lay.size() > max_chain)
    throw size_cap_error("chain of " + std::to_string(lay.size()) +
                         " nodes exceeds the subset enumeration cap (" +
                         std::to_string(max_chain) + ")");
}

}  // namespace detail

template <typename S>
struct TightBoundResult {
  S value{};
  std::optional<SubsetWitness<S>> witness;  // absent for singleton chains
};

/// Enumerates every proper nonempty subset of the chain (disconnected ones
/// included) and maximises the candidate bound.  Ties go to the smallest
/// subset bitmask so witnesses are reproducible.
template <typename S>
TightBoundResult<S> tight_bound(const EmbeddingContext<S>& ctx, const HFieldDistribution<S>& dist,
                                int i, int max_chain = 30) {
  const auto& lay = ctx.layout(i);
  detail::check_chain_cap(lay, max_chain);
  const int L = lay.size();
  if (L < 2) return TightBoundResult<S>{S(0), std::nullopt};

  const S& h_i = ctx.problem().fields[static_cast<std::size_t>(i)];
  const auto h_sums = detail::subset_sums<S>(dist.chain(i));
  const auto j_sums = detail::subset_sums<S>(lay.external_abs);
  const auto boundary = detail::boundary_sizes(L, lay.tree_edges);
  const std::uint32_t full = (std::uint32_t{1} << L) - 1;
  const S& j_total = lay.external_total;

  bool have = false;
  S best(0);
  std::uint32_t best_mask = 0;
  for (std::uint32_t m = 1; m < full; ++m) {
    const S t1 = scalar_abs(S(h_sums[m] - j_sums[m]));
    const S t2 = scalar_abs(S(h_sums[m] - h_i - (j_total - j_sums[m])));
    S cand = std::min(t1, t2) / S(boundary[m]);
    if (!have || best < cand) {
      have = true;
      best = std::move(cand);
      best_mask = m;
    }
  }

  SubsetWitness<S> w;
  w.qubit = i;
  w.mask = best_mask;
  for (int k = 0; k < L; ++k)
    if ((best_mask >> k) & 1u) w.subset_nodes.push_back(lay.nodes[static_cast<std::size_t>(k)]);
  w.boundary_size = boundary[best_mask];
  w.h_w = h_sums[best_mask];
  w.j_w = j_sums[best_mask];
  w.value = best;
  return TightBoundResult<S>{best, std::move(w)};
}

/// True when the enumerated bound is known to be the exact threshold at the
/// witness: either the direct condition
///   h(W) <= h_i + J(complement)  or  h(complement) <= h_i - J(W)
/// or the same condition with W and its complement exchanged.
template <typename S>
bool certify_tightness(const EmbeddingContext<S>& ctx, const HFieldDistribution<S>& dist, int i,
                       const SubsetWitness<S>& witness) {
  const auto& lay = ctx.layout(i);
  const auto& vals = dist.chain(i);
  const S& h_i = ctx.problem().fields[static_cast<std::size_t>(i)];
  S h_w(0), j_w(0);
  for (int k = 0; k < lay.size(); ++k)
    if ((witness.mask >> k) & 1u) {
      h_w += vals[static_cast<std::size_t>(k)];
      j_w += lay.external_abs[static_cast<std::size_t>(k)];
    }
  S h_c(0);
  for (const auto& v : vals) h_c += v;
  h_c -= h_w;  // field mass on the complement, independent of h_i bookkeeping
  const S j_c = lay.external_total - j_w;

  const bool direct = h_w <= h_i + j_c || h_c <= h_i - j_w;
  const bool swapped = h_c <= h_i + j_w || h_w <= h_i - j_c;
  return direct || swapped;
}

template <typename S>
struct AdmissibilityViolation {
  int qubit = 0;
  std::vector<int> subset_nodes;
  S slack{};  // J(W) + |boundary| * F - |h(W)|, negative here
};

template <typename S>
struct AdmissibilityReport {
  bool admissible = true;
  std::vector<AdmissibilityViolation<S>> violations;
};

/// An embedding at chain strength magnitudes F_i is admissible when no chain
/// subset can be frozen by its own field mass:
///   J(W) + |boundary(W)| * F_i - |h(W)| >= 0  for every proper nonempty W.
/// Reports every violating subset.
template <typename S>
AdmissibilityReport<S> check_admissible(const EmbeddingContext<S>& ctx,
                                        const HFieldDistribution<S>& dist,
                                        const std::vector<S>& strengths, int max_chain = 30) {
  if (strengths.size() != static_cast<std::size_t>(ctx.num_qubits()))
    throw validation_error("strength list length does not match qubit count");
  AdmissibilityReport<S> report;
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto& lay = ctx.layout(i);
    detail::check_chain_cap(lay, max_chain);
    const int L = lay.size();
    if (L < 2) continue;
    const S& f = strengths[static_cast<std::size_t>(i)];
    if (f < 0) throw constraint_error("strengths must be nonnegative magnitudes");
    const auto h_sums = detail::subset_sums<S>(dist.chain(i));
    const auto j_sums = detail::subset_sums<S>(lay.external_abs);
    const auto boundary = detail::boundary_sizes(L, lay.tree_edges);
    const std::uint32_t full = (std::uint32_t{1} << L) - 1;
    for (std::uint32_t m = 1; m < full; ++m) {
      const S slack = j_sums[m] + S(boundary[m]) * f - scalar_abs(h_sums[m]);
      if (slack < 0) {
        AdmissibilityViolation<S> v;
        v.qubit = i;
        for (int k = 0; k < L; ++k)
          if ((m >> k) & 1u) v.subset_nodes.push_back(lay.nodes[static_cast<std::size_t>(k)]);
        v.slack = slack;
        report.violations.push_back(std::move(v));
      }
    }
  }
  report.admissible = report.violations.empty();
  return report;
}

template <typename S>
struct OptimizedDistribution {
  std::vector<S> values;  // field split for the chain, aligned with layout nodes
  S bound{};              // tight bound achieved by it
};

namespace detail {

// Objective shared by the optimizer: tight bound of one chain for the
// sign-flattened mass vector a (a_k = |h_{i(k)}|, sum = |h_i|).  With every
// field sign equal the two candidate terms become |a(W) - J(W)| and
// a(comp) + J(comp), so the signed problem reduces to this positive form.
template <typename T>
T flat_tight(const std::vector<T>& a_sums, const std::vector<T>& j_sums,
             const std::vector<int>& boundary, const T& a_total, const T& j_total) {
  const std::uint32_t full = static_cast<std::uint32_t>(a_sums.size()) - 1;
  T best(0);
  bool have = false;
  for (std::uint32_t m = 1; m < full; ++m) {
    const T t1_raw = a_sums[m] - j_sums[m];
    const T t1 = t1_raw < 0 ? T(-t1_raw) : t1_raw;
    const T t2 = (a_total - a_sums[m]) + (j_total - j_sums[m]);
    T cand = (t1 < t2 ? t1 : t2) / T(boundary[m]);
    if (!have || best < cand) {
      best = std::move(cand);
      have = true;
    }
  }
  return best;
}

template <typename T>
T flat_tight_of(const std::vector<T>& a, const std::vector<T>& j_sums,
                const std::vector<int>& boundary, const T& j_total) {
  const auto a_sums = subset_sums<T>(a);
  T a_total(0);
  for (const auto& v : a) a_total += v;
  return flat_tight<T>(a_sums, j_sums, boundary, a_total, j_total);
}

}  // namespace detail

/// Minimises the tight bound over all sign-coherent splits of h_i across the
/// chain (sgn(h_i) * h_{i(k)} >= 0, sum = h_i).  Multi-start coordinate
/// descent with golden-section line search on mass transfers, then a grid
/// polish; every surviving candidate is re-evaluated in the caller's scalar
/// type, so in exact mode the reported bound is exact for the reported
/// distribution.  Fully deterministic.
template <typename S>
OptimizedDistribution<S> optimize_distribution(const EmbeddingContext<S>& ctx, int i,
                                               int max_chain = 30) {
  const auto& lay = ctx.layout(i);
  detail::check_chain_cap(lay, max_chain);
  const int L = lay.size();
  const S& h_i = ctx.problem().fields[static_cast<std::size_t>(i)];
  const int sign = sgn_or_positive(h_i);
  const S mass = scalar_abs(h_i);

  OptimizedDistribution<S> out;
  if (L < 2) {
    out.values.assign(1, h_i);
    out.bound = S(0);
    return out;
  }

  const auto j_sums_s = detail::subset_sums<S>(lay.external_abs);
  const auto boundary = detail::boundary_sizes(L, lay.tree_edges);

  auto exact_eval = [&](const std::vector<S>& a) {
    return detail::flat_tight_of<S>(a, j_sums_s, boundary, lay.external_total);
  };

  // Candidate mass vectors, evaluated exactly at the end.  Vertices first:
  // for piecewise-linear objectives the optimum often sits on one.
  std::vector<std::vector<S>> candidates;
  for (int k = 0; k < L; ++k) {
    std::vector<S> v(static_cast<std::size_t>(L), S(0));
    v[static_cast<std::size_t>(k)] = mass;
    candidates.push_back(std::move(v));
  }
  std::vector<S> uniform(static_cast<std::size_t>(L), mass / S(L));
  candidates.push_back(uniform);
  // Leaf-weighted split, clamped into the sign-coherent simplex.
  {
    const S slack = lay.external_total - mass;
    if (!(slack < 0)) {
      std::vector<S> v;
      v.reserve(static_cast<std::size_t>(L));
      S total(0);
      for (int k = 0; k < L; ++k) {
        S x = lay.external_abs[static_cast<std::size_t>(k)];
        if (lay.tree_degree[static_cast<std::size_t>(k)] <= 1) x -= slack / S(lay.leaf_count);
        if (x < 0) x = S(0);
        total += x;
        v.push_back(std::move(x));
      }
      if (total > 0 && mass > 0) {
        for (auto& x : v) x = x * mass / total;
        candidates.push_back(std::move(v));
      } else if (mass == 0) {
        candidates.push_back(std::vector<S>(static_cast<std::size_t>(L), S(0)));
      }
    }
  }

  if (mass > 0) {
    // Refinement in double precision; exact re-evaluation later keeps the
    // result honest.
    std::vector<double> jd(static_cast<std::size_t>(L));
    for (int k = 0; k < L; ++k) jd[static_cast<std::size_t>(k)] = to_double(lay.external_abs[static_cast<std::size_t>(k)]);
    const auto jd_sums = detail::subset_sums<double>(jd);
    const double j_total_d = jd_sums[(std::size_t{1} << L) - 1];
    const double mass_d = to_double(mass);

    auto eval_d = [&](const std::vector<double>& a) {
      return detail::flat_tight_of<double>(a, jd_sums, boundary, j_total_d);
    };

    auto descend = [&](std::vector<double> a) {
      double fa = eval_d(a);
      constexpr double golden = 0.6180339887498949;
      for (int pass = 0; pass < 30; ++pass) {
        const double before = fa;
        for (int k = 0; k < L; ++k)
          for (int l = 0; l < L; ++l) {
            if (k == l) continue;
            // Transfer t of mass from node k to node l, t in [0, a_k].
            double lo = 0.0, hi = a[static_cast<std::size_t>(k)];
            if (hi <= 0) continue;
            auto probe = [&](double t) {
              std::vector<double> b(a);
              b[static_cast<std::size_t>(k)] -= t;
              b[static_cast<std::size_t>(l)] += t;
              return eval_d(b);
            };
            double x1 = hi - golden * (hi - lo), x2 = lo + golden * (hi - lo);
            double f1 = probe(x1), f2 = probe(x2);
            for (int it = 0; it < 40; ++it) {
              if (f1 <= f2) {
                hi = x2; x2 = x1; f2 = f1;
                x1 = hi - golden * (hi - lo);
                f1 = probe(x1);
              } else {
                lo = x1; x1 = x2; f1 = f2;
                x2 = lo + golden * (hi - lo);
                f2 = probe(x2);
              }
            }
            const double t_best = f1 <= f2 ? x1 : x2;
            const double f_best = std::min(f1, f2);
            if (f_best + 1e-15 < fa && t_best > 0) {
              a[static_cast<std::size_t>(k)] -= t_best;
              a[static_cast<std::size_t>(l)] += t_best;
              fa = f_best;
            }
          }
        if (before - fa <= 1e-14 * std::max(1.0, std::fabs(before))) break;
      }
      return a;
    };

    std::vector<std::vector<double>> starts;
    starts.emplace_back(static_cast<std::size_t>(L), mass_d / L);
    {
      // Start from the best exact candidate seen so far (usually a vertex or
      // the leaf-weighted split).
      std::size_t best_c = 0;
      S best_v = exact_eval(candidates[0]);
      for (std::size_t c = 1; c < candidates.size(); ++c) {
        const S v = exact_eval(candidates[c]);
        if (v < best_v) {
          best_v = v;
          best_c = c;
        }
      }
      std::vector<double> s0(static_cast<std::size_t>(L));
      for (int k = 0; k < L; ++k) s0[static_cast<std::size_t>(k)] = to_double(candidates[best_c][static_cast<std::size_t>(k)]);
      starts.push_back(std::move(s0));
    }

    // Snap descent output onto the polish grid, repairing the sum on the
    // heaviest coordinate, and keep both snapped and raw versions.
    const S resolution = (mass + lay.external_total) / S(1024);
    for (auto& start : starts) {
      const auto a = descend(start);
      std::vector<S> raw;
      raw.reserve(static_cast<std::size_t>(L));
      S raw_sum(0);
      for (double v : a) {
        S x = v <= 0 ? S(0) : S(v);
        raw_sum += x;
        raw.push_back(std::move(x));
      }
      if (raw_sum > 0) {
        for (auto& x : raw) x = x * mass / raw_sum;
        candidates.push_back(raw);
      }
      if (resolution > 0) {
        std::vector<S> snapped(static_cast<std::size_t>(L), S(0));
        S snapped_sum(0);
        std::size_t heaviest = 0;
        for (int k = 0; k < L; ++k) {
          const double steps = std::floor(a[static_cast<std::size_t>(k)] / to_double(resolution) + 0.5);
          S x = steps <= 0 ? S(0) : S(steps) * resolution;
          snapped_sum += x;
          if (a[static_cast<std::size_t>(k)] > a[heaviest]) heaviest = static_cast<std::size_t>(k);
          snapped[static_cast<std::size_t>(k)] = std::move(x);
        }
        S fix = snapped[heaviest] + (mass - snapped_sum);
        if (!(fix < 0)) {
          snapped[heaviest] = std::move(fix);
          candidates.push_back(std::move(snapped));
        }
      }
    }
  }

  // Exact scoring; first minimum in candidate order wins.
  std::size_t best_c = 0;
  S best_v = exact_eval(candidates[0]);
  for (std::size_t c = 1; c < candidates.size(); ++c) {
    const S v = exact_eval(candidates[c]);
    if (v < best_v) {
      best_v = v;
      best_c = c;
    }
  }

  out.values.reserve(static_cast<std::size_t>(L));
  for (const auto& a : candidates[best_c]) out.values.push_back(sign < 0 ? S(-a) : a);
  out.bound = best_v;
  return out;
}

/// Everything the bounds module knows about one logical qubit.
template <typename S>
struct QubitBoundReport {
  int qubit = 0;
  S c{};
  bool locally_determinable = false;
  S choi1{};
  std::optional<S> choi2;  // absent when C_i < 0
  int leaf_count = 1;
  bool distribution_fell_back = false;
  S tight{};
  std::optional<SubsetWitness<S>> witness;
  bool certified = false;
  std::optional<OptimizedDistribution<S>> optimized;
};

template <typename S>
std::vector<QubitBoundReport<S>> chain_bound_report(const EmbeddingContext<S>& ctx,
                                                    const HFieldDistribution<S>& dist,
                                                    bool with_optimized = false,
                                                    int max_chain = 30) {
  std::vector<QubitBoundReport<S>> reports;
  reports.reserve(static_cast<std::size_t>(ctx.num_qubits()));
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    QubitBoundReport<S> r;
    r.qubit = i;
    r.c = c_value(ctx.problem(), i);
    r.locally_determinable = r.c < 0;
    r.choi1 = choi1_bound(ctx.problem(), i);
    const auto c2 = choi2_bound(ctx, i);
    r.leaf_count = c2.leaf_count;
    if (!c2.locally_determinable) r.choi2 = c2.value;
    r.distribution_fell_back = dist.fell_back[static_cast<std::size_t>(i)] != 0;
    auto tb = tight_bound(ctx, dist, i, max_chain);
    r.tight = tb.value;
    r.witness = std::move(tb.witness);
    r.certified = r.witness ? certify_tightness(ctx, dist, i, *r.witness) : true;
    if (with_optimized) r.optimized = optimize_distribution(ctx, i, max_chain);
    reports.push_back(std::move(r));
  }
  return reports;
}

}  // namespace chainbound
