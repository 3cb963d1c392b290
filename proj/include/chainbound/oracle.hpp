#pragma once

#include <algorithm>
#include <cstdint>
#include <future>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "ising.hpp"
#include "scalar.hpp"

namespace chainbound {

/// A chain split observed in a physical ground state: the nodes in
/// subset_nodes share one spin value, the rest of the chain the other.
struct DomainWallReport {
  int qubit = 0;
  std::vector<int> subset_nodes;  // the +1 side of the chain
  bool positive = true;
  bool found_in_ground_state = true;
  SpinConfig witness_config;
};

template <typename S>
struct NoDomainWallResult {
  bool passed = false;
  bool energy_equal = false;
  S embedded_min{};
  S logical_min{};
  S chain_offset{};
  std::size_t ground_state_count = 0;
  std::vector<DomainWallReport> walls;
};

/// Exhaustively enumerates the physical ground states at the given chain
/// strength magnitudes and checks the two embedding guarantees: every ground
/// state keeps every chain homogeneous, and the embedded minimum minus the
/// chain coupler constant equals the logical minimum.
template <typename S>
NoDomainWallResult<S> verify_no_domain_wall(const EmbeddingContext<S>& ctx,
                                            const HFieldDistribution<S>& dist,
                                            const std::vector<S>& strength_magnitudes,
                                            int max_physical_qubits = 22) {
  if (strength_magnitudes.size() != static_cast<std::size_t>(ctx.num_qubits()))
    throw validation_error("strength list length does not match qubit count");
  std::vector<S> chain_couplers;
  chain_couplers.reserve(strength_magnitudes.size());
  for (const auto& m : strength_magnitudes) {
    if (m < 0) throw constraint_error("strengths must be nonnegative magnitudes");
    chain_couplers.push_back(S(-m));
  }

  const auto embedded = build_embedded_any_sign(ctx, dist, chain_couplers);
  const auto physical = enumerate_ground_states(embedded.problem, max_physical_qubits);
  const auto logical = enumerate_ground_states(ctx.problem(), max_physical_qubits);

  NoDomainWallResult<S> out;
  out.embedded_min = physical.min_energy;
  out.logical_min = logical.min_energy;
  out.chain_offset = embedded.chain_offset;
  out.ground_state_count = physical.configs.size();

  const S gap = physical.min_energy - embedded.chain_offset - logical.min_energy;
  if constexpr (is_exact_scalar_v<S>) {
    out.energy_equal = gap == 0;
  } else {
    const S scale = std::max(S(1), scalar_abs(logical.min_energy));
    out.energy_equal = scalar_abs(gap) <= S(1e-9) * scale;
  }

  for (const auto& config : physical.configs) {
    for (int i = 0; i < ctx.num_qubits(); ++i) {
      const auto& lay = ctx.layout(i);
      if (lay.size() < 2) continue;
      bool any_up = false, any_down = false;
      for (int p : lay.nodes)
        (config.spins[static_cast<std::size_t>(p)] > 0 ? any_up : any_down) = true;
      if (any_up && any_down) {
        DomainWallReport wall;
        wall.qubit = i;
        for (int p : lay.nodes)
          if (config.spins[static_cast<std::size_t>(p)] > 0) wall.subset_nodes.push_back(p);
        wall.witness_config = config;
        out.walls.push_back(std::move(wall));
      }
    }
  }

  out.passed = out.energy_equal && out.walls.empty();
  return out;
}

/// Convenience form: per-chain strength = enumerated tight bound + margin.
template <typename S>
NoDomainWallResult<S> verify_no_domain_wall_at_margin(const EmbeddingContext<S>& ctx,
                                                      const HFieldDistribution<S>& dist,
                                                      const S& margin,
                                                      int max_physical_qubits = 22,
                                                      int max_chain = 30) {
  if (!(margin > 0)) throw constraint_error("margin must be positive");
  std::vector<S> strengths;
  strengths.reserve(static_cast<std::size_t>(ctx.num_qubits()));
  for (int i = 0; i < ctx.num_qubits(); ++i)
    strengths.push_back(tight_bound(ctx, dist, i, max_chain).value + margin);
  return verify_no_domain_wall(ctx, dist, strengths, max_physical_qubits);
}

/// Outcome of a weakened-chain probe.
template <typename S>
struct TightnessProbe {
  bool found = false;
  S strength{};  // chain coupling magnitude that was probed
  std::vector<std::pair<int, std::int8_t>> assignment;  // (logical neighbour, frozen spin)
  SpinConfig chain_config;  // local spins over the sorted chain nodes, when found
};

namespace detail {

template <typename S>
struct ExternalPin {
  int local_node = 0;
  int neighbour = 0;
  S value{};
};

// Frozen-neighbour chain scan for one external spin assignment: true when
// neither homogeneous chain configuration attains the minimum.
template <typename S>
std::optional<std::uint32_t> breaking_config(const std::vector<S>& base_fields,
                                             const std::vector<ExternalPin<S>>& pins,
                                             const std::vector<std::pair<int, int>>& tree_edges,
                                             const S& coupler, std::uint64_t assignment) {
  const int L = static_cast<int>(base_fields.size());
  std::vector<S> fields(base_fields);
  for (std::size_t b = 0; b < pins.size(); ++b) {
    if ((assignment >> b) & 1u)
      fields[static_cast<std::size_t>(pins[b].local_node)] += pins[b].value;
    else
      fields[static_cast<std::size_t>(pins[b].local_node)] -= pins[b].value;
  }

  const std::uint32_t full = (std::uint32_t{1} << L) - 1;
  bool have = false;
  S best{};
  std::uint32_t best_mask = 0;
  for (std::uint32_t m = 0; m <= full; ++m) {
    S e(0);
    for (int k = 0; k < L; ++k)
      if ((m >> k) & 1u)
        e += fields[static_cast<std::size_t>(k)];
      else
        e -= fields[static_cast<std::size_t>(k)];
    for (const auto& [a, b] : tree_edges)
      if ((((m >> a) ^ (m >> b)) & 1u) == 0)
        e += coupler;
      else
        e -= coupler;
    if (!have || e < best) {
      have = true;
      best = std::move(e);
      best_mask = m;
    }
  }

  // best_mask is the first minimiser in mask order; homogeneous masks are 0
  // and full, so any other value certifies that both homogeneous
  // configurations lie strictly above the minimum... unless one of them ties.
  if (best_mask == 0 || best_mask == full) return std::nullopt;
  S e0(0), ef(0);
  for (int k = 0; k < L; ++k) {
    e0 -= fields[static_cast<std::size_t>(k)];
    ef += fields[static_cast<std::size_t>(k)];
  }
  e0 += S(static_cast<int>(tree_edges.size())) * coupler;
  ef += S(static_cast<int>(tree_edges.size())) * coupler;
  if (e0 == best || ef == best) return std::nullopt;
  return best_mask;
}

}  // namespace detail

/// Freezes every neighbouring chain to a homogeneous spin value and scans all
/// 2^(#neighbours) assignments for one under which chain i must break: with
/// the chain coupler at the given magnitude, neither all-up nor all-down is a
/// ground state of the isolated chain subproblem.  Deterministic: reports the
/// first assignment (ascending bit pattern, bit b = +1 for the b-th
/// neighbour) and the first breaking chain configuration in index order.
template <typename S>
TightnessProbe<S> probe_at_strength(const EmbeddingContext<S>& ctx,
                                    const HFieldDistribution<S>& dist, int i,
                                    const S& strength_magnitude) {
  const auto& lay = ctx.layout(i);
  TightnessProbe<S> out;
  out.strength = strength_magnitude;
  if (lay.size() < 2) return out;  // no chain edges, nothing can break

  std::vector<detail::ExternalPin<S>> pins;
  for (int k = 0; k < lay.size(); ++k)
    for (const auto& [j, v] : lay.landings[static_cast<std::size_t>(k)])
      pins.push_back(detail::ExternalPin<S>{k, j, v});
  if (pins.size() > 20)
    throw size_cap_error("refusing to enumerate " + std::to_string(pins.size()) +
                         " frozen neighbour spins");

  const S coupler = S(-strength_magnitude);
  const std::uint64_t total = std::uint64_t{1} << pins.size();
  const auto& base = dist.chain(i);

  auto scan_range = [&](std::uint64_t lo,
                        std::uint64_t hi) -> std::optional<std::pair<std::uint64_t, std::uint32_t>> {
    for (std::uint64_t a = lo; a < hi; ++a)
      if (const auto hit = detail::breaking_config(base, pins, lay.tree_edges, coupler, a))
        return std::make_pair(a, *hit);
    return std::nullopt;
  };

  std::optional<std::pair<std::uint64_t, std::uint32_t>> found;
  const unsigned hw_threads = std::thread::hardware_concurrency();
  if (total >= 4096 && hw_threads > 1) {
    // Parallel over assignment blocks; merging keeps the lowest assignment so
    // the verdict matches the sequential scan.
    const unsigned workers = std::min<unsigned>(hw_threads, 8);
    const std::uint64_t block = (total + workers - 1) / workers;
    std::vector<std::future<std::optional<std::pair<std::uint64_t, std::uint32_t>>>> futures;
    for (unsigned w = 0; w < workers; ++w) {
      const std::uint64_t lo = w * block;
      const std::uint64_t hi = std::min(total, lo + block);
      if (lo >= hi) break;
      futures.push_back(std::async(std::launch::async, scan_range, lo, hi));
    }
    for (auto& f : futures) {
      const auto r = f.get();
      if (r && (!found || r->first < found->first)) found = r;
    }
  } else {
    found = scan_range(0, total);
  }

  if (!found) return out;
  out.found = true;
  for (std::size_t b = 0; b < pins.size(); ++b)
    out.assignment.emplace_back(pins[b].neighbour,
                                ((found->first >> b) & 1u) ? std::int8_t{1} : std::int8_t{-1});
  out.chain_config = SpinConfig::from_index(found->second, lay.size());
  return out;
}

/// Probe just below an enumerated bound: magnitude = witness value minus
/// margin / |boundary|, the exact strength at which a certified witness
/// guarantees a breaking neighbour assignment exists.
template <typename S>
TightnessProbe<S> probe_tightness(const EmbeddingContext<S>& ctx, const HFieldDistribution<S>& dist,
                                  int i, const SubsetWitness<S>& witness, const S& margin) {
  if (!(margin > 0)) throw constraint_error("margin must be positive");
  const S strength = witness.value - margin / S(witness.boundary_size);
  return probe_at_strength(ctx, dist, i, strength);
}

/// Per-chain majority decode of a physical configuration.
struct MajorityDecode {
  SpinConfig logical;
  std::vector<std::uint8_t> broken;  // chain holds both spin values
  std::vector<std::uint8_t> tied;    // exact tie, resolved to +1
};

template <typename S>
MajorityDecode majority_vote_decode(const EmbeddingContext<S>& ctx, const SpinConfig& physical) {
  physical.check_valid(ctx.hardware().num_nodes);
  MajorityDecode out;
  out.logical.spins.resize(static_cast<std::size_t>(ctx.num_qubits()));
  out.broken.assign(static_cast<std::size_t>(ctx.num_qubits()), 0);
  out.tied.assign(static_cast<std::size_t>(ctx.num_qubits()), 0);
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto& lay = ctx.layout(i);
    int sum = 0;
    bool any_up = false, any_down = false;
    for (int p : lay.nodes) {
      const int s = physical.spins[static_cast<std::size_t>(p)];
      sum += s;
      (s > 0 ? any_up : any_down) = true;
    }
    if (any_up && any_down) out.broken[static_cast<std::size_t>(i)] = 1;
    if (sum == 0) out.tied[static_cast<std::size_t>(i)] = 1;
    out.logical.spins[static_cast<std::size_t>(i)] = sum >= 0 ? std::int8_t{1} : std::int8_t{-1};
  }
  return out;
}

}  // namespace chainbound
