#pragma once

// Shared fixtures and generators for the test suites.  The oracles used to
// freeze expected values live next to the tests that use them, written
// independently of the library code they check.

#include <chainbound/chainbound.hpp>

#include <cstdint>
#include <random>
#include <utility>
#include <vector>

namespace testsupport {

using chainbound::HardwareGraph;
using chainbound::IsingProblem;
using chainbound::MinorEmbedding;
using chainbound::Rational;

template <typename S>
struct EmbeddedFixture {
  IsingProblem<S> problem;
  HardwareGraph hw;
  MinorEmbedding emb;

  chainbound::EmbeddingContext<S> context() const {
    return chainbound::EmbeddingContext<S>::create(problem, hw, emb);
  }
};

// Star fixture: one logical qubit with field 3u embedded as a 4-node star
// (center + 3 leaves), three neighbour qubits on single nodes, each coupled
// with magnitude 5u through its own leaf.
template <typename S>
EmbeddedFixture<S> star3(const S& u = S(1)) {
  EmbeddedFixture<S> fx;
  fx.problem = IsingProblem<S>(4);
  fx.problem.fields[0] = S(3) * u;
  fx.problem.add_coupler(0, 1, S(5) * u);
  fx.problem.add_coupler(0, 2, S(5) * u);
  fx.problem.add_coupler(0, 3, S(5) * u);

  fx.hw = HardwareGraph(7);
  fx.hw.add_edge(0, 1);
  fx.hw.add_edge(0, 2);
  fx.hw.add_edge(0, 3);
  fx.hw.add_edge(1, 4);
  fx.hw.add_edge(2, 5);
  fx.hw.add_edge(3, 6);

  fx.emb.chains = {{0, 1, 2, 3}, {4}, {5}, {6}};
  fx.emb.edge_map = {{0, 1, 1, 4}, {0, 2, 2, 5}, {0, 3, 3, 6}};
  return fx;
}

// Small deterministic rational: numerator in [lo_num, hi_num], fixed
// denominator.
inline Rational rat(std::mt19937_64& rng, int lo_num, int hi_num, int denom = 8) {
  const std::uint64_t span = static_cast<std::uint64_t>(hi_num - lo_num + 1);
  const int num = lo_num + static_cast<int>(chainbound::uniform_below(rng, span));
  return Rational(num) / denom;
}

inline int pick(std::mt19937_64& rng, int lo, int hi) {
  return lo + static_cast<int>(chainbound::uniform_below(rng, static_cast<std::uint64_t>(hi - lo + 1)));
}

// Random logical problem over n qubits; every pair carries a coupler with
// probability ~edge_pct/100 (nonzero value guaranteed).
inline IsingProblem<Rational> random_problem(std::mt19937_64& rng, int n, int edge_pct) {
  IsingProblem<Rational> p(n);
  for (int i = 0; i < n; ++i) p.fields[static_cast<std::size_t>(i)] = rat(rng, -16, 16);
  for (int i = 0; i < n; ++i)
    for (int j = i + 1; j < n; ++j)
      if (pick(rng, 0, 99) < edge_pct) {
        Rational v = rat(rng, -16, 16);
        if (v == 0) v = Rational(1, 2);
        p.add_coupler(i, j, v);
      }
  return p;
}

// Random embedding of a logical problem: chain i occupies a contiguous block
// of physical nodes shaped into a random tree; each coupler lands on random
// nodes of the two chains.
inline EmbeddedFixture<Rational> random_embedded(std::mt19937_64& rng, int n_logical,
                                                 int max_chain, int edge_pct) {
  EmbeddedFixture<Rational> fx;
  fx.problem = random_problem(rng, n_logical, edge_pct);

  std::vector<std::vector<int>> chains;
  std::vector<std::pair<int, int>> edges;
  int next_node = 0;
  for (int i = 0; i < n_logical; ++i) {
    const int len = pick(rng, 1, max_chain);
    std::vector<int> chain;
    for (int k = 0; k < len; ++k) {
      const int node = next_node++;
      chain.push_back(node);
      if (k > 0) edges.emplace_back(chain[static_cast<std::size_t>(pick(rng, 0, k - 1))], node);
    }
    chains.push_back(std::move(chain));
  }
  fx.hw = HardwareGraph(next_node);
  for (const auto& [p, q] : edges) fx.hw.add_edge(p, q);

  fx.emb.chains = chains;
  for (const auto& c : fx.problem.couplers) {
    const auto& ci = chains[static_cast<std::size_t>(c.i)];
    const auto& cj = chains[static_cast<std::size_t>(c.j)];
    const int tau_ij = ci[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(ci.size()) - 1))];
    const int tau_ji = cj[static_cast<std::size_t>(pick(rng, 0, static_cast<int>(cj.size()) - 1))];
    fx.hw.add_edge(tau_ij, tau_ji);
    fx.emb.edge_map.push_back({c.i, c.j, tau_ij, tau_ji});
  }
  return fx;
}

}  // namespace testsupport
