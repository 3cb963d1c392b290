#pragma once

#include <algorithm>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "graph.hpp"
#include "ising.hpp"
#include "scalar.hpp"

namespace chainbound {

/// Minor embedding of a logical problem into a hardware graph.  chains[i]
/// lists the physical nodes representing logical qubit i (they must induce a
/// tree); edge_map places each logical coupler on one hardware edge between
/// the two chains.
struct MinorEmbedding {
  struct EdgePlacement {
    int i = 0;       // logical endpoints, i < j
    int j = 0;
    int tau_ij = 0;  // physical node inside chain i
    int tau_ji = 0;  // physical node inside chain j
  };

  std::vector<std::vector<int>> chains;
  std::vector<EdgePlacement> edge_map;
};

enum class EmbeddingDefect {
  chain_count_mismatch,
  empty_chain,
  node_out_of_range,
  node_shared,
  chain_not_tree,
  edge_not_in_hardware,
  endpoint_outside_chain,
  logical_edge_unmapped,
  logical_edge_duplicate,
  logical_edge_unknown,
};

struct EmbeddingIssue {
  EmbeddingDefect kind;
  std::string detail;
};

struct EmbeddingReport {
  std::vector<EmbeddingIssue> issues;
  bool ok() const { return issues.empty(); }

  std::string describe() const {
    std::string s;
    for (const auto& issue : issues) {
      if (!s.empty()) s += "; ";
      s += issue.detail;
    }
    return s;
  }
};

namespace detail {

// Connectivity+count test: the chain nodes with the hardware edges between
// them must form a tree.
inline bool chain_is_tree(const std::vector<int>& nodes,
                          const std::vector<std::pair<int, int>>& tree_edges) {
  if (nodes.empty()) return false;
  const std::size_t n = nodes.size();
  if (tree_edges.size() != n - 1) return false;
  std::vector<std::vector<int>> adj(n);
  for (const auto& [a, b] : tree_edges) {
    adj[static_cast<std::size_t>(a)].push_back(b);
    adj[static_cast<std::size_t>(b)].push_back(a);
  }
  std::vector<char> seen(n, 0);
  std::vector<int> stack{0};
  seen[0] = 1;
  std::size_t reached = 1;
  while (!stack.empty()) {
    const int v = stack.back();
    stack.pop_back();
    for (int w : adj[static_cast<std::size_t>(v)])
      if (!seen[static_cast<std::size_t>(w)]) {
        seen[static_cast<std::size_t>(w)] = 1;
        ++reached;
        stack.push_back(w);
      }
  }
  return reached == n;
}

}  // namespace detail

/// Collects every defect instead of stopping at the first one.
template <typename S>
EmbeddingReport validate_embedding(const IsingProblem<S>& problem, const HardwareGraph& hw,
                                   const MinorEmbedding& emb) {
  problem.validate();
  hw.validate();
  EmbeddingReport report;
  auto flag = [&report](EmbeddingDefect kind, std::string detail) {
    report.issues.push_back(EmbeddingIssue{kind, std::move(detail)});
  };

  if (emb.chains.size() != static_cast<std::size_t>(problem.num_qubits))
    flag(EmbeddingDefect::chain_count_mismatch,
         "embedding has " + std::to_string(emb.chains.size()) + " chains for " +
             std::to_string(problem.num_qubits) + " qubits");

  std::vector<int> owner(static_cast<std::size_t>(hw.num_nodes), -1);
  for (std::size_t i = 0; i < emb.chains.size(); ++i) {
    const auto& chain = emb.chains[i];
    if (chain.empty()) {
      flag(EmbeddingDefect::empty_chain, "chain " + std::to_string(i) + " is empty");
      continue;
    }
    bool in_range = true;
    for (int p : chain) {
      if (p < 0 || p >= hw.num_nodes) {
        flag(EmbeddingDefect::node_out_of_range,
             "chain " + std::to_string(i) + " uses node " + std::to_string(p));
        in_range = false;
        continue;
      }
      if (owner[static_cast<std::size_t>(p)] == static_cast<int>(i)) {
        flag(EmbeddingDefect::node_shared,
             "node " + std::to_string(p) + " listed twice in chain " + std::to_string(i));
      } else if (owner[static_cast<std::size_t>(p)] >= 0) {
        flag(EmbeddingDefect::node_shared,
             "node " + std::to_string(p) + " shared by chains " +
                 std::to_string(owner[static_cast<std::size_t>(p)]) + " and " + std::to_string(i));
      } else {
        owner[static_cast<std::size_t>(p)] = static_cast<int>(i);
      }
    }
    if (!in_range) continue;

    std::vector<int> nodes(chain);
    std::sort(nodes.begin(), nodes.end());
    std::vector<std::pair<int, int>> tree_edges;  // local indices
    for (const auto& [p, q] : hw.edges) {
      const auto ip = std::lower_bound(nodes.begin(), nodes.end(), p);
      const auto iq = std::lower_bound(nodes.begin(), nodes.end(), q);
      if (ip != nodes.end() && *ip == p && iq != nodes.end() && *iq == q)
        tree_edges.emplace_back(static_cast<int>(ip - nodes.begin()),
                                static_cast<int>(iq - nodes.begin()));
    }
    if (!detail::chain_is_tree(nodes, tree_edges))
      flag(EmbeddingDefect::chain_not_tree,
           "chain " + std::to_string(i) + " does not induce a tree");
  }

  // Edge placements.
  std::vector<std::pair<int, int>> problem_edges;
  for (const auto& c : problem.couplers) problem_edges.emplace_back(c.i, c.j);
  std::sort(problem_edges.begin(), problem_edges.end());

  std::vector<std::pair<int, int>> mapped;
  for (const auto& pl : emb.edge_map) {
    const std::pair<int, int> key{std::min(pl.i, pl.j), std::max(pl.i, pl.j)};
    if (!std::binary_search(problem_edges.begin(), problem_edges.end(), key)) {
      flag(EmbeddingDefect::logical_edge_unknown,
           "edge map entry (" + std::to_string(pl.i) + "," + std::to_string(pl.j) +
               ") is not a problem coupler");
      continue;
    }
    if (std::find(mapped.begin(), mapped.end(), key) != mapped.end()) {
      flag(EmbeddingDefect::logical_edge_duplicate,
           "coupler (" + std::to_string(key.first) + "," + std::to_string(key.second) +
               ") mapped more than once");
      continue;
    }
    mapped.push_back(key);
    auto inside = [&emb](int qubit, int node) {
      if (qubit < 0 || qubit >= static_cast<int>(emb.chains.size())) return false;
      const auto& c = emb.chains[static_cast<std::size_t>(qubit)];
      return std::find(c.begin(), c.end(), node) != c.end();
    };
    if (!inside(pl.i, pl.tau_ij))
      flag(EmbeddingDefect::endpoint_outside_chain,
           "node " + std::to_string(pl.tau_ij) + " is not in chain " + std::to_string(pl.i));
    if (!inside(pl.j, pl.tau_ji))
      flag(EmbeddingDefect::endpoint_outside_chain,
           "node " + std::to_string(pl.tau_ji) + " is not in chain " + std::to_string(pl.j));
    if (!hw.has_edge(pl.tau_ij, pl.tau_ji))
      flag(EmbeddingDefect::edge_not_in_hardware,
           "no hardware edge between nodes " + std::to_string(pl.tau_ij) + " and " +
               std::to_string(pl.tau_ji));
  }
  for (const auto& pe : problem_edges)
    if (std::find(mapped.begin(), mapped.end(), pe) == mapped.end())
      flag(EmbeddingDefect::logical_edge_unmapped,
           "coupler (" + std::to_string(pe.first) + "," + std::to_string(pe.second) +
               ") has no edge map entry");

  return report;
}

/// Per-chain geometry and coupling data, precomputed once.
template <typename S>
struct ChainLayout {
  std::vector<int> nodes;                                // ascending physical ids
  std::vector<std::pair<int, int>> tree_edges;           // local indices into nodes
  std::vector<int> tree_degree;                          // per local node
  int leaf_count = 1;                                    // 1 for a singleton chain
  std::vector<std::vector<std::pair<int, S>>> landings;  // per local node: (neighbour j, J_ij)
  std::vector<S> external_abs;                           // per local node: sum |J_ij| landing there
  S external_total{};                                    // sum over the chain = sum_j |J_ij|

  int local_index(int physical) const {
    const auto it = std::lower_bound(nodes.begin(), nodes.end(), physical);
    return it != nodes.end() && *it == physical ? static_cast<int>(it - nodes.begin()) : -1;
  }

  int size() const { return static_cast<int>(nodes.size()); }
};

/// Validated bundle of problem + hardware + embedding with cached layouts.
/// Construction rejects any embedding defect, so downstream code can assume
/// tree chains and a complete edge map.
template <typename S>
class EmbeddingContext {
 public:
  static EmbeddingContext create(IsingProblem<S> problem, HardwareGraph hw, MinorEmbedding emb) {
    const EmbeddingReport report = validate_embedding(problem, hw, emb);
    if (!report.ok()) throw validation_error("invalid embedding: " + report.describe());
    EmbeddingContext ctx;
    ctx.problem_ = std::move(problem);
    ctx.hw_ = std::move(hw);
    ctx.emb_ = std::move(emb);
    ctx.build_layouts();
    return ctx;
  }

  const IsingProblem<S>& problem() const { return problem_; }
  const HardwareGraph& hardware() const { return hw_; }
  const MinorEmbedding& embedding() const { return emb_; }
  const ChainLayout<S>& layout(int qubit) const {
    return layouts_[static_cast<std::size_t>(qubit)];
  }
  int num_qubits() const { return problem_.num_qubits; }

  // Chain owning a physical node, -1 for unused nodes.
  int chain_of(int node) const { return owner_[static_cast<std::size_t>(node)]; }

 private:
  EmbeddingContext() = default;

  void build_layouts() {
    layouts_.resize(static_cast<std::size_t>(problem_.num_qubits));
    owner_.assign(static_cast<std::size_t>(hw_.num_nodes), -1);
    for (int i = 0; i < problem_.num_qubits; ++i) {
      auto& lay = layouts_[static_cast<std::size_t>(i)];
      lay.nodes = emb_.chains[static_cast<std::size_t>(i)];
      std::sort(lay.nodes.begin(), lay.nodes.end());
      for (int p : lay.nodes) owner_[static_cast<std::size_t>(p)] = i;
      lay.tree_degree.assign(lay.nodes.size(), 0);
      for (const auto& [p, q] : hw_.edges) {
        const int a = lay.local_index(p);
        const int b = lay.local_index(q);
        if (a >= 0 && b >= 0) {
          lay.tree_edges.emplace_back(a, b);
          ++lay.tree_degree[static_cast<std::size_t>(a)];
          ++lay.tree_degree[static_cast<std::size_t>(b)];
        }
      }
      lay.leaf_count = 0;
      for (int d : lay.tree_degree)
        if (d <= 1) ++lay.leaf_count;
      lay.landings.assign(lay.nodes.size(), {});
      lay.external_abs.assign(lay.nodes.size(), S(0));
      lay.external_total = S(0);
    }
    for (const auto& pl : emb_.edge_map) {
      S value{};
      for (const auto& c : problem_.couplers)
        if (c.i == std::min(pl.i, pl.j) && c.j == std::max(pl.i, pl.j)) value = c.value;
      auto land = [this, &value](int qubit, int node, int other) {
        auto& lay = layouts_[static_cast<std::size_t>(qubit)];
        const int k = lay.local_index(node);
        lay.landings[static_cast<std::size_t>(k)].emplace_back(other, value);
        lay.external_abs[static_cast<std::size_t>(k)] += scalar_abs(value);
        lay.external_total += scalar_abs(value);
      };
      land(pl.i, pl.tau_ij, pl.j);
      land(pl.j, pl.tau_ji, pl.i);
    }
    // Deterministic landing order regardless of edge_map order.
    for (auto& lay : layouts_)
      for (auto& lx : lay.landings)
        std::sort(lx.begin(), lx.end(),
                  [](const auto& a, const auto& b) { return a.first < b.first; });
  }

  IsingProblem<S> problem_;
  HardwareGraph hw_;
  MinorEmbedding emb_;
  std::vector<ChainLayout<S>> layouts_;
  std::vector<int> owner_;
};

/// Per chain, per physical node: total magnitude of logical couplers routed
/// through that node.  Summing a chain's entries gives sum_j |J_ij|.
template <typename S>
std::vector<std::vector<S>> external_field_sums(const EmbeddingContext<S>& ctx) {
  std::vector<std::vector<S>> out;
  out.reserve(static_cast<std::size_t>(ctx.num_qubits()));
  for (int i = 0; i < ctx.num_qubits(); ++i) out.push_back(ctx.layout(i).external_abs);
  return out;
}

enum class DistributionStrategy { uniform, choi2, single, custom };

inline const char* to_string(DistributionStrategy s) {
  switch (s) {
    case DistributionStrategy::uniform: return "uniform";
    case DistributionStrategy::choi2: return "choi2";
    case DistributionStrategy::single: return "single";
    case DistributionStrategy::custom: return "custom";
  }
  return "?";
}

/// Split of each logical field h_i over its chain nodes (aligned with
/// ChainLayout::nodes).  Every strategy preserves sum_k values[i][k] = h_i.
template <typename S>
struct HFieldDistribution {
  DistributionStrategy strategy = DistributionStrategy::uniform;
  std::vector<std::vector<S>> values;
  std::vector<std::uint8_t> fell_back;  // per qubit: strategy prerequisites failed,
                                        // uniform split used instead

  const std::vector<S>& chain(int qubit) const {
    return values[static_cast<std::size_t>(qubit)];
  }
};

template <typename S>
HFieldDistribution<S> make_uniform_distribution(const EmbeddingContext<S>& ctx) {
  HFieldDistribution<S> dist;
  dist.strategy = DistributionStrategy::uniform;
  dist.fell_back.assign(static_cast<std::size_t>(ctx.num_qubits()), 0);
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto& lay = ctx.layout(i);
    const S share = ctx.problem().fields[static_cast<std::size_t>(i)] / S(lay.size());
    dist.values.emplace_back(lay.nodes.size(), share);
  }
  return dist;
}

/// Leaf-weighted split: each leaf node carries its external coupling mass
/// minus an equal share of the slack C_i = sum|J_ij| - |h_i|; interior nodes
/// carry exactly their external mass.  Signs follow sgn(h_i) with
/// sgn(0) = +1.  Requires C_i >= 0; chains where C_i < 0 fall back to the
/// uniform split and are flagged.
template <typename S>
HFieldDistribution<S> make_choi2_distribution(const EmbeddingContext<S>& ctx) {
  HFieldDistribution<S> dist;
  dist.strategy = DistributionStrategy::choi2;
  dist.fell_back.assign(static_cast<std::size_t>(ctx.num_qubits()), 0);
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto& lay = ctx.layout(i);
    const S& h = ctx.problem().fields[static_cast<std::size_t>(i)];
    const S slack = lay.external_total - scalar_abs(h);
    if (slack < 0) {
      dist.fell_back[static_cast<std::size_t>(i)] = 1;
      dist.values.emplace_back(lay.nodes.size(), h / S(lay.size()));
      continue;
    }
    const int sign = sgn_or_positive(h);
    const S leaf_share = slack / S(lay.leaf_count);
    std::vector<S> vals;
    vals.reserve(lay.nodes.size());
    for (std::size_t k = 0; k < lay.nodes.size(); ++k) {
      S v = lay.external_abs[k];
      if (lay.tree_degree[k] <= 1) v -= leaf_share;
      if (sign < 0) v = -v;
      vals.push_back(std::move(v));
    }
    dist.values.push_back(std::move(vals));
  }
  return dist;
}

/// All of h_i on one designated node per chain (default: the lowest id).
template <typename S>
HFieldDistribution<S> make_single_node_distribution(const EmbeddingContext<S>& ctx,
                                                    const std::vector<int>& roots = {}) {
  if (!roots.empty() && roots.size() != static_cast<std::size_t>(ctx.num_qubits()))
    throw validation_error("root list length does not match qubit count");
  HFieldDistribution<S> dist;
  dist.strategy = DistributionStrategy::single;
  dist.fell_back.assign(static_cast<std::size_t>(ctx.num_qubits()), 0);
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto& lay = ctx.layout(i);
    int local = 0;
    if (!roots.empty()) {
      local = lay.local_index(roots[static_cast<std::size_t>(i)]);
      if (local < 0)
        throw validation_error("root node " + std::to_string(roots[static_cast<std::size_t>(i)]) +
                               " is not in chain " + std::to_string(i));
    }
    std::vector<S> vals(lay.nodes.size(), S(0));
    vals[static_cast<std::size_t>(local)] = ctx.problem().fields[static_cast<std::size_t>(i)];
    dist.values.push_back(std::move(vals));
  }
  return dist;
}

/// Caller-provided values; each chain must sum exactly to its logical field
/// (small relative tolerance in floating point mode).
template <typename S>
HFieldDistribution<S> make_custom_distribution(const EmbeddingContext<S>& ctx,
                                               std::vector<std::vector<S>> values) {
  if (values.size() != static_cast<std::size_t>(ctx.num_qubits()))
    throw validation_error("distribution has wrong number of chains");
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto& lay = ctx.layout(i);
    const auto& vals = values[static_cast<std::size_t>(i)];
    if (vals.size() != lay.nodes.size())
      throw validation_error("distribution for chain " + std::to_string(i) +
                             " has wrong length");
    S sum(0);
    for (const auto& v : vals) sum += v;
    const S& h = ctx.problem().fields[static_cast<std::size_t>(i)];
    bool ok;
    if constexpr (is_exact_scalar_v<S>) {
      ok = sum == h;
    } else {
      const S scale = std::max(S(1), scalar_abs(h));
      ok = scalar_abs(sum - h) <= S(1e-9) * scale;
    }
    if (!ok)
      throw constraint_error("distribution for chain " + std::to_string(i) +
                             " does not sum to its logical field");
  }
  HFieldDistribution<S> dist;
  dist.strategy = DistributionStrategy::custom;
  dist.fell_back.assign(static_cast<std::size_t>(ctx.num_qubits()), 0);
  dist.values = std::move(values);
  return dist;
}

/// Physical problem produced by an embedding: distributed fields, logical
/// couplers on their mapped hardware edges, ferromagnetic couplers of
/// strength F_i on every chain tree edge.
template <typename S>
struct EmbeddedIsing {
  IsingProblem<S> problem;
  std::vector<S> chain_strengths;                          // per logical qubit
  std::vector<std::vector<std::pair<int, int>>> chain_edges;  // physical pairs per qubit
  S chain_offset{};  // energy all chain couplers contribute when every chain is intact
};

namespace detail {

template <typename S>
EmbeddedIsing<S> build_embedded_impl(const EmbeddingContext<S>& ctx,
                                     const HFieldDistribution<S>& dist,
                                     const std::vector<S>& chain_strengths, bool enforce_sign) {
  if (chain_strengths.size() != static_cast<std::size_t>(ctx.num_qubits()))
    throw validation_error("chain strength list length does not match qubit count");
  if (dist.values.size() != static_cast<std::size_t>(ctx.num_qubits()))
    throw validation_error("distribution does not match embedding");

  EmbeddedIsing<S> out;
  out.problem = IsingProblem<S>(ctx.hardware().num_nodes);
  out.chain_strengths = chain_strengths;
  out.chain_edges.resize(static_cast<std::size_t>(ctx.num_qubits()));
  out.chain_offset = S(0);

  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto& lay = ctx.layout(i);
    const S& f = chain_strengths[static_cast<std::size_t>(i)];
    if (lay.size() > 1) {
      if (enforce_sign && !(f < 0))
        throw constraint_error("chain strength for qubit " + std::to_string(i) +
                               " must be negative (ferromagnetic)");
      for (const auto& [a, b] : lay.tree_edges) {
        const int p = lay.nodes[static_cast<std::size_t>(a)];
        const int q = lay.nodes[static_cast<std::size_t>(b)];
        out.problem.add_coupler(p, q, f);
        out.chain_edges[static_cast<std::size_t>(i)].emplace_back(std::min(p, q),
                                                                  std::max(p, q));
        out.chain_offset += f;
      }
      std::sort(out.chain_edges[static_cast<std::size_t>(i)].begin(),
                out.chain_edges[static_cast<std::size_t>(i)].end());
    }
    for (std::size_t k = 0; k < lay.nodes.size(); ++k)
      out.problem.fields[static_cast<std::size_t>(lay.nodes[k])] = dist.values[static_cast<std::size_t>(i)][k];
  }

  for (const auto& pl : ctx.embedding().edge_map) {
    S value{};
    for (const auto& c : ctx.problem().couplers)
      if (c.i == std::min(pl.i, pl.j) && c.j == std::max(pl.i, pl.j)) value = c.value;
    out.problem.add_coupler(pl.tau_ij, pl.tau_ji, value);
  }

  std::sort(out.problem.couplers.begin(), out.problem.couplers.end(),
            [](const auto& a, const auto& b) {
              return std::pair(a.i, a.j) < std::pair(b.i, b.j);
            });
  out.problem.validate();
  return out;
}

}  // namespace detail

/// Chain strengths must be ferromagnetic (negative) for every multi-node
/// chain; singleton chains ignore their entry.
template <typename S>
EmbeddedIsing<S> build_embedded(const EmbeddingContext<S>& ctx, const HFieldDistribution<S>& dist,
                                const std::vector<S>& chain_strengths) {
  return detail::build_embedded_impl(ctx, dist, chain_strengths, /*enforce_sign=*/true);
}

/// Same construction with the ferromagnetic sign check disabled; used when
/// deliberately weakening or zeroing chains to observe them break.
template <typename S>
EmbeddedIsing<S> build_embedded_any_sign(const EmbeddingContext<S>& ctx,
                                         const HFieldDistribution<S>& dist,
                                         const std::vector<S>& chain_strengths) {
  return detail::build_embedded_impl(ctx, dist, chain_strengths, /*enforce_sign=*/false);
}

/// Total chain coupling magnitude spent by the embedding: sum of |F_i| over
/// all chain tree edges.
template <typename S>
S minor_embedding_energy(const EmbeddedIsing<S>& embedded) {
  S total(0);
  for (std::size_t i = 0; i < embedded.chain_edges.size(); ++i)
    total += S(embedded.chain_edges[i].size()) * scalar_abs(embedded.chain_strengths[i]);
  return total;
}

/// Physical configuration representing a logical one: every chain node copies
/// its logical spin, unused hardware nodes sit at +1.
template <typename S>
SpinConfig lift_config(const EmbeddingContext<S>& ctx, const SpinConfig& logical) {
  logical.check_valid(ctx.num_qubits());
  SpinConfig phys;
  phys.spins.assign(static_cast<std::size_t>(ctx.hardware().num_nodes), 1);
  for (int i = 0; i < ctx.num_qubits(); ++i)
    for (int p : ctx.layout(i).nodes)
      phys.spins[static_cast<std::size_t>(p)] = logical.spins[static_cast<std::size_t>(i)];
  return phys;
}

}  // namespace chainbound
