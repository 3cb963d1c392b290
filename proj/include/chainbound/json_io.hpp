#pragma once

#include <json.hpp>

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "graph.hpp"
#include "ising.hpp"
#include "jsp.hpp"
#include "oracle.hpp"
#include "scalar.hpp"
#include "solver.hpp"

namespace chainbound {

using nlohmann::json;

// ---------------------------------------------------------------------------
// Scalars.  Exact mode accepts integers, floats (converted exactly from
// their binary value) and "p/q" strings; it prints integers as JSON numbers
// when they fit and "p/q" strings otherwise, so round-trips never lose
// precision.

template <typename S>
S scalar_from_json(const json& j) {
  try {
    if (j.is_number_integer()) return S(static_cast<std::int64_t>(j.get<std::int64_t>()));
    if (j.is_number_unsigned()) return S(static_cast<std::int64_t>(j.get<std::uint64_t>()));
    if (j.is_number_float()) return S(j.get<double>());
    if (j.is_string()) {
      const std::string s = j.get<std::string>();
      if constexpr (is_exact_scalar_v<S>) {
        return rational_from_string(s);
      } else {
        const auto slash = s.find('/');
        if (slash == std::string::npos) return std::stod(s);
        return std::stod(s.substr(0, slash)) / std::stod(s.substr(slash + 1));
      }
    }
  } catch (const std::exception&) {
    throw io_error("cannot parse number from " + j.dump());
  }
  throw io_error("cannot parse number from " + j.dump());
}

template <typename S>
json scalar_to_json(const S& v) {
  if constexpr (is_exact_scalar_v<S>) {
    const auto& num = boost::multiprecision::numerator(v);
    const auto& den = boost::multiprecision::denominator(v);
    if (den == 1 && num >= std::numeric_limits<std::int64_t>::min() &&
        num <= std::numeric_limits<std::int64_t>::max())
      return json(num.template convert_to<std::int64_t>());
    return json(rational_to_string(v));
  } else {
    return json(v);
  }
}

namespace detail {

inline const json& require(const json& j, const char* key) {
  if (!j.is_object() || !j.contains(key))
    throw io_error(std::string("missing key \"") + key + "\"");
  return j.at(key);
}

inline int require_int(const json& j) {
  if (!j.is_number_integer() && !j.is_number_unsigned())
    throw io_error("expected an integer, got " + j.dump());
  return j.get<int>();
}

}  // namespace detail

// ---------------------------------------------------------------------------
// Problems: {"num_qubits": N, "h": [..], "couplers": [[i, j, J], ..]}

template <typename S>
IsingProblem<S> problem_from_json(const json& j) {
  IsingProblem<S> p(detail::require_int(detail::require(j, "num_qubits")));
  const json& h = detail::require(j, "h");
  if (!h.is_array() || h.size() != static_cast<std::size_t>(p.num_qubits))
    throw io_error("\"h\" must be an array of num_qubits entries");
  for (std::size_t i = 0; i < h.size(); ++i) p.fields[i] = scalar_from_json<S>(h[i]);
  const json& couplers = detail::require(j, "couplers");
  if (!couplers.is_array()) throw io_error("\"couplers\" must be an array");
  for (const json& c : couplers) {
    if (!c.is_array() || c.size() != 3) throw io_error("coupler entries are [i, j, J]");
    p.add_coupler(detail::require_int(c[0]), detail::require_int(c[1]), scalar_from_json<S>(c[2]));
  }
  p.validate();
  return p;
}

template <typename S>
json problem_to_json(const IsingProblem<S>& p) {
  json h = json::array();
  for (const auto& v : p.fields) h.push_back(scalar_to_json(v));
  json couplers = json::array();
  for (const auto& c : p.couplers)
    couplers.push_back(json::array({c.i, c.j, scalar_to_json(c.value)}));
  return json{{"num_qubits", p.num_qubits}, {"h", std::move(h)}, {"couplers", std::move(couplers)}};
}

// ---------------------------------------------------------------------------
// Hardware: {"num_nodes": M, "edges": [[p, q], ..]}

inline HardwareGraph hardware_from_json(const json& j) {
  HardwareGraph hw(detail::require_int(detail::require(j, "num_nodes")));
  const json& edges = detail::require(j, "edges");
  if (!edges.is_array()) throw io_error("\"edges\" must be an array");
  for (const json& e : edges) {
    if (!e.is_array() || e.size() != 2) throw io_error("edge entries are [p, q]");
    hw.add_edge(detail::require_int(e[0]), detail::require_int(e[1]));
  }
  hw.validate();
  return hw;
}

inline json hardware_to_json(const HardwareGraph& hw) {
  json edges = json::array();
  for (const auto& [p, q] : hw.edges) edges.push_back(json::array({p, q}));
  return json{{"num_nodes", hw.num_nodes}, {"edges", std::move(edges)}};
}

// ---------------------------------------------------------------------------
// Embeddings: {"chains": [[p, ..], ..], "edge_map": [[i, j, tau_ij, tau_ji], ..]}

inline MinorEmbedding embedding_from_json(const json& j) {
  MinorEmbedding emb;
  const json& chains = detail::require(j, "chains");
  if (!chains.is_array()) throw io_error("\"chains\" must be an array");
  for (const json& chain : chains) {
    if (!chain.is_array()) throw io_error("each chain is an array of node ids");
    std::vector<int> nodes;
    for (const json& p : chain) nodes.push_back(detail::require_int(p));
    emb.chains.push_back(std::move(nodes));
  }
  const json& edge_map = detail::require(j, "edge_map");
  if (!edge_map.is_array()) throw io_error("\"edge_map\" must be an array");
  for (const json& e : edge_map) {
    if (!e.is_array() || e.size() != 4)
      throw io_error("edge map entries are [i, j, tau_ij, tau_ji]");
    emb.edge_map.push_back(MinorEmbedding::EdgePlacement{
        detail::require_int(e[0]), detail::require_int(e[1]), detail::require_int(e[2]),
        detail::require_int(e[3])});
  }
  return emb;
}

inline json embedding_to_json(const MinorEmbedding& emb) {
  json chains = json::array();
  for (const auto& chain : emb.chains) chains.push_back(chain);
  json edge_map = json::array();
  for (const auto& pl : emb.edge_map)
    edge_map.push_back(json::array({pl.i, pl.j, pl.tau_ij, pl.tau_ji}));
  return json{{"chains", std::move(chains)}, {"edge_map", std::move(edge_map)}};
}

// ---------------------------------------------------------------------------
// Spin configurations: arrays of +-1.

inline SpinConfig config_from_json(const json& j) {
  if (!j.is_array()) throw io_error("configuration must be an array of +-1");
  SpinConfig c;
  for (const json& v : j) {
    const int s = detail::require_int(v);
    if (s != 1 && s != -1) throw io_error("spins must be +-1");
    c.spins.push_back(static_cast<std::int8_t>(s));
  }
  return c;
}

inline json config_to_json(const SpinConfig& c) {
  json out = json::array();
  for (auto s : c.spins) out.push_back(static_cast<int>(s));
  return out;
}

// ---------------------------------------------------------------------------
// Bound reports, one object per qubit:
// {"C":, "choi1":, "choi2":, "tight":, "witness": {"subset": [..], "boundary": n},
//  "certified":, "optimized": {"bound":, "h_dist": [..]}}

template <typename S>
json bound_report_to_json(const std::vector<QubitBoundReport<S>>& reports) {
  json out = json::array();
  for (const auto& r : reports) {
    json entry{{"qubit", r.qubit},
               {"C", scalar_to_json(r.c)},
               {"locally_determinable", r.locally_determinable},
               {"choi1", scalar_to_json(r.choi1)},
               {"choi2", r.choi2 ? scalar_to_json(*r.choi2) : json()},
               {"leaves", r.leaf_count},
               {"fell_back", r.distribution_fell_back},
               {"tight", scalar_to_json(r.tight)},
               {"certified", r.certified}};
    if (r.witness) {
      entry["witness"] =
          json{{"subset", r.witness->subset_nodes}, {"boundary", r.witness->boundary_size}};
    } else {
      entry["witness"] = json();
    }
    if (r.optimized) {
      json dist = json::array();
      for (const auto& v : r.optimized->values) dist.push_back(scalar_to_json(v));
      entry["optimized"] = json{{"bound", scalar_to_json(r.optimized->bound)},
                                {"h_dist", std::move(dist)}};
    }
    out.push_back(std::move(entry));
  }
  return out;
}

// ---------------------------------------------------------------------------
// Field distributions: {"strategy": "..", "values": [[..] per chain],
//                       "fell_back": [bool per chain]}

template <typename S>
json distribution_to_json(const HFieldDistribution<S>& dist) {
  json values = json::array();
  for (const auto& chain : dist.values) {
    json row = json::array();
    for (const auto& v : chain) row.push_back(scalar_to_json(v));
    values.push_back(std::move(row));
  }
  json fell_back = json::array();
  for (auto f : dist.fell_back) fell_back.push_back(f != 0);
  return json{{"strategy", to_string(dist.strategy)},
              {"values", std::move(values)},
              {"fell_back", std::move(fell_back)}};
}

/// Custom per-chain field values as a bare matrix: [[v, ..] per chain].
template <typename S>
std::vector<std::vector<S>> distribution_values_from_json(const json& j) {
  if (!j.is_array()) throw io_error("custom distribution must be an array of per-chain arrays");
  std::vector<std::vector<S>> values;
  for (const json& row : j) {
    if (!row.is_array()) throw io_error("custom distribution must be an array of per-chain arrays");
    std::vector<S> chain;
    for (const json& v : row) chain.push_back(scalar_from_json<S>(v));
    values.push_back(std::move(chain));
  }
  return values;
}

template <typename S>
json admissibility_to_json(const AdmissibilityReport<S>& rep) {
  json violations = json::array();
  for (const auto& v : rep.violations)
    violations.push_back(json{{"qubit", v.qubit},
                              {"subset", v.subset_nodes},
                              {"slack", scalar_to_json(v.slack)}});
  return json{{"admissible", rep.admissible}, {"violations", std::move(violations)}};
}

template <typename S>
json verify_to_json(const NoDomainWallResult<S>& res) {
  json walls = json::array();
  for (const auto& w : res.walls)
    walls.push_back(json{{"qubit", w.qubit},
                         {"subset", w.subset_nodes},
                         {"positive", w.positive},
                         {"config", config_to_json(w.witness_config)}});
  return json{{"passed", res.passed},
              {"energy_equal", res.energy_equal},
              {"embedded_min", scalar_to_json(res.embedded_min)},
              {"logical_min", scalar_to_json(res.logical_min)},
              {"chain_offset", scalar_to_json(res.chain_offset)},
              {"ground_states", res.ground_state_count},
              {"walls", std::move(walls)}};
}

template <typename S>
json probe_to_json(const TightnessProbe<S>& probe) {
  json assignment = json::array();
  for (const auto& [neighbour, spin] : probe.assignment)
    assignment.push_back(json::array({neighbour, static_cast<int>(spin)}));
  json out{{"found", probe.found}, {"strength", scalar_to_json(probe.strength)}};
  if (probe.found) {
    out["assignment"] = std::move(assignment);
    out["chain_config"] = config_to_json(probe.chain_config);
  }
  return out;
}

// ---------------------------------------------------------------------------
// Job-shop instances: {"machines": [[..]], "durations": [[..]],
//                      "timespan": T, "energy_scale": E}

template <typename S>
JspInstance<S> jsp_from_json(const json& j) {
  JspInstance<S> inst;
  auto matrix = [](const json& m, const char* name) {
    if (!m.is_array()) throw io_error(std::string("\"") + name + "\" must be a matrix");
    std::vector<std::vector<int>> rows;
    for (const json& row : m) {
      if (!row.is_array()) throw io_error(std::string("\"") + name + "\" must be a matrix");
      std::vector<int> r;
      for (const json& v : row) r.push_back(detail::require_int(v));
      rows.push_back(std::move(r));
    }
    return rows;
  };
  inst.machine = matrix(detail::require(j, "machines"), "machines");
  inst.duration = matrix(detail::require(j, "durations"), "durations");
  inst.timespan = detail::require_int(detail::require(j, "timespan"));
  inst.energy_scale = j.contains("energy_scale") ? scalar_from_json<S>(j.at("energy_scale")) : S(1);
  inst.validate();
  return inst;
}

inline json schedule_to_json(const JspSchedule& sched) {
  json starts = json::array();
  for (const auto& row : sched.starts) starts.push_back(row);
  return json{{"starts", std::move(starts)}, {"makespan", sched.makespan}};
}

inline json jsp_violations_to_json(const JspViolations& v) {
  json one_hot = json::array(), precedence = json::array(), deadline = json::array(),
       conflict = json::array();
  for (const auto& x : v.one_hot)
    one_hot.push_back(json{{"job", x.n}, {"op", x.k}, {"starts", x.count}});
  for (const auto& x : v.precedence)
    precedence.push_back(json{{"job", x.n}, {"op", x.k}, {"t", x.t}, {"t_next", x.t_next}});
  for (const auto& x : v.deadline)
    deadline.push_back(json{{"job", x.n}, {"op", x.k}, {"t", x.t}});
  for (const auto& x : v.conflict)
    conflict.push_back(json{{"machine", x.m},
                            {"first", json::array({x.n1, x.k1, x.t1})},
                            {"second", json::array({x.n2, x.k2, x.t2})}});
  return json{{"one_hot", std::move(one_hot)},
              {"precedence", std::move(precedence)},
              {"deadline", std::move(deadline)},
              {"conflict", std::move(conflict)}};
}

}  // namespace chainbound
