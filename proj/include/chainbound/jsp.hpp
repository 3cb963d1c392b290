#pragma once

#include <algorithm>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "errors.hpp"
#include "ising.hpp"
#include "scalar.hpp"

namespace chainbound {

/// Job-shop instance: N jobs of K operations each, executed in order; op
/// (n,k) runs for duration[n][k] time units on machine[n][k].  Time is
/// discretised into slots 0..timespan-1 and every operation must finish by
/// timespan.  energy_scale multiplies the whole penalty Hamiltonian.
template <typename S>
struct JspInstance {
  std::vector<std::vector<int>> machine;
  std::vector<std::vector<int>> duration;
  int timespan = 0;
  S energy_scale{1};

  int jobs() const { return static_cast<int>(machine.size()); }
  int ops_per_job() const { return machine.empty() ? 0 : static_cast<int>(machine[0].size()); }

  int num_machines() const {
    int mx = -1;
    for (const auto& row : machine)
      for (int m : row) mx = std::max(mx, m);
    return mx + 1;
  }

  void validate() const {
    if (timespan < 1) throw validation_error("timespan must be at least 1");
    if (!(energy_scale > 0)) throw validation_error("energy scale must be positive");
    if (machine.empty() || machine[0].empty()) throw validation_error("instance has no operations");
    if (duration.size() != machine.size()) throw validation_error("matrix shapes differ");
    const std::size_t k = machine[0].size();
    for (std::size_t n = 0; n < machine.size(); ++n) {
      if (machine[n].size() != k || duration[n].size() != k)
        throw validation_error("matrices must be rectangular");
      for (int m : machine[n])
        if (m < 0) throw validation_error("negative machine index");
      for (int d : duration[n])
        if (d < 0) throw validation_error("negative duration");
    }
  }
};

/// Time-indexed binary encoding: x_{n,k;t} = 1 means op (n,k) starts at slot
/// t.  The penalty QUBO (one-hot starts, in-job precedence, deadline,
/// machine conflicts) is converted exactly to an Ising problem via
/// x = (1+s)/2; ising energy + offset reproduces the QUBO value.
template <typename S>
struct JspEncoding {
  JspInstance<S> instance;
  int num_vars = 0;
  IsingProblem<S> problem;
  S offset{};

  int var_index(int n, int k, int t) const {
    return (n * instance.ops_per_job() + k) * instance.timespan + t;
  }
};

template <typename S>
JspEncoding<S> encode(const JspInstance<S>& inst) {
  inst.validate();
  const int n_jobs = inst.jobs();
  const int n_ops = inst.ops_per_job();
  const int span = inst.timespan;
  const long long var_count = 1LL * n_jobs * n_ops * span;
  if (var_count > 1'000'000)
    throw validation_error("encoding would need " + std::to_string(var_count) + " variables");

  JspEncoding<S> enc;
  enc.instance = inst;
  enc.num_vars = static_cast<int>(var_count);

  // Integer QUBO accumulators (the scale is applied at the end).
  std::vector<long long> linear(static_cast<std::size_t>(var_count), 0);
  std::map<std::pair<int, int>, long long> quad;
  long long constant = 0;
  auto add_quad = [&quad](int a, int b, long long w) {
    if (a > b) std::swap(a, b);
    quad[{a, b}] += w;
  };
  auto vid = [&enc](int n, int k, int t) { return enc.var_index(n, k, t); };

  for (int n = 0; n < n_jobs; ++n) {
    for (int k = 0; k < n_ops; ++k) {
      // One-hot start: (sum_t x - 1)^2.
      for (int t = 0; t < span; ++t) linear[static_cast<std::size_t>(vid(n, k, t))] -= 1;
      for (int t = 0; t < span; ++t)
        for (int u = t + 1; u < span; ++u) add_quad(vid(n, k, t), vid(n, k, u), 2);
      constant += 1;

      // Precedence to the next op of the same job: forbid t' < t + tau.
      if (k + 1 < n_ops) {
        const int tau = inst.duration[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        for (int t = 0; t < span; ++t)
          for (int u = 0; u < span; ++u)
            if (t + tau > u) add_quad(vid(n, k, t), vid(n, k + 1, u), 1);
      }
    }
    // Deadline on the last op of the job.
    {
      const int k = n_ops - 1;
      const int tau = inst.duration[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
      for (int t = 0; t < span; ++t)
        if (t + tau > span) linear[static_cast<std::size_t>(vid(n, k, t))] += 1;
    }
  }

  // Machine conflicts: for each machine, every pair of distinct ops assigned
  // to it may neither overlap nor (unless a duration is zero) start together.
  const int machines = inst.num_machines();
  for (int m = 0; m < machines; ++m) {
    std::vector<std::pair<int, int>> ops;
    for (int n = 0; n < n_jobs; ++n)
      for (int k = 0; k < n_ops; ++k)
        if (inst.machine[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] == m)
          ops.emplace_back(n, k);
    for (std::size_t a = 0; a < ops.size(); ++a)
      for (std::size_t b = a + 1; b < ops.size(); ++b) {
        const auto [n1, k1] = ops[a];
        const auto [n2, k2] = ops[b];
        const int tau1 = inst.duration[static_cast<std::size_t>(n1)][static_cast<std::size_t>(k1)];
        const int tau2 = inst.duration[static_cast<std::size_t>(n2)][static_cast<std::size_t>(k2)];
        for (int t = 0; t < span; ++t)
          for (int u = 0; u < span; ++u) {
            const bool overlap = (u > t && u - t < tau1) || (t > u && t - u < tau2);
            const bool same_start = t == u && tau1 > 0 && tau2 > 0;
            if (overlap || same_start) add_quad(vid(n1, k1, t), vid(n2, k2, u), 1);
          }
      }
  }

  // QUBO -> Ising with x = (1+s)/2:
  //   h_v = scale * (linear_v/2 + sum_adjacent quad/4)
  //   J_uv = scale * quad/4
  //   offset = scale * (constant + sum linear/2 + sum quad/4)
  const S& scale = inst.energy_scale;
  enc.problem = IsingProblem<S>(enc.num_vars);
  std::vector<S> h(static_cast<std::size_t>(var_count), S(0));
  S off = S(constant);
  for (int v = 0; v < enc.num_vars; ++v) {
    h[static_cast<std::size_t>(v)] = S(linear[static_cast<std::size_t>(v)]) / S(2);
    off += S(linear[static_cast<std::size_t>(v)]) / S(2);
  }
  for (const auto& [key, w] : quad) {
    const S quarter = S(w) / S(4);
    h[static_cast<std::size_t>(key.first)] += quarter;
    h[static_cast<std::size_t>(key.second)] += quarter;
    off += quarter;
    enc.problem.add_coupler(key.first, key.second, quarter * scale);
  }
  for (int v = 0; v < enc.num_vars; ++v)
    enc.problem.fields[static_cast<std::size_t>(v)] = h[static_cast<std::size_t>(v)] * scale;
  enc.offset = off * scale;
  enc.problem.validate();
  return enc;
}

struct JspSchedule {
  std::vector<std::vector<int>> starts;  // per job, per op
  int makespan = 0;                      // latest finish among positive-duration ops
};

/// Penalty terms violated by a concrete assignment, grouped by family.
struct JspViolations {
  struct OneHot { int n, k, count; };                       // op starts `count` times
  struct Precedence { int n, k, t, t_next; };               // (n,k) at t vs (n,k+1) at t_next
  struct Deadline { int n, k, t; };                         // last op started too late
  struct Conflict { int m, n1, k1, t1, n2, k2, t2; };       // machine double-booked

  std::vector<OneHot> one_hot;
  std::vector<Precedence> precedence;
  std::vector<Deadline> deadline;
  std::vector<Conflict> conflict;

  bool feasible() const {
    return one_hot.empty() && precedence.empty() && deadline.empty() && conflict.empty();
  }
};

template <typename S>
struct JspDecodeResult {
  std::optional<JspSchedule> schedule;  // present when every op starts exactly once
  JspViolations violations;
  bool feasible = false;
};

/// Reads a spin configuration back as 0/1 start indicators and evaluates the
/// constraint families directly (independently of the encoded couplers).
template <typename S>
JspDecodeResult<S> decode(const JspEncoding<S>& enc, const SpinConfig& config) {
  config.check_valid(enc.num_vars);
  const auto& inst = enc.instance;
  const int n_jobs = inst.jobs();
  const int n_ops = inst.ops_per_job();
  const int span = inst.timespan;
  auto x = [&](int n, int k, int t) {
    return config.spins[static_cast<std::size_t>(enc.var_index(n, k, t))] > 0;
  };

  JspDecodeResult<S> out;
  bool one_hot_ok = true;
  std::vector<std::vector<int>> starts(static_cast<std::size_t>(n_jobs),
                                       std::vector<int>(static_cast<std::size_t>(n_ops), -1));
  for (int n = 0; n < n_jobs; ++n)
    for (int k = 0; k < n_ops; ++k) {
      int count = 0;
      for (int t = 0; t < span; ++t)
        if (x(n, k, t)) {
          starts[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] = t;
          ++count;
        }
      if (count != 1) {
        out.violations.one_hot.push_back({n, k, count});
        one_hot_ok = false;
      }
    }

  for (int n = 0; n < n_jobs; ++n) {
    for (int k = 0; k + 1 < n_ops; ++k) {
      const int tau = inst.duration[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
      for (int t = 0; t < span; ++t)
        for (int u = 0; u < span; ++u)
          if (t + tau > u && x(n, k, t) && x(n, k + 1, u))
            out.violations.precedence.push_back({n, k, t, u});
    }
    const int last = n_ops - 1;
    const int tau = inst.duration[static_cast<std::size_t>(n)][static_cast<std::size_t>(last)];
    for (int t = 0; t < span; ++t)
      if (t + tau > span && x(n, last, t)) out.violations.deadline.push_back({n, last, t});
  }

  const int machines = inst.num_machines();
  for (int m = 0; m < machines; ++m) {
    std::vector<std::pair<int, int>> ops;
    for (int n = 0; n < n_jobs; ++n)
      for (int k = 0; k < n_ops; ++k)
        if (inst.machine[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] == m)
          ops.emplace_back(n, k);
    for (std::size_t a = 0; a < ops.size(); ++a)
      for (std::size_t b = a + 1; b < ops.size(); ++b) {
        const auto [n1, k1] = ops[a];
        const auto [n2, k2] = ops[b];
        const int tau1 = inst.duration[static_cast<std::size_t>(n1)][static_cast<std::size_t>(k1)];
        const int tau2 = inst.duration[static_cast<std::size_t>(n2)][static_cast<std::size_t>(k2)];
        for (int t = 0; t < span; ++t)
          for (int u = 0; u < span; ++u) {
            const bool overlap = (u > t && u - t < tau1) || (t > u && t - u < tau2);
            const bool same_start = t == u && tau1 > 0 && tau2 > 0;
            if ((overlap || same_start) && x(n1, k1, t) && x(n2, k2, u))
              out.violations.conflict.push_back({m, n1, k1, t, n2, k2, u});
          }
      }
  }

  out.feasible = out.violations.feasible();
  if (one_hot_ok) {
    JspSchedule sched;
    sched.starts = std::move(starts);
    sched.makespan = 0;
    for (int n = 0; n < n_jobs; ++n)
      for (int k = 0; k < n_ops; ++k) {
        const int tau = inst.duration[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)];
        if (tau > 0)
          sched.makespan = std::max(sched.makespan,
                                    sched.starts[static_cast<std::size_t>(n)][static_cast<std::size_t>(k)] + tau);
      }
    out.schedule = std::move(sched);
  }
  return out;
}

/// Per-variable slack C(v) = sum |J| - |h| of the encoded problem, compared
/// against the reference value E/2, plus the (C + Delta)/2 chain-strength
/// rule with Delta = E (which evaluates to 3E/4).  Measured, not asserted:
/// boundary variables of small instances deviate.
template <typename S>
struct JspGapReport {
  S energy_scale{};
  S delta{};         // E
  S rule_value{};    // (E/2 + E)/2
  std::vector<S> c_values;
  std::vector<std::uint8_t> matches_half_scale;
  std::size_t match_count = 0;
  S c_min{};
  S c_max{};
};

template <typename S>
JspGapReport<S> report_gap_quantities(const JspEncoding<S>& enc) {
  JspGapReport<S> rep;
  rep.energy_scale = enc.instance.energy_scale;
  rep.delta = rep.energy_scale;
  rep.rule_value = S(3) * rep.energy_scale / S(4);
  const S half = rep.energy_scale / S(2);

  std::vector<S> coupling(static_cast<std::size_t>(enc.num_vars), S(0));
  for (const auto& c : enc.problem.couplers) {
    coupling[static_cast<std::size_t>(c.i)] += scalar_abs(c.value);
    coupling[static_cast<std::size_t>(c.j)] += scalar_abs(c.value);
  }
  rep.c_values.reserve(static_cast<std::size_t>(enc.num_vars));
  rep.matches_half_scale.reserve(static_cast<std::size_t>(enc.num_vars));
  for (int v = 0; v < enc.num_vars; ++v) {
    S c = coupling[static_cast<std::size_t>(v)] -
          scalar_abs(enc.problem.fields[static_cast<std::size_t>(v)]);
    const bool match = c == half;
    if (v == 0 || c < rep.c_min) rep.c_min = c;
    if (v == 0 || rep.c_max < c) rep.c_max = c;
    rep.c_values.push_back(std::move(c));
    rep.matches_half_scale.push_back(match ? 1 : 0);
    if (match) ++rep.match_count;
  }
  return rep;
}

}  // namespace chainbound
