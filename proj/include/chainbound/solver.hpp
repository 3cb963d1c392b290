#pragma once

#include <algorithm>
#include <atomic>
#include <charconv>
#include <cmath>
#include <cstdint>
#include <future>
#include <limits>
#include <optional>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include "bounds.hpp"
#include "embedding.hpp"
#include "errors.hpp"
#include "ising.hpp"
#include "oracle.hpp"
#include "rng.hpp"
#include "scalar.hpp"

namespace chainbound {

/// Exact solve; thin delegation kept so callers of the solver layer never
/// reach into the model layer directly.
template <typename S>
GroundStateSet<S> solve_exhaustive(const IsingProblem<S>& p, int max_qubits = 24) {
  return enumerate_ground_states(p, max_qubits);
}

/// Geometric inverse-temperature ramp for simulated annealing.
struct SaParams {
  double beta_start = 0.1;
  double beta_end = 5.0;
};

struct SaResult {
  SpinConfig config;
  double energy = 0.0;
  std::vector<double> restart_energies;  // best energy seen by each restart
};

namespace detail {

// One annealing run.  Fixed sweep order and an explicit bit-derived uniform
// keep trajectories identical across platforms for a given engine state.
inline SpinConfig sa_run(const IsingProblem<double>& p,
                         const std::vector<std::vector<std::pair<int, double>>>& adj,
                         const SaParams& params, int sweeps, std::mt19937_64& eng) {
  const int n = p.num_qubits;
  std::vector<std::int8_t> s(static_cast<std::size_t>(n));
  for (int i = 0; i < n; ++i) s[static_cast<std::size_t>(i)] = (eng() & 1u) ? 1 : -1;

  SpinConfig current;
  current.spins = s;
  double cur_e = energy(p, current);
  double best_e = cur_e;
  std::vector<std::int8_t> best = s;

  const double ratio = params.beta_end / params.beta_start;
  for (int t = 0; t < sweeps; ++t) {
    const double frac = sweeps > 1 ? static_cast<double>(t) / (sweeps - 1) : 1.0;
    const double beta = params.beta_start * std::pow(ratio, frac);
    for (int k = 0; k < n; ++k) {
      double local = p.fields[static_cast<std::size_t>(k)];
      for (const auto& [j, v] : adj[static_cast<std::size_t>(k)])
        local += s[static_cast<std::size_t>(j)] > 0 ? v : -v;
      const double delta = s[static_cast<std::size_t>(k)] > 0 ? -2.0 * local : 2.0 * local;
      // delta is the energy change of flipping spin k.
      if (delta <= 0.0 || uniform01(eng) < std::exp(-beta * delta)) {
        s[static_cast<std::size_t>(k)] = static_cast<std::int8_t>(-s[static_cast<std::size_t>(k)]);
        cur_e += delta;
        if (cur_e < best_e) {
          best_e = cur_e;
          best = s;
        }
      }
    }
  }
  return SpinConfig{std::move(best)};
}

}  // namespace detail

/// Single-spin-flip Metropolis annealer.  Deterministic given the seed: each
/// restart draws from its own stream, so results are independent of restart
/// execution order.  Returned energy is re-evaluated from the best
/// configuration, not accumulated.
inline SaResult solve_sa(const IsingProblem<double>& p, const SaParams& params,
                         std::uint64_t seed, int sweeps, int restarts) {
  p.validate();
  if (sweeps < 1) throw constraint_error("sweeps must be at least 1");
  if (restarts < 1) throw constraint_error("restarts must be at least 1");
  const auto adj = p.adjacency();

  SaResult out;
  for (int r = 0; r < restarts; ++r) {
    auto eng = make_stream(seed, static_cast<std::uint64_t>(r));
    SpinConfig c = detail::sa_run(p, adj, params, sweeps, eng);
    const double e = p.num_qubits > 0 ? energy(p, c) : 0.0;
    out.restart_energies.push_back(e);
    if (r == 0 || e < out.energy) {
      out.energy = e;
      out.config = std::move(c);
    }
  }
  return out;
}

/// Expected total anneal time to hit the target probability:
///   TTS = t_a * log(1-p) / log(1-s).
/// Conventions: s <= 0 gives +infinity (never succeeds); s >= p (including
/// s >= 1) is floored to one run.
inline double tts(double s, double p, double t_a) {
  if (!(p > 0.0) || !(p < 1.0)) throw constraint_error("target probability must be in (0,1)");
  if (!(t_a > 0.0)) throw constraint_error("anneal time must be positive");
  if (s <= 0.0) return std::numeric_limits<double>::infinity();
  if (s >= p || s >= 1.0) return t_a;
  return t_a * std::log1p(-p) / std::log1p(-s);
}

struct SweepParams {
  int samples = 100;
  std::uint64_t seed = 1;
  SaParams sa;
  int sweeps = 1000;
  double target_p = 0.99;
  double anneal_time = 1.0;
  std::optional<Rational> coupling_cap;  // rescale so max physical |coupler| <= cap
  bool allow_broken = false;             // accept majority-repaired successes
  int threads = 0;                       // 0: hardware concurrency
  int max_logical_qubits = 24;           // exhaustive reference cap
};

struct SweepPoint {
  Rational strength;      // chain coupling magnitude F
  double success_prob = 0.0;
  double broken_rate = 0.0;
  double tts_value = 0.0;
  int samples = 0;
  std::uint64_t point_seed = 0;
};

struct SweepResult {
  std::vector<SweepPoint> points;
};

namespace detail {

// Stream key for one grid point: global seed mixed with the exact strength
// value (via its canonical string), so equal strengths get equal streams and
// repeated grid entries reproduce identical rows.
inline std::uint64_t point_stream_key(std::uint64_t seed, const Rational& strength) {
  const std::string repr = rational_to_string(strength);
  std::uint64_t h = 1469598103934665603ULL;  // FNV-1a over the digits
  for (unsigned char ch : repr) {
    h ^= ch;
    h *= 1099511628211ULL;
  }
  return splitmix64(splitmix64(seed) ^ h);
}

inline std::string format_double(double v) {
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  if (std::isnan(v)) return "nan";
  char buf[64];
  const auto res = std::to_chars(buf, buf + sizeof(buf), v);
  return std::string(buf, res.ptr);
}

}  // namespace detail

/// Sweeps the chain strength magnitude over a grid: at each point the
/// embedded problem is built (optionally rescaled to the coupling cap),
/// sampled with independent annealing runs, majority-decoded, and scored
/// against the exact logical ground energy.  Success by default requires
/// every chain intact; allow_broken scores the repaired configuration
/// instead.  Points run in parallel; output order and content are
/// independent of scheduling.
inline SweepResult sweep_chain_strength(const EmbeddingContext<Rational>& ctx,
                                        const HFieldDistribution<Rational>& dist,
                                        const std::vector<Rational>& grid,
                                        const SweepParams& params) {
  if (grid.empty()) throw constraint_error("strength grid is empty");
  if (params.samples < 1) throw constraint_error("need at least one sample per point");
  for (const auto& g : grid)
    if (g < 0) throw constraint_error("strength magnitudes must be nonnegative");
  if (params.coupling_cap && !(*params.coupling_cap > 0))
    throw constraint_error("coupling cap must be positive");

  const auto logical = enumerate_ground_states(ctx.problem(), params.max_logical_qubits);

  auto run_point = [&](std::size_t g) {
    const Rational& magnitude = grid[g];
    std::vector<Rational> strengths(static_cast<std::size_t>(ctx.num_qubits()),
                                    Rational(-magnitude));
    const auto embedded = build_embedded_any_sign(ctx, dist, strengths);

    // Hardware-style cap: uniformly shrink the whole Hamiltonian until the
    // largest coupler magnitude fits.  Ground states are unchanged; the
    // effective temperature of a fixed annealing schedule is not, which is
    // what makes ever-larger chain strengths counterproductive.
    Rational scale(1);
    if (params.coupling_cap) {
      Rational max_c(0);
      for (const auto& c : embedded.problem.couplers)
        max_c = std::max(max_c, scalar_abs(c.value));
      if (max_c > *params.coupling_cap) scale = *params.coupling_cap / max_c;
    }

    IsingProblem<double> annealed(embedded.problem.num_qubits);
    for (int i = 0; i < embedded.problem.num_qubits; ++i)
      annealed.fields[static_cast<std::size_t>(i)] =
          to_double(Rational(embedded.problem.fields[static_cast<std::size_t>(i)] * scale));
    for (const auto& c : embedded.problem.couplers)
      annealed.add_coupler(c.i, c.j, to_double(Rational(c.value * scale)));
    const auto adj = annealed.adjacency();

    const std::uint64_t key = detail::point_stream_key(params.seed, magnitude);
    int successes = 0, broken = 0;
    for (int sample = 0; sample < params.samples; ++sample) {
      auto eng = make_stream(key, static_cast<std::uint64_t>(sample));
      const SpinConfig c = detail::sa_run(annealed, adj, params.sa, params.sweeps, eng);
      const auto decoded = majority_vote_decode(ctx, c);
      const bool any_broken =
          std::any_of(decoded.broken.begin(), decoded.broken.end(), [](auto b) { return b != 0; });
      if (any_broken) ++broken;
      if (any_broken && !params.allow_broken) continue;
      if (energy(ctx.problem(), decoded.logical) == logical.min_energy) ++successes;
    }

    SweepPoint pt;
    pt.strength = magnitude;
    pt.samples = params.samples;
    pt.point_seed = key;
    pt.success_prob = static_cast<double>(successes) / params.samples;
    pt.broken_rate = static_cast<double>(broken) / params.samples;
    pt.tts_value = tts(pt.success_prob, params.target_p, params.anneal_time);
    return pt;
  };

  SweepResult result;
  result.points.resize(grid.size());
  unsigned workers = params.threads > 0 ? static_cast<unsigned>(params.threads)
                                        : std::max(1u, std::thread::hardware_concurrency());
  workers = std::min<unsigned>(workers, static_cast<unsigned>(grid.size()));
  if (workers <= 1) {
    for (std::size_t g = 0; g < grid.size(); ++g) result.points[g] = run_point(g);
  } else {
    std::vector<std::future<void>> futures;
    std::atomic<std::size_t> next{0};
    for (unsigned w = 0; w < workers; ++w)
      futures.push_back(std::async(std::launch::async, [&]() {
        for (std::size_t g = next.fetch_add(1); g < grid.size(); g = next.fetch_add(1))
          result.points[g] = run_point(g);
      }));
    for (auto& f : futures) f.get();
  }
  return result;
}

/// CSV serialisation; identical inputs yield byte-identical text.
inline std::string sweep_to_csv(const SweepResult& sweep) {
  std::string out = "F,success_prob,broken_rate,tts,samples,seed\n";
  for (const auto& pt : sweep.points) {
    out += detail::format_double(to_double(pt.strength));
    out += ',';
    out += detail::format_double(pt.success_prob);
    out += ',';
    out += detail::format_double(pt.broken_rate);
    out += ',';
    out += detail::format_double(pt.tts_value);
    out += ',';
    out += std::to_string(pt.samples);
    out += ',';
    out += std::to_string(pt.point_seed);
    out += '\n';
  }
  return out;
}

/// Pointwise best (minimum TTS) across sweeps of the same grid, e.g. over
/// several candidate embeddings of one problem.
inline SweepResult min_tts_across(const std::vector<SweepResult>& sweeps) {
  if (sweeps.empty()) throw constraint_error("no sweeps to merge");
  for (const auto& s : sweeps)
    if (s.points.size() != sweeps[0].points.size())
      throw validation_error("sweeps cover different grids");
  SweepResult out = sweeps[0];
  for (std::size_t i = 1; i < sweeps.size(); ++i)
    for (std::size_t g = 0; g < out.points.size(); ++g) {
      if (sweeps[i].points[g].strength != out.points[g].strength)
        throw validation_error("sweeps cover different grids");
      if (sweeps[i].points[g].tts_value < out.points[g].tts_value)
        out.points[g] = sweeps[i].points[g];
    }
  return out;
}

}  // namespace chainbound
