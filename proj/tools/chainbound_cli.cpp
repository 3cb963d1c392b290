// Command-line surface for the chain-bound toolkit.  Every command reads the
// JSON formats of the library, writes JSON (or CSV for `sweep`) to stdout,
// and is deterministic for fixed seeds.  Exit codes: 0 ok, 1 invalid input
// or parameters, 2 size cap exceeded, 3 I/O failure.

#include <CLI11.hpp>

#include <chainbound/chainbound.hpp>
#include <chainbound/json_io.hpp>

#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

namespace cb = chainbound;
using cb::json;
using cb::Rational;

namespace {

json load_json(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw cb::io_error("cannot open " + path);
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw cb::io_error(path + ": " + e.what());
  }
}

// Accepts "p", "p/q" and decimal forms like "6.1" (read exactly, base ten).
Rational parse_rational(const std::string& text) {
  const auto dot = text.find('.');
  try {
    if (dot == std::string::npos) return cb::rational_from_string(text);
    const std::string whole = text.substr(0, dot);
    const std::string frac = text.substr(dot + 1);
    if (frac.find_first_not_of("0123456789") != std::string::npos)
      throw cb::validation_error("bad number");
    Rational base = whole.empty() || whole == "-" || whole == "+"
                        ? Rational(0)
                        : cb::rational_from_string(whole);
    Rational scale(1);
    Rational digits(0);
    for (char c : frac) {
      digits = digits * 10 + (c - '0');
      scale *= 10;
    }
    const bool negative = !text.empty() && text[0] == '-';
    return base + (negative ? -digits : digits) / scale;
  } catch (const std::exception&) {
    throw cb::validation_error("cannot parse number \"" + text + "\"");
  }
}

std::vector<Rational> parse_grid(const std::string& text) {
  std::vector<Rational> grid;
  std::stringstream ss(text);
  std::string token;
  while (std::getline(ss, token, ',')) {
    if (token.empty()) continue;
    grid.push_back(parse_rational(token));
  }
  return grid;
}

void emit(const json& j) { std::cout << j.dump(2) << "\n"; }

// Shared positional-ish options for commands operating on an embedding.
struct EmbeddedArgs {
  std::string problem_path, hardware_path, embedding_path;
  std::string dist_name = "choi2";
  std::string dist_file;

  void attach(CLI::App* cmd) {
    cmd->add_option("--problem", problem_path, "Ising problem JSON")->required();
    cmd->add_option("--hardware", hardware_path, "hardware graph JSON")->required();
    cmd->add_option("--embedding", embedding_path, "embedding JSON")->required();
    cmd->add_option("--dist", dist_name, "field distribution: uniform, choi2, single, custom")
        ->check(CLI::IsMember({"uniform", "choi2", "single", "custom"}));
    cmd->add_option("--dist-file", dist_file, "custom distribution values JSON (matrix)");
  }

  template <typename S>
  cb::EmbeddingContext<S> context() const {
    const auto problem = cb::problem_from_json<S>(load_json(problem_path));
    const auto hw = cb::hardware_from_json(load_json(hardware_path));
    const auto emb = cb::embedding_from_json(load_json(embedding_path));
    return cb::EmbeddingContext<S>::create(problem, hw, emb);
  }

  template <typename S>
  cb::HFieldDistribution<S> distribution(const cb::EmbeddingContext<S>& ctx) const {
    if (dist_name == "uniform") return cb::make_uniform_distribution(ctx);
    if (dist_name == "choi2") return cb::make_choi2_distribution(ctx);
    if (dist_name == "single") return cb::make_single_node_distribution(ctx);
    if (dist_file.empty())
      throw cb::validation_error("--dist custom requires --dist-file");
    return cb::make_custom_distribution(
        ctx, cb::distribution_values_from_json<S>(load_json(dist_file)));
  }
};

// Per-chain strength magnitudes from either a single value or a JSON array.
template <typename S>
std::vector<S> strengths_for(const cb::EmbeddingContext<S>& ctx, const std::string& single,
                             const std::string& file) {
  if (!file.empty()) {
    const json j = load_json(file);
    if (!j.is_array()) throw cb::io_error("strength file must hold a JSON array");
    std::vector<S> out;
    for (const json& v : j) out.push_back(cb::scalar_from_json<S>(v));
    return out;
  }
  if (single.empty()) throw cb::validation_error("need --strength or --strengths-file");
  S value;
  if constexpr (cb::is_exact_scalar_v<S>) {
    value = parse_rational(single);
  } else {
    value = std::stod(single);
  }
  return std::vector<S>(static_cast<std::size_t>(ctx.num_qubits()), value);
}

// ---------------------------------------------------------------------------
// Command bodies, templated over the scalar lane.

template <typename S>
void run_bounds(const EmbeddedArgs& args, bool with_optimized, int max_chain) {
  const auto ctx = args.template context<S>();
  const auto dist = args.template distribution<S>(ctx);
  const auto reports = cb::chain_bound_report(ctx, dist, with_optimized, max_chain);
  emit(json{{"distribution", cb::distribution_to_json(dist)},
            {"qubits", cb::bound_report_to_json(reports)}});
}

template <typename S>
void run_optimize(const EmbeddedArgs& args, int max_chain) {
  const auto ctx = args.template context<S>();
  json out = json::array();
  for (int i = 0; i < ctx.num_qubits(); ++i) {
    const auto opt = cb::optimize_distribution(ctx, i, max_chain);
    json values = json::array();
    for (const auto& v : opt.values) values.push_back(cb::scalar_to_json(v));
    out.push_back(json{{"qubit", i},
                       {"bound", cb::scalar_to_json(opt.bound)},
                       {"h_dist", std::move(values)}});
  }
  emit(json{{"qubits", std::move(out)}});
}

template <typename S>
void run_admissible(const EmbeddedArgs& args, const std::string& strength,
                    const std::string& strengths_file, int max_chain) {
  const auto ctx = args.template context<S>();
  const auto dist = args.template distribution<S>(ctx);
  const auto f = strengths_for<S>(ctx, strength, strengths_file);
  emit(cb::admissibility_to_json(cb::check_admissible(ctx, dist, f, max_chain)));
}

template <typename S>
void run_verify(const EmbeddedArgs& args, const std::string& strength,
                const std::string& strengths_file, const std::string& margin, int max_qubits) {
  const auto ctx = args.template context<S>();
  const auto dist = args.template distribution<S>(ctx);
  cb::NoDomainWallResult<S> res;
  if (!margin.empty()) {
    S m;
    if constexpr (cb::is_exact_scalar_v<S>) {
      m = parse_rational(margin);
    } else {
      m = std::stod(margin);
    }
    res = cb::verify_no_domain_wall_at_margin(ctx, dist, m, max_qubits);
  } else {
    res = cb::verify_no_domain_wall(ctx, dist, strengths_for<S>(ctx, strength, strengths_file),
                                    max_qubits);
  }
  emit(cb::verify_to_json(res));
}

template <typename S>
void run_probe(const EmbeddedArgs& args, int qubit, const std::string& strength,
               const std::string& margin, int max_chain) {
  const auto ctx = args.template context<S>();
  const auto dist = args.template distribution<S>(ctx);
  if (qubit < 0 || qubit >= ctx.num_qubits())
    throw cb::validation_error("qubit index out of range");
  json out;
  if (!margin.empty()) {
    S m;
    if constexpr (cb::is_exact_scalar_v<S>) {
      m = parse_rational(margin);
    } else {
      m = std::stod(margin);
    }
    const auto tb = cb::tight_bound(ctx, dist, qubit, max_chain);
    if (!tb.witness)
      throw cb::validation_error("chain has no proper subsets to weaken");
    out = cb::probe_to_json(cb::probe_tightness(ctx, dist, qubit, *tb.witness, m));
    out["tight"] = cb::scalar_to_json(tb.value);
  } else {
    if (strength.empty()) throw cb::validation_error("need --margin or --strength");
    S f;
    if constexpr (cb::is_exact_scalar_v<S>) {
      f = parse_rational(strength);
    } else {
      f = std::stod(strength);
    }
    out = cb::probe_to_json(cb::probe_at_strength(ctx, dist, qubit, f));
  }
  emit(out);
}

template <typename S>
void run_encode_jsp(const std::string& jsp_path, bool solve, bool gap) {
  const auto inst = cb::jsp_from_json<S>(load_json(jsp_path));
  const auto enc = cb::encode(inst);
  json out{{"num_vars", enc.num_vars},
           {"offset", cb::scalar_to_json(enc.offset)},
           {"problem", cb::problem_to_json(enc.problem)}};
  if (solve) {
    const auto gs = cb::enumerate_ground_states(enc.problem);
    const auto dec = cb::decode(enc, gs.configs.front());
    out["ground_energy"] = cb::scalar_to_json(S(gs.min_energy + enc.offset));
    out["feasible"] = dec.feasible;
    if (dec.schedule) out["schedule"] = cb::schedule_to_json(*dec.schedule);
    out["violations"] = cb::jsp_violations_to_json(dec.violations);
  }
  if (gap) {
    const auto rep = cb::report_gap_quantities(enc);
    json c_values = json::array();
    for (const auto& c : rep.c_values) c_values.push_back(cb::scalar_to_json(c));
    out["gap"] = json{{"energy_scale", cb::scalar_to_json(rep.energy_scale)},
                      {"delta", cb::scalar_to_json(rep.delta)},
                      {"rule_value", cb::scalar_to_json(rep.rule_value)},
                      {"C", std::move(c_values)},
                      {"half_scale_matches", rep.match_count},
                      {"C_min", cb::scalar_to_json(rep.c_min)},
                      {"C_max", cb::scalar_to_json(rep.c_max)}};
  }
  emit(out);
}

template <typename S>
void run_solve(const std::string& problem_path, const std::string& method, std::uint64_t seed,
               int sweeps, int restarts, const cb::SaParams& sa, int max_qubits) {
  const auto problem = cb::problem_from_json<S>(load_json(problem_path));
  if (method == "exhaustive") {
    const auto gs = cb::solve_exhaustive(problem, max_qubits);
    json configs = json::array();
    for (const auto& c : gs.configs) configs.push_back(cb::config_to_json(c));
    emit(json{{"min_energy", cb::scalar_to_json(gs.min_energy)},
              {"count", gs.configs.size()},
              {"configs", std::move(configs)}});
    return;
  }
  // Annealing always runs in floating point; exact inputs are converted.
  cb::IsingProblem<double> p(problem.num_qubits);
  for (int i = 0; i < problem.num_qubits; ++i)
    p.fields[static_cast<std::size_t>(i)] =
        cb::to_double(problem.fields[static_cast<std::size_t>(i)]);
  for (const auto& c : problem.couplers) p.add_coupler(c.i, c.j, cb::to_double(c.value));
  const auto r = cb::solve_sa(p, sa, seed, sweeps, restarts);
  emit(json{{"energy", r.energy},
            {"config", cb::config_to_json(r.config)},
            {"restart_energies", r.restart_energies}});
}

void run_sweep(const EmbeddedArgs& args, const std::vector<Rational>& grid,
               const cb::SweepParams& params) {
  const auto ctx = args.context<Rational>();
  const auto dist = args.distribution<Rational>(ctx);
  const auto result = cb::sweep_chain_strength(ctx, dist, grid, params);
  std::cout << cb::sweep_to_csv(result);
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"chain strength bounds toolkit"};
  app.require_subcommand(1);
  bool exact = false;
  app.add_flag("--exact", exact, "exact rational arithmetic (default: double)");

  // bounds ------------------------------------------------------------------
  EmbeddedArgs bounds_args;
  bool bounds_optimize = false;
  int bounds_max_chain = 30;
  auto* cmd_bounds = app.add_subcommand("bounds", "per-qubit chain strength bounds")->fallthrough();
  bounds_args.attach(cmd_bounds);
  cmd_bounds->add_flag("--optimize", bounds_optimize, "include the optimised distribution");
  cmd_bounds->add_option("--max-chain", bounds_max_chain, "chain size cap for enumeration");

  // optimize-h --------------------------------------------------------------
  EmbeddedArgs opt_args;
  int opt_max_chain = 30;
  auto* cmd_opt = app.add_subcommand("optimize-h", "optimise the field distribution per chain")->fallthrough();
  opt_args.attach(cmd_opt);
  cmd_opt->add_option("--max-chain", opt_max_chain, "chain size cap for enumeration");

  // admissible --------------------------------------------------------------
  EmbeddedArgs adm_args;
  std::string adm_strength, adm_strengths_file;
  int adm_max_chain = 30;
  auto* cmd_adm = app.add_subcommand("admissible", "check chain subsets at a strength")->fallthrough();
  adm_args.attach(cmd_adm);
  cmd_adm->add_option("--strength", adm_strength, "one magnitude for every chain");
  cmd_adm->add_option("--strengths-file", adm_strengths_file, "JSON array of magnitudes");
  cmd_adm->add_option("--max-chain", adm_max_chain, "chain size cap for enumeration");

  // verify ------------------------------------------------------------------
  EmbeddedArgs ver_args;
  std::string ver_strength, ver_strengths_file, ver_margin;
  int ver_max_qubits = 22;
  auto* cmd_ver = app.add_subcommand("verify", "enumerate ground states, check chains")->fallthrough();
  ver_args.attach(cmd_ver);
  cmd_ver->add_option("--strength", ver_strength, "one magnitude for every chain");
  cmd_ver->add_option("--strengths-file", ver_strengths_file, "JSON array of magnitudes");
  cmd_ver->add_option("--margin", ver_margin, "use per-chain tight bound + margin");
  cmd_ver->add_option("--max-qubits", ver_max_qubits, "physical enumeration cap");

  // probe -------------------------------------------------------------------
  EmbeddedArgs probe_args;
  int probe_qubit = 0;
  std::string probe_strength, probe_margin;
  int probe_max_chain = 30;
  auto* cmd_probe = app.add_subcommand("probe", "search for a breaking neighbour assignment")->fallthrough();
  probe_args.attach(cmd_probe);
  cmd_probe->add_option("--qubit", probe_qubit, "logical qubit to probe")->required();
  cmd_probe->add_option("--strength", probe_strength, "probe at this magnitude");
  cmd_probe->add_option("--margin", probe_margin, "probe at tight bound - margin/boundary");
  cmd_probe->add_option("--max-chain", probe_max_chain, "chain size cap for enumeration");

  // encode-jsp --------------------------------------------------------------
  std::string jsp_path;
  bool jsp_solve = false, jsp_gap = false;
  auto* cmd_jsp = app.add_subcommand("encode-jsp", "job-shop instance to Ising")->fallthrough();
  cmd_jsp->add_option("--jsp", jsp_path, "job-shop instance JSON")->required();
  cmd_jsp->add_flag("--solve", jsp_solve, "solve exhaustively and decode the schedule");
  cmd_jsp->add_flag("--gap", jsp_gap, "report per-variable C values and the strength rule");

  // solve -------------------------------------------------------------------
  std::string solve_problem, solve_method = "exhaustive";
  std::uint64_t solve_seed = 1;
  int solve_sweeps = 1000, solve_restarts = 10, solve_max_qubits = 24;
  cb::SaParams solve_sa_params;
  auto* cmd_solve = app.add_subcommand("solve", "ground states of a bare Ising problem")->fallthrough();
  cmd_solve->add_option("--problem", solve_problem, "Ising problem JSON")->required();
  cmd_solve->add_option("--method", solve_method, "exhaustive or sa")
      ->check(CLI::IsMember({"exhaustive", "sa"}));
  cmd_solve->add_option("--seed", solve_seed, "PRNG seed for sa");
  cmd_solve->add_option("--sweeps", solve_sweeps, "annealing sweeps per restart");
  cmd_solve->add_option("--restarts", solve_restarts, "independent restarts");
  cmd_solve->add_option("--beta-start", solve_sa_params.beta_start, "initial inverse temperature");
  cmd_solve->add_option("--beta-end", solve_sa_params.beta_end, "final inverse temperature");
  cmd_solve->add_option("--max-qubits", solve_max_qubits, "exhaustive enumeration cap");

  // sweep -------------------------------------------------------------------
  EmbeddedArgs sweep_args;
  std::string sweep_grid_text, sweep_cap;
  cb::SweepParams sweep_params;
  auto* cmd_sweep = app.add_subcommand("sweep", "success probability and TTS over a strength grid")->fallthrough();
  sweep_args.attach(cmd_sweep);
  cmd_sweep->add_option("--grid", sweep_grid_text, "comma-separated strength magnitudes")
      ->required();
  cmd_sweep->add_option("--samples", sweep_params.samples, "annealing runs per grid point");
  cmd_sweep->add_option("--sweeps", sweep_params.sweeps, "sweeps per annealing run");
  cmd_sweep->add_option("--seed", sweep_params.seed, "global sweep seed");
  cmd_sweep->add_option("--target-p", sweep_params.target_p, "TTS target probability");
  cmd_sweep->add_option("--anneal-time", sweep_params.anneal_time, "time units per run");
  cmd_sweep->add_option("--cap", sweep_cap, "rescale so the largest coupler magnitude fits");
  cmd_sweep->add_flag("--allow-broken", sweep_params.allow_broken,
                      "score majority-repaired configurations too");
  cmd_sweep->add_option("--threads", sweep_params.threads, "worker threads (0: hardware)");
  cmd_sweep->add_option("--beta-start", sweep_params.sa.beta_start, "initial inverse temperature");
  cmd_sweep->add_option("--beta-end", sweep_params.sa.beta_end, "final inverse temperature");

  // tts ---------------------------------------------------------------------
  double tts_s = 0.0, tts_p = 0.99, tts_time = 1.0;
  auto* cmd_tts = app.add_subcommand("tts", "time-to-solution from a success probability")->fallthrough();
  cmd_tts->add_option("--success", tts_s, "per-run success probability")->required();
  cmd_tts->add_option("--target-p", tts_p, "target probability");
  cmd_tts->add_option("--anneal-time", tts_time, "time units per run");

  try {
    app.parse(argc, argv);

    if (*cmd_bounds) {
      exact ? run_bounds<Rational>(bounds_args, bounds_optimize, bounds_max_chain)
            : run_bounds<double>(bounds_args, bounds_optimize, bounds_max_chain);
    } else if (*cmd_opt) {
      exact ? run_optimize<Rational>(opt_args, opt_max_chain)
            : run_optimize<double>(opt_args, opt_max_chain);
    } else if (*cmd_adm) {
      exact ? run_admissible<Rational>(adm_args, adm_strength, adm_strengths_file, adm_max_chain)
            : run_admissible<double>(adm_args, adm_strength, adm_strengths_file, adm_max_chain);
    } else if (*cmd_ver) {
      exact ? run_verify<Rational>(ver_args, ver_strength, ver_strengths_file, ver_margin,
                                   ver_max_qubits)
            : run_verify<double>(ver_args, ver_strength, ver_strengths_file, ver_margin,
                                 ver_max_qubits);
    } else if (*cmd_probe) {
      exact ? run_probe<Rational>(probe_args, probe_qubit, probe_strength, probe_margin,
                                  probe_max_chain)
            : run_probe<double>(probe_args, probe_qubit, probe_strength, probe_margin,
                                probe_max_chain);
    } else if (*cmd_jsp) {
      exact ? run_encode_jsp<Rational>(jsp_path, jsp_solve, jsp_gap)
            : run_encode_jsp<double>(jsp_path, jsp_solve, jsp_gap);
    } else if (*cmd_solve) {
      exact ? run_solve<Rational>(solve_problem, solve_method, solve_seed, solve_sweeps,
                                  solve_restarts, solve_sa_params, solve_max_qubits)
            : run_solve<double>(solve_problem, solve_method, solve_seed, solve_sweeps,
                                solve_restarts, solve_sa_params, solve_max_qubits);
    } else if (*cmd_sweep) {
      if (!sweep_cap.empty()) sweep_params.coupling_cap = parse_rational(sweep_cap);
      run_sweep(sweep_args, parse_grid(sweep_grid_text), sweep_params);
    } else if (*cmd_tts) {
      std::cout << cb::detail::format_double(cb::tts(tts_s, tts_p, tts_time)) << "\n";
    }
    return 0;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const cb::size_cap_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  } catch (const cb::io_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 3;
  } catch (const cb::validation_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const cb::constraint_error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
