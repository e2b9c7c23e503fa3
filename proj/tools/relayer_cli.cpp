// relayer-game: command-line front end for equilibrium solves, parameter
// sweeps, replicator dynamics, coalition/invasion analysis and simulation.
//
// Exit codes: 0 success, 2 invalid input, 3 computation failure.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>

#include "relayer/relayer.hpp"

namespace {

using namespace relayer;

constexpr int kExitInvalid = 2;
constexpr int kExitFailure = 3;

struct ComputationFailure : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct CommonOptions {
  GameParams params{5, 100.0, 25.0, 1.0, 100.0};
  SolverConfig solver;
  std::string out;
};

void add_common(CLI::App* cmd, CommonOptions& o) {
  cmd->add_option("--n", o.params.relayers, "number of relayers N (>= 3)")->capture_default_str();
  cmd->add_option("--b", o.params.reward, "reward b")->capture_default_str();
  cmd->add_option("--cf", o.params.first_cost, "cost of the accepted upload c_f")
      ->capture_default_str();
  cmd->add_option("--cl", o.params.late_cost, "cost of a reverted upload c_l")
      ->capture_default_str();
  cmd->add_option("--p", o.params.penalty, "outage penalty p")->capture_default_str();
  cmd->add_option("--tol", o.solver.tolerance, "bisection tolerance on |h|")
      ->capture_default_str();
  cmd->add_option("--max-iter", o.solver.max_iterations, "bisection iteration cap")
      ->capture_default_str();
  cmd->add_option("--bracket-floor", o.solver.bracket_floor, "lower end of the bracket")
      ->capture_default_str();
  cmd->add_option("--out", o.out,
                  "output file (relative paths resolve against $RELAYER_OUTPUT_DIR); "
                  "standard output when omitted");
}

std::filesystem::path resolve_output(const std::string& out) {
  std::filesystem::path p(out);
  if (p.is_relative()) {
    if (const char* dir = std::getenv("RELAYER_OUTPUT_DIR"); dir && *dir)
      p = std::filesystem::path(dir) / p;
  }
  return p;
}

// Writes `text` to the resolved --out path, or to stdout.
void emit(const std::string& out, const std::string& text) {
  if (out.empty()) {
    std::cout << text;
    return;
  }
  const auto path = resolve_output(out);
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream f(path, std::ios::binary);
  if (!f) throw InvalidParams("cannot open output file " + path.string());
  f << text;
}

std::string dump(const Json& j) { return j.dump(2) + "\n"; }

EquilibriumReport solve_or_fail(const GameParams& g, const SolverConfig& cfg) {
  try {
    return solve_equilibrium(g, cfg);
  } catch (const SolverError& e) {
    throw ComputationFailure(e.what());
  }
}

// ---------------------------------------------------------------------------

int run_solve(const CommonOptions& o) {
  validate(o.params);
  validate(o.solver);
  const auto rep = solve_or_fail(o.params, o.solver);
  Json j{{"metadata", provenance_json("solve", o.params, o.solver)}};
  j["equilibrium"] = to_json(rep);
  j["inflection_point"] = inflection_point(o.params);
  emit(o.out, dump(j));
  return 0;
}

struct SweepOptions {
  std::string axis = "N";
  std::string values = "3:50:1";
  std::vector<std::string> outputs = sweep_output_names();
  unsigned threads = 0;
};

int run_sweep_cmd(const CommonOptions& o, const SweepOptions& s) {
  validate(o.solver);
  SweepSpec spec;
  spec.base = o.params;
  spec.axis = parse_axis(s.axis);
  spec.values = parse_values(s.values);
  spec.outputs = s.outputs;
  validate(spec);
  const auto rows = run_sweep(spec, o.solver, s.threads);
  std::ostringstream os;
  write_sweep_csv(os, spec, o.solver, rows);
  emit(o.out, os.str());
  return 0;
}

struct DynamicsOptions {
  double mu = 0.1;
  std::vector<std::string> q0{"0.1", "0.5"};
  double t_end = 500.0;
  double dt = 0.01;
};

std::string with_suffix(const std::string& out, const std::string& suffix) {
  std::filesystem::path p(out);
  return (p.parent_path() / (p.stem().string() + suffix + p.extension().string())).string();
}

int run_dynamics(const CommonOptions& o, const DynamicsOptions& d) {
  validate(o.params);
  validate(o.solver);
  const auto eq = solve_or_fail(o.params, o.solver);
  IntegratorConfig ic;
  ic.t_end = d.t_end;
  ic.dt = d.dt;
  if (!(d.mu > 0.0)) throw InvalidParams("--mu must be > 0");
  if (!(d.dt > 0.0) || !(d.t_end > 0.0)) throw InvalidParams("--dt and --t-end must be > 0");

  std::ostringstream all;
  for (const auto& text : d.q0) {
    double q0 = 0.0;
    if (text == "eq" || text == "equilibrium") {
      q0 = eq.q_star;
    } else {
      try {
        std::size_t pos = 0;
        q0 = std::stod(text, &pos);
        if (pos != text.size()) throw std::invalid_argument(text);
      } catch (const std::exception&) {
        throw InvalidParams("cannot parse initial state '" + text + "'");
      }
    }
    if (!(q0 > 0.0 && q0 < 1.0)) throw InvalidParams("initial states must lie in (0, 1)");
    Trajectory tr;
    try {
      tr = integrate(o.params, d.mu, q0, ic);
    } catch (const IntegrationError& e) {
      throw ComputationFailure(e.what());
    }
    std::ostringstream os;
    write_provenance_csv(os, "dynamics", o.params, o.solver,
                         {{"mu", format_number(d.mu)},
                          {"q0", format_number(q0)},
                          {"t_end", format_number(d.t_end)},
                          {"dt", format_number(d.dt)},
                          {"q_star", format_number(eq.q_star)},
                          {"terminal_distance",
                           format_number(std::abs(tr.values.back() - eq.q_star))}});
    write_trajectory_csv(os, tr);
    if (o.out.empty()) {
      if (all.tellp() > 0) all << '\n';
      all << os.str();
    } else {
      emit(with_suffix(o.out, "_q0_" + format_number(q0)), os.str());
    }
  }
  if (o.out.empty()) std::cout << all.str();
  return 0;
}

struct RobustnessOptions {
  std::string mode = "coalition";
  double qm_step = 1e-3;
};

int run_robustness(const CommonOptions& o, const RobustnessOptions& r) {
  validate(o.params);
  validate(o.solver);
  const auto eq = solve_or_fail(o.params, o.solver);
  if (r.mode == "coalition") {
    const auto rows = coalition_scan(o.params, eq.q_star);
    std::ostringstream os;
    write_provenance_csv(
        os, "robustness", o.params, o.solver,
        {{"mode", "coalition"},
         {"k_rounding", "nearest"},
         {"q_star", format_number(eq.q_star)},
         {"reward", format_number(eq.reward)},
         {"stake_loss_threshold", format_optional(stake_loss_threshold(o.params, eq.q_star))},
         {"resident_zero_crossing", format_optional(payoff_zero_crossing(rows, Group::Resident))},
         {"mutant_zero_crossing", format_optional(payoff_zero_crossing(rows, Group::Mutant))}});
    write_coalition_csv(os, rows);
    emit(o.out, os.str());
    return 0;
  }
  if (r.mode == "barrier") {
    if (!(r.qm_step > 0.0 && r.qm_step <= 1e-3))
      throw InvalidParams("--qm-step must lie in (0, 0.001]");
    const auto rep = invasion_barrier(o.params, eq.q_star, r.qm_step);
    Json j{{"metadata", provenance_json("robustness", o.params, o.solver,
                                        {{"mode", "barrier"},
                                         {"qm_step", format_number(r.qm_step)}})}};
    j["q_star"] = eq.q_star;
    j["barrier"] = to_json(rep);
    emit(o.out, dump(j));
    if (!(rep.barrier > 0.0)) {
      std::cerr << "error: invasion barrier is zero: a single mutant playing q_m="
                << format_number(rep.per_k.front().argmin_q_m) << " is not outperformed (D="
                << format_number(rep.per_k.front().min_gap) << ")\n";
      return kExitFailure;
    }
    return 0;
  }
  throw InvalidParams("--mode must be coalition or barrier");
}

struct SimulateOptions {
  std::string strategy = "equilibrium";
  std::uint64_t rounds = 1'000'000;
  std::uint64_t seed = 42;
  std::string trace;
  unsigned threads = 0;
};

std::vector<double> parse_strategy(const std::string& s, const GameParams& g,
                                   const SolverConfig& cfg, std::optional<double>& q_star) {
  const auto n = static_cast<std::size_t>(g.relayers);
  if (s == "equilibrium") {
    q_star = solve_or_fail(g, cfg).q_star;
    return std::vector<double>(n, *q_star);
  }
  if (s == "all-upload") return std::vector<double>(n, 1.0);
  if (s == "all-abstain") return std::vector<double>(n, 0.0);
  std::vector<double> v = parse_values(s);
  if (v.size() == 1) v.assign(n, v.front());
  if (v.size() != n) throw InvalidParams("strategy list must have N entries");
  for (double q : v)
    if (!(q >= 0.0 && q <= 1.0)) throw InvalidParams("strategies must lie in [0, 1]");
  return v;
}

int run_simulate(const CommonOptions& o, const SimulateOptions& s) {
  validate(o.params);
  validate(o.solver);
  if (s.rounds < 1) throw InvalidParams("--rounds must be >= 1");
  std::optional<double> q_star;
  const auto strategies = parse_strategy(s.strategy, o.params, o.solver, q_star);
  const auto stats = simulate(o.params, strategies, s.rounds, s.seed, {}, s.threads);

  Json j{{"metadata", provenance_json("simulate", o.params, o.solver,
                                      {{"strategy", s.strategy},
                                       {"rounds", std::to_string(s.rounds)},
                                       {"seed", std::to_string(s.seed)},
                                       {"rng", "counter-based splitmix64"}})}};
  j["strategies"] = strategies;
  if (q_star) {
    j["q_star"] = *q_star;
    j["expected_outage"] = outage_probability(o.params, *q_star);
    j["expected_reward"] = expected_reward(o.params, *q_star);
  }
  j["stats"] = to_json(stats);
  try {
    j["anonymity_uniformity"] = to_json(anonymity_uniformity(stats));
  } catch (const std::invalid_argument&) {
    j["anonymity_uniformity"] = nullptr;
  }
  emit(o.out, dump(j));

  if (!s.trace.empty()) {
    std::ostringstream os;
    write_round_trace(os, o.params, strategies, s.rounds, s.seed);
    emit(s.trace, os.str());
  }
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Relayer upload game: equilibrium solver, sweeps, dynamics, robustness, simulation"};
  app.set_config("--config", "", "TOML/INI config file; command-line flags override it");
  app.set_version_flag("--version", std::string(kArtifactName) + " " + kArtifactVersion);
  app.require_subcommand(1);

  CommonOptions solve_o, sweep_o, dyn_o, rob_o, sim_o;
  SweepOptions sweep_s;
  DynamicsOptions dyn_s;
  RobustnessOptions rob_s;
  SimulateOptions sim_s;

  auto* solve = app.add_subcommand("solve", "solve one instance; prints a JSON report");
  add_common(solve, solve_o);

  auto* sweep = app.add_subcommand("sweep", "sweep one parameter; prints CSV");
  add_common(sweep, sweep_o);
  sweep->add_option("--axis", sweep_s.axis, "N, c_f, c_l or p")->capture_default_str();
  sweep->add_option("--values", sweep_s.values, "start:stop:step or a comma list")
      ->capture_default_str();
  sweep->add_option("--outputs", sweep_s.outputs, "subset of q_star,outage,reward")
      ->delimiter(',');
  sweep->add_option("--threads", sweep_s.threads, "worker threads (0 = hardware)");

  auto* dyn = app.add_subcommand("dynamics", "integrate the replicator dynamic; prints CSV");
  add_common(dyn, dyn_o);
  dyn->add_option("--mu", dyn_s.mu, "adaptation rate")->capture_default_str();
  dyn->add_option("--q0", dyn_s.q0, "initial states ('eq' = equilibrium)")->delimiter(',');
  dyn->add_option("--t-end", dyn_s.t_end, "integration horizon")->capture_default_str();
  dyn->add_option("--dt", dyn_s.dt, "RK4 step")->capture_default_str();

  auto* rob = app.add_subcommand("robustness", "coalition abstention scan or invasion barrier");
  add_common(rob, rob_o);
  rob->add_option("--mode", rob_s.mode, "coalition or barrier")->capture_default_str();
  rob->add_option("--qm-step", rob_s.qm_step, "mutant strategy grid step")
      ->capture_default_str();

  auto* sim = app.add_subcommand("simulate", "Monte Carlo rounds; prints JSON statistics");
  add_common(sim, sim_o);
  sim->add_option("--strategy", sim_s.strategy,
                  "equilibrium, all-upload, all-abstain, a probability or a comma list")
      ->capture_default_str();
  sim->add_option("--rounds", sim_s.rounds, "number of rounds")->capture_default_str();
  sim->add_option("--seed", sim_s.seed, "64-bit seed")->capture_default_str();
  sim->add_option("--trace", sim_s.trace, "per-round trace CSV (first 100000 rounds)");
  sim->add_option("--threads", sim_s.threads, "worker threads (0 = hardware)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kExitInvalid;
  }

  try {
    if (*solve) return run_solve(solve_o);
    if (*sweep) return run_sweep_cmd(sweep_o, sweep_s);
    if (*dyn) return run_dynamics(dyn_o, dyn_s);
    if (*rob) return run_robustness(rob_o, rob_s);
    if (*sim) return run_simulate(sim_o, sim_s);
  } catch (const InvalidParams& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::domain_error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitInvalid;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kExitFailure;
  }
  return kExitInvalid;
}
