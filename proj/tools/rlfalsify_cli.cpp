#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include <cstdint>
#include <filesystem>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "rlfalsify/attack.hpp"
#include "rlfalsify/errors.hpp"
#include "rlfalsify/experiments.hpp"
#include "rlfalsify/io.hpp"
#include "rlfalsify/qlearning.hpp"
#include "rlfalsify/synthesis.hpp"
#include "rlfalsify/td.hpp"

namespace fs = std::filesystem;
using namespace rlfalsify;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitValidation = 2;
constexpr int kExitNumerical = 3;
constexpr int kExitTheorem = 4;

struct Options {
  std::uint64_t seed = 0;
  std::string out;
  std::string mdp;
  std::string policy;
  std::string basis;
  std::string falsified;
  std::string matrix;
  std::optional<std::string> states;
  std::vector<double> lambdas;
  double margin = 0.1;
  std::int64_t horizon = -1;
  int samples = -1;
};

/// Writes to --out when given, stdout otherwise.
void emit(const Options& opt, const std::string& text) {
  if (opt.out.empty()) {
    std::cout << text;
  } else {
    io::write_text(opt.out, text);
    std::cerr << "wrote " << opt.out << "\n";
  }
}

Mdp require_mdp(const Options& opt) {
  if (opt.mdp.empty()) throw Error(ErrorCode::kInvalidArgument, "--mdp is required");
  return io::load_mdp(opt.mdp);
}

Policy require_policy(const Options& opt, const Mdp& mdp) {
  if (opt.policy.empty()) throw Error(ErrorCode::kInvalidArgument, "--policy is required");
  return io::load_policy(opt.policy, mdp);
}

CostTable costs_for(const Options& opt, const Mdp& mdp) {
  return opt.falsified.empty() ? mdp.costs : io::load_cost_table(opt.falsified, mdp);
}

double single_lambda(const Options& opt, double fallback) {
  if (opt.lambdas.size() > 1) throw Error(ErrorCode::kInvalidArgument, "this command takes one --lambda");
  return opt.lambdas.empty() ? fallback : opt.lambdas.front();
}

nlohmann::json table_json(const StateActionTable& t) {
  auto j = nlohmann::json::array();
  for (int i = 0; i < t.num_states(); ++i) {
    auto row = nlohmann::json::array();
    for (int u : t.admissible()[static_cast<std::size_t>(i)]) row.push_back(t(i, u));
    j.push_back(std::move(row));
  }
  return j;
}

nlohmann::json policy_json(const Policy& mu) {
  auto j = nlohmann::json::array();
  for (int u : mu.control) j.push_back(u + 1);
  return j;
}

nlohmann::json vector_json(const Vector& v) {
  auto j = nlohmann::json::array();
  for (Eigen::Index k = 0; k < v.size(); ++k) j.push_back(v(k));
  return j;
}

std::vector<int> parse_states(const std::string& text, int n) {
  std::vector<int> out;
  if (text.empty() || text == "none") return out;
  std::stringstream in(text);
  for (std::string item; std::getline(in, item, ',');) {
    int s = 0;
    try {
      std::size_t used = 0;
      s = std::stoi(item, &used);
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw Error(ErrorCode::kInvalidArgument, "--states entry '" + item + "' is not an integer");
    }
    if (s < 1 || s > n) throw Error(ErrorCode::kInvalidArgument, "--states entry " + item + " is out of range");
    out.push_back(s - 1);
  }
  return out;
}

int cmd_validate(const Options& opt) {
  const Mdp mdp = require_mdp(opt);
  if (!opt.policy.empty()) io::load_policy(opt.policy, mdp);
  if (!opt.falsified.empty()) io::load_cost_table(opt.falsified, mdp);
  std::cout << "ok: " << mdp.num_states << " states, " << mdp.num_controls << " controls, alpha "
            << io::format_double(mdp.alpha) << "\n";
  return kExitOk;
}

int cmd_solve(const Options& opt) {
  const Mdp mdp = require_mdp(opt);
  const CostTable cost = costs_for(opt, mdp);
  const QTable q = q_value_iteration(mdp, cost);
  const Policy mu = greedy_policy(q);
  nlohmann::json doc;
  doc["Q"] = table_json(q);
  doc["policy"] = policy_json(mu);
  doc["J"] = vector_json(evaluate_policy_exact(mdp, mu, cost));
  emit(opt, doc.dump(2) + "\n");
  return kExitOk;
}

int cmd_td_run(const Options& opt) {
  const Mdp mdp = require_mdp(opt);
  const Policy mu = require_policy(opt, mdp);
  const FeatureBasis basis =
      opt.basis.empty() ? FeatureBasis::identity(mdp.num_states) : io::load_basis(opt.basis, mdp.num_states);
  const CostTable cost = costs_for(opt, mdp);
  TdConfig cfg;
  cfg.lambda = single_lambda(opt, 0.0);
  cfg.seed = opt.seed;
  if (opt.horizon >= 0) cfg.horizon = opt.horizon;
  const TdRun run = run_td(mdp, mu, basis, cfg, stealthy_costs(cost));
  emit(opt, td_trajectory_csv(run, td_fixed_point(mdp, mu, basis, cfg.lambda, cost)));
  return kExitOk;
}

int cmd_q_run(const Options& opt) {
  const Mdp mdp = require_mdp(opt);
  const CostTable cost = costs_for(opt, mdp);
  QLearnConfig cfg;
  cfg.seed = opt.seed;
  if (opt.horizon >= 0) cfg.horizon = opt.horizon;
  const QLearnRun run = run_q_learning(mdp, cfg, stealthy_costs(cost));
  emit(opt, q_checkpoint_csv(checkpoint_stats(mdp, cost, run)));
  return kExitOk;
}

int cmd_case_study(const Options& opt) {
  ExperimentConfig cfg;
  cfg.seed = opt.seed;
  if (opt.horizon >= 0) cfg.trajectory_length = opt.horizon;
  if (!opt.lambdas.empty()) cfg.lambdas = opt.lambdas;
  cfg.output_dir = opt.out.empty() ? fs::path("case_study") : fs::path(opt.out);
  for (const auto& p : write_case_study(run_case_study(cfg), cfg.output_dir)) std::cerr << "wrote " << p.string() << "\n";
  return kExitOk;
}

int cmd_bound_sweep(const Options& opt) {
  ExperimentConfig cfg;
  cfg.seed = opt.seed;
  if (opt.samples >= 0) cfg.num_falsifications = opt.samples;
  const BoundSweepResult res = run_bound_sweep(cfg, single_lambda(opt, 1.0));
  emit(opt, bound_sweep_csv(res, cfg));
  if (res.violations > 0) {
    throw Error(ErrorCode::kBoundViolation, std::to_string(res.violations) + " sampled falsifications violate the bound");
  }
  return kExitOk;
}

int cmd_robust_region(const Options& opt) {
  const Mdp mdp = require_mdp(opt);
  const Policy target = require_policy(opt, mdp);
  const RobustRegionReport rep = robust_region(mdp, target);
  const RobustRegionSampling sampling = sample_robust_region(mdp, rep, opt.samples >= 0 ? opt.samples : 1000, opt.seed);
  if (opt.out.empty()) {
    std::cout << robust_region_csv(rep) << robust_region_sampling_csv(sampling);
  } else {
    const fs::path out(opt.out);
    fs::path sampled = out;
    sampled.replace_filename(out.stem().string() + "_sampling" + out.extension().string());
    io::write_text(out, robust_region_csv(rep));
    io::write_text(sampled, robust_region_sampling_csv(sampling));
    std::cerr << "wrote " << out.string() << "\nwrote " << sampled.string() << "\n";
  }
  if (rep.no_attack_needed) std::cerr << "target is already optimal; sampling skipped\n";
  if (sampling.hits > 0) {
    throw Error(ErrorCode::kBoundViolation,
                std::to_string(sampling.hits) + " falsifications inside the robust region reached the target");
  }
  return kExitOk;
}

int cmd_synthesize(const Options& opt) {
  SynthesisProblem problem;
  problem.mdp = require_mdp(opt);
  problem.target = require_policy(opt, problem.mdp);
  problem.margin = opt.margin;
  if (opt.states) {
    problem.controllable_states = parse_states(*opt.states, problem.mdp.num_states);
  } else {
    for (int i = 0; i < problem.mdp.num_states; ++i) problem.controllable_states.push_back(i);
  }
  const PartialAttackResult result = synthesize_partial_attack(problem);
  emit(opt, io::to_json(result));
  std::cerr << (result.feasible ? "feasible: " : "infeasible: ") << result.note << "\n";
  return kExitOk;
}

int cmd_gordan_check(const Options& opt) {
  if (opt.matrix.empty()) throw Error(ErrorCode::kInvalidArgument, "--matrix is required");
  const GordanResult r = gordan_feasibility(io::load_matrix(opt.matrix));
  nlohmann::json doc;
  doc["feasible"] = r.feasible;
  doc["x"] = r.x ? vector_json(*r.x) : nlohmann::json(nullptr);
  doc["certificate_y"] = r.certificate ? vector_json(*r.certificate) : nlohmann::json(nullptr);
  emit(opt, doc.dump(2) + "\n");
  return kExitOk;
}

int exit_code_for(ErrorCategory c) {
  switch (c) {
    case ErrorCategory::kValidation:
      return kExitValidation;
    case ErrorCategory::kNumerical:
      return kExitNumerical;
    case ErrorCategory::kTheoremViolation:
      return kExitTheorem;
  }
  return kExitNumerical;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cost-falsification analysis for TD(lambda) and Q-learning"};
  app.require_subcommand(1);
  Options opt;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--seed", opt.seed, "RNG seed");
    cmd->add_option("--out", opt.out, "Output file (directory for case-study)");
  };
  auto add_mdp = [&](CLI::App* cmd) { cmd->add_option("--mdp", opt.mdp, "MDP JSON file"); };
  auto add_policy = [&](CLI::App* cmd) { cmd->add_option("--policy", opt.policy, "Policy JSON file"); };
  auto add_falsified = [&](CLI::App* cmd) {
    cmd->add_option("--falsified", opt.falsified, "Cost table JSON replacing the MDP's g");
  };

  auto* validate_cmd = app.add_subcommand("validate", "Check an MDP (and optional policy / cost table)");
  add_common(validate_cmd);
  add_mdp(validate_cmd);
  add_policy(validate_cmd);
  add_falsified(validate_cmd);

  auto* solve_cmd = app.add_subcommand("solve", "Optimal Q-factors, greedy policy and values");
  add_common(solve_cmd);
  add_mdp(solve_cmd);
  add_falsified(solve_cmd);

  auto* td_cmd = app.add_subcommand("td-run", "Simulate TD(lambda) and write checkpoint CSV");
  add_common(td_cmd);
  add_mdp(td_cmd);
  add_policy(td_cmd);
  add_falsified(td_cmd);
  td_cmd->add_option("--basis", opt.basis, "Basis JSON file (identity when omitted)");
  td_cmd->add_option("--lambda", opt.lambdas, "Trace decay in [0, 1]");
  td_cmd->add_option("--horizon", opt.horizon, "Trajectory length");

  auto* q_cmd = app.add_subcommand("q-run", "Simulate Q-learning and write checkpoint CSV");
  add_common(q_cmd);
  add_mdp(q_cmd);
  add_falsified(q_cmd);
  q_cmd->add_option("--horizon", opt.horizon, "Number of transitions");

  auto* case_cmd = app.add_subcommand("case-study", "Random-walk case study CSVs");
  add_common(case_cmd);
  case_cmd->add_option("--lambda", opt.lambdas, "Trace decay values (repeatable)");
  case_cmd->add_option("--horizon", opt.horizon, "Trajectory length");

  auto* sweep_cmd = app.add_subcommand("bound-sweep", "Random falsifications against the TD attack bound");
  add_common(sweep_cmd);
  sweep_cmd->add_option("--lambda", opt.lambdas, "Trace decay in [0, 1]");
  sweep_cmd->add_option("--samples", opt.samples, "Number of falsifications");

  auto* robust_cmd = app.add_subcommand("robust-region", "Robust-region radius with sampled verification");
  add_common(robust_cmd);
  add_mdp(robust_cmd);
  add_policy(robust_cmd);
  robust_cmd->add_option("--samples", opt.samples, "Falsifications sampled inside the ball");

  auto* synth_cmd = app.add_subcommand("synthesize", "Synthesize a falsified cost table for a target policy");
  add_common(synth_cmd);
  add_mdp(synth_cmd);
  add_policy(synth_cmd);
  synth_cmd->add_option("--margin", opt.margin, "Strict-inequality slack (> 0)");
  synth_cmd->add_option("--states", opt.states, "Controllable states, 1-based comma list ('none' for no states)");

  auto* gordan_cmd = app.add_subcommand("gordan-check", "Decide whether H x < 0 has a solution");
  add_common(gordan_cmd);
  gordan_cmd->add_option("--matrix,--H", opt.matrix, "Matrix JSON file");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*validate_cmd) return cmd_validate(opt);
    if (*solve_cmd) return cmd_solve(opt);
    if (*td_cmd) return cmd_td_run(opt);
    if (*q_cmd) return cmd_q_run(opt);
    if (*case_cmd) return cmd_case_study(opt);
    if (*sweep_cmd) return cmd_bound_sweep(opt);
    if (*robust_cmd) return cmd_robust_region(opt);
    if (*synth_cmd) return cmd_synthesize(opt);
    if (*gordan_cmd) return cmd_gordan_check(opt);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return exit_code_for(e.category());
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitNumerical;
  }
  return kExitValidation;
}
