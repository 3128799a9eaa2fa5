#include "rlfalsify/experiments.hpp"

#include <algorithm>
#include <sstream>

#include "rlfalsify/errors.hpp"
#include "rlfalsify/io.hpp"
#include "rlfalsify/random.hpp"

namespace rlfalsify {
namespace {

std::string lambda_tag(double lambda) {
  std::string s = io::format_double(lambda);
  std::replace(s.begin(), s.end(), '.', 'p');
  return s;
}

std::string csv_preamble(const std::string& kind, const std::string& meta = {}) {
  std::string out = "# rlfalsify-csv v1 " + kind;
  if (!meta.empty()) out += " " + meta;
  return out + "\n";
}

}  // namespace

Mdp random_walk_mdp(const RandomWalkSpec& spec) {
  if (spec.n < 2) throw Error(ErrorCode::kInvalidArgument, "random walk needs at least two states");
  const int n = spec.n;
  Mdp mdp;
  mdp.num_states = n;
  mdp.num_controls = 1;
  mdp.alpha = spec.alpha;
  mdp.actions.assign(static_cast<std::size_t>(n), std::vector<int>{0});
  Matrix p = Matrix::Zero(n, n);
  p(0, 0) = p(0, 1) = 0.5;
  p(n - 1, n - 1) = p(n - 1, n - 2) = 0.5;
  for (int k = 1; k + 1 < n; ++k) p(k, k - 1) = p(k, k + 1) = 0.5;
  mdp.transitions = {p};
  mdp.costs = zero_table(mdp);
  for (int k = 1; k <= n; ++k) mdp.costs(k - 1, 0) = k <= n / 2 ? k : n + 1 - k;
  validate(mdp);
  return mdp;
}

Policy first_control_policy(const Mdp& mdp) {
  Policy mu;
  for (const auto& us : mdp.actions) mu.control.push_back(us.front());
  return mu;
}

FeatureBasis quadratic_basis(int n) {
  Matrix phi(n, 3);
  const double center = (n + 1) / 2.0;
  const double half = n / 2.0;
  for (int i = 1; i <= n; ++i) {
    const double s = (i - center) / half;
    phi.row(i - 1) << 1.0, s, s * s;
  }
  return FeatureBasis(std::move(phi));
}

CaseStudyResult run_case_study(const ExperimentConfig& cfg, const RandomWalkSpec& spec) {
  if (cfg.trajectory_length < 0) throw Error(ErrorCode::kInvalidArgument, "trajectory length must be non-negative");
  CaseStudyResult res;
  res.spec = spec;
  res.lambdas = cfg.lambdas;
  const Mdp mdp = random_walk_mdp(spec);
  const Policy mu = first_control_policy(mdp);
  res.basis = quadratic_basis(spec.n);
  res.j_mu = evaluate_policy_exact(mdp, mu);

  CostTable manipulated = mdp.costs;
  manipulated(spec.n - 1, mu(spec.n - 1)) = cfg.attacked_cost;

  for (double lambda : cfg.lambdas) {
    res.fixed_points.push_back(td_fixed_point(mdp, mu, res.basis, lambda, mdp.costs));
    res.manipulated_fixed_points.push_back(td_fixed_point(mdp, mu, res.basis, lambda, manipulated));

    TdConfig td;
    td.lambda = lambda;
    td.stepsize = cfg.stepsize;
    td.horizon = cfg.trajectory_length;
    td.seed = cfg.seed;
    res.runs.push_back(run_td(mdp, mu, res.basis, td, truthful_costs(mdp)));
    res.manipulated_runs.push_back(run_td(mdp, mu, res.basis, td, stealthy_costs(manipulated)));
  }
  res.distribution = stationary_distribution(mdp, mu);
  res.projected_j_mu = projection_matrix(res.basis, res.distribution) * res.j_mu;
  return res;
}

BoundSweepResult run_bound_sweep(const ExperimentConfig& cfg, double lambda, const RandomWalkSpec& spec) {
  if (cfg.num_falsifications < 1) throw Error(ErrorCode::kInvalidArgument, "need at least one falsification");
  const Mdp mdp = random_walk_mdp(spec);
  const Policy mu = first_control_policy(mdp);
  const FeatureBasis basis = quadratic_basis(spec.n);

  BoundSweepResult res;
  res.lambda = lambda;
  res.alpha = mdp.alpha;
  Rng rng(cfg.seed);
  for (int k = 0; k < cfg.num_falsifications; ++k) {
    const double half_width = cfg.max_perturbation * (k + 1) / cfg.num_falsifications;
    CostTable eta = zero_table(mdp);
    for (int i = 0; i < mdp.num_states; ++i) eta(i, mu(i)) = uniform(rng, -half_width, half_width);
    const TdBoundReport rep =
        td_attack_bound_check(mdp, mu, basis, lambda, CostFalsification::from_perturbation(mdp, eta));
    res.projection_error = rep.projection_error;
    res.points.push_back({half_width, rep.eta_norm, rep.approximation_error, rep.full_rhs(), rep.lhs, rep.holds});
    if (!rep.holds) ++res.violations;
  }
  return res;
}

std::string case_study_csv(const CaseStudyResult& r) {
  std::ostringstream out;
  out << csv_preamble("case_study", "n=" + std::to_string(r.spec.n) + " alpha=" + io::format_double(r.spec.alpha) +
                                        " basis=quadratic");
  out << "state,J_mu,Pi_J_mu";
  for (double l : r.lambdas) out << ",analytic_lambda" << lambda_tag(l) << ",simulated_lambda" << lambda_tag(l);
  for (double l : r.lambdas) {
    out << ",manipulated_analytic_lambda" << lambda_tag(l) << ",manipulated_simulated_lambda" << lambda_tag(l);
  }
  out << "\n";
  for (int i = 0; i < r.spec.n; ++i) {
    out << (i + 1) << ',' << io::format_double(r.j_mu(i)) << ',' << io::format_double(r.projected_j_mu(i));
    for (std::size_t k = 0; k < r.lambdas.size(); ++k) {
      out << ',' << io::format_double(r.analytic(k)(i)) << ',' << io::format_double(r.simulated(k)(i));
    }
    for (std::size_t k = 0; k < r.lambdas.size(); ++k) {
      out << ',' << io::format_double(r.manipulated_analytic(k)(i)) << ','
          << io::format_double(r.manipulated_simulated(k)(i));
    }
    out << "\n";
  }
  return out.str();
}

std::string td_trajectory_csv(const TdRun& run, const TdFixedPoint& fixed) {
  std::ostringstream out;
  out << csv_preamble("td_trajectory");
  out << 't';
  for (Eigen::Index k = 0; k < fixed.r_star.size(); ++k) out << ",r_" << (k + 1);
  out << ",dist_to_rstar\n";
  for (const auto& cp : run.checkpoints) {
    out << cp.t;
    for (Eigen::Index k = 0; k < cp.r.size(); ++k) out << ',' << io::format_double(cp.r(k));
    out << ',' << io::format_double((cp.r - fixed.r_star).norm()) << "\n";
  }
  return out.str();
}

std::string bound_sweep_csv(const BoundSweepResult& r, const ExperimentConfig& cfg) {
  std::ostringstream out;
  out << csv_preamble("bound_sweep", "lambda=" + io::format_double(r.lambda) + " alpha=" + io::format_double(r.alpha) +
                                         " eta=uniform[-u,u] u=linear(0," + io::format_double(cfg.max_perturbation) +
                                         "] samples=" + std::to_string(r.points.size()) +
                                         " seed=" + std::to_string(cfg.seed) +
                                         " projection_error=" + io::format_double(r.projection_error));
  out << "eta_norm,lhs,rhs,holds\n";
  for (const auto& p : r.points) {
    out << io::format_double(p.eta_norm) << ',' << io::format_double(p.lhs) << ',' << io::format_double(p.rhs) << ','
        << (p.holds ? "true" : "false") << "\n";
  }
  return out.str();
}

std::string q_checkpoint_csv(const std::vector<QCheckpointStats>& stats) {
  std::ostringstream out;
  out << csv_preamble("q_learning");
  out << "t,max_bellman_residual,dist_to_Qstar_inf\n";
  for (const auto& s : stats) {
    out << s.t << ',' << io::format_double(s.max_bellman_residual) << ',' << io::format_double(s.dist_to_fixed_point)
        << "\n";
  }
  return out.str();
}

std::string robust_region_csv(const RobustRegionReport& rep) {
  std::ostringstream out;
  std::string optimal = io::policy_label(rep.optimal);
  std::replace(optimal.begin(), optimal.end(), ' ', ';');
  out << csv_preamble("robust_region", "norm=" + rep.norm_tag + " optimal_policy=" + optimal +
                                           (rep.no_attack_needed ? " no_attack_needed=true" : ""));
  out << "alpha,distance,radius,target_policy\n";
  out << io::format_double(rep.alpha) << ',' << io::format_double(rep.d_point_to_set) << ','
      << io::format_double(rep.radius) << ',' << io::policy_label(rep.target) << "\n";
  return out.str();
}

std::string robust_region_sampling_csv(const RobustRegionSampling& s) {
  std::ostringstream out;
  out << csv_preamble("robust_region_sampling");
  out << "samples,hits\n" << s.samples << ',' << s.hits << "\n";
  return out.str();
}

std::vector<std::filesystem::path> write_case_study(const CaseStudyResult& r, const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> written;
  auto emit = [&](const std::filesystem::path& p, const std::string& text) {
    io::write_text(p, text);
    written.push_back(p);
  };
  emit(dir / "case_study.csv", case_study_csv(r));
  for (std::size_t k = 0; k < r.lambdas.size(); ++k) {
    const std::string tag = lambda_tag(r.lambdas[k]);
    emit(dir / ("td_trajectory_lambda" + tag + ".csv"), td_trajectory_csv(r.runs[k], r.fixed_points[k]));
    emit(dir / ("td_trajectory_manipulated_lambda" + tag + ".csv"),
         td_trajectory_csv(r.manipulated_runs[k], r.manipulated_fixed_points[k]));
  }
  return written;
}

}  // namespace rlfalsify
