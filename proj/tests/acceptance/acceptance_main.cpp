// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "rlfalsify/attack.hpp"
#include "rlfalsify/experiments.hpp"
#include "rlfalsify/qlearning.hpp"
#include "rlfalsify/synthesis.hpp"
#include "rlfalsify/td.hpp"
#include "support/generators.hpp"
#include "support/oracles.hpp"

using namespace rlfalsify;
namespace t = rlfalsify::testing;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

struct Criterion {
  int id;
  std::string name;
  double time_limit_s;  ///< 0 when the criterion has no runtime bound
  std::function<Outcome()> run;
};

std::string fmt(const char* pattern, double a, double b = 0, double c = 0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, pattern, a, b, c);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

Outcome q_lipschitz() {
  Rng rng(101);
  int violations = 0;
  double worst = -1e300;
  for (int k = 0; k < 200; ++k) {
    const int n = 1 + uniform_index(rng, 6);
    const int m = 1 + uniform_index(rng, 4);
    const double alpha = k % 2 ? 0.9 : 0.5;
    const Mdp mdp = t::random_mdp(rng, n, m, alpha, 0, 10, true);
    const auto fals = CostFalsification::from_perturbation(mdp, t::random_table(rng, mdp, -10, 10));
    const auto rep = q_lipschitz_check(mdp, fals);
    worst = std::max(worst, rep.lhs - rep.rhs);
    if (!(rep.lhs <= rep.rhs + 1e-8)) ++violations;
  }
  return {violations == 0, fmt("%.0f/200 violations, max(lhs - rhs) = %.3g", violations, worst)};
}

Outcome constant_shift() {
  Rng rng(102);
  double worst = 0.0;
  for (double c : {-1.0, 0.5, 3.0}) {
    for (int k = 0; k < 10; ++k) {
      const double alpha = k % 2 ? 0.9 : 0.5;
      const Mdp mdp = t::random_mdp(rng, 1 + k % 6, 1 + k % 4, alpha, 0, 10, true);
      const auto rep = q_lipschitz_check(mdp, CostFalsification::from_table(mdp, mdp.costs.shifted(c)));
      worst = std::max({worst, std::abs(rep.lhs - std::abs(c) / (1 - alpha)), std::abs(rep.rhs - rep.lhs)});
    }
  }
  return {worst <= 1e-7, fmt("max |lhs - |c|/(1-alpha)| = %.3g over 30 MDPs", worst)};
}

Outcome td_attack_bound() {
  const Mdp mdp = random_walk_mdp();
  const Policy mu = first_control_policy(mdp);
  const FeatureBasis basis = quadratic_basis(20);
  int shift_violations = 0;
  int full_violations = 0;
  for (double lambda : {0.0, 1.0}) {
    ExperimentConfig cfg;
    cfg.seed = 103;
    Rng rng(cfg.seed);
    for (int k = 0; k < cfg.num_falsifications; ++k) {
      const double u = cfg.max_perturbation * (k + 1) / cfg.num_falsifications;
      CostTable eta = zero_table(mdp);
      for (int i = 0; i < 20; ++i) eta(i, 0) = uniform(rng, -u, u);
      const auto rep = td_attack_bound_check(mdp, mu, basis, lambda, CostFalsification::from_perturbation(mdp, eta));
      if (!(rep.lhs <= rep.rhs_perturbation_term)) ++shift_violations;
      if (!(rep.approximation_error <= rep.full_rhs())) ++full_violations;
    }
  }
  return {shift_violations == 0 && full_violations == 0,
          fmt("lambda in {0,1}, 100 falsifications each: %.0f shift-bound and %.0f full-bound violations",
              shift_violations, full_violations)};
}

Outcome lambda_one_projection() {
  double worst = 0.0;
  {
    const Mdp mdp = random_walk_mdp();
    const Policy mu = first_control_policy(mdp);
    const FeatureBasis basis = quadratic_basis(20);
    const auto fp = td_fixed_point(mdp, mu, basis, 1.0, mdp.costs);
    worst = (basis.matrix() * fp.r_star - fp.projection * evaluate_policy_exact(mdp, mu)).lpNorm<Eigen::Infinity>();
  }
  Rng rng(104);
  for (int k = 0; k < 20; ++k) {
    const int n = 3 + uniform_index(rng, 8);
    const Mdp mdp = t::random_mcp(rng, n, 0.9);
    const Policy mu = t::all_first(mdp);
    const FeatureBasis basis{t::random_matrix(rng, n, 1 + uniform_index(rng, n - 1))};
    const auto fp = td_fixed_point(mdp, mu, basis, 1.0, mdp.costs);
    worst = std::max(worst, (basis.matrix() * fp.r_star - fp.projection * evaluate_policy_exact(mdp, mu))
                                .lpNorm<Eigen::Infinity>());
  }
  return {worst <= 1e-6, fmt("max |Phi r* - Pi J| = %.3g (case study + 20 random MCPs)", worst)};
}

Outcome tabular_exactness() {
  Rng rng(105);
  double worst = 0.0;
  for (int k = 0; k < 20; ++k) {
    const int n = 2 + uniform_index(rng, 8);
    const Mdp mdp = t::random_mcp(rng, n, k % 2 ? 0.9 : 0.5);
    const Policy mu = t::all_first(mdp);
    const Vector j = evaluate_policy_exact(mdp, mu);
    for (double lambda : {0.0, 0.5, 1.0}) {
      const auto fp = td_fixed_point(mdp, mu, FeatureBasis::identity(n), lambda, mdp.costs);
      worst = std::max(worst, (fp.r_star - j).lpNorm<Eigen::Infinity>());
    }
  }
  return {worst <= 1e-8, fmt("max |r* - J| = %.3g over 20 MCPs x 3 lambdas", worst)};
}

Outcome td_convergence() {
  const Mdp mdp = random_walk_mdp();
  const Policy mu = first_control_policy(mdp);
  const FeatureBasis basis = quadratic_basis(20);
  const StationaryDistribution dist = stationary_distribution(mdp, mu);
  const double threshold = 0.1 * weighted_norm(evaluate_policy_exact(mdp, mu), dist);
  bool pass = true;
  std::ostringstream detail;
  for (double lambda : {0.0, 1.0}) {
    const Vector target = basis.matrix() * td_fixed_point(mdp, mu, basis, lambda, mdp.costs).r_star;
    std::vector<double> errors;
    for (std::uint64_t seed = 1; seed <= 5; ++seed) {
      TdConfig cfg;
      cfg.lambda = lambda;
      cfg.seed = seed;
      const TdRun run = run_td(mdp, mu, basis, cfg, truthful_costs(mdp));
      errors.push_back(weighted_norm(basis.matrix() * run.r_final - target, dist));
    }
    const double med = median(errors);
    pass = pass && med <= threshold;
    detail << "lambda=" << lambda << " median " << fmt("%.3g", med) << "; ";
  }
  detail << "threshold " << fmt("%.3g", threshold);
  return {pass, detail.str()};
}

Outcome q_convergence() {
  Rng rng(107);
  int truthful_ok = 0;
  int stealthy_ok = 0;
  for (int k = 0; k < 10; ++k) {
    const int n = 2 + uniform_index(rng, 3);
    const int m = 1 + uniform_index(rng, 2);
    const Mdp mdp = t::random_mdp(rng, n, m, 0.5, 0, 10, true);
    QLearnConfig cfg;
    cfg.seed = 1000 + static_cast<std::uint64_t>(k);

    const QTable q_star = q_value_iteration(mdp, mdp.costs);
    const auto run = run_q_learning(mdp, cfg, truthful_costs(mdp));
    if (sup_distance(run.q_final, q_star) <= 0.05 * (1 + sup_norm(q_star))) ++truthful_ok;

    const CostTable g_tilde = mdp.costs + t::random_table(rng, mdp, -5, 5);
    const QTable q_tilde = falsified_q_fixed_point(mdp, g_tilde);
    const auto fals = run_q_learning(mdp, cfg, stealthy_costs(g_tilde));
    if (sup_distance(fals.q_final, q_tilde) <= 0.05 * (1 + sup_norm(q_tilde))) ++stealthy_ok;
  }
  return {truthful_ok >= 9 && stealthy_ok >= 9,
          fmt("within tolerance: %.0f/10 truthful, %.0f/10 stealthy falsification", truthful_ok, stealthy_ok)};
}

Outcome iff_conditions() {
  Rng rng(108);
  int disagreements = 0;
  int positives = 0;
  for (int k = 0; k < 500; ++k) {
    const Mdp mdp = t::random_mdp(rng, 2 + uniform_index(rng, 4), 1 + uniform_index(rng, 3), k % 2 ? 0.5 : 0.9, 0, 10,
                                  true);
    const Policy target = t::random_policy(rng, mdp);
    CostTable g = t::random_table(rng, mdp, -10, 10);
    if (k % 2) g = synthesize_full_attack(mdp, target, 0.1) + t::random_table(rng, mdp, -0.2, 0.2);
    const bool predicted = check_target_conditions(mdp, g, target).satisfied;
    const bool oracle = greedy_policy(falsified_q_fixed_point(mdp, g)) == target;
    if (predicted != oracle) ++disagreements;
    if (oracle) ++positives;
  }
  return {disagreements == 0 && positives > 0 && positives < 500,
          fmt("%.0f disagreements over 500 triples (%.0f reach the target, %.0f do not)", disagreements, positives,
              500 - positives)};
}

Outcome full_synthesis() {
  Rng rng(109);
  int reached = 0;
  for (int k = 0; k < 100; ++k) {
    const Mdp mdp = t::random_mdp(rng, 2 + uniform_index(rng, 5), 2 + uniform_index(rng, 3), k % 2 ? 0.5 : 0.9, 0, 10,
                                  k % 3 == 0);
    const Policy target = t::random_policy(rng, mdp);
    const CostTable g = synthesize_full_attack(mdp, target, 0.1);
    if (greedy_policy(falsified_q_fixed_point(mdp, g)) == target) ++reached;
  }
  return {reached == 100, fmt("%.0f/100 targets reached", reached)};
}

Outcome robust_region_check() {
  Rng rng(110);
  int pairs = 0;
  int hits = 0;
  while (pairs < 50) {
    const Mdp mdp = t::random_mdp(rng, 2 + uniform_index(rng, 3), 2, pairs % 2 ? 0.5 : 0.9);
    const Policy optimal = greedy_policy(q_value_iteration(mdp, mdp.costs));
    const Policy target = t::random_policy_except(rng, mdp, optimal);
    const auto rep = robust_region(mdp, target);
    ++pairs;
    for (int s = 0; s < 1000; ++s) {
      // half uniform in the open cube, half at its corners pulled just inside
      const double r = rep.radius * (1 - 1e-9);
      CostTable eta = s % 2 ? t::random_table(rng, mdp, -r, r) : zero_table(mdp);
      if (s % 2 == 0) {
        for (int i = 0; i < mdp.num_states; ++i) {
          for (int u : mdp.actions[i]) eta(i, u) = uniform01(rng) < 0.5 ? -r : r;
        }
      }
      if (greedy_policy(falsified_q_fixed_point(mdp, mdp.costs + eta)) == target) ++hits;
    }
  }

  constexpr double kStep = 0.01;
  double worst_gap = 0.0;
  for (int k = 0; k < 20; ++k) {
    const Mdp mdp = t::random_mdp(rng, 3, 2, 0.9);
    const QTable q = t::random_table(rng, mdp, 0, 2);
    const Policy target = t::random_policy(rng, mdp);
    const double closed = point_to_set_distance(q, target).value;
    const double grid = t::grid_point_to_set(q, target, kStep, 200);
    worst_gap = std::max(worst_gap, std::abs(grid - closed));
  }
  return {hits == 0 && worst_gap <= 2 * kStep,
          fmt("%.0f target hits in 50x1000 samples; max |closed form - grid| = %.3g (step %.2g)", hits, worst_gap,
              kStep)};
}

Outcome frechet() {
  Rng rng(111);
  int checked = 0;
  int attempts = 0;
  double worst = 0.0;
  while (checked < 50 && attempts < 10000) {
    ++attempts;
    const Mdp mdp = t::random_mdp(rng, 2 + uniform_index(rng, 4), 2 + uniform_index(rng, 2), 0.9, 0, 10, true);
    const CostTable g = t::random_table(rng, mdp, 0, 10);
    const CostTable h = t::random_table(rng, mdp, -0.1, 0.1);
    const QTable q = falsified_q_fixed_point(mdp, g);
    const QTable q_h = falsified_q_fixed_point(mdp, g + h);
    const Policy mu = greedy_policy(q);
    const PolicyRegion region(mu);
    if (!region.contains(q) || !region.contains(q_h)) continue;
    ++checked;
    worst = std::max(worst, sup_distance(q_h - q, frechet_derivative_apply(mdp, mu, h)));
  }
  return {checked == 50 && worst <= 1e-8, fmt("%.0f pairs, max |f(g+h) - f(g) - Gh| = %.3g", checked, worst)};
}

Outcome gordan() {
  struct Case {
    std::string name;
    Matrix H;
    bool feasible;
  };
  std::vector<Case> cases;
  auto make = [](int r, int c, std::initializer_list<double> v) {
    Matrix m(r, c);
    auto it = v.begin();
    for (int i = 0; i < r; ++i) {
      for (int j = 0; j < c; ++j) m(i, j) = *it++;
    }
    return m;
  };
  cases.push_back({"1x1 [-1]", make(1, 1, {-1}), true});
  cases.push_back({"1x1 [2]", make(1, 1, {2}), true});
  cases.push_back({"1x1 [0]", make(1, 1, {0}), false});
  cases.push_back({"opposite rows", make(2, 1, {1, -1}), false});
  cases.push_back({"opposite rows 2d", make(2, 2, {1, 2, -1, -2}), false});
  cases.push_back({"negative column", make(3, 2, {-1, 5, -2, -3, -0.5, 4}), true});
  cases.push_back({"cone", make(2, 2, {-1, 1, -1, -1}), true});
  cases.push_back({"positive hull of zero", make(3, 2, {1, 0, 0, 1, -1, -1}), false});
  cases.push_back({"zero row", make(2, 2, {-1, 0, 0, 0}), false});
  cases.push_back({"redundant feasible", make(3, 3, {-1, 0, 0, -2, 0, 0, 1, -1, 0}), true});

  int correct = 0;
  double worst_residual = 0.0;
  bool valid = true;
  for (const auto& c : cases) {
    const auto r = gordan_feasibility(c.H);
    if (r.feasible == c.feasible) ++correct;
    if (r.x.has_value() == r.certificate.has_value()) valid = false;
    if (r.x && !((c.H * *r.x).maxCoeff() < 0)) valid = false;
    if (r.certificate) {
      const Vector& y = *r.certificate;
      if (y.minCoeff() < 0 || !(y.sum() > 0)) valid = false;
      worst_residual = std::max(worst_residual, (c.H.transpose() * y).lpNorm<Eigen::Infinity>());
    }
  }
  return {correct == static_cast<int>(cases.size()) && valid && worst_residual <= 1e-8,
          fmt("%.0f/%.0f instances classified, max |H^T y| = %.3g", correct, static_cast<double>(cases.size()),
              worst_residual)};
}

Outcome case_study_qualitative() {
  ExperimentConfig cfg;
  cfg.seed = 113;
  const auto r = run_case_study(cfg);
  bool pass = true;
  std::ostringstream detail;
  for (std::size_t k = 0; k < r.lambdas.size(); ++k) {
    const double clean = weighted_norm(r.simulated(k) - r.j_mu, r.distribution);
    const double attacked = weighted_norm(r.manipulated_simulated(k) - r.j_mu, r.distribution);
    const double clean_exact = weighted_norm(r.analytic(k) - r.j_mu, r.distribution);
    const double attacked_exact = weighted_norm(r.manipulated_analytic(k) - r.j_mu, r.distribution);
    double far_shift = 1e300;
    for (int i = 0; i < 10; ++i) far_shift = std::min(far_shift, std::abs(r.manipulated_simulated(k)(i) - r.simulated(k)(i)));
    pass = pass && attacked > clean && attacked_exact > clean_exact && far_shift > 1e-6;
    if (k > 0) detail << "; ";
    detail << "lambda=" << r.lambdas[k] << fmt(" error %.3g -> %.3g, min shift at i<=10 %.3g", clean, attacked, far_shift);
  }
  return {pass, detail.str()};
}

}  // namespace

int main() {
  const std::vector<Criterion> criteria{
      {1, "Q-Lipschitz bound over 200 random MDPs", 10.0, q_lipschitz},
      {2, "constant-shift tightness", 0.0, constant_shift},
      {3, "TD attack bound on the random-walk case study", 5.0, td_attack_bound},
      {4, "lambda = 1 projection identity", 0.0, lambda_one_projection},
      {5, "tabular exactness", 0.0, tabular_exactness},
      {6, "stochastic TD convergence", 0.0, td_convergence},
      {7, "stochastic Q-learning convergence", 60.0, q_convergence},
      {8, "iff-conditions agree with the fixed-point oracle", 0.0, iff_conditions},
      {9, "full-control synthesis", 0.0, full_synthesis},
      {10, "robust region", 0.0, robust_region_check},
      {11, "Frechet derivative within a policy region", 0.0, frechet},
      {12, "Gordan check", 0.0, gordan},
      {13, "case-study manipulation", 0.0, case_study_qualitative},
  };

  int failures = 0;
  for (const auto& c : criteria) {
    const auto start = std::chrono::steady_clock::now();
    Outcome out;
    try {
      out = c.run();
    } catch (const std::exception& e) {
      out = {false, std::string("exception: ") + e.what()};
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
    if (c.time_limit_s > 0 && secs >= c.time_limit_s) {
      out.pass = false;
      out.detail += fmt(" [over the %.0f s limit]", c.time_limit_s);
    }
    if (!out.pass) ++failures;
    std::printf("%s  %2d  %s: %s (%.2f s)\n", out.pass ? "PASS" : "FAIL", c.id, c.name.c_str(), out.detail.c_str(),
                secs);
    std::fflush(stdout);
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
