#include "rlfalsify/attack.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlfalsify/errors.hpp"
#include "rlfalsify/qlearning.hpp"
#include "rlfalsify/random.hpp"

namespace rlfalsify {
namespace {

constexpr double kBoundSlack = 1e-9;

bool within(double lhs, double rhs) { return lhs <= rhs + kBoundSlack * std::max(1.0, std::abs(rhs)); }

void check_policy_shape(const Policy& mu, const ActionSets& actions) {
  if (mu.size() != static_cast<int>(actions.size())) {
    throw Error(ErrorCode::kInvalidArgument, "policy length differs from state count");
  }
  for (int i = 0; i < mu.size(); ++i) {
    const auto& us = actions[static_cast<std::size_t>(i)];
    if (!std::binary_search(us.begin(), us.end(), mu(i))) {
      throw Error(ErrorCode::kInvalidArgument, "policy picks an inadmissible control at state " + std::to_string(i + 1));
    }
  }
}

/// Random table inside V_mu: other controls uniform in [-1, 1], target
/// control strictly below the row minimum of the others.
QTable random_member(const Policy& mu, const ActionSets& actions, int num_controls, Rng& rng) {
  QTable q(actions, num_controls);
  for (int i = 0; i < mu.size(); ++i) {
    double other_min = std::numeric_limits<double>::infinity();
    for (int u : actions[static_cast<std::size_t>(i)]) {
      if (u == mu(i)) continue;
      q(i, u) = uniform(rng, -1.0, 1.0);
      other_min = std::min(other_min, q(i, u));
    }
    q(i, mu(i)) = std::isfinite(other_min) ? other_min - uniform(rng, 1e-3, 1.0) : uniform(rng, -1.0, 1.0);
  }
  return q;
}

}  // namespace

CostFalsification CostFalsification::from_table(const Mdp& mdp, CostTable g_tilde) {
  validate_cost_table(mdp, g_tilde);
  CostFalsification f;
  f.eta = g_tilde - mdp.costs;
  f.g_tilde = std::move(g_tilde);
  return f;
}

CostFalsification CostFalsification::from_perturbation(const Mdp& mdp, const CostTable& eta) {
  return from_table(mdp, mdp.costs + eta);
}

bool PolicyRegion::contains(const QTable& q) const {
  if (q.num_states() != target_.size()) return false;
  for (int i = 0; i < q.num_states(); ++i) {
    const int t = target_(i);
    if (!q.is_admissible(i, t)) return false;
    for (int u : q.admissible()[static_cast<std::size_t>(i)]) {
      if (u != t && !(q(i, t) < q(i, u))) return false;
    }
  }
  return true;
}

TdBoundReport td_attack_bound_check(const Mdp& mdp, const Policy& mu, const FeatureBasis& basis, double lambda,
                                    const CostFalsification& fals) {
  const TdFixedPoint truthful = td_fixed_point(mdp, mu, basis, lambda, mdp.costs);
  const TdFixedPoint falsified = td_fixed_point(mdp, mu, basis, lambda, fals.g_tilde);
  const auto& dist = truthful.distribution;
  const Matrix& phi = basis.matrix();
  const Vector j_mu = evaluate_policy_exact(mdp, mu);
  const double a = mdp.alpha;

  TdBoundReport rep;
  rep.eta_norm = weighted_norm(fals.policy_perturbation(mu), dist);
  rep.lhs = weighted_norm(phi * (falsified.r_star - truthful.r_star), dist);
  rep.rhs_perturbation_term = rep.eta_norm / (1.0 - a);
  rep.approximation_error = weighted_norm(phi * falsified.r_star - j_mu, dist);
  rep.projection_error = weighted_norm(truthful.projection * j_mu - j_mu, dist);
  rep.projection_coefficient = (1.0 - lambda * a) / std::sqrt((1.0 - a) * (1.0 + a - 2.0 * lambda * a));
  rep.rhs_projection_term = rep.projection_coefficient * rep.projection_error;
  rep.perturbation_bound_holds = within(rep.lhs, rep.rhs_perturbation_term);
  rep.approximation_bound_holds = within(rep.approximation_error, rep.full_rhs());
  rep.holds = rep.perturbation_bound_holds && rep.approximation_bound_holds;
  return rep;
}

QLipschitzReport q_lipschitz_check(const Mdp& mdp, const CostFalsification& fals) {
  const QTable q_star = q_value_iteration(mdp, mdp.costs);
  const QTable q_tilde = falsified_q_fixed_point(mdp, fals.g_tilde);
  QLipschitzReport rep;
  rep.lhs = sup_distance(q_tilde, q_star);
  rep.rhs = sup_norm(fals.eta) / (1.0 - mdp.alpha);
  rep.holds = rep.lhs <= rep.rhs + 1e-8;
  return rep;
}

PointToSetDistance point_to_set_distance(const QTable& q_star, const Policy& target) {
  check_policy_shape(target, q_star.admissible());
  PointToSetDistance out;
  out.degenerate_target = true;
  for (int i = 0; i < q_star.num_states(); ++i) {
    const int t = target(i);
    double others = std::numeric_limits<double>::infinity();
    for (int u : q_star.admissible()[static_cast<std::size_t>(i)]) {
      if (u != t) others = std::min(others, q_star(i, u));
    }
    if (!std::isfinite(others)) continue;
    out.degenerate_target = false;
    // Lower the target entry and raise the rest by the same amount.
    out.value = std::max(out.value, std::max(0.0, 0.5 * (q_star(i, t) - others)));
  }
  return out;
}

RobustRegionReport robust_region(const Mdp& mdp, const Policy& target) {
  validate(mdp);
  validate_policy(mdp, target);
  const QTable q_star = q_value_iteration(mdp, mdp.costs);
  const PointToSetDistance d = point_to_set_distance(q_star, target);

  RobustRegionReport rep;
  rep.alpha = mdp.alpha;
  rep.target = target;
  rep.optimal = greedy_policy(q_star);
  rep.no_attack_needed = rep.optimal == target;
  rep.degenerate_target = d.degenerate_target;
  rep.d_point_to_set = rep.no_attack_needed ? 0.0 : d.value;
  rep.radius = (1.0 - mdp.alpha) * rep.d_point_to_set;
  return rep;
}

RobustRegionSampling sample_robust_region(const Mdp& mdp, const RobustRegionReport& report, int samples,
                                          std::uint64_t seed) {
  RobustRegionSampling out;
  if (report.no_attack_needed || !(report.radius > 0.0)) return out;
  Rng rng(seed);
  const double reach = report.radius * (1.0 - 1e-9);
  for (int s = 0; s < samples; ++s) {
    CostTable h = zero_table(mdp);
    for (int i = 0; i < mdp.num_states; ++i) {
      for (int u : mdp.actions[static_cast<std::size_t>(i)]) {
        h(i, u) = (s % 2 == 0) ? uniform(rng, -reach, reach) : (uniform01(rng) < 0.5 ? -reach : reach);
      }
    }
    const QTable q = falsified_q_fixed_point(mdp, mdp.costs + h);
    ++out.samples;
    if (greedy_policy(q) == report.target) ++out.hits;
  }
  return out;
}

QTable region_witness(const Policy& mu, const ActionSets& actions, int num_controls, double epsilon) {
  QTable q(actions, num_controls);
  q = q.shifted(1.0);
  for (int i = 0; i < mu.size(); ++i) q(i, mu(i)) = 1.0 - epsilon / 2.0;
  return q;
}

PolicyRegionReport policy_region_properties(const Policy& mu1, const Policy& mu2, const ActionSets& actions,
                                            int num_controls, int trials, std::uint64_t seed,
                                            const std::vector<double>& epsilons) {
  check_policy_shape(mu1, actions);
  check_policy_shape(mu2, actions);
  if (mu1 == mu2) throw Error(ErrorCode::kInvalidArgument, "policies must differ");

  Rng rng(seed);
  const PolicyRegion region1(mu1);
  const PolicyRegion region2(mu2);
  PolicyRegionReport rep;
  for (int k = 0; k < trials; ++k) {
    const QTable a = random_member(mu1, actions, num_controls, rng);
    const QTable b = random_member(mu1, actions, num_controls, rng);
    const double t = uniform01(rng);
    ++rep.convexity_trials;
    if (!region1.contains(t * a + (1.0 - t) * b)) ++rep.convexity_violations;

    ++rep.disjointness_trials;
    if (region1.contains(a) && region2.contains(a)) ++rep.disjointness_violations;
    const QTable c = random_member(mu2, actions, num_controls, rng);
    ++rep.disjointness_trials;
    if (region1.contains(c) && region2.contains(c)) ++rep.disjointness_violations;
  }
  for (double eps : epsilons) {
    const QTable q1 = region_witness(mu1, actions, num_controls, eps);
    const QTable q2 = region_witness(mu2, actions, num_controls, eps);
    if (!region1.contains(q1) || !region2.contains(q2)) {
      throw Error(ErrorCode::kInvalidArgument, "witness tables fall outside their regions");
    }
    rep.witnesses.push_back({eps, sup_distance(q1, q2)});
  }
  return rep;
}

}  // namespace rlfalsify
