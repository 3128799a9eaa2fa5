#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "rlfalsify/mdp.hpp"
#include "rlfalsify/td.hpp"

namespace rlfalsify {

/// Falsified cost table g~ together with its perturbation eta = g~ - g.
struct CostFalsification {
  CostTable g_tilde;
  CostTable eta;
  bool stealthy = true;

  static CostFalsification from_table(const Mdp& mdp, CostTable g_tilde);
  static CostFalsification from_perturbation(const Mdp& mdp, const CostTable& eta);

  /// eta restricted to the policy's controls: eta_mu(i) = eta(i, mu(i)).
  Vector policy_perturbation(const Policy& mu) const { return policy_costs(eta, mu); }
};

/// V_mu = {Q : Q(i, mu(i)) < Q(i, u) for all i and all u != mu(i)}.
class PolicyRegion {
 public:
  explicit PolicyRegion(Policy target) : target_(std::move(target)) {}

  const Policy& target() const { return target_; }
  /// Strict inequalities: tables with a tie in any row belong to no region.
  bool contains(const QTable& q) const;

 private:
  Policy target_;
};

struct TdBoundReport {
  double eta_norm = 0.0;               ///< ||eta_mu||_D
  double lhs = 0.0;                    ///< ||Phi r~* - Phi r*||_D
  double rhs_perturbation_term = 0.0;  ///< ||eta_mu||_D / (1 - alpha)
  double approximation_error = 0.0;    ///< ||Phi r~* - J^mu||_D
  double projection_error = 0.0;       ///< ||(Pi - I) J^mu||_D
  double projection_coefficient = 0.0; ///< (1 - lambda alpha) / sqrt((1 - alpha)(1 + alpha - 2 lambda alpha))
  double rhs_projection_term = 0.0;    ///< coefficient * projection_error
  bool perturbation_bound_holds = false;
  bool approximation_bound_holds = false;
  bool holds = false;

  double full_rhs() const { return rhs_perturbation_term + rhs_projection_term; }
};

/// Compares the TD(lambda) limits under g and g~ against both TD attack bounds.
TdBoundReport td_attack_bound_check(const Mdp& mdp, const Policy& mu, const FeatureBasis& basis, double lambda,
                                    const CostFalsification& fals);

struct QLipschitzReport {
  double lhs = 0.0;  ///< ||Q~* - Q*||_inf
  double rhs = 0.0;  ///< ||g~ - g||_inf / (1 - alpha)
  bool holds = false;
};

QLipschitzReport q_lipschitz_check(const Mdp& mdp, const CostFalsification& fals);

struct PointToSetDistance {
  double value = 0.0;
  /// Target control is the only admissible one everywhere, so V_target is every table.
  bool degenerate_target = false;
};

/// inf over Q in V_target of ||Q - q_star||_inf, via per-state gap halving.
PointToSetDistance point_to_set_distance(const QTable& q_star, const Policy& target);

struct RobustRegionReport {
  double alpha = 0.0;
  double d_point_to_set = 0.0;
  double radius = 0.0;  ///< (1 - alpha) * d_point_to_set
  std::string norm_tag = "sup";
  Policy target;
  Policy optimal;
  bool no_attack_needed = false;  ///< target already optimal
  bool degenerate_target = false;
};

RobustRegionReport robust_region(const Mdp& mdp, const Policy& target);

struct RobustRegionSampling {
  int samples = 0;
  int hits = 0;  ///< falsifications inside the ball whose learned policy is the target
};

/// Draws falsifications with ||g~ - g||_inf < radius (half uniform in the cube,
/// half on its scaled-down corners) and counts how many reach the target.
RobustRegionSampling sample_robust_region(const Mdp& mdp, const RobustRegionReport& report, int samples,
                                          std::uint64_t seed);

struct WitnessDistance {
  double epsilon = 0.0;
  double distance = 0.0;
};

struct PolicyRegionReport {
  int convexity_trials = 0;
  int convexity_violations = 0;
  int disjointness_trials = 0;
  int disjointness_violations = 0;
  std::vector<WitnessDistance> witnesses;
};

/// Empirical check of the V_mu properties: convexity, disjointness, and the
/// vanishing distance between regions of distinct policies.
PolicyRegionReport policy_region_properties(const Policy& mu1, const Policy& mu2, const ActionSets& actions,
                                            int num_controls, int trials, std::uint64_t seed,
                                            const std::vector<double>& epsilons = {1e-2, 1e-4, 1e-6});

/// Witness pair: all-ones tables with the policy's entries lowered to 1 - epsilon / 2.
QTable region_witness(const Policy& mu, const ActionSets& actions, int num_controls, double epsilon);

}  // namespace rlfalsify
