#pragma once

#include <optional>
#include <string>
#include <vector>

#include "rlfalsify/mdp.hpp"

namespace rlfalsify {

/// An adversary that wants the learner to settle on `target` and can only
/// rewrite costs at `controllable_states`.
struct SynthesisProblem {
  Mdp mdp;
  Policy target;
  std::vector<int> controllable_states;  ///< 0-based, any order
  double margin = 0.1;
};

struct ConstraintSlack {
  int state = 0;
  int control = 0;
  /// g~(i, u) - (1_i - alpha P_iu)^T (I - alpha P_target)^{-1} g~_target
  double slack = 0.0;
};

struct TargetConditionReport {
  bool satisfied = false;
  std::vector<ConstraintSlack> slacks;

  double min_slack() const;
};

/// Necessary and sufficient conditions on g~ for Q~* to lie in V_target.
TargetConditionReport check_target_conditions(const Mdp& mdp, const CostTable& g_tilde, const Policy& target);

/// Full-control attack: target-action costs stay truthful, every other
/// admissible entry is set to its constraint bound plus `margin`.
CostTable synthesize_full_attack(const Mdp& mdp, const Policy& target, double margin);

/// [Gh](i, u) = alpha P_iu^T (I - alpha P_mu)^{-1} h_mu + h(i, u)
QTable frechet_derivative_apply(const Mdp& mdp, const Policy& mu, const CostTable& h);

struct PartitionedSystem {
  /// Internal state order: controllable states first (ascending), then the rest.
  std::vector<int> order;
  int num_controllable = 0;
  /// products[u] = (I - alpha P_u)(I - alpha P_target)^{-1} in the original state order.
  std::vector<Matrix> products;
  std::vector<Matrix> R, Y, M, N;
  /// Row-pruned M blocks stacked; one row per uncontrolled (state, control)
  /// with control admissible and different from the target.
  Matrix H;
  std::vector<std::pair<int, int>> h_rows;  ///< (state, control) per row of H, 0-based

  /// Blocks reassembled and permuted back to the original order.
  Matrix reassemble(int control) const;
};

/// Also accepts alpha = 0, where every product is the identity.
PartitionedSystem build_partitioned_system(const SynthesisProblem& problem);

struct GordanResult {
  bool feasible = false;
  std::optional<Vector> x;            ///< H x < 0 componentwise
  std::optional<Vector> certificate;  ///< y >= 0, sum(y) = 1, H^T y = 0
  double margin = 0.0;                ///< -max_k (H x)_k when feasible
};

/// Decides whether H x < 0 has a solution. Exactly one of x / certificate is set.
GordanResult gordan_feasibility(const Matrix& H);

struct PartialAttackResult {
  bool feasible = false;
  std::optional<CostTable> g_tilde;
  std::optional<Vector> certificate;
  std::optional<double> scale;
  std::vector<ConstraintSlack> slacks;
  std::string note;
};

/// Partial-state attack: runs the Gordan check on H and, when a direction
/// exists, scales it until every uncontrolled constraint holds.
PartialAttackResult synthesize_partial_attack(const SynthesisProblem& problem);

}  // namespace rlfalsify
