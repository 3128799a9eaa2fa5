#pragma once

#include <Eigen/Dense>

#include <cstddef>
#include <vector>

namespace rlfalsify {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Admissible controls U(i) per state, 0-based and sorted ascending.
using ActionSets = std::vector<std::vector<int>>;

/// Real table over state-control pairs. Only admissible entries carry
/// meaning; the rest are held at zero so matrix norms over the backing
/// storage equal norms over admissible pairs.
class StateActionTable {
 public:
  StateActionTable() = default;
  StateActionTable(ActionSets admissible, int num_controls);

  int num_states() const { return static_cast<int>(values_.rows()); }
  int num_controls() const { return static_cast<int>(values_.cols()); }
  const ActionSets& admissible() const { return admissible_; }
  bool is_admissible(int state, int control) const;

  double operator()(int state, int control) const { return values_(state, control); }
  double& operator()(int state, int control) { return values_(state, control); }

  const Matrix& values() const { return values_; }

  /// Adds `c` to every admissible entry.
  StateActionTable shifted(double c) const;

  StateActionTable& operator+=(const StateActionTable& other);
  StateActionTable& operator-=(const StateActionTable& other);
  StateActionTable& operator*=(double s);

  friend StateActionTable operator+(StateActionTable a, const StateActionTable& b) { return a += b; }
  friend StateActionTable operator-(StateActionTable a, const StateActionTable& b) { return a -= b; }
  friend StateActionTable operator*(double s, StateActionTable a) { return a *= s; }

  bool same_shape(const StateActionTable& other) const;

 private:
  ActionSets admissible_;
  Matrix values_;
};

using CostTable = StateActionTable;
using QTable = StateActionTable;

/// Sup norm over admissible entries.
double sup_norm(const StateActionTable& t);
double sup_distance(const StateActionTable& a, const StateActionTable& b);

/// Deterministic stationary policy: control index per state.
struct Policy {
  std::vector<int> control;

  int size() const { return static_cast<int>(control.size()); }
  int operator()(int state) const { return control[static_cast<std::size_t>(state)]; }
  friend bool operator==(const Policy&, const Policy&) = default;
};

/// Finite discounted MDP <S, A, g, P, alpha> with costs on state-control pairs.
struct Mdp {
  int num_states = 0;
  int num_controls = 0;
  ActionSets actions;
  /// transitions[u](i, j) = p_ij(u); rows of inadmissible (i, u) are zero.
  std::vector<Matrix> transitions;
  CostTable costs;
  double alpha = 0.9;

  auto transition_row(int state, int control) const {
    return transitions[static_cast<std::size_t>(control)].row(state);
  }
};

struct StationaryDistribution {
  Vector pi;

  Matrix weights() const { return pi.asDiagonal(); }
};

/// Throws Error(kRowNotStochastic | kBadDiscount | kEmptyActionSet |
/// kInvalidArgument) unless every structural invariant holds.
void validate(const Mdp& mdp);
void validate_policy(const Mdp& mdp, const Policy& mu);
void validate_cost_table(const Mdp& mdp, const CostTable& cost);

/// Zero cost table shaped for `mdp`.
CostTable zero_table(const Mdp& mdp);

Matrix policy_transition_matrix(const Mdp& mdp, const Policy& mu);

/// Vector i -> cost(i, mu(i)).
Vector policy_costs(const CostTable& cost, const Policy& mu);

/// J^mu solving (I - alpha P_mu) J = cost_mu.
Vector evaluate_policy_exact(const Mdp& mdp, const Policy& mu);
Vector evaluate_policy_exact(const Mdp& mdp, const Policy& mu, const CostTable& cost);

/// Q(i, u) = cost(i, u) + alpha * P_iu . J for a given continuation J.
QTable q_from_values(const Mdp& mdp, const CostTable& cost, const Vector& J);

/// F(Q)(i, u) = cost(i, u) + alpha * sum_j p_ij(u) min_v Q(j, v).
QTable bellman_operator(const Mdp& mdp, const CostTable& cost, const QTable& q);

/// min_v Q(i, v) per state.
Vector row_minima(const QTable& q);

/// Fixed point of F for an arbitrary cost table with ||Q - Q*||_inf <= tol.
QTable q_value_iteration(const Mdp& mdp, const CostTable& cost, double tol = 1e-10,
                         int max_iters = 100000);

/// Row-wise argmin; ties go to the lowest control index.
Policy greedy_policy(const QTable& q);

StationaryDistribution stationary_distribution(const Mdp& mdp, const Policy& mu,
                                               double tol = 1e-12,
                                               long max_iters = 1000000);

/// Power iteration on an explicit row-stochastic matrix.
StationaryDistribution stationary_distribution(const Matrix& transition, double tol = 1e-12,
                                               long max_iters = 1000000);

/// Expectation-reduces a triple-form cost g(i, u, j) to g(i, u).
/// `triple[i][k][j]` is indexed by the k-th admissible control of state i.
CostTable reduce_triple_costs(const Mdp& mdp,
                              const std::vector<std::vector<std::vector<double>>>& triple);

}  // namespace rlfalsify
