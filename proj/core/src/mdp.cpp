#include "rlfalsify/mdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "rlfalsify/errors.hpp"

namespace rlfalsify {
namespace {

constexpr double kRowSumTolerance = 1e-12;

std::string pair_label(int state, int control) {
  return "(" + std::to_string(state + 1) + "," + std::to_string(control + 1) + ")";
}

Eigen::PartialPivLU<Matrix> factor_policy_system(const Mdp& mdp, const Policy& mu) {
  const Matrix system =
      Matrix::Identity(mdp.num_states, mdp.num_states) - mdp.alpha * policy_transition_matrix(mdp, mu);
  Eigen::PartialPivLU<Matrix> lu(system);
  if (!std::isfinite(lu.rcond()) || lu.rcond() < 1e-14) {
    throw Error(ErrorCode::kSingularSystem, "I - alpha P_mu is numerically singular");
  }
  return lu;
}

}  // namespace

StateActionTable::StateActionTable(ActionSets admissible, int num_controls)
    : admissible_(std::move(admissible)),
      values_(Matrix::Zero(static_cast<Eigen::Index>(admissible_.size()), num_controls)) {}

bool StateActionTable::is_admissible(int state, int control) const {
  if (state < 0 || state >= num_states()) return false;
  const auto& us = admissible_[static_cast<std::size_t>(state)];
  return std::binary_search(us.begin(), us.end(), control);
}

StateActionTable StateActionTable::shifted(double c) const {
  StateActionTable out = *this;
  for (int i = 0; i < num_states(); ++i) {
    for (int u : admissible_[static_cast<std::size_t>(i)]) out(i, u) += c;
  }
  return out;
}

bool StateActionTable::same_shape(const StateActionTable& other) const {
  return admissible_ == other.admissible_ && num_controls() == other.num_controls();
}

StateActionTable& StateActionTable::operator+=(const StateActionTable& other) {
  if (!same_shape(other)) throw Error(ErrorCode::kInvalidArgument, "table shapes differ");
  values_ += other.values_;
  return *this;
}

StateActionTable& StateActionTable::operator-=(const StateActionTable& other) {
  if (!same_shape(other)) throw Error(ErrorCode::kInvalidArgument, "table shapes differ");
  values_ -= other.values_;
  return *this;
}

StateActionTable& StateActionTable::operator*=(double s) {
  values_ *= s;
  return *this;
}

double sup_norm(const StateActionTable& t) {
  return t.values().size() == 0 ? 0.0 : t.values().cwiseAbs().maxCoeff();
}

double sup_distance(const StateActionTable& a, const StateActionTable& b) {
  return sup_norm(a - b);
}

void validate(const Mdp& mdp) {
  if (mdp.num_states <= 0) throw Error(ErrorCode::kInvalidArgument, "number of states must be positive");
  for (std::size_t i = 0; i < mdp.actions.size(); ++i) {
    if (mdp.actions[i].empty()) {
      throw Error(ErrorCode::kEmptyActionSet, "state " + std::to_string(i + 1) + " has no admissible control");
    }
  }
  if (mdp.num_controls <= 0) throw Error(ErrorCode::kInvalidArgument, "number of controls must be positive");
  if (!(mdp.alpha > 0.0 && mdp.alpha < 1.0)) {
    throw Error(ErrorCode::kBadDiscount, "alpha must lie in (0, 1), got " + std::to_string(mdp.alpha));
  }
  if (static_cast<int>(mdp.actions.size()) != mdp.num_states) {
    throw Error(ErrorCode::kInvalidArgument, "action sets do not cover every state");
  }
  if (static_cast<int>(mdp.transitions.size()) != mdp.num_controls) {
    throw Error(ErrorCode::kInvalidArgument, "one transition matrix per control is required");
  }
  for (const auto& p : mdp.transitions) {
    if (p.rows() != mdp.num_states || p.cols() != mdp.num_states) {
      throw Error(ErrorCode::kInvalidArgument, "transition matrices must be n x n");
    }
  }
  for (int i = 0; i < mdp.num_states; ++i) {
    const auto& us = mdp.actions[static_cast<std::size_t>(i)];
    if (!std::is_sorted(us.begin(), us.end()) || std::adjacent_find(us.begin(), us.end()) != us.end()) {
      throw Error(ErrorCode::kInvalidArgument,
                  "admissible controls of state " + std::to_string(i + 1) + " must be strictly increasing");
    }
    for (int u : us) {
      if (u < 0 || u >= mdp.num_controls) {
        throw Error(ErrorCode::kInvalidArgument, "control index out of range at " + pair_label(i, u));
      }
      const auto row = mdp.transition_row(i, u);
      if (!row.allFinite() || (row.array() < 0.0).any() || std::abs(row.sum() - 1.0) > kRowSumTolerance) {
        throw Error(ErrorCode::kRowNotStochastic, "transition row (state, control) = " + pair_label(i, u) +
                                                      " is not a probability vector (sum " +
                                                      std::to_string(row.sum()) + ")");
      }
    }
  }
  validate_cost_table(mdp, mdp.costs);
}

void validate_cost_table(const Mdp& mdp, const CostTable& cost) {
  if (cost.admissible() != mdp.actions || cost.num_controls() != mdp.num_controls) {
    throw Error(ErrorCode::kInvalidArgument, "cost table shape does not match the MDP");
  }
  if (!cost.values().allFinite()) throw Error(ErrorCode::kInvalidArgument, "cost table has non-finite entries");
}

void validate_policy(const Mdp& mdp, const Policy& mu) {
  if (mu.size() != mdp.num_states) throw Error(ErrorCode::kInvalidArgument, "policy length differs from state count");
  for (int i = 0; i < mdp.num_states; ++i) {
    const auto& us = mdp.actions[static_cast<std::size_t>(i)];
    if (!std::binary_search(us.begin(), us.end(), mu(i))) {
      throw Error(ErrorCode::kInvalidArgument, "policy picks inadmissible " + pair_label(i, mu(i)));
    }
  }
}

CostTable zero_table(const Mdp& mdp) { return CostTable(mdp.actions, mdp.num_controls); }

Matrix policy_transition_matrix(const Mdp& mdp, const Policy& mu) {
  validate(mdp);
  validate_policy(mdp, mu);
  Matrix p(mdp.num_states, mdp.num_states);
  for (int i = 0; i < mdp.num_states; ++i) p.row(i) = mdp.transition_row(i, mu(i));
  return p;
}

Vector policy_costs(const CostTable& cost, const Policy& mu) {
  Vector out(mu.size());
  for (int i = 0; i < mu.size(); ++i) out(i) = cost(i, mu(i));
  return out;
}

Vector evaluate_policy_exact(const Mdp& mdp, const Policy& mu) {
  return evaluate_policy_exact(mdp, mu, mdp.costs);
}

Vector evaluate_policy_exact(const Mdp& mdp, const Policy& mu, const CostTable& cost) {
  validate_cost_table(mdp, cost);
  const auto lu = factor_policy_system(mdp, mu);
  const Vector rhs = policy_costs(cost, mu);
  Vector j = lu.solve(rhs);
  const Matrix p = policy_transition_matrix(mdp, mu);
  const double residual = (j - mdp.alpha * p * j - rhs).lpNorm<Eigen::Infinity>();
  if (!j.allFinite() || residual > 1e-10 * std::max(1.0, rhs.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::kSingularSystem, "policy evaluation residual too large");
  }
  return j;
}

QTable q_from_values(const Mdp& mdp, const CostTable& cost, const Vector& J) {
  QTable q = cost;
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int u : mdp.actions[static_cast<std::size_t>(i)]) {
      q(i, u) = cost(i, u) + mdp.alpha * mdp.transition_row(i, u).dot(J);
    }
  }
  return q;
}

Vector row_minima(const QTable& q) {
  Vector m(q.num_states());
  for (int i = 0; i < q.num_states(); ++i) {
    double best = std::numeric_limits<double>::infinity();
    for (int u : q.admissible()[static_cast<std::size_t>(i)]) best = std::min(best, q(i, u));
    m(i) = best;
  }
  return m;
}

QTable bellman_operator(const Mdp& mdp, const CostTable& cost, const QTable& q) {
  return q_from_values(mdp, cost, row_minima(q));
}

Policy greedy_policy(const QTable& q) {
  Policy mu;
  mu.control.resize(static_cast<std::size_t>(q.num_states()));
  for (int i = 0; i < q.num_states(); ++i) {
    const auto& us = q.admissible()[static_cast<std::size_t>(i)];
    int best = us.front();
    for (int u : us) {
      if (q(i, u) < q(i, best)) best = u;
    }
    mu.control[static_cast<std::size_t>(i)] = best;
  }
  return mu;
}

QTable q_value_iteration(const Mdp& mdp, const CostTable& cost, double tol, int max_iters) {
  validate(mdp);
  validate_cost_table(mdp, cost);
  if (!(tol > 0.0)) throw Error(ErrorCode::kInvalidArgument, "tolerance must be positive");

  // Successive gap below tol (1 - alpha) / alpha bounds the distance to Q* by tol.
  const double gap_target = tol * (1.0 - mdp.alpha) / mdp.alpha;
  QTable q = zero_table(mdp);
  double gap = std::numeric_limits<double>::infinity();
  int iter = 0;
  for (; iter < max_iters; ++iter) {
    QTable next = bellman_operator(mdp, cost, q);
    gap = sup_distance(next, q);
    q = std::move(next);
    if (gap < gap_target) break;
  }
  if (iter == max_iters) {
    throw Error(ErrorCode::kNonConvergence,
                "value iteration hit " + std::to_string(max_iters) + " iterations (gap " + std::to_string(gap) + ")");
  }

  // Polish: Q* is linear in the cost inside the greedy policy's region, so an
  // exact solve for the greedy policy recovers it to machine precision.
  const Policy mu = greedy_policy(q);
  const QTable exact = q_from_values(mdp, cost, evaluate_policy_exact(mdp, mu, cost));
  const double exact_residual = sup_distance(bellman_operator(mdp, cost, exact), exact);
  const double iterate_residual = sup_distance(bellman_operator(mdp, cost, q), q);
  return exact_residual <= iterate_residual ? exact : q;
}

StationaryDistribution stationary_distribution(const Mdp& mdp, const Policy& mu, double tol, long max_iters) {
  return stationary_distribution(policy_transition_matrix(mdp, mu), tol, max_iters);
}

StationaryDistribution stationary_distribution(const Matrix& transition, double tol, long max_iters) {
  const auto n = transition.rows();
  // Start from a point mass: a uniform start is already invariant for any
  // doubly-stochastic chain, periodic ones included, and would hide periodicity.
  Eigen::RowVectorXd pi = Eigen::RowVectorXd::Zero(n);
  pi(0) = 1.0;
  for (long iter = 0; iter < max_iters; ++iter) {
    Eigen::RowVectorXd next = pi * transition;
    if ((next - pi).lpNorm<Eigen::Infinity>() <= tol) {
      if (pi.minCoeff() <= tol) {
        throw Error(ErrorCode::kNotErgodic, "stationary distribution has a zero entry; chain is not irreducible");
      }
      return StationaryDistribution{pi.transpose()};
    }
    pi = next / next.sum();
  }
  throw Error(ErrorCode::kNotErgodic, "power iteration did not converge; chain is periodic or reducible");
}

CostTable reduce_triple_costs(const Mdp& mdp, const std::vector<std::vector<std::vector<double>>>& triple) {
  if (static_cast<int>(triple.size()) != mdp.num_states) {
    throw Error(ErrorCode::kInvalidArgument, "triple cost table must have one entry per state");
  }
  CostTable out = zero_table(mdp);
  for (int i = 0; i < mdp.num_states; ++i) {
    const auto& us = mdp.actions[static_cast<std::size_t>(i)];
    const auto& per_state = triple[static_cast<std::size_t>(i)];
    if (per_state.size() != us.size()) {
      throw Error(ErrorCode::kInvalidArgument, "triple cost table row size mismatch at state " + std::to_string(i + 1));
    }
    for (std::size_t k = 0; k < us.size(); ++k) {
      const auto& g = per_state[k];
      if (static_cast<int>(g.size()) != mdp.num_states) {
        throw Error(ErrorCode::kInvalidArgument, "triple cost entries must list every next state");
      }
      const auto row = mdp.transition_row(i, us[k]);
      double expected = 0.0;
      for (int j = 0; j < mdp.num_states; ++j) expected += row(j) * g[static_cast<std::size_t>(j)];
      out(i, us[k]) = expected;
    }
  }
  return out;
}

}  // namespace rlfalsify
