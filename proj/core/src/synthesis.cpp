#include "rlfalsify/synthesis.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "rlfalsify/errors.hpp"
#include "rlfalsify/lp.hpp"
#include "rlfalsify/qlearning.hpp"

namespace rlfalsify {
namespace {

Eigen::PartialPivLU<Matrix> target_resolvent(const Mdp& mdp, const Policy& target) {
  Matrix p(mdp.num_states, mdp.num_states);
  for (int i = 0; i < mdp.num_states; ++i) p.row(i) = mdp.transition_row(i, target(i));
  Eigen::PartialPivLU<Matrix> lu(Matrix::Identity(mdp.num_states, mdp.num_states) - mdp.alpha * p);
  if (!(lu.rcond() > 1e-14)) throw Error(ErrorCode::kSingularSystem, "I - alpha P_target is numerically singular");
  return lu;
}

void require_margin(double margin) {
  if (!(margin > 0.0) || !std::isfinite(margin)) {
    throw Error(ErrorCode::kInvalidArgument, "margin must be a positive finite number");
  }
}

/// Same checks as validate() but with alpha allowed to be zero.
void validate_for_synthesis(const Mdp& mdp) {
  if (!(mdp.alpha >= 0.0 && mdp.alpha < 1.0)) throw Error(ErrorCode::kBadDiscount, "alpha must lie in [0, 1)");
  Mdp probe = mdp;
  probe.alpha = 0.5;
  validate(probe);
}

std::vector<ConstraintSlack> slacks_for(const Mdp& mdp, const CostTable& g_tilde, const Policy& target) {
  const Vector values = target_resolvent(mdp, target).solve(policy_costs(g_tilde, target));
  std::vector<ConstraintSlack> out;
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int u : mdp.actions[static_cast<std::size_t>(i)]) {
      if (u == target(i)) continue;
      const double bound = values(i) - mdp.alpha * mdp.transition_row(i, u).dot(values);
      out.push_back({i, u, g_tilde(i, u) - bound});
    }
  }
  return out;
}

}  // namespace

double TargetConditionReport::min_slack() const {
  double m = std::numeric_limits<double>::infinity();
  for (const auto& s : slacks) m = std::min(m, s.slack);
  return m;
}

TargetConditionReport check_target_conditions(const Mdp& mdp, const CostTable& g_tilde, const Policy& target) {
  validate_for_synthesis(mdp);
  validate_policy(mdp, target);
  validate_cost_table(mdp, g_tilde);
  TargetConditionReport rep;
  rep.slacks = slacks_for(mdp, g_tilde, target);
  rep.satisfied = std::all_of(rep.slacks.begin(), rep.slacks.end(), [](const auto& s) { return s.slack > 0.0; });
  return rep;
}

CostTable synthesize_full_attack(const Mdp& mdp, const Policy& target, double margin) {
  require_margin(margin);
  validate_for_synthesis(mdp);
  validate_policy(mdp, target);
  const Vector values = target_resolvent(mdp, target).solve(policy_costs(mdp.costs, target));
  CostTable g_tilde = mdp.costs;
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int u : mdp.actions[static_cast<std::size_t>(i)]) {
      if (u == target(i)) continue;
      g_tilde(i, u) = values(i) - mdp.alpha * mdp.transition_row(i, u).dot(values) + margin;
    }
  }
  return g_tilde;
}

QTable frechet_derivative_apply(const Mdp& mdp, const Policy& mu, const CostTable& h) {
  validate(mdp);
  validate_policy(mdp, mu);
  validate_cost_table(mdp, h);
  const Vector w = target_resolvent(mdp, mu).solve(policy_costs(h, mu));
  return q_from_values(mdp, h, w);
}

Matrix PartitionedSystem::reassemble(int control) const {
  const auto u = static_cast<std::size_t>(control);
  const auto s = num_controllable;
  const auto n = static_cast<int>(order.size());
  Matrix permuted(n, n);
  permuted.topLeftCorner(s, s) = R[u];
  permuted.topRightCorner(s, n - s) = Y[u];
  permuted.bottomLeftCorner(n - s, s) = M[u];
  permuted.bottomRightCorner(n - s, n - s) = N[u];
  Matrix original(n, n);
  for (int a = 0; a < n; ++a) {
    for (int b = 0; b < n; ++b) original(order[a], order[b]) = permuted(a, b);
  }
  return original;
}

PartitionedSystem build_partitioned_system(const SynthesisProblem& problem) {
  const Mdp& mdp = problem.mdp;
  validate_for_synthesis(mdp);
  validate_policy(mdp, problem.target);
  const int n = mdp.num_states;

  std::vector<int> controllable = problem.controllable_states;
  std::sort(controllable.begin(), controllable.end());
  if (std::adjacent_find(controllable.begin(), controllable.end()) != controllable.end()) {
    throw Error(ErrorCode::kInvalidArgument, "controllable states contain duplicates");
  }
  for (int i : controllable) {
    if (i < 0 || i >= n) throw Error(ErrorCode::kInvalidArgument, "controllable state out of range");
  }

  PartitionedSystem sys;
  sys.num_controllable = static_cast<int>(controllable.size());
  sys.order = controllable;
  for (int i = 0; i < n; ++i) {
    if (!std::binary_search(controllable.begin(), controllable.end(), i)) sys.order.push_back(i);
  }

  Matrix p_target(n, n);
  for (int i = 0; i < n; ++i) p_target.row(i) = mdp.transition_row(i, problem.target(i));
  const Matrix eye = Matrix::Identity(n, n);
  const Matrix resolvent = (eye - mdp.alpha * p_target).partialPivLu().inverse();

  const int s = sys.num_controllable;
  std::vector<Eigen::RowVectorXd> h_rows;
  for (int u = 0; u < mdp.num_controls; ++u) {
    // Inadmissible (i, u) rows reuse the target row: they reduce to the
    // trivial identity row and never constrain anything.
    Matrix p_u(n, n);
    for (int i = 0; i < n; ++i) {
      const auto& us = mdp.actions[static_cast<std::size_t>(i)];
      p_u.row(i) = std::binary_search(us.begin(), us.end(), u) ? Eigen::RowVectorXd(mdp.transition_row(i, u))
                                                               : Eigen::RowVectorXd(p_target.row(i));
    }
    const Matrix product = (eye - mdp.alpha * p_u) * resolvent;
    Matrix permuted(n, n);
    for (int a = 0; a < n; ++a) {
      for (int b = 0; b < n; ++b) permuted(a, b) = product(sys.order[a], sys.order[b]);
    }
    sys.products.push_back(product);
    sys.R.push_back(permuted.topLeftCorner(s, s));
    sys.Y.push_back(permuted.topRightCorner(s, n - s));
    sys.M.push_back(permuted.bottomLeftCorner(n - s, s));
    sys.N.push_back(permuted.bottomRightCorner(n - s, n - s));

    for (int a = s; a < n; ++a) {
      const int state = sys.order[a];
      const auto& us = mdp.actions[static_cast<std::size_t>(state)];
      if (u == problem.target(state) || !std::binary_search(us.begin(), us.end(), u)) continue;
      h_rows.push_back(sys.M.back().row(a - s));
      sys.h_rows.emplace_back(state, u);
    }
  }
  sys.H.resize(static_cast<Eigen::Index>(h_rows.size()), s);
  for (std::size_t r = 0; r < h_rows.size(); ++r) sys.H.row(static_cast<Eigen::Index>(r)) = h_rows[r];
  return sys;
}

GordanResult gordan_feasibility(const Matrix& H) {
  const Eigen::Index rows = H.rows();
  const Eigen::Index k = H.cols();
  GordanResult out;
  if (rows == 0) {
    out.feasible = true;
    out.x = Vector::Zero(k);
    out.margin = std::numeric_limits<double>::infinity();
    return out;
  }
  if (!H.allFinite()) throw Error(ErrorCode::kLpNumericalFailure, "H has non-finite entries");

  // Positive row scaling changes neither the sign of H x nor whether H^T y = 0
  // has a non-negative solution.
  Vector row_scale(rows);
  for (Eigen::Index r = 0; r < rows; ++r) {
    const double m = k == 0 ? 0.0 : H.row(r).cwiseAbs().maxCoeff();
    if (m <= 1e-14) {
      // A zero row makes H x < 0 impossible; e_r certifies it.
      out.certificate = Vector::Unit(rows, r);
      return out;
    }
    row_scale(r) = 1.0 / m;
  }
  const Matrix Hn = row_scale.asDiagonal() * H;

  // maximize t s.t. Hn (z - 1) + t <= 0, 0 <= z <= 2, 0 <= t <= 1.
  // Columns: z (k) | t | slack per row | z upper slack (k) | t upper slack.
  const Eigen::Index nv = k + 1 + rows + k + 1;
  LinearProgram lp;
  lp.A = Matrix::Zero(rows + k + 1, nv);
  lp.b = Vector::Zero(rows + k + 1);
  lp.c = Vector::Zero(nv);
  for (Eigen::Index r = 0; r < rows; ++r) {
    lp.A.row(r).head(k) = Hn.row(r);
    lp.A(r, k) = 1.0;
    lp.A(r, k + 1 + r) = 1.0;
    lp.b(r) = Hn.row(r).sum();
  }
  for (Eigen::Index j = 0; j < k; ++j) {
    lp.A(rows + j, j) = 1.0;
    lp.A(rows + j, k + 1 + rows + j) = 1.0;
    lp.b(rows + j) = 2.0;
  }
  lp.A(rows + k, k) = 1.0;
  lp.A(rows + k, nv - 1) = 1.0;
  lp.b(rows + k) = 1.0;
  lp.c(k) = -1.0;

  const LpResult primal = solve_lp(lp);
  if (primal.status != LpStatus::kOptimal) throw Error(ErrorCode::kLpNumericalFailure, "direction LP not solved");
  if (primal.x(k) > 1e-9) {
    Vector x = primal.x.head(k).array() - 1.0;
    const double worst = (H * x).maxCoeff();
    if (worst < 0.0) {
      out.feasible = true;
      out.x = std::move(x);
      out.margin = -worst;
      return out;
    }
  }

  // Certificate: y >= 0, Hn^T y = 0, sum(y) = 1.
  LinearProgram cert;
  cert.A = Matrix::Zero(k + 1, rows);
  cert.A.topRows(k) = Hn.transpose();
  cert.A.row(k).setOnes();
  cert.b = Vector::Unit(k + 1, k);
  cert.c = Vector::Zero(rows);
  const LpResult dual = solve_lp(cert);
  if (dual.status != LpStatus::kOptimal) {
    throw Error(ErrorCode::kLpNumericalFailure, "neither a direction nor a Gordan certificate was found");
  }
  Vector y = row_scale.asDiagonal() * dual.x;
  y /= y.sum();
  const double residual = (H.transpose() * y).lpNorm<Eigen::Infinity>();
  if (residual > 1e-8 * std::max(1.0, H.cwiseAbs().maxCoeff())) {
    throw Error(ErrorCode::kLpNumericalFailure, "certificate residual " + std::to_string(residual));
  }
  out.certificate = std::move(y);
  return out;
}

PartialAttackResult synthesize_partial_attack(const SynthesisProblem& problem) {
  require_margin(problem.margin);
  const Mdp& mdp = problem.mdp;
  const PartitionedSystem sys = build_partitioned_system(problem);
  const int n = mdp.num_states;
  const int s = sys.num_controllable;

  PartialAttackResult out;
  if (s == n) {
    CostTable g = synthesize_full_attack(mdp, problem.target, problem.margin);
    out.slacks = check_target_conditions(mdp, g, problem.target).slacks;
    out.feasible = true;
    out.g_tilde = std::move(g);
    out.note = "adversary controls every state";
  } else {
    const GordanResult gordan = gordan_feasibility(sys.H);
    if (!gordan.feasible) {
      out.certificate = gordan.certificate;
      out.note =
          "H x < 0 has no solution: no attack is guaranteed for arbitrary true costs "
          "(this true cost may still admit one)";
      return out;
    }
    const Vector& x = *gordan.x;
    const Vector base = policy_costs(mdp.costs, problem.target);
    auto target_costs = [&](double scale) {
      Vector v = base;
      for (int a = 0; a < s; ++a) v(sys.order[a]) += scale * x(a);
      return v;
    };
    auto uncontrolled_hold = [&](const Vector& v) {
      for (const auto& [state, u] : sys.h_rows) {
        const double bound = sys.products[static_cast<std::size_t>(u)].row(state).dot(v);
        if (!(mdp.costs(state, u) >= bound + problem.margin)) return false;
      }
      return true;
    };

    double scale = 1.0;
    const double cap = std::ldexp(1.0, 60);
    while (!uncontrolled_hold(target_costs(scale))) {
      scale *= 2.0;
      if (scale > cap) throw Error(ErrorCode::kScaleSearchExhausted, "no scale up to 2^60 satisfies every constraint");
    }

    const Vector v = target_costs(scale);
    CostTable g = mdp.costs;
    for (int a = 0; a < s; ++a) {
      const int i = sys.order[a];
      g(i, problem.target(i)) = v(i);
      for (int u : mdp.actions[static_cast<std::size_t>(i)]) {
        if (u != problem.target(i)) g(i, u) = sys.products[static_cast<std::size_t>(u)].row(i).dot(v) + problem.margin;
      }
    }
    out.slacks = check_target_conditions(mdp, g, problem.target).slacks;
    out.feasible = true;
    out.scale = scale;
    out.g_tilde = std::move(g);
    out.note = "direction found with H x < 0";
  }

  // End-to-end check through the fixed-point oracle.
  const bool conditions = std::all_of(out.slacks.begin(), out.slacks.end(), [](const auto& c) { return c.slack > 0.0; });
  const bool learned = greedy_policy(falsified_q_fixed_point(mdp, *out.g_tilde)) == problem.target;
  if (!conditions || !learned) {
    throw Error(ErrorCode::kLpNumericalFailure, "synthesized costs failed oracle verification");
  }
  return out;
}

}  // namespace rlfalsify
