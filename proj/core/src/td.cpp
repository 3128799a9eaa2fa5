#include "rlfalsify/td.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlfalsify/errors.hpp"
#include "rlfalsify/random.hpp"

namespace rlfalsify {

FeatureBasis::FeatureBasis(Matrix phi) : phi_(std::move(phi)) {
  if (phi_.cols() == 0 || phi_.rows() == 0) throw Error(ErrorCode::kInvalidArgument, "feature matrix is empty");
  if (phi_.cols() > phi_.rows()) {
    throw Error(ErrorCode::kInvalidArgument, "more features than states (K > n)");
  }
  if (!phi_.allFinite()) throw Error(ErrorCode::kInvalidArgument, "feature matrix has non-finite entries");
  Eigen::ColPivHouseholderQR<Matrix> qr(phi_);
  qr.setThreshold(1e-10);
  if (qr.rank() != phi_.cols()) {
    throw Error(ErrorCode::kInvalidArgument, "feature columns are linearly dependent (rank " +
                                                 std::to_string(qr.rank()) + " < " + std::to_string(phi_.cols()) + ")");
  }
}

FeatureBasis FeatureBasis::identity(int n) { return FeatureBasis(Matrix::Identity(n, n)); }

double weighted_norm(const Vector& J, const StationaryDistribution& dist) {
  if (J.size() != dist.pi.size()) throw Error(ErrorCode::kInvalidArgument, "vector and distribution lengths differ");
  return std::sqrt((dist.pi.array() * J.array().square()).sum());
}

Matrix projection_matrix(const FeatureBasis& basis, const StationaryDistribution& dist) {
  const Matrix& phi = basis.matrix();
  if (phi.rows() != dist.pi.size()) throw Error(ErrorCode::kInvalidArgument, "basis and distribution sizes differ");
  if ((dist.pi.array() <= 0.0).any()) throw Error(ErrorCode::kSingularGram, "weights must be strictly positive");
  const Matrix phi_t_d = phi.transpose() * dist.pi.asDiagonal();
  const Matrix gram = phi_t_d * phi;
  Eigen::LDLT<Matrix> ldlt(gram);
  if (ldlt.info() != Eigen::Success || !ldlt.isPositive() || ldlt.rcond() < 1e-14) {
    throw Error(ErrorCode::kSingularGram, "Phi^T D Phi is not invertible");
  }
  return phi * ldlt.solve(phi_t_d);
}

TdFixedPoint td_fixed_point(const Mdp& mdp, const Policy& mu, const FeatureBasis& basis, double lambda,
                            const CostTable& cost) {
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  validate_cost_table(mdp, cost);
  if (basis.num_states() != mdp.num_states) throw Error(ErrorCode::kInvalidArgument, "basis has wrong row count");

  const auto n = mdp.num_states;
  const Matrix p = policy_transition_matrix(mdp, mu);
  const Matrix eye = Matrix::Identity(n, n);
  const double a = mdp.alpha;

  TdFixedPoint fp;
  fp.distribution = stationary_distribution(p);
  // Closed forms of the geometric series in (lambda alpha P_mu).
  const Eigen::PartialPivLU<Matrix> resolvent(eye - lambda * a * p);
  fp.M = (1.0 - lambda) * a * p * resolvent.inverse();
  fp.q = resolvent.solve(policy_costs(cost, mu));

  const Matrix& phi = basis.matrix();
  const Matrix phi_t_d = phi.transpose() * fp.distribution.pi.asDiagonal();
  fp.A = phi_t_d * (fp.M - eye) * phi;
  fp.b = phi_t_d * fp.q;

  Eigen::FullPivLU<Matrix> lu(fp.A);
  lu.setThreshold(1e-12);
  if (!lu.isInvertible()) throw Error(ErrorCode::kSingularA, "A = Phi^T D (M - I) Phi is singular");
  fp.r_star = lu.solve(-fp.b);
  const double residual = (fp.A * fp.r_star + fp.b).lpNorm<Eigen::Infinity>();
  if (!fp.r_star.allFinite() || residual > 1e-9 * std::max(1.0, fp.b.lpNorm<Eigen::Infinity>())) {
    throw Error(ErrorCode::kSingularA, "A r + b = 0 solved with residual " + std::to_string(residual));
  }
  fp.projection = projection_matrix(basis, fp.distribution);
  return fp;
}

TdRun run_td(const Mdp& mdp, const Policy& mu, const FeatureBasis& basis, const TdConfig& cfg,
             const CostOracle& costs, const TdObserver& observer) {
  if (!(cfg.lambda >= 0.0 && cfg.lambda <= 1.0)) throw Error(ErrorCode::kInvalidArgument, "lambda must lie in [0, 1]");
  if (!(cfg.stepsize.a > 0.0) || !(cfg.stepsize.b >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "stepsize needs a > 0 and b >= 1");
  }
  if (cfg.horizon < 0) throw Error(ErrorCode::kInvalidArgument, "horizon must be non-negative");
  if (basis.num_states() != mdp.num_states) throw Error(ErrorCode::kInvalidArgument, "basis has wrong row count");

  const Matrix p = policy_transition_matrix(mdp, mu);
  const auto k = basis.num_features();
  Vector r = cfg.r0.value_or(Vector::Zero(k));
  if (r.size() != k) throw Error(ErrorCode::kInvalidArgument, "r0 has wrong length");

  TdRun run;
  const std::int64_t every = cfg.checkpoint_every > 0 ? cfg.checkpoint_every : std::max<std::int64_t>(1, cfg.horizon / 100);
  run.checkpoints.push_back({0, r});
  if (cfg.horizon == 0) {
    run.r_final = r;
    return run;
  }

  Rng rng(cfg.seed);
  int state = 0;
  if (cfg.start_from_stationary) state = sample_categorical(rng, stationary_distribution(p).pi);

  const double decay = mdp.alpha * cfg.lambda;
  Vector eligibility = basis.features(state);
  Vector next_eligibility(k);
  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    const int next = sample_categorical(rng, p.row(state));
    const double cost = costs(state, mu(state), t);
    const double td = cost + mdp.alpha * r.dot(basis.features(next)) - r.dot(basis.features(state));
    r.noalias() += cfg.stepsize(t) * td * eligibility;
    next_eligibility = decay * eligibility + basis.features(next);
    if (observer) observer(TdStep{t, state, next, cost, td, eligibility, next_eligibility});
    if (!r.allFinite()) {
      throw Error(ErrorCode::kDivergence, "TD parameters became non-finite at step " + std::to_string(t));
    }
    eligibility.swap(next_eligibility);
    state = next;
    if ((t + 1) % every == 0 || t + 1 == cfg.horizon) {
      if (run.checkpoints.back().t != t + 1) run.checkpoints.push_back({t + 1, r});
    }
  }
  run.r_final = r;
  return run;
}

}  // namespace rlfalsify
