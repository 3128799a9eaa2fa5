#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "rlfalsify/cost_oracle.hpp"
#include "rlfalsify/mdp.hpp"

namespace rlfalsify {

/// Linear architecture J~(r) = Phi r. Rows are phi(i)^T.
class FeatureBasis {
 public:
  /// Throws kInvalidArgument if K > n or the columns are linearly dependent.
  explicit FeatureBasis(Matrix phi);

  static FeatureBasis identity(int n);

  const Matrix& matrix() const { return phi_; }
  int num_states() const { return static_cast<int>(phi_.rows()); }
  int num_features() const { return static_cast<int>(phi_.cols()); }
  auto features(int state) const { return phi_.row(state).transpose(); }

 private:
  Matrix phi_;
};

/// gamma_t = a / (b + t)
struct StepSchedule {
  double a = 100.0;
  double b = 100.0;

  double operator()(std::int64_t t) const { return a / (b + static_cast<double>(t)); }
};

struct TdConfig {
  double lambda = 0.0;
  StepSchedule stepsize{};
  std::int64_t horizon = 100000;
  std::uint64_t seed = 0;
  std::optional<Vector> r0;          ///< zero when unset
  bool start_from_stationary = true;  ///< otherwise start at state 1
  std::int64_t checkpoint_every = 0;  ///< 0 selects horizon / 100
};

struct TdFixedPoint {
  Vector r_star;
  Matrix A;
  Vector b;
  Matrix M;
  Vector q;
  Matrix projection;
  StationaryDistribution distribution;
};

struct TdCheckpoint {
  std::int64_t t = 0;
  Vector r;
};

struct TdRun {
  std::vector<TdCheckpoint> checkpoints;
  Vector r_final;
};

/// Per-step view handed to an optional observer (tests, tracing).
struct TdStep {
  std::int64_t t;
  int state;
  int next_state;
  double observed_cost;
  double temporal_difference;
  const Vector& eligibility;       ///< eta_t used in this update
  const Vector& next_eligibility;  ///< eta_{t+1}
};
using TdObserver = std::function<void(const TdStep&)>;

/// ||J||_D = sqrt(sum_i pi(i) J(i)^2)
double weighted_norm(const Vector& J, const StationaryDistribution& dist);

/// Pi = Phi (Phi^T D Phi)^{-1} Phi^T D, the D-orthogonal projection onto span(Phi).
Matrix projection_matrix(const FeatureBasis& basis, const StationaryDistribution& dist);

/// Limit of TD(lambda) for `cost`: the solution of A r + b = 0.
TdFixedPoint td_fixed_point(const Mdp& mdp, const Policy& mu, const FeatureBasis& basis, double lambda,
                            const CostTable& cost);

/// On-line every-visit TD(lambda) along one simulated trajectory under mu.
TdRun run_td(const Mdp& mdp, const Policy& mu, const FeatureBasis& basis, const TdConfig& cfg,
             const CostOracle& costs, const TdObserver& observer = {});

}  // namespace rlfalsify
