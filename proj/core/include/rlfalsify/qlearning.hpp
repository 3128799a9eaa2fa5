#pragma once

#include <cstdint>
#include <optional>
#include <vector>

#include "rlfalsify/cost_oracle.hpp"
#include "rlfalsify/mdp.hpp"
#include "rlfalsify/td.hpp"

namespace rlfalsify {

enum class Exploration {
  kUniform,  ///< uniform-random over U(i)
};

struct QLearnConfig {
  /// gamma(i, u) = a / (b + visits(i, u)), visits counted before the update.
  StepSchedule stepsize{1.0, 1.0};
  std::int64_t horizon = 1000000;
  std::uint64_t seed = 0;
  Exploration exploration = Exploration::kUniform;
  std::optional<QTable> q0;           ///< zero table when unset
  std::int64_t checkpoint_every = 0;  ///< 0 selects horizon / 100
};

struct QCheckpoint {
  std::int64_t t = 0;
  QTable q;
};

struct QLearnRun {
  std::vector<QCheckpoint> checkpoints;
  QTable q_final;
  Matrix visits;  ///< update count per (i, u)
};

/// Tabular Q-learning along one behavior trajectory; only the visited pair is
/// updated at each step.
QLearnRun run_q_learning(const Mdp& mdp, const QLearnConfig& cfg, const CostOracle& costs);

/// The map f: g~ -> Q~*, the unique fixed point of F~ for the falsified costs.
QTable falsified_q_fixed_point(const Mdp& mdp, const CostTable& g_tilde, double tol = 1e-10);

/// f^{-1}: recovers the cost table whose fixed point is `q`.
CostTable costs_from_fixed_point(const Mdp& mdp, const QTable& q);

struct QCheckpointStats {
  std::int64_t t = 0;
  double max_bellman_residual = 0.0;
  double dist_to_fixed_point = 0.0;
};

/// Residual ||F(Q_t) - Q_t||_inf under `reference_cost` and distance to its fixed point.
std::vector<QCheckpointStats> checkpoint_stats(const Mdp& mdp, const CostTable& reference_cost,
                                               const QLearnRun& run);

}  // namespace rlfalsify
