#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <vector>

#include "rlfalsify/attack.hpp"
#include "rlfalsify/mdp.hpp"
#include "rlfalsify/qlearning.hpp"
#include "rlfalsify/td.hpp"

namespace rlfalsify {

/// Reflecting random walk: interior states step left or right with
/// probability 1/2, the two ends stay put or step inward with probability 1/2.
/// Cost at state k (1-based) is k for k <= n/2 and n + 1 - k otherwise.
struct RandomWalkSpec {
  int n = 20;
  double alpha = 0.9;
};

/// Single-control MDP (a Markov cost process) for the walk.
Mdp random_walk_mdp(const RandomWalkSpec& spec = {});

/// Policy that picks the first admissible control everywhere.
Policy first_control_policy(const Mdp& mdp);

/// Quadratic features (1, s, s^2) with s = (i - (n + 1) / 2) / (n / 2).
/// Spans the same space as (1, i, i^2) but is far better conditioned for
/// stochastic updates, so every fixed point and projection is unchanged.
FeatureBasis quadratic_basis(int n);

struct ExperimentConfig {
  std::uint64_t seed = 0;
  std::int64_t trajectory_length = 100000;
  std::vector<double> lambdas{0.0, 1.0};
  int num_falsifications = 100;
  std::filesystem::path output_dir = ".";
  StepSchedule stepsize{100.0, 100.0};
  double attacked_cost = 20.0;     ///< falsified cost at the last state
  double max_perturbation = 10.0;  ///< bound-sweep half-width at the last sample
};

struct CaseStudyResult {
  RandomWalkSpec spec;
  std::vector<double> lambdas;
  StationaryDistribution distribution;
  Vector j_mu;
  Vector projected_j_mu;  ///< Pi J^mu
  std::vector<TdFixedPoint> fixed_points;              ///< per lambda
  std::vector<TdFixedPoint> manipulated_fixed_points;  ///< per lambda
  std::vector<TdRun> runs;
  std::vector<TdRun> manipulated_runs;
  FeatureBasis basis = FeatureBasis::identity(1);

  Vector analytic(std::size_t k) const { return basis.matrix() * fixed_points[k].r_star; }
  Vector manipulated_analytic(std::size_t k) const { return basis.matrix() * manipulated_fixed_points[k].r_star; }
  Vector simulated(std::size_t k) const { return basis.matrix() * runs[k].r_final; }
  Vector manipulated_simulated(std::size_t k) const { return basis.matrix() * manipulated_runs[k].r_final; }
};

/// Exact J^mu, analytic and simulated TD(lambda) approximations, and their
/// counterparts with the last state's cost falsified to `attacked_cost`.
/// Every lambda reuses one simulated trajectory.
CaseStudyResult run_case_study(const ExperimentConfig& cfg, const RandomWalkSpec& spec = {});

struct BoundSweepPoint {
  double half_width = 0.0;
  double eta_norm = 0.0;
  double lhs = 0.0;  ///< ||Phi r~* - J^mu||_D
  double rhs = 0.0;  ///< ||eta||_D / (1 - alpha) + coefficient * ||Pi J^mu - J^mu||_D
  double shift = 0.0;  ///< ||Phi (r~* - r*)||_D
  bool holds = false;
};

struct BoundSweepResult {
  double lambda = 1.0;
  double alpha = 0.9;
  double projection_error = 0.0;
  std::vector<BoundSweepPoint> points;
  int violations = 0;
};

/// Random falsifications eta(i) ~ U[-u_k, u_k] with u_k growing linearly to
/// `max_perturbation`; each point is evaluated with analytic fixed points.
BoundSweepResult run_bound_sweep(const ExperimentConfig& cfg, double lambda = 1.0, const RandomWalkSpec& spec = {});

// CSV emitters. Every file starts with "# rlfalsify-csv v1 <kind> ..." and a header row.
std::string case_study_csv(const CaseStudyResult& result);
std::string td_trajectory_csv(const TdRun& run, const TdFixedPoint& fixed);
std::string bound_sweep_csv(const BoundSweepResult& result, const ExperimentConfig& cfg);
std::string q_checkpoint_csv(const std::vector<QCheckpointStats>& stats);
std::string robust_region_csv(const RobustRegionReport& report);
std::string robust_region_sampling_csv(const RobustRegionSampling& sampling);

/// Writes case_study.csv plus one trajectory file per (lambda, variant).
std::vector<std::filesystem::path> write_case_study(const CaseStudyResult& result, const std::filesystem::path& dir);

}  // namespace rlfalsify
