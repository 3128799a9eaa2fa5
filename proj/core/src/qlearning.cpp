#include "rlfalsify/qlearning.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "rlfalsify/errors.hpp"
#include "rlfalsify/random.hpp"

namespace rlfalsify {

QLearnRun run_q_learning(const Mdp& mdp, const QLearnConfig& cfg, const CostOracle& costs) {
  validate(mdp);
  if (!(cfg.stepsize.a > 0.0) || !(cfg.stepsize.b >= 1.0)) {
    throw Error(ErrorCode::kInvalidArgument, "stepsize needs a > 0 and b >= 1");
  }
  if (cfg.horizon < 0) throw Error(ErrorCode::kInvalidArgument, "horizon must be non-negative");

  QTable q = cfg.q0.value_or(zero_table(mdp));
  if (!q.same_shape(mdp.costs)) throw Error(ErrorCode::kInvalidArgument, "q0 shape does not match the MDP");

  QLearnRun run;
  run.visits = Matrix::Zero(mdp.num_states, mdp.num_controls);
  const std::int64_t every = cfg.checkpoint_every > 0 ? cfg.checkpoint_every : std::max<std::int64_t>(1, cfg.horizon / 100);
  run.checkpoints.push_back({0, q});

  Rng rng(cfg.seed);
  Vector minima = row_minima(q);
  int state = uniform_index(rng, mdp.num_states);
  for (std::int64_t t = 0; t < cfg.horizon; ++t) {
    const auto& us = mdp.actions[static_cast<std::size_t>(state)];
    const int u = us[static_cast<std::size_t>(uniform_index(rng, static_cast<int>(us.size())))];
    const int next = sample_categorical(rng, mdp.transition_row(state, u));
    const double cost = costs(state, u, t);

    double& visits = run.visits(state, u);
    const double gamma = cfg.stepsize.a / (cfg.stepsize.b + visits);
    visits += 1.0;
    const double target = cost + mdp.alpha * minima(next);
    q(state, u) = (1.0 - gamma) * q(state, u) + gamma * target;
    if (!std::isfinite(q(state, u))) {
      throw Error(ErrorCode::kDivergence, "Q-factor became non-finite at step " + std::to_string(t));
    }

    double best = q(state, us.front());
    for (int v : us) best = std::min(best, q(state, v));
    minima(state) = best;

    state = next;
    if ((t + 1) % every == 0 || t + 1 == cfg.horizon) {
      if (run.checkpoints.back().t != t + 1) run.checkpoints.push_back({t + 1, q});
    }
  }
  run.q_final = q;
  return run;
}

QTable falsified_q_fixed_point(const Mdp& mdp, const CostTable& g_tilde, double tol) {
  return q_value_iteration(mdp, g_tilde, tol);
}

CostTable costs_from_fixed_point(const Mdp& mdp, const QTable& q) {
  const Vector minima = row_minima(q);
  CostTable g = zero_table(mdp);
  for (int i = 0; i < mdp.num_states; ++i) {
    for (int u : mdp.actions[static_cast<std::size_t>(i)]) {
      g(i, u) = q(i, u) - mdp.alpha * mdp.transition_row(i, u).dot(minima);
    }
  }
  return g;
}

std::vector<QCheckpointStats> checkpoint_stats(const Mdp& mdp, const CostTable& reference_cost,
                                               const QLearnRun& run) {
  const QTable fixed = q_value_iteration(mdp, reference_cost);
  std::vector<QCheckpointStats> out;
  out.reserve(run.checkpoints.size());
  for (const auto& cp : run.checkpoints) {
    out.push_back({cp.t, sup_distance(bellman_operator(mdp, reference_cost, cp.q), cp.q),
                   sup_distance(cp.q, fixed)});
  }
  return out;
}

}  // namespace rlfalsify
