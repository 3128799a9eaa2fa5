#pragma once

#include <cstdint>
#include <functional>

#include "rlfalsify/mdp.hpp"

namespace rlfalsify {

/// Cost signal seen by a learner at step t for the pair (state, control).
/// This is the only place where an attack enters a learning run.
using CostOracle = std::function<double(int state, int control, std::int64_t t)>;

inline CostOracle truthful_costs(const Mdp& mdp) {
  return [cost = mdp.costs](int i, int u, std::int64_t) { return cost(i, u); };
}

/// Stealthy falsification: a fixed table replayed consistently over time.
inline CostOracle stealthy_costs(CostTable falsified) {
  return [cost = std::move(falsified)](int i, int u, std::int64_t) { return cost(i, u); };
}

/// Non-stealthy falsification: base cost plus a time-dependent offset.
inline CostOracle time_varying_costs(CostTable base,
                                     std::function<double(int, int, std::int64_t)> offset) {
  return [cost = std::move(base), off = std::move(offset)](int i, int u, std::int64_t t) {
    return cost(i, u) + off(i, u, t);
  };
}

}  // namespace rlfalsify
