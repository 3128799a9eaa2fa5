#pragma once

#include "rlfalsify/mdp.hpp"

namespace rlfalsify {

/// minimize c^T x subject to A x = b, x >= 0.
struct LinearProgram {
  Matrix A;
  Vector b;
  Vector c;
};

enum class LpStatus { kOptimal, kInfeasible, kUnbounded };

struct LpResult {
  LpStatus status = LpStatus::kInfeasible;
  Vector x;
  double objective = 0.0;
};

/// Dense two-phase tableau simplex with Bland's anti-cycling rule, intended
/// for the small systems that show up in attack feasibility checks.
/// Throws kLpNumericalFailure when the pivot budget is exhausted.
LpResult solve_lp(const LinearProgram& lp, double tol = 1e-9);

}  // namespace rlfalsify
