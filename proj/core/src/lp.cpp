#include "rlfalsify/lp.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "rlfalsify/errors.hpp"

namespace rlfalsify {
namespace {

constexpr double kPivotTolerance = 1e-12;

class Tableau {
 public:
  // Rows [0, m) are constraints, row m is the reduced-cost row; the last
  // column holds right-hand sides (and minus the objective in row m).
  Tableau(Matrix t, std::vector<int> basis) : t_(std::move(t)), basis_(std::move(basis)) {}

  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  Matrix& data() { return t_; }
  std::vector<int>& basis() { return basis_; }

  void pivot(Eigen::Index row, Eigen::Index col) {
    t_.row(row) /= t_(row, col);
    for (Eigen::Index r = 0; r < t_.rows(); ++r) {
      if (r != row && t_(r, col) != 0.0) t_.row(r) -= t_(r, col) * t_.row(row);
    }
    basis_[static_cast<std::size_t>(row)] = static_cast<int>(col);
  }

  /// Runs Bland's rule over columns [0, allowed). Returns false if unbounded.
  bool optimize(Eigen::Index allowed, double tol) {
    const long budget = 50000;
    for (long iter = 0; iter < budget; ++iter) {
      Eigen::Index entering = -1;
      for (Eigen::Index j = 0; j < allowed; ++j) {
        if (t_(rows(), j) < -tol) {
          entering = j;
          break;
        }
      }
      if (entering < 0) return true;

      Eigen::Index leaving = -1;
      double best_ratio = std::numeric_limits<double>::infinity();
      for (Eigen::Index r = 0; r < rows(); ++r) {
        const double a = t_(r, entering);
        if (a <= kPivotTolerance) continue;
        const double ratio = t_(r, cols()) / a;
        if (ratio < best_ratio - 1e-15 ||
            (std::abs(ratio - best_ratio) <= 1e-15 && leaving >= 0 &&
             basis_[static_cast<std::size_t>(r)] < basis_[static_cast<std::size_t>(leaving)])) {
          best_ratio = ratio;
          leaving = r;
        }
      }
      if (leaving < 0) return false;
      pivot(leaving, entering);
    }
    throw Error(ErrorCode::kLpNumericalFailure, "simplex pivot budget exhausted");
  }

  void drop_row(Eigen::Index row) {
    const Eigen::Index last = t_.rows() - 1;
    Matrix reduced(t_.rows() - 1, t_.cols());
    Eigen::Index k = 0;
    for (Eigen::Index r = 0; r <= last; ++r) {
      if (r != row) reduced.row(k++) = t_.row(r);
    }
    t_ = std::move(reduced);
    basis_.erase(basis_.begin() + row);
  }

 private:
  Matrix t_;
  std::vector<int> basis_;
};

}  // namespace

LpResult solve_lp(const LinearProgram& lp, double tol) {
  const Eigen::Index m = lp.A.rows();
  const Eigen::Index n = lp.A.cols();
  if (lp.b.size() != m || lp.c.size() != n) throw Error(ErrorCode::kInvalidArgument, "LP dimensions disagree");
  if (!lp.A.allFinite() || !lp.b.allFinite() || !lp.c.allFinite()) {
    throw Error(ErrorCode::kLpNumericalFailure, "LP data is not finite");
  }

  // Phase 1: artificial variable per row, b made non-negative.
  Matrix t = Matrix::Zero(m + 1, n + m + 1);
  std::vector<int> basis(static_cast<std::size_t>(m));
  for (Eigen::Index r = 0; r < m; ++r) {
    const double sign = lp.b(r) < 0.0 ? -1.0 : 1.0;
    t.row(r).head(n) = sign * lp.A.row(r);
    t(r, n + r) = 1.0;
    t(r, n + m) = sign * lp.b(r);
    basis[static_cast<std::size_t>(r)] = static_cast<int>(n + r);
  }
  for (Eigen::Index r = 0; r < m; ++r) t.row(m) -= t.row(r);
  t.row(m).segment(n, m).setZero();

  Tableau tab(std::move(t), std::move(basis));
  tab.optimize(n + m, tol);

  LpResult result;
  const double scale = std::max(1.0, lp.b.lpNorm<Eigen::Infinity>());
  if (-tab.data()(tab.rows(), tab.cols()) > tol * scale) {
    result.status = LpStatus::kInfeasible;
    return result;
  }

  // Drive remaining artificials out of the basis; rows that cannot pivot are redundant.
  for (Eigen::Index r = tab.rows() - 1; r >= 0; --r) {
    if (tab.basis()[static_cast<std::size_t>(r)] < n) continue;
    Eigen::Index col = -1;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(tab.data()(r, j)) > 1e-9) {
        col = j;
        break;
      }
    }
    if (col >= 0) {
      tab.pivot(r, col);
    } else {
      tab.drop_row(r);
    }
  }

  // Phase 2 reduced costs over the original columns.
  Matrix& d = tab.data();
  const Eigen::Index obj = tab.rows();
  d.row(obj).setZero();
  d.row(obj).head(n) = lp.c.transpose();
  for (Eigen::Index r = 0; r < tab.rows(); ++r) {
    const int bcol = tab.basis()[static_cast<std::size_t>(r)];
    d.row(obj) -= lp.c(bcol) * d.row(r);
  }
  if (!tab.optimize(n, tol)) {
    result.status = LpStatus::kUnbounded;
    return result;
  }

  result.status = LpStatus::kOptimal;
  result.x = Vector::Zero(n);
  for (Eigen::Index r = 0; r < tab.rows(); ++r) {
    const int bcol = tab.basis()[static_cast<std::size_t>(r)];
    if (bcol < n) result.x(bcol) = std::max(0.0, d(r, tab.cols()));
  }
  result.objective = lp.c.dot(result.x);
  return result;
}

}  // namespace rlfalsify
