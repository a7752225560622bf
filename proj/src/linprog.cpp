#include "jsr/linprog.hpp"

#include <cmath>
#include <limits>
#include <vector>

namespace jsr::lp {

namespace {

// Tableau layout: rows 0..m-1 are constraints, row m is the objective
// (reduced costs); the last column is the right-hand side.
class Tableau {
public:
  Tableau(Eigen::Index rows, Eigen::Index cols) : t_(Eigen::MatrixXd::Zero(rows + 1, cols + 1)) {}

  Eigen::MatrixXd& data() { return t_; }
  Eigen::Index rows() const { return t_.rows() - 1; }
  Eigen::Index cols() const { return t_.cols() - 1; }
  double& rhs(Eigen::Index i) { return t_(i, t_.cols() - 1); }

  void pivot(Eigen::Index r, Eigen::Index c) {
    t_.row(r) /= t_(r, c);
    for (Eigen::Index i = 0; i < t_.rows(); ++i) {
      if (i == r) continue;
      const double f = t_(i, c);
      if (f != 0.0) t_.row(i) -= f * t_.row(r);
    }
  }

private:
  Eigen::MatrixXd t_;
};

// Minimises over columns [0, active_cols). Dantzig pricing, falling back to
// Bland's rule after a run of degenerate pivots.
Status run_simplex(Tableau& tab, std::vector<Eigen::Index>& basis, Eigen::Index active_cols,
                   double tol) {
  auto& t = tab.data();
  const Eigen::Index m = tab.rows();
  const long max_iter = 50 * (m + active_cols) + 1000;
  int degenerate_run = 0;
  for (long it = 0; it < max_iter; ++it) {
    const bool bland = degenerate_run > 50;
    Eigen::Index enter = -1;
    double most = -tol;
    for (Eigen::Index j = 0; j < active_cols; ++j) {
      const double rc = t(m, j);
      if (rc < most) {
        enter = j;
        if (bland) break;
        most = rc;
      }
    }
    if (enter < 0) return Status::optimal;

    Eigen::Index leave = -1;
    double best_ratio = std::numeric_limits<double>::infinity();
    for (Eigen::Index i = 0; i < m; ++i) {
      const double a = t(i, enter);
      if (a <= tol) continue;
      const double ratio = tab.rhs(i) / a;
      if (ratio < best_ratio - 1e-14 ||
          (std::abs(ratio - best_ratio) <= 1e-14 && leave >= 0 &&
           basis[static_cast<std::size_t>(i)] < basis[static_cast<std::size_t>(leave)])) {
        best_ratio = ratio;
        leave = i;
      }
    }
    if (leave < 0) return Status::unbounded;
    degenerate_run = best_ratio <= tol ? degenerate_run + 1 : 0;
    tab.pivot(leave, enter);
    basis[static_cast<std::size_t>(leave)] = enter;
  }
  return Status::iteration_limit;
}

}  // namespace

Result solve_standard_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c, double tol) {
  const Eigen::Index m = A.rows(), n = A.cols();
  Result res;
  res.x = Eigen::VectorXd::Zero(n);

  // Phase 1: artificial variable per row, rows flipped so that b >= 0.
  Tableau tab(m, n + m);
  auto& t = tab.data();
  for (Eigen::Index i = 0; i < m; ++i) {
    const double sign = b(i) < 0.0 ? -1.0 : 1.0;
    t.block(i, 0, 1, n) = sign * A.row(i);
    t(i, n + i) = 1.0;
    tab.rhs(i) = sign * b(i);
  }
  std::vector<Eigen::Index> basis(static_cast<std::size_t>(m));
  for (Eigen::Index i = 0; i < m; ++i) basis[static_cast<std::size_t>(i)] = n + i;
  for (Eigen::Index i = 0; i < m; ++i) t.row(m) -= t.row(i);
  for (Eigen::Index i = 0; i < m; ++i) t(m, n + i) = 0.0;

  Status s = run_simplex(tab, basis, n + m, tol);
  if (s == Status::iteration_limit) {
    res.status = s;
    return res;
  }
  const double bscale = 1.0 + b.cwiseAbs().maxCoeff();
  if (-t(m, n + m) > tol * bscale * 10.0) {
    res.status = Status::infeasible;
    return res;
  }

  // Drive remaining artificials out of the basis where possible; rows where
  // no original column can enter are redundant and stay pinned at zero.
  for (Eigen::Index i = 0; i < m; ++i) {
    if (basis[static_cast<std::size_t>(i)] < n) continue;
    Eigen::Index col = -1;
    double big = tol;
    for (Eigen::Index j = 0; j < n; ++j) {
      if (std::abs(t(i, j)) > big) {
        big = std::abs(t(i, j));
        col = j;
      }
    }
    if (col >= 0) {
      tab.pivot(i, col);
      basis[static_cast<std::size_t>(i)] = col;
    }
  }

  // Phase 2 objective row.
  t.row(m).setZero();
  t.block(m, 0, 1, n) = c.transpose();
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n && c(bi) != 0.0) t.row(m) -= c(bi) * t.row(i);
  }
  // Artificial columns are excluded from pricing in phase 2.
  s = run_simplex(tab, basis, n, tol);
  res.status = s;
  if (s != Status::optimal) return res;
  for (Eigen::Index i = 0; i < m; ++i) {
    const Eigen::Index bi = basis[static_cast<std::size_t>(i)];
    if (bi < n) res.x(bi) = tab.rhs(i);
  }
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace jsr::lp
