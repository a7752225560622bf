#pragma once

#include <Eigen/Dense>

namespace jsr::lp {

enum class Status { optimal, infeasible, unbounded, iteration_limit };

struct Result {
  Status status = Status::infeasible;
  double objective = 0.0;
  Eigen::VectorXd x;
};

/// Dense two-phase simplex for   min c'x  s.t.  A x = b,  x >= 0.
/// Intended for the small systems that arise here (a handful of rows).
Result solve_standard_form(const Eigen::MatrixXd& A, const Eigen::VectorXd& b,
                           const Eigen::VectorXd& c, double tol = 1e-10);

}  // namespace jsr::lp
