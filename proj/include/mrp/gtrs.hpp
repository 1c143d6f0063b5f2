#pragma once

#include <Eigen/Dense>
#include <cstdint>

namespace mrp {

// minimize  x^T N x + 2 p^T x + b
// subject to x^T N0 x + 2 p0^T x + b0 = nu
// with N symmetric (possibly indefinite) and N0 symmetric positive definite.
struct GtrsProblem {
  Eigen::MatrixXd N;
  Eigen::VectorXd p;
  double b = 0.0;
  Eigen::MatrixXd N0;
  Eigen::VectorXd p0;
  double b0 = 0.0;
  double nu = 0.0;
};

struct GtrsSolution {
  Eigen::VectorXd x;
  double xi = 0.0;            // dual multiplier
  double value = 0.0;         // objective at x
  double phi_residual = 0.0;  // |phi(xi)| at the returned xi
  std::int64_t bisection_iterations = 0;
};

// Smallest lambda with det(A - lambda B) = 0, B symmetric positive definite,
// via the symmetric reduction lambda_min(L^-1 A L^-T) with B = L L^T.
double min_gen_eig(const Eigen::MatrixXd& A, const Eigen::MatrixXd& B);

// Secular function: phi(xi) = x(xi)^T N0 x(xi) + 2 p0^T x(xi) + b0 - nu with
// x(xi) = -(N + xi N0)^-1 (p + xi p0), solved by Cholesky. Strictly
// decreasing on the interval where N + xi N0 is positive definite.
// Throws when N + xi N0 is not positive definite at this xi.
double phi(double xi, const GtrsProblem& prob);

// Finds the root of phi by bracketed bisection on (-lambda_min(N, N0), inf),
// run to the floating-point limit of the bracket; the iterate this feeds is
// only a descent step when the subproblem is solved essentially exactly, so
// there is no early exit on a loose constraint residual. tol only accepts the
// interval-edge fast path (|phi| <= tol * max(1, nu) right at the edge). The
// measure-zero boundary case where the constrained minimizer needs a singular
// N + xi N0 is solved exactly when the projected linear term vanishes (the
// symmetric-instance case) and reported as an error otherwise.
GtrsSolution solve_gtrs(const GtrsProblem& prob, double tol = 1e-10);

}  // namespace mrp
