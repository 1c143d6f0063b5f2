#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mrp/gtrs.hpp"
#include "mrp/moments.hpp"

namespace mrp {

// Affine parametrization of the budget hyperplane: w = w0 + F x with
// 1^T w0 = 1, 1^T F = 0, F^T F = I.
struct AffineReduction {
  Eigen::VectorXd w0;  // N
  Eigen::MatrixXd F;   // N x (N-1)
};

// Deterministic reduction for the standard budget 1^T w = 1: w0 = 1/N,
// F = the non-first columns of the Householder reflector mapping the
// normalized budget normal onto e1.
AffineReduction affine_reduction(Eigen::Index N);

// Same construction for a general budget constraint a^T w = 1 (used to run
// the loop in whitened coordinates, where the budget normal is L^-1 1).
AffineReduction kernel_reduction(const Eigen::VectorXd& a);

struct MrpConfig {
  int p = 3;
  double nu = 0.0;
  PsiMode psi_mode = PsiMode::spectral;
  double tol_obj = 1e-9;   // relative objective-decrease plateau test
  double tol_w = 1e-8;     // relative iterate-change plateau test
  // Convergence is declared only when a plateau test fires AND the KKT
  // stationarity residual is at most kkt_tol. A plateau alone is not enough:
  // the MM tail is slow, and the objective can stall many iterations before
  // the iterate is actually stationary.
  double kkt_tol = 1e-5;
  int max_iter = 5000;
  double gtrs_tol = 1e-10;
  bool multi_start = true;  // start from +/- each principal feasible axis
};

struct MrpResult {
  Eigen::VectorXd w;
  std::vector<double> objective_trace;  // raw objective per iteration
  std::vector<Eigen::VectorXd> iterate_trace;  // w per iteration (same run)
  int iterations = 0;
  bool converged = false;
  double kkt_residual = 0.0;
};

// sum_{i=1}^p (w^T M_i w)^2, the solver objective (the reported portmanteau
// statistic reinstates the T factor and the variance denominator).
double raw_objective(const Eigen::VectorXd& w, const LagMoments& lm);

// Minimum variance attainable on the budget hyperplane: 1/(1^T M0^-1 1).
double min_variance_level(const LagMoments& lm);

// Feasible point on the minimum-variance ray: w = w0 + F (x_c + t u) where
// x_c is the reduced minimum-variance point, u the bottom eigenvector of
// F^T M0 F, and t = sqrt((nu - nu_min)/lambda_min) >= 0. Always real for
// nu >= nu_min; throws Errc::infeasible (reporting nu_min) below that.
Eigen::VectorXd feasible_init(const LagMoments& lm, double nu,
                              const AffineReduction& red);

// All deterministic starting points used by the multi-start solver:
// x_c +/- t_j u_j over every eigenpair of F^T M0 F.
std::vector<Eigen::VectorXd> feasible_starts(const LagMoments& lm, double nu,
                                             const AffineReduction& red);

// H(k) = sum_i (w_k^T M_i w_k) M_i - psi * (M0 w_k)(M0 w_k)^T, symmetrized.
// Warns on stderr (does not fail) if w_k leaves the budget hyperplane by
// more than 1e-6.
Eigen::MatrixXd build_majorizer(const Eigen::VectorXd& w_k,
                                const LagMoments& lm, double psi);

// Substitute w = w0 + F x into the surrogate and the variance constraint.
GtrsProblem reduce_to_gtrs(const Eigen::MatrixXd& H, const Eigen::MatrixXd& M0,
                           double nu, const AffineReduction& red);

// Norm of the objective gradient minus its projection onto the span of the
// two constraint normals {1, M0 w}, normalized by max(1, ||g||).
double kkt_residual(const Eigen::VectorXd& w, const LagMoments& lm, double nu);

// The MM outer loop: whiten once, fix psi once, then iterate
// majorize -> reduce -> GTRS -> map back, recording the raw objective.
// With cfg.multi_start the loop runs from every feasible_starts point and
// the best final objective wins; the reported trace is the winning run's.
MrpResult solve_mrp(const LagMoments& lm, const MrpConfig& cfg);

}  // namespace mrp
