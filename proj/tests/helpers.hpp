#pragma once

// Shared builders for the test suites: seeded random matrices, random
// lag-moment families, brute-force oracles for the small-dimension cases.

#include <Eigen/Dense>
#include <cmath>
#include <utility>
#include <vector>

#include "mrp/design.hpp"
#include "mrp/gtrs.hpp"
#include "mrp/moments.hpp"
#include "mrp/rng.hpp"

namespace testutil {

inline Eigen::MatrixXd random_matrix(Eigen::Index rows, Eigen::Index cols,
                                     mrp::Gaussian& g) {
  Eigen::MatrixXd A(rows, cols);
  for (Eigen::Index i = 0; i < rows; ++i)
    for (Eigen::Index j = 0; j < cols; ++j) A(i, j) = g();
  return A;
}

inline Eigen::VectorXd random_vector(Eigen::Index n, mrp::Gaussian& g) {
  Eigen::VectorXd v(n);
  for (Eigen::Index i = 0; i < n; ++i) v(i) = g();
  return v;
}

inline Eigen::MatrixXd random_sym(Eigen::Index n, mrp::Gaussian& g) {
  const Eigen::MatrixXd A = random_matrix(n, n, g);
  return 0.5 * (A + A.transpose());
}

inline Eigen::MatrixXd random_spd(Eigen::Index n, mrp::Gaussian& g) {
  const Eigen::MatrixXd A = random_matrix(n, n, g);
  return A * A.transpose() +
         0.5 * static_cast<double>(n) * Eigen::MatrixXd::Identity(n, n);
}

// Symmetric matrix with eigenvalues of both signs (for GTRS instances).
inline Eigen::MatrixXd random_indefinite(Eigen::Index n, mrp::Gaussian& g) {
  const Eigen::MatrixXd B = random_matrix(n, n, g);
  const Eigen::HouseholderQR<Eigen::MatrixXd> qr(B);
  const Eigen::MatrixXd Q =
      qr.householderQ() * Eigen::MatrixXd::Identity(n, n);
  Eigen::VectorXd lam(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    lam(i) = 0.25 + std::abs(g());
    if (i % 2 == 1) lam(i) = -lam(i);
  }
  return Q * lam.asDiagonal() * Q.transpose();
}

// Random lag-moment family: PD M0, symmetric M_i scaled so M0 dominates.
inline mrp::LagMoments random_moments(Eigen::Index N, int p,
                                      mrp::Gaussian& g) {
  mrp::LagMoments lm;
  lm.p = p;
  lm.T_est = 500;
  const Eigen::MatrixXd M0 = random_spd(N, g);
  lm.mats.push_back(M0);
  for (int i = 1; i <= p; ++i) {
    Eigen::MatrixXd Mi = random_sym(N, g);
    Mi *= 0.3 * M0.norm() / Mi.norm();
    lm.mats.push_back(Mi);
  }
  return lm;
}

// Exact-zero autocovariances at every positive lag (ideal white noise).
inline mrp::LagMoments white_noise_moments(Eigen::Index N, int p,
                                           mrp::Gaussian& g) {
  mrp::LagMoments lm;
  lm.p = p;
  lm.T_est = 500;
  lm.mats.push_back(random_spd(N, g));
  for (int i = 1; i <= p; ++i) {
    lm.mats.push_back(Eigen::MatrixXd::Zero(N, N));
  }
  return lm;
}

// The explicit sum-of-vec-outer-products matrix (N^2 x N^2) that the Gram
// representation avoids; only sane for small N.
inline Eigen::MatrixXd explicit_mbar(const mrp::WhitenedMoments& wm) {
  const Eigen::Index N = wm.L.rows();
  Eigen::MatrixXd big = Eigen::MatrixXd::Zero(N * N, N * N);
  for (const auto& mb : wm.mbars) {
    const Eigen::Map<const Eigen::VectorXd> v(mb.data(), N * N);
    big += v * v.transpose();
  }
  return big;
}

// A random point on {w : 1^T w = 1, w^T M0 w = nu}: random direction on the
// reduced-space ellipsoid through the affine parametrization.
inline Eigen::VectorXd random_feasible(const mrp::LagMoments& lm, double nu,
                                       mrp::Gaussian& g) {
  const mrp::AffineReduction red = mrp::affine_reduction(lm.N());
  const Eigen::MatrixXd N0 = red.F.transpose() * lm.M0() * red.F;
  const Eigen::VectorXd p0 = red.F.transpose() * (lm.M0() * red.w0);
  const double b0 = red.w0.dot(lm.M0() * red.w0);
  const Eigen::LLT<Eigen::MatrixXd> llt(N0);
  const Eigen::VectorXd xc = llt.solve(-p0);
  const double nu_min = b0 + p0.dot(xc);
  const double rho = std::sqrt(std::max(0.0, nu - nu_min));
  Eigen::VectorXd dir = random_vector(red.F.cols(), g);
  dir.normalize();
  // Scale the direction so (x - xc)^T N0 (x - xc) = nu - nu_min.
  const double q = dir.dot(N0 * dir);
  const Eigen::VectorXd x = xc + (rho / std::sqrt(q)) * dir;
  return red.w0 + red.F * x;
}

// N = 2 exact oracle: the feasible set {1^T w = 1, w^T M0 w = nu} has at
// most two points; enumerate both and return the smaller raw objective.
// Returns (best objective, number of feasible points).
inline std::pair<double, int> enumerate_n2(const mrp::LagMoments& lm,
                                           double nu) {
  const Eigen::MatrixXd& M0 = lm.M0();
  // w = (t, 1 - t): quadratic a t^2 + b t + c = 0.
  const double a = M0(0, 0) - 2.0 * M0(0, 1) + M0(1, 1);
  const double b = 2.0 * (M0(0, 1) - M0(1, 1));
  const double c = M0(1, 1) - nu;
  const double disc = b * b - 4.0 * a * c;
  if (disc < 0.0) return {0.0, 0};
  const double root = std::sqrt(disc);
  double best = std::numeric_limits<double>::infinity();
  for (const double t : {(-b + root) / (2.0 * a), (-b - root) / (2.0 * a)}) {
    Eigen::VectorXd w(2);
    w << t, 1.0 - t;
    best = std::min(best, mrp::raw_objective(w, lm));
  }
  return {best, disc > 0.0 ? 2 : 1};
}

// Angular parametrization of the reduced-space feasible ellipse for N = 3:
// x(theta) = xc + rho * Q diag(1/sqrt(lambda)) (cos, sin). Evaluates the raw
// objective on a grid and returns the minimum.
inline double grid_min_n3(const mrp::LagMoments& lm, double nu,
                          std::int64_t points) {
  const mrp::AffineReduction red = mrp::affine_reduction(3);
  const Eigen::MatrixXd N0 = red.F.transpose() * lm.M0() * red.F;
  const Eigen::VectorXd p0 = red.F.transpose() * (lm.M0() * red.w0);
  const double b0 = red.w0.dot(lm.M0() * red.w0);
  const Eigen::LLT<Eigen::MatrixXd> llt(N0);
  const Eigen::VectorXd xc = llt.solve(-p0);
  const double nu_min = b0 + p0.dot(xc);
  const double rho = std::sqrt(std::max(0.0, nu - nu_min));
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(N0);
  const Eigen::MatrixXd axes =
      es.eigenvectors() *
      es.eigenvalues().cwiseSqrt().cwiseInverse().asDiagonal();
  double best = std::numeric_limits<double>::infinity();
  for (std::int64_t k = 0; k < points; ++k) {
    const double th =
        2.0 * M_PI * static_cast<double>(k) / static_cast<double>(points);
    Eigen::VectorXd u(2);
    u << std::cos(th), std::sin(th);
    const Eigen::VectorXd w = red.w0 + red.F * (xc + rho * (axes * u));
    best = std::min(best, mrp::raw_objective(w, lm));
  }
  return best;
}

}  // namespace testutil
