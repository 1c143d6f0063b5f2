#pragma once

#include <Eigen/Dense>
#include <vector>

#include "mrp/market.hpp"

namespace mrp {

// Symmetrized lag moments M_0 ... M_p of the centered spread panel.
struct LagMoments {
  std::vector<Eigen::MatrixXd> mats;  // mats[i] = M_i, N x N symmetric
  int p = 0;                          // max lag
  Eigen::Index T_est = 0;             // sample count used for estimation

  const Eigen::MatrixXd& M0() const { return mats.front(); }
  Eigen::Index N() const { return mats.front().rows(); }
};

// Cholesky-whitened view of the moments: M0 = L L^T, Mbar_i = L^-1 M_i L^-T,
// c = L^-1 1. gram(i,j) = Tr(Mbar_i Mbar_j) represents the N^2 x N^2 Gram
// structure without ever materializing it.
struct WhitenedMoments {
  Eigen::MatrixXd L;                   // lower triangular
  std::vector<Eigen::MatrixXd> mbars;  // Mbar_1 ... Mbar_p
  Eigen::VectorXd c;
  Eigen::MatrixXd gram;  // p x p
};

enum class PsiMode { spectral, frobenius };

// Centers each column by its sample mean, then
// M_i = (1/T) * sum_{t=1}^{T-i} s~_t s~_{t+i}^T, symmetrized.
// Throws Errc::data when T <= p+1 or when M0 is numerically singular
// (min eigenvalue <= 1e-12 * max eigenvalue).
LagMoments estimate_moments(const Eigen::MatrixXd& spread_values, int p);
LagMoments estimate_moments(const SpreadPanel& spreads, int p);

// T_est * sum_{i=1}^p ((w^T M_i w) / (w^T M_0 w))^2.
double portmanteau(const Eigen::VectorXd& w, const LagMoments& lm);

WhitenedMoments whiten(const LagMoments& lm);

// Scalar psi with psi * I >= Mbar (the Gram-lifted quadratic-form matrix):
// spectral -> lambda_max(gram), which equals lambda_max(Mbar) exactly;
// frobenius -> Frobenius norm of Mbar = sqrt(sum gram(i,j)^2).
// Throws Errc::data when every Mbar_i is zero (nothing to optimize).
double psi_bound(const WhitenedMoments& wm, PsiMode mode);

}  // namespace mrp
