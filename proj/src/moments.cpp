#include "mrp/moments.hpp"

#include <cmath>
#include <string>

#include "mrp/errors.hpp"
#include "mrp/kernels.hpp"

namespace mrp {

LagMoments estimate_moments(const Eigen::MatrixXd& spread_values, int p) {
  const Eigen::Index T = spread_values.rows();
  if (p < 1) {
    throw Error(Errc::data, "lag order must be >= 1, got " + std::to_string(p));
  }
  if (T <= p + 1) {
    throw Error(Errc::data, "need more than p+1 = " + std::to_string(p + 1) +
                                " samples, got " + std::to_string(T));
  }

  const Eigen::MatrixXd centered =
      spread_values.rowwise() - spread_values.colwise().mean();

  LagMoments lm;
  lm.p = p;
  lm.T_est = T;
  lm.mats.reserve(static_cast<std::size_t>(p) + 1);
  for (int i = 0; i <= p; ++i) {
    Eigen::MatrixXd Mi = lag_moment_blocked(centered, i);
    lm.mats.push_back(0.5 * (Mi + Mi.transpose()));
  }

  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(lm.M0());
  const double lo = es.eigenvalues().minCoeff();
  const double hi = es.eigenvalues().maxCoeff();
  if (lo <= 1e-12 * std::max(hi, 0.0)) {
    throw Error(Errc::data,
                "spread covariance is numerically singular (min eigenvalue " +
                    std::to_string(lo) +
                    "); use fewer spreads or more data");
  }
  return lm;
}

LagMoments estimate_moments(const SpreadPanel& spreads, int p) {
  return estimate_moments(spreads.values, p);
}

double portmanteau(const Eigen::VectorXd& w, const LagMoments& lm) {
  const double var = w.dot(lm.M0() * w);
  if (!(var > 0.0)) {
    throw Error(Errc::data, "portfolio variance is not positive");
  }
  double acc = 0.0;
  for (int i = 1; i <= lm.p; ++i) {
    const double rho = w.dot(lm.mats[static_cast<std::size_t>(i)] * w) / var;
    acc += rho * rho;
  }
  return static_cast<double>(lm.T_est) * acc;
}

WhitenedMoments whiten(const LagMoments& lm) {
  const Eigen::LLT<Eigen::MatrixXd> llt(lm.M0());
  if (llt.info() != Eigen::Success) {
    throw Error(Errc::data,
                "Cholesky factorization of the spread covariance failed");
  }

  WhitenedMoments wm;
  wm.L = llt.matrixL();
  const Eigen::Index N = lm.N();

  // Concrete return type: returning the solve expression would dangle the
  // triangularView temporary.
  const auto Lsolve = [&](const Eigen::MatrixXd& rhs) -> Eigen::MatrixXd {
    return wm.L.triangularView<Eigen::Lower>().solve(rhs);
  };

  wm.c = Lsolve(Eigen::VectorXd::Ones(N));
  wm.mbars.reserve(static_cast<std::size_t>(lm.p));
  for (int i = 1; i <= lm.p; ++i) {
    // L^-1 M_i L^-T: forward-solve, then forward-solve the transpose.
    const Eigen::MatrixXd half =
        Lsolve(lm.mats[static_cast<std::size_t>(i)]);
    Eigen::MatrixXd mbar = Lsolve(half.transpose()).transpose();
    wm.mbars.push_back(0.5 * (mbar + mbar.transpose()));
  }

  wm.gram.resize(lm.p, lm.p);
  for (int i = 0; i < lm.p; ++i) {
    for (int j = 0; j <= i; ++j) {
      const double g = wm.mbars[static_cast<std::size_t>(i)]
                           .cwiseProduct(wm.mbars[static_cast<std::size_t>(j)])
                           .sum();
      wm.gram(i, j) = g;
      wm.gram(j, i) = g;
    }
  }
  return wm;
}

double psi_bound(const WhitenedMoments& wm, PsiMode mode) {
  bool any_nonzero = false;
  for (const auto& mbar : wm.mbars) {
    if (mbar.norm() > 0.0) {
      any_nonzero = true;
      break;
    }
  }
  if (!any_nonzero) {
    throw Error(Errc::data,
                "all lag moments are zero; objective is identically zero");
  }
  if (mode == PsiMode::frobenius) {
    return wm.gram.norm();
  }
  const Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(wm.gram);
  return es.eigenvalues().maxCoeff();
}

}  // namespace mrp
