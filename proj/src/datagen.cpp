#include "mrp/datagen.hpp"

#include <cmath>
#include <string>

#include "mrp/errors.hpp"
#include "mrp/rng.hpp"

namespace mrp {

namespace {

constexpr double kDefaultAr[] = {0.5, -0.5, 0.7, -0.3, 0.4};

void validate(const CointSpec& spec) {
  if (spec.M < 2 || spec.r < 0 || spec.r > spec.M) {
    throw Error(Errc::usage,
                "need 0 <= rank <= assets and at least 2 assets (got rank " +
                    std::to_string(spec.r) + ", assets " +
                    std::to_string(spec.M) + ")");
  }
  if (spec.T < 2) {
    throw Error(Errc::usage, "need T >= 2");
  }
  if (static_cast<Eigen::Index>(spec.ar_coeffs.size()) != spec.r ||
      static_cast<Eigen::Index>(spec.spread_noise_sd.size()) != spec.r ||
      static_cast<Eigen::Index>(spec.rw_noise_sd.size()) != spec.M - spec.r) {
    throw Error(Errc::usage, "parameter lists do not match (rank, assets)");
  }
  for (double a : spec.ar_coeffs) {
    if (!(std::abs(a) < 1.0)) {
      throw Error(Errc::usage, "AR coefficients must satisfy |a| < 1");
    }
  }
  for (double s : spec.spread_noise_sd) {
    if (!(s > 0.0)) throw Error(Errc::usage, "noise scales must be positive");
  }
  for (double s : spec.rw_noise_sd) {
    if (!(s > 0.0)) throw Error(Errc::usage, "noise scales must be positive");
  }
}

// Deterministic orthogonal matrix: Gram-Schmidt over seeded Gaussian
// columns. Householder-QR pivoting details vary across LAPACK-style
// implementations, so the straightforward orthogonalization is used here.
Eigen::MatrixXd random_orthogonal(Eigen::Index n, std::uint64_t seed) {
  Gaussian gauss(seed);
  Eigen::MatrixXd A(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) A(i, j) = gauss();
  }
  for (Eigen::Index j = 0; j < n; ++j) {
    for (Eigen::Index k = 0; k < j; ++k) {
      A.col(j) -= A.col(k).dot(A.col(j)) * A.col(k);
    }
    const double norm = A.col(j).norm();
    if (norm < 1e-10) {
      throw Error(Errc::data, "degenerate random mix draw");
    }
    A.col(j) /= norm;
  }
  return A;
}

}  // namespace

void CointSpec::fill_defaults() {
  if (static_cast<Eigen::Index>(ar_coeffs.size()) != r) {
    ar_coeffs.resize(static_cast<std::size_t>(r));
    for (Eigen::Index j = 0; j < r; ++j) {
      ar_coeffs[static_cast<std::size_t>(j)] =
          kDefaultAr[static_cast<std::size_t>(j) % std::size(kDefaultAr)];
    }
  }
  if (static_cast<Eigen::Index>(spread_noise_sd.size()) != r) {
    spread_noise_sd.assign(static_cast<std::size_t>(r), 1.0);
  }
  if (static_cast<Eigen::Index>(rw_noise_sd.size()) != M - r) {
    rw_noise_sd.assign(static_cast<std::size_t>(M - r), 1.0);
  }
}

SyntheticMarket generate_market(const CointSpec& spec) {
  validate(spec);

  const Eigen::Index T = spec.T;
  const Eigen::Index M = spec.M;
  const Eigen::Index r = spec.r;

  // Latent block: independent per-series generators derived from the master
  // seed, so series j's draws are invariant to M, r, or T of the others.
  Eigen::MatrixXd latent(T, M);
  for (Eigen::Index j = 0; j < r; ++j) {
    Gaussian gauss(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
    const double a = spec.ar_coeffs[static_cast<std::size_t>(j)];
    const double sd = spec.spread_noise_sd[static_cast<std::size_t>(j)];
    // stationary start: q_0 ~ N(0, sd^2 / (1 - a^2))
    double q = gauss() * sd / std::sqrt(1.0 - a * a);
    for (Eigen::Index t = 0; t < T; ++t) {
      q = a * q + sd * gauss();
      latent(t, j) = q;
    }
  }
  for (Eigen::Index j = r; j < M; ++j) {
    Gaussian gauss(derive_seed(spec.seed, static_cast<std::uint64_t>(j)));
    const double sd = spec.rw_noise_sd[static_cast<std::size_t>(j - r)];
    double level = 0.0;
    for (Eigen::Index t = 0; t < T; ++t) {
      level += sd * gauss();
      latent(t, j) = level;
    }
  }

  Eigen::MatrixXd A;
  if (spec.mix.has_value()) {
    A = *spec.mix;
    if (A.rows() != M || A.cols() != M) {
      throw Error(Errc::usage, "mix matrix must be M x M");
    }
  } else {
    A = random_orthogonal(M, derive_seed(spec.seed, 0xabcdef));
  }

  const Eigen::FullPivLU<Eigen::MatrixXd> lu(A);
  if (!lu.isInvertible()) {
    throw Error(Errc::usage, "mix matrix is singular");
  }
  const Eigen::MatrixXd A_inv = lu.inverse();

  SyntheticMarket market;
  market.seed_used = spec.seed;
  market.mix_used = A;
  market.prices.values = latent * A.transpose();  // y_t = A * (q_t; u_t)
  market.prices.asset_names.reserve(static_cast<std::size_t>(M));
  for (Eigen::Index m = 0; m < M; ++m) {
    market.prices.asset_names.push_back("asset" + std::to_string(m + 1));
  }
  market.beta = A_inv.topRows(r);  // [I_r 0] A^-1
  return market;
}

SpreadPanel build_spreads(const SyntheticMarket& market, SpreadMode mode,
                          double perturb_sd) {
  if (market.beta.rows() < 1) {
    throw Error(Errc::usage, "no cointegration relations to build spreads");
  }
  Eigen::MatrixXd hedge = market.beta;
  if (mode == SpreadMode::perturbed && perturb_sd != 0.0) {
    Gaussian gauss(derive_seed(market.seed_used, 0x9edbed));
    for (Eigen::Index i = 0; i < hedge.rows(); ++i) {
      for (Eigen::Index j = 0; j < hedge.cols(); ++j) {
        hedge(i, j) += perturb_sd * gauss();
      }
    }
  }
  return make_spreads(market.prices, hedge);
}

Eigen::VectorXd asset_weights(const Eigen::MatrixXd& hedge,
                              const Eigen::VectorXd& w) {
  if (hedge.rows() != w.size()) {
    throw Error(Errc::data, "hedge rows and weight length disagree");
  }
  return hedge.transpose() * w;
}

}  // namespace mrp
