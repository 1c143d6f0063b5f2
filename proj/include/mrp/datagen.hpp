#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <optional>
#include <vector>

#include "mrp/market.hpp"

namespace mrp {

// Synthetic cointegrated system: r stationary AR(1) latent series plus
// M - r latent random walks, mixed into M observed log-price series by a
// nonsingular matrix A. beta = [I_r 0] A^-1 recovers the stationary block,
// so the system has exact cointegration rank r with known vectors.
struct CointSpec {
  Eigen::Index M = 6;
  Eigen::Index r = 5;
  std::vector<double> ar_coeffs;       // r values in (-1, 1)
  std::vector<double> spread_noise_sd; // r positive
  std::vector<double> rw_noise_sd;     // M - r positive
  // Empty => a random orthogonal mix drawn from the seeded generator.
  std::optional<Eigen::MatrixXd> mix;
  std::uint64_t seed = 0;
  Eigen::Index T = 528;

  // Defaults for anything left unset: mixed-sign AR coefficients cycling
  // over {0.5, -0.5, 0.7, -0.3, 0.4}, unit noise scales, random-orthogonal
  // mix. Mixed signs matter: spreads whose autocorrelations all share one
  // sign cannot be combined into anything more mean-reverting than the best
  // single spread, which would defeat the point of the design stage.
  void fill_defaults();
};

struct SyntheticMarket {
  LogPriceMatrix prices;
  Eigen::MatrixXd beta;  // r x M, beta * y_t = stationary block
  std::uint64_t seed_used = 0;
  Eigen::MatrixXd mix_used;  // M x M
};

enum class SpreadMode { true_beta, perturbed };

SyntheticMarket generate_market(const CointSpec& spec);

// mode true_beta: hedge = beta. mode perturbed: adds iid zero-mean Gaussian
// noise of sd perturb_sd to every hedge entry (stand-in for estimation
// error), seeded deterministically from the market's seed.
SpreadPanel build_spreads(const SyntheticMarket& market, SpreadMode mode,
                          double perturb_sd = 0.0);

// Per-asset exposure implied by spread weights: w_p = hedge^T w, so that
// w^T s_t = w_p^T y_t.
Eigen::VectorXd asset_weights(const Eigen::MatrixXd& hedge,
                              const Eigen::VectorXd& w);

}  // namespace mrp
