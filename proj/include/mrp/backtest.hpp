#pragma once

#include <Eigen/Dense>
#include <optional>
#include <vector>

namespace mrp {

// Threshold rule calibrated in-sample: trade around mu at +/- delta,
// delta = 0.75 * sample standard deviation.
struct TradingRule {
  double mu = 0.0;
  double sd = 0.0;
  double delta = 0.0;
};

struct PositionSeries {
  std::vector<int> positions;  // {-1, 0, +1}, one per period
  std::vector<Eigen::Index> entries;  // t where position became nonzero
  std::vector<Eigen::Index> exits;    // t where position became zero
};

struct BacktestReport {
  std::vector<double> pnl;      // per-period, pnl[0] = 0 by convention
  std::vector<double> cum_pnl;  // running sum
  std::vector<double> roi;      // pnl / gross exposure
  std::optional<double> sharpe; // nullopt when sd(roi) == 0
  int window_id = 0;
};

// mu = sample mean, sd = sample standard deviation (T-1 denominator),
// delta = 0.75 * sd. Throws Errc::data on fewer than 2 points or zero
// variance.
TradingRule calibrate_rule(const std::vector<double>& z_train);

// Three-state machine evaluated in order, starting flat:
//   FLAT  -> LONG  if z <= mu - delta; FLAT -> SHORT if z >= mu + delta
//   LONG  -> SHORT if z >= mu + delta; LONG -> FLAT  if mu <= z < mu + delta
//   SHORT -> LONG  if z <= mu - delta; SHORT -> FLAT if mu - delta < z <= mu
// otherwise hold. The position at t is held over (t, t+1].
PositionSeries simulate_positions(const std::vector<double>& z,
                                  const TradingRule& rule);

// P&L_t = positions_{t-1} * (z_t - z_{t-1}) for t >= 1; ROI_t = P&L_t /
// gross, gross = ||w_p||_1 fixed for the window. Sharpe = mean(roi) /
// sd(roi) over periods t >= 1, T-1 denominator, risk-free 0, unannualized;
// unset when sd(roi) == 0.
BacktestReport evaluate(const std::vector<double>& z,
                        const PositionSeries& positions, double gross_exposure,
                        int window_id = 0);

// Re-checks every transition of `positions` against the rule; true iff the
// whole path is exactly what simulate_positions would produce.
bool replay_validates(const std::vector<double>& z, const TradingRule& rule,
                      const PositionSeries& positions);

struct Window {
  Eigen::Index train_begin = 0;
  Eigen::Index train_end = 0;  // exclusive
  Eigen::Index trade_begin = 0;
  Eigen::Index trade_end = 0;  // exclusive
};

// Window j: train [j*T_out, j*T_out + T_in), trade [j*T_out + T_in,
// j*T_out + T_in + T_out). Throws when T < T_in + count*T_out.
std::vector<Window> rolling_windows(Eigen::Index T, Eigen::Index T_in,
                                    Eigen::Index T_out, int count);

}  // namespace mrp
