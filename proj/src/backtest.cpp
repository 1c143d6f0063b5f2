#include "mrp/backtest.hpp"

#include <cmath>
#include <string>

#include "mrp/errors.hpp"

namespace mrp {

namespace {

int next_position(int held, double z, const TradingRule& rule) {
  const double lo = rule.mu - rule.delta;
  const double hi = rule.mu + rule.delta;
  switch (held) {
    case 0:
      if (z <= lo) return 1;
      if (z >= hi) return -1;
      return 0;
    case 1:
      if (z >= hi) return -1;                  // direct flip
      if (z >= rule.mu && z < hi) return 0;    // reverted to the mean
      return 1;
    default:  // -1
      if (z <= lo) return 1;                   // direct flip
      if (z > lo && z <= rule.mu) return 0;
      return -1;
  }
}

}  // namespace

TradingRule calibrate_rule(const std::vector<double>& z_train) {
  if (z_train.size() < 2) {
    throw Error(Errc::data, "need at least 2 training points, got " +
                                std::to_string(z_train.size()));
  }
  double mean = 0.0;
  for (double z : z_train) mean += z;
  mean /= static_cast<double>(z_train.size());
  double ss = 0.0;
  for (double z : z_train) ss += (z - mean) * (z - mean);
  const double var = ss / static_cast<double>(z_train.size() - 1);
  if (!(var > 0.0)) {
    throw Error(Errc::data, "training spread has zero variance");
  }
  TradingRule rule;
  rule.mu = mean;
  rule.sd = std::sqrt(var);
  rule.delta = 0.75 * rule.sd;
  return rule;
}

PositionSeries simulate_positions(const std::vector<double>& z,
                                  const TradingRule& rule) {
  PositionSeries out;
  out.positions.reserve(z.size());
  int held = 0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    const int next = next_position(held, z[t], rule);
    if (held == 0 && next != 0) {
      out.entries.push_back(static_cast<Eigen::Index>(t));
    } else if (held != 0 && next == 0) {
      out.exits.push_back(static_cast<Eigen::Index>(t));
    } else if (held != 0 && next == -held) {
      // a flip closes one trade and opens another at the same tick
      out.exits.push_back(static_cast<Eigen::Index>(t));
      out.entries.push_back(static_cast<Eigen::Index>(t));
    }
    held = next;
    out.positions.push_back(held);
  }
  return out;
}

BacktestReport evaluate(const std::vector<double>& z,
                        const PositionSeries& positions, double gross_exposure,
                        int window_id) {
  if (z.size() != positions.positions.size()) {
    throw Error(Errc::data, "spread and position series lengths disagree");
  }
  if (!(gross_exposure > 0.0)) {
    throw Error(Errc::data, "gross exposure must be positive");
  }

  BacktestReport report;
  report.window_id = window_id;
  const std::size_t T = z.size();
  report.pnl.assign(T, 0.0);
  report.cum_pnl.assign(T, 0.0);
  report.roi.assign(T, 0.0);
  double running = 0.0;
  for (std::size_t t = 1; t < T; ++t) {
    report.pnl[t] =
        static_cast<double>(positions.positions[t - 1]) * (z[t] - z[t - 1]);
    running += report.pnl[t];
    report.cum_pnl[t] = running;
    report.roi[t] = report.pnl[t] / gross_exposure;
  }

  if (T >= 2) {
    const std::size_t n = T - 1;  // periods t = 1 .. T-1
    double mean = 0.0;
    for (std::size_t t = 1; t < T; ++t) mean += report.roi[t];
    mean /= static_cast<double>(n);
    double ss = 0.0;
    for (std::size_t t = 1; t < T; ++t) {
      ss += (report.roi[t] - mean) * (report.roi[t] - mean);
    }
    if (n >= 2) {
      const double sd = std::sqrt(ss / static_cast<double>(n - 1));
      if (sd > 0.0) report.sharpe = mean / sd;
    }
  }
  return report;
}

bool replay_validates(const std::vector<double>& z, const TradingRule& rule,
                      const PositionSeries& positions) {
  if (z.size() != positions.positions.size()) return false;
  int held = 0;
  for (std::size_t t = 0; t < z.size(); ++t) {
    held = next_position(held, z[t], rule);
    if (held != positions.positions[t]) return false;
  }
  return true;
}

std::vector<Window> rolling_windows(Eigen::Index T, Eigen::Index T_in,
                                    Eigen::Index T_out, int count) {
  if (T_in < 2 || T_out < 1 || count < 1) {
    throw Error(Errc::usage, "window parameters must be positive (T_in >= 2)");
  }
  if (T < T_in + static_cast<Eigen::Index>(count) * T_out) {
    throw Error(Errc::usage,
                "need T >= T_in + count*T_out = " +
                    std::to_string(T_in + count * T_out) + ", got " +
                    std::to_string(T));
  }
  std::vector<Window> windows;
  windows.reserve(static_cast<std::size_t>(count));
  for (int j = 0; j < count; ++j) {
    Window w;
    w.train_begin = static_cast<Eigen::Index>(j) * T_out;
    w.train_end = w.train_begin + T_in;
    w.trade_begin = w.train_end;
    w.trade_end = w.trade_begin + T_out;
    windows.push_back(w);
  }
  return windows;
}

}  // namespace mrp
