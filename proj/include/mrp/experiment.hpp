#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mrp/backtest.hpp"
#include "mrp/datagen.hpp"
#include "mrp/design.hpp"
#include "mrp/market.hpp"
#include "mrp/moments.hpp"

namespace mrp {

// Outcome of one portfolio design, including the variance level actually
// used. When no level is prescribed the driver scans a deterministic grid
// of levels (the statistic being minimized is scale-invariant, so the level
// is a free parameter) and keeps the weights with the smallest portmanteau;
// the grid includes each single spread's own variance, which makes the
// designed statistic at worst tie the best single spread up to solver gaps.
struct DesignOutcome {
  MrpResult result;
  double nu_used = 0.0;
  double portmanteau_value = 0.0;
  bool scanned = false;
};

std::vector<double> variance_scan_grid(const LagMoments& lm);

DesignOutcome design_portfolio(const LagMoments& lm, const MrpConfig& base,
                               std::optional<double> nu_override);

// One strategy evaluated on one window.
struct WindowOutcome {
  int window_id = 0;
  TradingRule rule;
  PositionSeries positions;  // over the trade range, forced flat at the end
  BacktestReport report;
  int trades = 0;
};

struct StrategyOutcome {
  std::string name;
  std::vector<WindowOutcome> windows;
  double total_cum_pnl = 0.0;
  std::optional<double> combined_sharpe;  // over concatenated trade periods
};

// Designed-portfolio per-window details, parallel to its WindowOutcomes.
struct DesignedWindow {
  Eigen::VectorXd w;
  Eigen::VectorXd w_p;
  double nu_used = 0.0;
  double portmanteau_value = 0.0;
  double kkt_residual = 0.0;
  int iterations = 0;
  bool converged = false;
};

struct ExperimentConfig {
  // Data source: synthetic spec (used when prices_csv is empty) or files.
  CointSpec spec;
  std::filesystem::path prices_csv;  // empty => synthetic
  std::filesystem::path hedge_json;  // required with prices_csv
  PriceScale scale = PriceScale::log_prices;

  MrpConfig mrp;                    // mrp.nu <= 0 => variance scan
  std::optional<double> nu;         // explicit level, overrides scan
  Eigen::Index T_in = 264;
  Eigen::Index T_out = 132;
  int window_count = 2;
  bool parallel_windows = false;
  bool include_singles = true;
  std::uint64_t seed = 0;
  std::filesystem::path out_dir = ".";
};

struct ExperimentResult {
  std::vector<Window> windows;
  StrategyOutcome designed;
  std::vector<DesignedWindow> designed_windows;
  std::vector<StrategyOutcome> singles;
  LogPriceMatrix prices;
  SpreadPanel spreads;
};

// Full pipeline: resolve data, roll windows, design per window, trade the
// designed portfolio and each single spread with their own rules.
ExperimentResult run_experiment(const ExperimentConfig& cfg);

// Sharpe over the concatenation of all windows' trade-period ROI series
// (the per-window leading sentinel entries are skipped).
std::optional<double> combined_sharpe(const std::vector<WindowOutcome>& ws);

// Serialization helpers shared by the CLI commands.
std::string summary_json(const ExperimentConfig& cfg,
                         const ExperimentResult& res);
std::string reports_json(const ExperimentConfig& cfg,
                         const ExperimentResult& res);
std::string series_csv(const ExperimentResult& res);
std::string canonical_config(const ExperimentConfig& cfg);

void write_text_file(const std::filesystem::path& path,
                     const std::string& content);

}  // namespace mrp
