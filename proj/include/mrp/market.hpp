#pragma once

#include <Eigen/Dense>
#include <filesystem>
#include <string>
#include <vector>

namespace mrp {

// T x M panel of asset log-prices, rows = time ascending.
struct LogPriceMatrix {
  Eigen::MatrixXd values;                // T x M, log-price units
  std::vector<std::string> asset_names;  // M labels

  Eigen::Index T() const { return values.rows(); }
  Eigen::Index M() const { return values.cols(); }
};

// T x N panel of spread log-prices plus the hedge matrix that produced it
// (row n = hedge ratio of spread n over the M assets).
struct SpreadPanel {
  Eigen::MatrixXd values;  // T x N
  Eigen::MatrixXd hedge;   // N x M

  Eigen::Index T() const { return values.rows(); }
  Eigen::Index N() const { return values.cols(); }
};

enum class PriceScale {
  log_prices,  // file already holds log-prices; passed through
  raw_prices,  // file holds raw prices; natural log applied on load
};

// Reads a comma-separated panel: one header row of asset names, then one row
// per time step, oldest first. Lines starting with '#' are metadata comments
// (written by our own CSV emitter) and are skipped. Throws Error(Errc::data)
// naming row/column on any malformed cell.
LogPriceMatrix load_csv(const std::filesystem::path& path, PriceScale scale);

// Writes the panel in the same format load_csv reads, prefixed with
// '#'-comment metadata lines (caller supplies fully formatted lines).
void write_csv(const std::filesystem::path& path, const LogPriceMatrix& panel,
               const std::vector<std::string>& metadata_comments);

// s_t = hedge * y_t for every t; values(t, n) = sum_m hedge(n, m) * y(t, m).
SpreadPanel make_spreads(const LogPriceMatrix& prices,
                         const Eigen::MatrixXd& hedge);

}  // namespace mrp
