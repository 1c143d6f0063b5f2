#pragma once

#include <Eigen/Dense>
#include <cstdint>
#include <utility>
#include <vector>

namespace mrp {

// Hot loops used by moment estimation and the brute-force oracles, each in
// two forms: a plain serial reference and an OpenMP version. The parallel
// versions split work into a FIXED number of blocks (independent of thread
// count) and combine partial results in block order, so their output is
// byte-identical to a single-threaded run of the same blocked algorithm no
// matter how many threads execute it.

inline constexpr int kReductionBlocks = 64;

// (1/T) * sum_{t=0}^{T-lag-1} s_t s_{t+lag}^T for a centered T x N panel.
// Reference implementation: explicit outer-product accumulation.
Eigen::MatrixXd lag_moment_serial(const Eigen::MatrixXd& centered, int lag);

// Blocked implementation: per-block GEMM partials, summed in block order.
// OpenMP-parallel across blocks when enabled at build time.
Eigen::MatrixXd lag_moment_blocked(const Eigen::MatrixXd& centered, int lag);

// Minimum of f over {0, ..., n-1} returning (value, index); ties keep the
// smallest index. Serial reference.
template <class F>
std::pair<double, std::int64_t> grid_min_serial(std::int64_t n, F&& f) {
  double best = f(0);
  std::int64_t arg = 0;
  for (std::int64_t i = 1; i < n; ++i) {
    const double v = f(i);
    if (v < best) {
      best = v;
      arg = i;
    }
  }
  return {best, arg};
}

// Blocked/OpenMP version with the same tie rule; partial argmins are merged
// in block order so the result never depends on the thread count.
template <class F>
std::pair<double, std::int64_t> grid_min_blocked(std::int64_t n, F&& f) {
  const int blocks = static_cast<int>(
      std::min<std::int64_t>(kReductionBlocks, n > 0 ? n : 1));
  std::vector<double> vals(static_cast<std::size_t>(blocks));
  std::vector<std::int64_t> args(static_cast<std::size_t>(blocks));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < blocks; ++b) {
    const std::int64_t lo = n * b / blocks;
    const std::int64_t hi = n * (b + 1) / blocks;
    double best = f(lo);
    std::int64_t arg = lo;
    for (std::int64_t i = lo + 1; i < hi; ++i) {
      const double v = f(i);
      if (v < best) {
        best = v;
        arg = i;
      }
    }
    vals[static_cast<std::size_t>(b)] = best;
    args[static_cast<std::size_t>(b)] = arg;
  }
  double best = vals[0];
  std::int64_t arg = args[0];
  for (int b = 1; b < blocks; ++b) {
    if (vals[static_cast<std::size_t>(b)] < best) {
      best = vals[static_cast<std::size_t>(b)];
      arg = args[static_cast<std::size_t>(b)];
    }
  }
  return {best, arg};
}

}  // namespace mrp
