#include "mrp/kernels.hpp"

#include <algorithm>

namespace mrp {

Eigen::MatrixXd lag_moment_serial(const Eigen::MatrixXd& centered, int lag) {
  const Eigen::Index T = centered.rows();
  const Eigen::Index N = centered.cols();
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(N, N);
  for (Eigen::Index t = 0; t + lag < T; ++t) {
    acc.noalias() +=
        centered.row(t).transpose() * centered.row(t + lag);
  }
  return acc / static_cast<double>(T);
}

Eigen::MatrixXd lag_moment_blocked(const Eigen::MatrixXd& centered, int lag) {
  const Eigen::Index T = centered.rows();
  const Eigen::Index N = centered.cols();
  const Eigen::Index span = T - lag;  // number of summed terms
  if (span <= 0) return Eigen::MatrixXd::Zero(N, N);

  const int blocks = static_cast<int>(std::min<Eigen::Index>(
      kReductionBlocks, span));
  std::vector<Eigen::MatrixXd> partial(static_cast<std::size_t>(blocks));
#ifdef _OPENMP
#pragma omp parallel for schedule(static)
#endif
  for (int b = 0; b < blocks; ++b) {
    const Eigen::Index lo = span * b / blocks;
    const Eigen::Index hi = span * (b + 1) / blocks;
    const Eigen::Index len = hi - lo;
    partial[static_cast<std::size_t>(b)].noalias() =
        centered.middleRows(lo, len).transpose() *
        centered.middleRows(lo + lag, len);
  }
  Eigen::MatrixXd acc = Eigen::MatrixXd::Zero(N, N);
  for (int b = 0; b < blocks; ++b) acc += partial[static_cast<std::size_t>(b)];
  return acc / static_cast<double>(T);
}

}  // namespace mrp
