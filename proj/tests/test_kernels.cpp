#include <doctest.h>

#ifdef _OPENMP
#include <omp.h>
#endif

#include <cmath>
#include <cstring>
#include <vector>

#include "helpers.hpp"
#include "mrp/kernels.hpp"
#include "mrp/rng.hpp"

using namespace mrp;

TEST_CASE("lag_moment_serial matches the definition on a tiny panel") {
  // Centered panel, N=1: s = (1, -1, 0). M0 = 2/3, M1 = -1/3 (1/T scale).
  Eigen::MatrixXd s(3, 1);
  s << 1.0, -1.0, 0.0;
  CHECK(lag_moment_serial(s, 0)(0, 0) == doctest::Approx(2.0 / 3.0));
  CHECK(lag_moment_serial(s, 1)(0, 0) == doctest::Approx(-1.0 / 3.0));
  CHECK(lag_moment_serial(s, 2)(0, 0) == doctest::Approx(0.0));
}

TEST_CASE("blocked lag moments agree with the serial reference") {
  Gaussian g(23);
  for (const Eigen::Index T : {16L, 100L, 777L}) {
    Eigen::MatrixXd panel = testutil::random_matrix(T, 5, g);
    panel.rowwise() -= panel.colwise().mean();
    for (int lag = 0; lag <= 3; ++lag) {
      const Eigen::MatrixXd a = lag_moment_serial(panel, lag);
      const Eigen::MatrixXd b = lag_moment_blocked(panel, lag);
      CHECK((a - b).cwiseAbs().maxCoeff() <= 1e-12 * a.norm());
    }
  }
}

#ifdef _OPENMP
TEST_CASE("blocked lag moments are byte-identical across thread counts") {
  Gaussian g(29);
  Eigen::MatrixXd panel = testutil::random_matrix(500, 6, g);
  panel.rowwise() -= panel.colwise().mean();

  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const Eigen::MatrixXd one = lag_moment_blocked(panel, 2);
  omp_set_num_threads(4);
  const Eigen::MatrixXd four = lag_moment_blocked(panel, 2);
  omp_set_num_threads(saved);

  CHECK(std::memcmp(one.data(), four.data(),
                    sizeof(double) * static_cast<std::size_t>(one.size())) ==
        0);
}
#endif

TEST_CASE("grid_min_blocked equals grid_min_serial exactly") {
  auto f = [](std::int64_t i) {
    const double x = static_cast<double>(i) * 1e-4;
    return std::cos(3.0 * x) + 0.1 * x;
  };
  for (const std::int64_t n : {1L, 7L, 64L, 65L, 100000L}) {
    const auto a = grid_min_serial(n, f);
    const auto b = grid_min_blocked(n, f);
    CHECK(a.first == b.first);
    CHECK(a.second == b.second);
  }
}

TEST_CASE("grid minimum ties resolve to the smallest index") {
  // Period-10 sawtooth: the minimum value recurs every 10 indices.
  auto f = [](std::int64_t i) { return static_cast<double>(i % 10); };
  const auto a = grid_min_serial(1000, f);
  const auto b = grid_min_blocked(1000, f);
  CHECK(a.second == 0);
  CHECK(b.second == 0);
  CHECK(a.first == 0.0);
  CHECK(b.first == 0.0);
}

#ifdef _OPENMP
TEST_CASE("grid_min_blocked result is thread-count independent") {
  auto f = [](std::int64_t i) {
    const double x = static_cast<double>(i) * 1e-5;
    return std::sin(57.0 * x) * std::cos(11.0 * x);
  };
  const int saved = omp_get_max_threads();
  omp_set_num_threads(1);
  const auto one = grid_min_blocked(1000000, f);
  omp_set_num_threads(3);
  const auto three = grid_min_blocked(1000000, f);
  omp_set_num_threads(saved);
  CHECK(one.first == three.first);
  CHECK(one.second == three.second);
}
#endif
