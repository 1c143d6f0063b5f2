#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace mrp {

// splitmix64: used to derive independent per-series seeds from one master
// seed, so adding or reordering series never perturbs the draws of another.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ull);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream) {
  std::uint64_t s = master + 0x632be59bd9b4e019ull * (stream + 1);
  return splitmix64(s);
}

// Gaussian draws via Box-Muller on top of std::mt19937_64. The engine's
// output sequence is pinned by the standard; std::normal_distribution is
// not, so we roll the transform ourselves to keep generated panels
// reproducible across standard libraries.
class Gaussian {
 public:
  explicit Gaussian(std::uint64_t seed) : engine_(seed) {}

  double operator()() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = 0.0;
    do {
      u1 = uniform01();
    } while (u1 <= 0.0);
    const double u2 = uniform01();
    const double radius = std::sqrt(-2.0 * std::log(u1));
    const double angle = 2.0 * kPi * u2;
    spare_ = radius * std::sin(angle);
    have_spare_ = true;
    return radius * std::cos(angle);
  }

  double uniform01() {
    // 53-bit mantissa-uniform double in [0, 1).
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

 private:
  static constexpr double kPi = 3.141592653589793238462643383279502884;
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace mrp
