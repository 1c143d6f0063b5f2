#pragma once

#include <stdexcept>
#include <string>

namespace mrp {

// Failure categories, aligned with the CLI exit-code contract:
// 2 usage, 3 non-convergence, 4 infeasible, 5 data. Library code throws
// Error; the CLI maps code -> process exit status.
enum class Errc {
  usage = 2,
  non_convergence = 3,
  infeasible = 4,
  data = 5,
};

class Error : public std::runtime_error {
 public:
  Error(Errc code, std::string message)
      : std::runtime_error(std::move(message)), code_(code) {}

  Errc code() const noexcept { return code_; }
  int exit_code() const noexcept { return static_cast<int>(code_); }

 private:
  Errc code_;
};

}  // namespace mrp
