#pragma once

#include <Eigen/Dense>
#include <complex>
#include <stdexcept>
#include <string>

namespace osq {

inline constexpr double kTwoPi = 6.283185307179586476925286766559;

using Complex = std::complex<double>;
using CMat = Eigen::MatrixXcd;
using RVec = Eigen::VectorXd;

enum class ErrorCode {
  invalid_argument = 1,
  config = 2,
  numeric = 3,
  io = 4,
  unsupported = 5,
  internal = 6,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// max elementwise |M - M^dagger|
double hermiticity_defect(const CMat& m);
bool is_hermitian(const CMat& m, double tol = 1e-12);

/// Diagnostics go to stderr; result artifacts stay deterministic.
void warn(const std::string& message);

}  // namespace osq
