// Shared test oracles, kept independent of the library's propagation paths:
// states built from closed-form coefficients and a plain RK4 on the textbook
// Liouvillian definition.
#pragma once

#include <cmath>
#include <cstdlib>

#include "osq/analysis.hpp"
#include "osq/model.hpp"

namespace osq::testing {

inline CMat random_hermitian(int dim) {
  CMat m = CMat::Random(dim, dim);
  return 0.5 * (m + m.adjoint().eval());
}

inline CMat random_density(int dim) {
  CMat m = CMat::Random(dim, dim);
  CMat rho = m * m.adjoint();
  rho /= rho.trace();
  return rho;
}

/// |alpha> = e^{-|a|^2/2} sum_n a^n/sqrt(n!) |n>
inline Eigen::VectorXcd coherent_ket(Complex alpha, int n) {
  Eigen::VectorXcd ket(n);
  Complex amp = std::exp(-0.5 * std::norm(alpha));
  for (int k = 0; k < n; ++k) {
    ket(k) = amp;
    amp *= alpha / std::sqrt(double(k + 1));
  }
  return ket;
}

/// Squeezed vacuum: c_{2m} = (-tanh r)^m sqrt((2m)!)/(2^m m!) / sqrt(cosh r),
/// with the sign convention that squeezes X1 for r > 0.
inline Eigen::VectorXcd squeezed_vacuum_ket(double r, int n) {
  Eigen::VectorXcd ket = Eigen::VectorXcd::Zero(n);
  const double th = std::tanh(r);
  double c = 1.0 / std::sqrt(std::cosh(r));
  int m = 0;
  while (2 * m < n) {
    ket(2 * m) = c;
    // c_{2(m+1)} / c_{2m} = -tanh r * sqrt((2m+1)(2m+2)) / (2(m+1))
    c *= -th * std::sqrt(double(2 * m + 1) * double(2 * m + 2)) / (2.0 * (m + 1));
    ++m;
  }
  ket.normalize();  // absorbs the truncated tail
  return ket;
}

/// Plain fixed-step RK4 on the textbook Lindblad right-hand side; the slow
/// reference the fast engine is checked against.
template <typename HamiltonianFn>
inline CMat reference_propagate(CMat rho, HamiltonianFn&& h_of_t,
                                const std::vector<CMat>& jumps, double duration,
                                int n_steps) {
  const double dt = duration / n_steps;
  for (int k = 0; k < n_steps; ++k) {
    const double t = k * dt;
    const CMat k1 = liouvillian_apply(rho, h_of_t(t), jumps);
    const CMat k2 = liouvillian_apply(rho + (dt / 2) * k1, h_of_t(t + dt / 2), jumps);
    const CMat k3 = liouvillian_apply(rho + (dt / 2) * k2, h_of_t(t + dt / 2), jumps);
    const CMat k4 = liouvillian_apply(rho + dt * k3, h_of_t(t + dt), jumps);
    rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
  }
  return rho;
}

inline SystemParams table_params() { return SystemParams{}; }

inline double kappa_time(const SystemParams& p) { return kTwoPi / p.kappa; }

}  // namespace osq::testing
