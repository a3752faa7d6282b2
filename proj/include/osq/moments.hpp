#pragma once

#include "osq/model.hpp"

namespace osq {

/// Means and symmetrized covariance of (X1, X2, Y1, Y2).
struct GaussianState {
  Eigen::Vector4d mean = Eigen::Vector4d::Zero();
  Eigen::Matrix4d cov = Eigen::Matrix4d::Zero();

  /// mech thermal x cavity vacuum: V = diag(n_th+1/2, n_th+1/2, 1/2, 1/2).
  static GaussianState thermal(double n_th);
  void validate() const;
};

struct GaussianGenerator {
  Eigen::Matrix4d drift = Eigen::Matrix4d::Zero();      // A(t), 1/s
  Eigen::Matrix4d diffusion = Eigen::Matrix4d::Zero();  // D, 1/s
  Eigen::Vector4d force = Eigen::Vector4d::Zero();      // f(t), 1/s
};

/// Linear-drive terms. They move means only; the covariance flow never sees
/// them. The photon-number contribution enters as a user-supplied constant.
struct ForceSpec {
  bool enabled = false;
  double photon_number = 0.0;
  double dgp_dt = 0.0;  // envelope derivatives (zero for piecewise-constant pulses)
  double dgm_dt = 0.0;
};

GaussianGenerator build_generator(double g_plus, double g_minus, double t,
                                  const SystemParams& params, RotatingFrame frame,
                                  const ForceSpec& force = {});

struct MomentTrajectory {
  TimeGrid grid;
  int stored_every = 1;
  std::vector<double> times;
  std::vector<GaussianState> states;

  const GaussianState& terminal() const { return states.back(); }
};

MomentTrajectory evolve_moments(const GaussianState& initial, const PulsePair& pulses,
                                const SystemParams& params, RotatingFrame frame,
                                const ForceSpec& force = {}, int stored_every = 1);

/// RWA steady state via the 16x16 Kronecker Lyapunov solve A V + V A^T + D = 0.
/// Requires G- > G+ and a Hurwitz drift.
GaussianState steady_state(double g_plus, double g_minus, const SystemParams& params);

}  // namespace osq
