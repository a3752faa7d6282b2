#pragma once

#include <vector>

#include "osq/fock.hpp"

namespace osq {

/// Physical rates of the driven cavity + resonator, all angular (rad/s).
/// Config files take plain-Hz values and multiply by 2*pi at parse time.
struct SystemParams {
  double omega_cav = kTwoPi * 6.23e9;
  double omega_mech = kTwoPi * 3.6e6;
  double g0 = kTwoPi * 36.0;
  double kappa = kTwoPi * 450e3;
  double gamma = kTwoPi * 3.0;
  double n_th = 2.0;

  void validate() const;
};

struct TimeGrid {
  double duration = 0.0;  // seconds
  int n_steps = 0;

  double dt() const { return duration / n_steps; }
  double node(int k) const { return dt() * k; }
  void validate() const;
};

/// Real drive envelopes sampled at grid nodes (n_steps+1 values each);
/// the piecewise-constant value on step k is the node-k sample.
struct PulsePair {
  TimeGrid grid;
  RVec g_plus;   // rad/s
  RVec g_minus;  // rad/s

  void validate() const;
  double max_abs() const;
  static PulsePair constant(const TimeGrid& grid, double g_plus, double g_minus);
};

enum class RotatingFrame { rwa, full };
enum class Control { plus, minus };

/// H = -[d^(G+ b^ + G- b) + h.c.] with hbar = 1.
CMat hamiltonian_rwa(double g_plus, double g_minus, const FockCutoffs& cutoffs);

/// RWA part plus the counterrotating terms at phase 2*Omega*t.
CMat hamiltonian_full(double g_plus, double g_minus, double t, double omega_mech,
                      const FockCutoffs& cutoffs);

/// L1 = sqrt(kappa) d, L2 = sqrt(Gamma n_th) b^, L3 = sqrt(Gamma (n_th+1)) b.
std::vector<CMat> lindblad_ops(const SystemParams& params, const FockCutoffs& cutoffs);

/// -i[H, rho] + sum_l (L rho L^ - 1/2 {L^ L, rho})
CMat liouvillian_apply(const CMat& rho, const CMat& h, const std::vector<CMat>& jumps);

/// dH/dG_l for the chosen frame (time enters only through the 2*Omega*t phases).
CMat control_deriv_op(Control which, RotatingFrame frame, double t, double omega_mech,
                      const FockCutoffs& cutoffs);

/// -i[dH/dG_l, rho]
CMat liouvillian_deriv(const CMat& rho, Control which, RotatingFrame frame, double t,
                       double omega_mech, const FockCutoffs& cutoffs);

/// Step-count floor from the dt rule: dt <= (2*pi/20) / max(kappa, max|G|, 2*Omega in full mode).
int required_steps(double duration, const SystemParams& params, double max_pulse_amp,
                   RotatingFrame frame);

/// Throws with the required n_steps when the grid violates the dt rule.
void check_grid(const PulsePair& pulses, const SystemParams& params, RotatingFrame frame);

}  // namespace osq
