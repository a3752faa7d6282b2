#pragma once

#include "osq/model.hpp"

namespace osq {

struct Trajectory {
  TimeGrid grid;
  int stored_every = 1;
  std::vector<double> times;
  std::vector<CMat> states;

  const CMat& terminal() const { return states.back(); }
};

struct PropagationOptions {
  int stored_every = 1;
  double trace_tol = 1e-8;
  /// Negative eigenvalues down to this size are tolerated; beyond it the run aborts.
  double negative_eig_tol = 1e-6;
  bool check_positivity = true;
};

/// Dense Lindblad generator with the structure of the two-mode model baked in.
///
/// The Hamiltonian commutator and the anticommutator share one GEMM per
/// application via K = -iH - M/2 (M = sum L^L, diagonal here) and the
/// Hermiticity of the state; the jump sandwiches are ladder-shift scalings,
/// O(dim^2). States must be Hermitian in both directions.
class LindbladEngine {
 public:
  LindbladEngine(const SystemParams& params, const FockCutoffs& cutoffs,
                 RotatingFrame frame);

  CMat apply(const CMat& state, double g_plus, double g_minus, double t) const;
  CMat apply_adjoint(const CMat& state, double g_plus, double g_minus, double t) const;

  /// One RK4 step with frozen controls; counterrotating phases follow stage times.
  /// dt < 0 steps backward in time.
  CMat step(const CMat& state, double g_plus, double g_minus, double t0, double dt,
            bool adjoint) const;

  /// dH/dG_l at time t (frame phases included).
  CMat control_deriv(Control which, double t) const;

  const FockCutoffs& cutoffs() const { return cutoffs_; }
  RotatingFrame frame() const { return frame_; }

 private:
  CMat generator_k(double g_plus, double g_minus, double t, bool adjoint) const;
  void add_jumps(const CMat& state, CMat& out, bool adjoint) const;

  FockCutoffs cutoffs_;
  RotatingFrame frame_;
  double omega_mech_;
  double kappa_;
  double gamma_n_;    // Gamma * n_th
  double gamma_n1_;   // Gamma * (n_th + 1)
  CMat h_plus_, h_minus_;  // RWA dH/dG+-
  CMat t_pm_, t_pp_;       // d^ b and d^ b^
  RVec m_diag_;            // sum L^L (diagonal)
  RVec sqrt_cav_, sqrt_mech_;
};

Trajectory propagate_forward(const CMat& rho0, const PulsePair& pulses,
                             const SystemParams& params, const FockCutoffs& cutoffs,
                             RotatingFrame frame, const PropagationOptions& opts = {});

/// Solves d(chi)/dt = -L^ chi backward from the final time; no renormalization.
/// states[k] is chi at node k, so states.front() is chi(0).
Trajectory propagate_backward(const CMat& chi_final, const PulsePair& pulses,
                              const SystemParams& params, const FockCutoffs& cutoffs,
                              RotatingFrame frame, const PropagationOptions& opts = {});

/// Cavity vacuum x mechanical thermal state; warns when the thermal
/// truncation deficit exceeds 1e-6.
CMat standard_initial_state(const SystemParams& params, const FockCutoffs& cutoffs);

/// Cutoff-convergence policy: rerun with both cutoffs +50% and report the
/// relative change of the terminal X1 variance.
double cutoff_convergence_gap(const PulsePair& pulses, const SystemParams& params,
                              const FockCutoffs& cutoffs, RotatingFrame frame);

}  // namespace osq
