#pragma once

#include <optional>

#include "osq/propagator.hpp"

namespace osq {

struct KrotovConfig {
  /// Step-size weights; 0 = pick automatically so the first update moves the
  /// pulses by about 5% of max G- of the guess.
  double lambda_plus = 0.0;
  double lambda_minus = 0.0;
  int max_iters = 50;
  double stop_delta_j = 1e-9;
  std::optional<double> amplitude_cap;  // rad/s, off by default
  RotatingFrame frame = RotatingFrame::rwa;
  int snapshot_every = 0;  // keep a pulse snapshot every k accepted iterations
  int max_retries = 5;     // lambda doublings on a non-monotonic step
};

struct IterationEntry {
  int iter = 0;
  double j_terminal = 0.0;
  double j_running = 0.0;  // penalty term of the accepted update
  bool monotonic = true;
  int retries = 0;
};

struct OptimizationRecord {
  std::vector<IterationEntry> iterations;
  PulsePair pulses_guess;
  PulsePair pulses_final;
  std::vector<PulsePair> snapshots;
  double lambda_plus_used = 0.0;
  double lambda_minus_used = 0.0;
  bool converged = false;
  bool non_monotonic_warning = false;
};

/// chi(T) = -(X1^2 - 2 <X1> X1), the downhill seed for the terminal variance.
CMat terminal_costate(const CMat& rho_final, const FockCutoffs& cutoffs);

/// J_T = Delta X1^2 of the terminal state.
double terminal_cost(const CMat& rho_final, const FockCutoffs& cutoffs);

struct KrotovStepResult {
  PulsePair pulses;
  Trajectory forward;  // trajectory under the new pulses, stored at every node
  double j_terminal = 0.0;
  double j_running = 0.0;
};

/// One sequential Krotov sweep: backward costate with the old pulses, then a
/// forward pass that updates each sample in place before stepping the state.
KrotovStepResult krotov_update_step(const PulsePair& pulses, const Trajectory& forward_old,
                                    const CMat& rho0, double lambda_plus,
                                    double lambda_minus, const KrotovConfig& config,
                                    const SystemParams& params, const FockCutoffs& cutoffs);

OptimizationRecord optimize(const CMat& rho0, const PulsePair& guess,
                            const KrotovConfig& config, const SystemParams& params,
                            const FockCutoffs& cutoffs);

}  // namespace osq
