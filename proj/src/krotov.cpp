#include "osq/krotov.hpp"

#include <algorithm>
#include <cmath>

#include "osq/analysis.hpp"

namespace osq {

CMat terminal_costate(const CMat& rho_final, const FockCutoffs& cutoffs) {
  const QuadratureOps q = quadrature_ops(cutoffs);
  const double mean_x1 = (rho_final * q.x1).trace().real();
  return -(CMat(q.x1 * q.x1) - 2.0 * mean_x1 * q.x1);
}

double terminal_cost(const CMat& rho_final, const FockCutoffs& cutoffs) {
  return variance(rho_final, quadrature_ops(cutoffs).x1);
}

namespace {

/// Re tr{chi * dL/dG[rho]} = Re{-i tr(P (rho chi - chi rho))}; with chi, rho
/// Hermitian, rho chi = (chi rho)^dagger, so one product serves both terms.
double update_direction(const CMat& chi, const CMat& rho, const CMat& deriv_op) {
  const CMat c = chi * rho;
  const Complex tr1 = (deriv_op * c.adjoint()).trace();
  const Complex tr2 = (deriv_op * c).trace();
  return (Complex(0, -1) * (tr1 - tr2)).real();
}

Trajectory backward_costates(const CMat& chi_final, const PulsePair& pulses,
                             const SystemParams& params, const FockCutoffs& cutoffs,
                             RotatingFrame frame) {
  PropagationOptions opts;
  opts.stored_every = 1;
  opts.check_positivity = false;
  return propagate_backward(chi_final, pulses, params, cutoffs, frame, opts);
}

struct SweepResult {
  PulsePair pulses;
  Trajectory forward;
  double j_terminal = 0.0;
  double j_running = 0.0;
};

SweepResult forward_sweep(const Trajectory& chi, const PulsePair& old_pulses,
                          const CMat& rho0, double lambda_plus, double lambda_minus,
                          const KrotovConfig& config, const LindbladEngine& engine) {
  const int n = old_pulses.grid.n_steps;
  const double dt = old_pulses.grid.dt();

  SweepResult out;
  out.pulses = old_pulses;
  out.forward.grid = old_pulses.grid;
  out.forward.stored_every = 1;
  out.forward.times.reserve(n + 1);
  out.forward.states.reserve(n + 1);

  CMat rho = rho0;
  out.forward.times.push_back(0.0);
  out.forward.states.push_back(rho);

  auto updated_sample = [&](int k, const CMat& state, double t) {
    const double dp = update_direction(chi.states[k], state, engine.control_deriv(Control::plus, t)) /
                      lambda_plus;
    const double dm = update_direction(chi.states[k], state, engine.control_deriv(Control::minus, t)) /
                      lambda_minus;
    if (config.amplitude_cap) {
      const double bound = 10.0 * *config.amplitude_cap;
      if (std::abs(dp) > bound || std::abs(dm) > bound) {
        throw Error(ErrorCode::numeric,
                    "pulse update step diverged; increase the lambda weights");
      }
    }
    double gp = old_pulses.g_plus(k) + dp;
    double gm = old_pulses.g_minus(k) + dm;
    if (config.amplitude_cap) {
      gp = std::clamp(gp, -*config.amplitude_cap, *config.amplitude_cap);
      gm = std::clamp(gm, -*config.amplitude_cap, *config.amplitude_cap);
    }
    out.j_running += dt * (lambda_plus * (gp - old_pulses.g_plus(k)) * (gp - old_pulses.g_plus(k)) +
                           lambda_minus * (gm - old_pulses.g_minus(k)) * (gm - old_pulses.g_minus(k)));
    return std::pair<double, double>{gp, gm};
  };

  for (int k = 0; k < n; ++k) {
    const double t = old_pulses.grid.node(k);
    // The Liouvillian is linear in the controls, so dL/dG does not depend on
    // the updated value and one pass per sample is already self-consistent.
    const auto [gp, gm] = updated_sample(k, rho, t);
    out.pulses.g_plus(k) = gp;
    out.pulses.g_minus(k) = gm;
    rho = engine.step(rho, gp, gm, t, dt, false);
    const double trace_err = std::abs(rho.trace() - Complex(1, 0));
    if (trace_err > 1e-8) {
      throw Error(ErrorCode::numeric, "krotov forward sweep lost the trace");
    }
    out.forward.times.push_back(old_pulses.grid.node(k + 1));
    out.forward.states.push_back(rho);
  }
  // Node n never drives a step; update it for a tidy pulse array.
  const auto [gp_last, gm_last] =
      updated_sample(n, rho, old_pulses.grid.node(n));
  out.pulses.g_plus(n) = gp_last;
  out.pulses.g_minus(n) = gm_last;

  out.j_terminal = terminal_cost(rho, engine.cutoffs());
  return out;
}

}  // namespace

KrotovStepResult krotov_update_step(const PulsePair& pulses, const Trajectory& forward_old,
                                    const CMat& rho0, double lambda_plus,
                                    double lambda_minus, const KrotovConfig& config,
                                    const SystemParams& params, const FockCutoffs& cutoffs) {
  if (!(lambda_plus > 0) || !(lambda_minus > 0)) {
    throw Error(ErrorCode::invalid_argument, "lambda weights must be positive");
  }
  if (forward_old.stored_every != 1 ||
      forward_old.states.size() != static_cast<size_t>(pulses.grid.n_steps) + 1) {
    throw Error(ErrorCode::invalid_argument,
                "krotov needs the old forward trajectory at every grid node");
  }
  const LindbladEngine engine(params, cutoffs, config.frame);
  const Trajectory chi = backward_costates(terminal_costate(forward_old.terminal(), cutoffs),
                                           pulses, params, cutoffs, config.frame);
  SweepResult sweep =
      forward_sweep(chi, pulses, rho0, lambda_plus, lambda_minus, config, engine);
  KrotovStepResult result;
  result.pulses = std::move(sweep.pulses);
  result.forward = std::move(sweep.forward);
  result.j_terminal = sweep.j_terminal;
  result.j_running = sweep.j_running;
  return result;
}

OptimizationRecord optimize(const CMat& rho0, const PulsePair& guess,
                            const KrotovConfig& config, const SystemParams& params,
                            const FockCutoffs& cutoffs) {
  guess.validate();
  check_grid(guess, params, config.frame);
  if (config.max_iters < 0 || !(config.stop_delta_j > 0)) {
    throw Error(ErrorCode::invalid_argument, "bad krotov config");
  }
  const LindbladEngine engine(params, cutoffs, config.frame);

  OptimizationRecord record;
  record.pulses_guess = guess;

  PropagationOptions opts;
  opts.stored_every = 1;
  opts.check_positivity = false;
  Trajectory forward = propagate_forward(rho0, guess, params, cutoffs, config.frame, opts);
  double j_current = terminal_cost(forward.terminal(), cutoffs);
  record.iterations.push_back({0, j_current, 0.0, true, 0});

  double lambda_plus = config.lambda_plus;
  double lambda_minus = config.lambda_minus;
  if (lambda_plus <= 0 || lambda_minus <= 0) {
    // Scale the weights so the first sweep moves pulses by ~5% of the guess G-.
    const Trajectory chi0 =
        backward_costates(terminal_costate(forward.terminal(), cutoffs), guess, params,
                          cutoffs, config.frame);
    double raw_plus = 0.0, raw_minus = 0.0;
    for (int k = 0; k <= guess.grid.n_steps; ++k) {
      const double t = guess.grid.node(k);
      raw_plus = std::max(raw_plus,
                          std::abs(update_direction(chi0.states[k], forward.states[k],
                                                    engine.control_deriv(Control::plus, t))));
      raw_minus = std::max(raw_minus,
                           std::abs(update_direction(chi0.states[k], forward.states[k],
                                                     engine.control_deriv(Control::minus, t))));
    }
    const double target = 0.05 * guess.g_minus.cwiseAbs().maxCoeff();
    lambda_plus = (raw_plus > 0 && target > 0) ? raw_plus / target : 1.0;
    lambda_minus = (raw_minus > 0 && target > 0) ? raw_minus / target : 1.0;
  }
  record.lambda_plus_used = lambda_plus;
  record.lambda_minus_used = lambda_minus;

  PulsePair pulses = guess;
  for (int iter = 1; iter <= config.max_iters; ++iter) {
    const Trajectory chi = backward_costates(terminal_costate(forward.terminal(), cutoffs),
                                             pulses, params, cutoffs, config.frame);
    SweepResult sweep =
        forward_sweep(chi, pulses, rho0, lambda_plus, lambda_minus, config, engine);
    int retries = 0;
    while (sweep.j_terminal > j_current + 1e-15 && retries < config.max_retries) {
      lambda_plus *= 2.0;
      lambda_minus *= 2.0;
      ++retries;
      sweep = forward_sweep(chi, pulses, rho0, lambda_plus, lambda_minus, config, engine);
    }
    if (sweep.j_terminal > j_current + 1e-15) {
      record.non_monotonic_warning = true;
      record.iterations.push_back({iter, sweep.j_terminal, sweep.j_running, false, retries});
      warn("krotov: non-monotonic step persisted after " +
           std::to_string(config.max_retries) + " lambda doublings; stopping");
      break;
    }
    const double delta = j_current - sweep.j_terminal;
    pulses = std::move(sweep.pulses);
    forward = std::move(sweep.forward);
    j_current = sweep.j_terminal;
    record.iterations.push_back({iter, j_current, sweep.j_running, true, retries});
    if (config.snapshot_every > 0 && iter % config.snapshot_every == 0) {
      record.snapshots.push_back(pulses);
    }
    if (delta < config.stop_delta_j) {
      record.converged = true;
      break;
    }
  }
  record.pulses_final = pulses;
  record.lambda_plus_used = lambda_plus;
  record.lambda_minus_used = lambda_minus;
  return record;
}

}  // namespace osq
