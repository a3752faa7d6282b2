#include "osq/model.hpp"

#include <cmath>

namespace osq {

void SystemParams::validate() const {
  auto positive = [](double v, const char* name) {
    if (!(v > 0) || !std::isfinite(v)) {
      throw Error(ErrorCode::invalid_argument,
                  std::string(name) + " must be positive and finite");
    }
  };
  positive(omega_cav, "omega_cav");
  positive(omega_mech, "omega_mech");
  positive(g0, "g0");
  positive(kappa, "kappa");
  positive(gamma, "gamma");
  if (!(n_th >= 0) || !std::isfinite(n_th)) {
    throw Error(ErrorCode::invalid_argument, "n_th must be >= 0");
  }
  if (kappa / omega_mech > 0.5) {
    warn("kappa/Omega > 0.5: outside the regime where the RWA comparison is meaningful");
  }
}

void TimeGrid::validate() const {
  if (!(duration > 0) || !std::isfinite(duration) || n_steps < 1) {
    throw Error(ErrorCode::invalid_argument, "time grid needs duration > 0 and n_steps >= 1");
  }
}

void PulsePair::validate() const {
  grid.validate();
  if (g_plus.size() != grid.n_steps + 1 || g_minus.size() != grid.n_steps + 1) {
    throw Error(ErrorCode::invalid_argument,
                "pulse arrays must have n_steps+1 samples (one per grid node)");
  }
  if (!g_plus.allFinite() || !g_minus.allFinite()) {
    throw Error(ErrorCode::invalid_argument, "pulse samples must be finite");
  }
}

double PulsePair::max_abs() const {
  return std::max(g_plus.cwiseAbs().maxCoeff(), g_minus.cwiseAbs().maxCoeff());
}

PulsePair PulsePair::constant(const TimeGrid& grid, double g_plus, double g_minus) {
  PulsePair p;
  p.grid = grid;
  p.g_plus = RVec::Constant(grid.n_steps + 1, g_plus);
  p.g_minus = RVec::Constant(grid.n_steps + 1, g_minus);
  return p;
}

CMat hamiltonian_rwa(double g_plus, double g_minus, const FockCutoffs& cutoffs) {
  const CMat d = embed(annihilation(cutoffs.n_cav), Subsystem::cavity, cutoffs);
  const CMat b = embed(annihilation(cutoffs.n_mech), Subsystem::mech, cutoffs);
  CMat h = -(g_plus * (d.adjoint() * b.adjoint()) + g_minus * (d.adjoint() * b));
  h += h.adjoint().eval();
  return h;
}

CMat hamiltonian_full(double g_plus, double g_minus, double t, double omega_mech,
                      const FockCutoffs& cutoffs) {
  const CMat d = embed(annihilation(cutoffs.n_cav), Subsystem::cavity, cutoffs);
  const CMat b = embed(annihilation(cutoffs.n_mech), Subsystem::mech, cutoffs);
  const Complex phase = std::exp(Complex(0, -2.0 * omega_mech * t));
  CMat h = -(g_plus * (d.adjoint() * b.adjoint()) + g_minus * (d.adjoint() * b));
  h += -(g_plus * phase * (d.adjoint() * b) +
         g_minus * std::conj(phase) * (d.adjoint() * b.adjoint()));
  h += h.adjoint().eval();
  return h;
}

std::vector<CMat> lindblad_ops(const SystemParams& params, const FockCutoffs& cutoffs) {
  params.validate();
  const CMat d = embed(annihilation(cutoffs.n_cav), Subsystem::cavity, cutoffs);
  const CMat b = embed(annihilation(cutoffs.n_mech), Subsystem::mech, cutoffs);
  return {std::sqrt(params.kappa) * d,
          std::sqrt(params.gamma * params.n_th) * CMat(b.adjoint()),
          std::sqrt(params.gamma * (params.n_th + 1.0)) * b};
}

CMat liouvillian_apply(const CMat& rho, const CMat& h, const std::vector<CMat>& jumps) {
  if (rho.rows() != h.rows() || rho.cols() != h.cols()) {
    throw Error(ErrorCode::invalid_argument, "liouvillian_apply: dimension mismatch");
  }
  const Complex i(0, 1);
  CMat out = -i * (h * rho - rho * h);
  for (const CMat& L : jumps) {
    if (L.rows() != rho.rows()) {
      throw Error(ErrorCode::invalid_argument, "liouvillian_apply: jump dimension mismatch");
    }
    const CMat Ld = L.adjoint();
    const CMat LdL = Ld * L;
    out += L * rho * Ld - 0.5 * (LdL * rho + rho * LdL);
  }
  return out;
}

CMat control_deriv_op(Control which, RotatingFrame frame, double t, double omega_mech,
                      const FockCutoffs& cutoffs) {
  const CMat d = embed(annihilation(cutoffs.n_cav), Subsystem::cavity, cutoffs);
  const CMat b = embed(annihilation(cutoffs.n_mech), Subsystem::mech, cutoffs);
  const Complex phase = std::exp(Complex(0, -2.0 * omega_mech * t));
  CMat p;
  if (which == Control::plus) {
    p = -(d.adjoint() * b.adjoint());
    if (frame == RotatingFrame::full) p += -phase * (d.adjoint() * b);
  } else {
    p = -(d.adjoint() * b);
    if (frame == RotatingFrame::full) p += -std::conj(phase) * (d.adjoint() * b.adjoint());
  }
  p += p.adjoint().eval();
  return p;
}

CMat liouvillian_deriv(const CMat& rho, Control which, RotatingFrame frame, double t,
                       double omega_mech, const FockCutoffs& cutoffs) {
  const CMat p = control_deriv_op(which, frame, t, omega_mech, cutoffs);
  const Complex i(0, 1);
  return -i * (p * rho - rho * p);
}

int required_steps(double duration, const SystemParams& params, double max_pulse_amp,
                   RotatingFrame frame) {
  double omega_max = std::max({params.kappa, params.gamma, std::abs(max_pulse_amp)});
  if (frame == RotatingFrame::full) {
    omega_max = std::max(omega_max, 2.0 * params.omega_mech);
  }
  const double dt_max = (kTwoPi / 20.0) / omega_max;
  return static_cast<int>(std::ceil(duration / dt_max));
}

void check_grid(const PulsePair& pulses, const SystemParams& params, RotatingFrame frame) {
  pulses.validate();
  const int needed = required_steps(pulses.grid.duration, params, pulses.max_abs(), frame);
  if (pulses.grid.n_steps < needed) {
    throw Error(ErrorCode::invalid_argument,
                "time grid too coarse for the dt rule: n_steps=" +
                    std::to_string(pulses.grid.n_steps) + ", required n_steps=" +
                    std::to_string(needed));
  }
}

}  // namespace osq
