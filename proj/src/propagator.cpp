#include "osq/propagator.hpp"

#include <cmath>
#include <cstdio>

#include "osq/analysis.hpp"

namespace osq {

LindbladEngine::LindbladEngine(const SystemParams& params, const FockCutoffs& cutoffs,
                               RotatingFrame frame)
    : cutoffs_(cutoffs), frame_(frame), omega_mech_(params.omega_mech) {
  cutoffs.validate();
  params.validate();
  kappa_ = params.kappa;
  gamma_n_ = params.gamma * params.n_th;
  gamma_n1_ = params.gamma * (params.n_th + 1.0);

  const CMat d = embed(annihilation(cutoffs.n_cav), Subsystem::cavity, cutoffs);
  const CMat b = embed(annihilation(cutoffs.n_mech), Subsystem::mech, cutoffs);
  t_pm_ = d.adjoint() * b;
  t_pp_ = d.adjoint() * b.adjoint();
  h_plus_ = -(t_pp_ + t_pp_.adjoint());
  h_minus_ = -(t_pm_ + t_pm_.adjoint());

  const int dim = cutoffs.joint_dim();
  m_diag_ = RVec::Zero(dim);
  for (int ic = 0; ic < cutoffs.n_cav; ++ic) {
    for (int im = 0; im < cutoffs.n_mech; ++im) {
      const int i = joint_index(ic, im, cutoffs);
      m_diag_(i) = kappa_ * ic + gamma_n_ * (im + 1.0) + gamma_n1_ * im;
    }
  }
  sqrt_cav_ = RVec::Zero(cutoffs.n_cav + 1);
  for (int k = 0; k <= cutoffs.n_cav; ++k) sqrt_cav_(k) = std::sqrt(double(k));
  sqrt_mech_ = RVec::Zero(cutoffs.n_mech + 1);
  for (int k = 0; k <= cutoffs.n_mech; ++k) sqrt_mech_(k) = std::sqrt(double(k));
}

CMat LindbladEngine::generator_k(double gp, double gm, double t, bool adjoint) const {
  CMat h = gp * h_plus_ + gm * h_minus_;
  if (frame_ == RotatingFrame::full) {
    const Complex phase = std::exp(Complex(0, -2.0 * omega_mech_ * t));
    CMat cr = -(gp * phase * t_pm_ + gm * std::conj(phase) * t_pp_);
    h += cr + cr.adjoint().eval();
  }
  const Complex i_unit = adjoint ? Complex(0, 1) : Complex(0, -1);
  CMat k = i_unit * h;
  k.diagonal() -= (0.5 * m_diag_).cast<Complex>();
  return k;
}

void LindbladEngine::add_jumps(const CMat& state, CMat& out, bool adjoint) const {
  const int nc = cutoffs_.n_cav;
  const int nm = cutoffs_.n_mech;
  const int stride = nm;
  const int dim = nc * nm;
  // Ladder sandwiches: each jump operator shifts one subsystem index.
  for (int i = 0; i < dim; ++i) {
    const int ic = i / nm, im = i % nm;
    for (int j = 0; j < dim; ++j) {
      const int jc = j / nm, jm = j % nm;
      Complex acc(0, 0);
      if (!adjoint) {
        // kappa D rho D^ + Gamma n_th B^ rho B + Gamma (n_th+1) B rho B^
        if (ic < nc - 1 && jc < nc - 1)
          acc += kappa_ * sqrt_cav_(ic + 1) * sqrt_cav_(jc + 1) * state(i + stride, j + stride);
        if (im >= 1 && jm >= 1)
          acc += gamma_n_ * sqrt_mech_(im) * sqrt_mech_(jm) * state(i - 1, j - 1);
        if (im < nm - 1 && jm < nm - 1)
          acc += gamma_n1_ * sqrt_mech_(im + 1) * sqrt_mech_(jm + 1) * state(i + 1, j + 1);
      } else {
        // kappa D^ chi D + Gamma n_th B chi B^ + Gamma (n_th+1) B^ chi B
        if (ic >= 1 && jc >= 1)
          acc += kappa_ * sqrt_cav_(ic) * sqrt_cav_(jc) * state(i - stride, j - stride);
        if (im < nm - 1 && jm < nm - 1)
          acc += gamma_n_ * sqrt_mech_(im + 1) * sqrt_mech_(jm + 1) * state(i + 1, j + 1);
        if (im >= 1 && jm >= 1)
          acc += gamma_n1_ * sqrt_mech_(im) * sqrt_mech_(jm) * state(i - 1, j - 1);
      }
      out(i, j) += acc;
    }
  }
}

CMat LindbladEngine::apply(const CMat& state, double gp, double gm, double t) const {
  const CMat k = generator_k(gp, gm, t, false);
  CMat kr = k * state;
  CMat out = kr + kr.adjoint().eval();
  add_jumps(state, out, false);
  return out;
}

CMat LindbladEngine::apply_adjoint(const CMat& state, double gp, double gm, double t) const {
  const CMat k = generator_k(gp, gm, t, true);
  CMat kc = k * state;
  CMat out = kc + kc.adjoint().eval();
  add_jumps(state, out, true);
  return out;
}

CMat LindbladEngine::step(const CMat& state, double gp, double gm, double t0, double dt,
                          bool adjoint) const {
  auto rhs = [&](const CMat& y, double t) {
    return adjoint ? apply_adjoint(y, gp, gm, t) : apply(y, gp, gm, t);
  };
  const CMat k1 = rhs(state, t0);
  const CMat k2 = rhs(state + (dt / 2) * k1, t0 + dt / 2);
  const CMat k3 = rhs(state + (dt / 2) * k2, t0 + dt / 2);
  const CMat k4 = rhs(state + dt * k3, t0 + dt);
  return state + (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
}

CMat LindbladEngine::control_deriv(Control which, double t) const {
  CMat p = which == Control::plus ? -t_pp_ : -t_pm_;
  if (frame_ == RotatingFrame::full) {
    const Complex phase = std::exp(Complex(0, -2.0 * omega_mech_ * t));
    if (which == Control::plus)
      p += -phase * t_pm_;
    else
      p += -std::conj(phase) * t_pp_;
  }
  return p + p.adjoint().eval();
}

namespace {

Trajectory run(const CMat& initial, const PulsePair& pulses, const SystemParams& params,
               const FockCutoffs& cutoffs, RotatingFrame frame,
               const PropagationOptions& opts, bool adjoint_backward) {
  pulses.validate();
  check_grid(pulses, params, frame);
  if (initial.rows() != cutoffs.joint_dim() || initial.cols() != cutoffs.joint_dim()) {
    throw Error(ErrorCode::invalid_argument, "initial state does not match cutoffs");
  }
  if (hermiticity_defect(initial) > 1e-10) {
    throw Error(ErrorCode::invalid_argument, "initial state must be Hermitian");
  }

  const LindbladEngine engine(params, cutoffs, frame);
  const int n = pulses.grid.n_steps;
  const double dt = pulses.grid.dt();
  const int every = std::max(1, opts.stored_every);
  // Positivity eigenchecks are affordable only on small problems; otherwise we
  // keep them for the terminal state.
  const bool eig_each_store = opts.check_positivity && cutoffs.joint_dim() <= 160;

  Trajectory traj;
  traj.grid = pulses.grid;
  traj.stored_every = every;

  auto check_state = [&](const CMat& s, double t, bool force_eig) {
    char buf[160];
    if (!adjoint_backward) {
      const double trace_err = std::abs(s.trace() - Complex(1, 0));
      if (trace_err > opts.trace_tol) {
        std::snprintf(buf, sizeof buf,
                      "integration failure: trace drift %.3e at t=%.6e", trace_err, t);
        throw Error(ErrorCode::numeric, buf);
      }
    }
    if (hermiticity_defect(s) > 1e-10) {
      std::snprintf(buf, sizeof buf, "integration failure: hermiticity lost at t=%.6e", t);
      throw Error(ErrorCode::numeric, buf);
    }
    if (!adjoint_backward && opts.check_positivity && (eig_each_store || force_eig)) {
      Eigen::SelfAdjointEigenSolver<CMat> es(s, Eigen::EigenvaluesOnly);
      const double min_eig = es.eigenvalues().minCoeff();
      if (min_eig < -opts.negative_eig_tol) {
        std::snprintf(buf, sizeof buf,
                      "integration failure: eigenvalue %.3e below -%.1e at t=%.6e "
                      "(cutoff starvation?)",
                      min_eig, opts.negative_eig_tol, t);
        throw Error(ErrorCode::numeric, buf);
      }
    }
  };

  if (!adjoint_backward) {
    CMat state = initial;
    traj.times.push_back(0.0);
    traj.states.push_back(state);
    for (int k = 0; k < n; ++k) {
      state = engine.step(state, pulses.g_plus(k), pulses.g_minus(k),
                          pulses.grid.node(k), dt, false);
      const bool last = (k == n - 1);
      if ((k + 1) % every == 0 || last) {
        const double t = pulses.grid.node(k + 1);
        check_state(state, t, last);
        traj.times.push_back(t);
        traj.states.push_back(state);
      }
    }
  } else {
    // chi marches T -> 0; stored in node order so states.front() is chi(0).
    CMat state = initial;
    std::vector<double> rev_times{pulses.grid.duration};
    std::vector<CMat> rev_states{state};
    for (int k = n - 1; k >= 0; --k) {
      state = engine.step(state, pulses.g_plus(k), pulses.g_minus(k),
                          pulses.grid.node(k + 1), -dt, true);
      if (k % every == 0 || k == 0) {
        const double t = pulses.grid.node(k);
        check_state(state, t, false);
        rev_times.push_back(t);
        rev_states.push_back(state);
      }
    }
    traj.times.assign(rev_times.rbegin(), rev_times.rend());
    traj.states.assign(rev_states.rbegin(), rev_states.rend());
  }
  return traj;
}

}  // namespace

Trajectory propagate_forward(const CMat& rho0, const PulsePair& pulses,
                             const SystemParams& params, const FockCutoffs& cutoffs,
                             RotatingFrame frame, const PropagationOptions& opts) {
  validate_density_matrix(rho0);
  return run(rho0, pulses, params, cutoffs, frame, opts, false);
}

Trajectory propagate_backward(const CMat& chi_final, const PulsePair& pulses,
                              const SystemParams& params, const FockCutoffs& cutoffs,
                              RotatingFrame frame, const PropagationOptions& opts) {
  return run(chi_final, pulses, params, cutoffs, frame, opts, true);
}

CMat standard_initial_state(const SystemParams& params, const FockCutoffs& cutoffs) {
  cutoffs.validate();
  const ThermalState mech = thermal_state(params.n_th, cutoffs.n_mech);
  if (mech.truncation_deficit > 1e-6) {
    char buf[120];
    std::snprintf(buf, sizeof buf, "thermal truncation deficit %.3e > 1e-6 at n_mech=%d",
                  mech.truncation_deficit, cutoffs.n_mech);
    warn(buf);
  }
  CMat cav = CMat::Zero(cutoffs.n_cav, cutoffs.n_cav);
  cav(0, 0) = 1.0;
  return embed(cav, Subsystem::cavity, cutoffs) * embed(mech.rho, Subsystem::mech, cutoffs);
}

double cutoff_convergence_gap(const PulsePair& pulses, const SystemParams& params,
                              const FockCutoffs& cutoffs, RotatingFrame frame) {
  const FockCutoffs bigger{(cutoffs.n_cav * 3 + 1) / 2, (cutoffs.n_mech * 3 + 1) / 2};
  PropagationOptions opts;
  opts.stored_every = pulses.grid.n_steps;  // terminal only

  auto terminal_var = [&](const FockCutoffs& c) {
    const Trajectory traj =
        propagate_forward(standard_initial_state(params, c), pulses, params, c, frame, opts);
    return variance(traj.terminal(), quadrature_ops(c).x1);
  };
  const double base = terminal_var(cutoffs);
  const double refined = terminal_var(bigger);
  return std::abs(base - refined) / std::max(std::abs(refined), 1e-300);
}

}  // namespace osq
