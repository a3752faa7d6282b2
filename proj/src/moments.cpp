#include "osq/moments.hpp"

#include <cmath>

namespace osq {

GaussianState GaussianState::thermal(double n_th) {
  if (n_th < 0) throw Error(ErrorCode::invalid_argument, "thermal: n_th must be >= 0");
  GaussianState gs;
  gs.cov.diagonal() << n_th + 0.5, n_th + 0.5, 0.5, 0.5;
  return gs;
}

void GaussianState::validate() const {
  if (!mean.allFinite() || !cov.allFinite()) {
    throw Error(ErrorCode::numeric, "gaussian state has non-finite entries");
  }
  if ((cov - cov.transpose()).cwiseAbs().maxCoeff() > 1e-12) {
    throw Error(ErrorCode::numeric, "covariance not symmetric");
  }
  if (cov.diagonal().minCoeff() < 0) {
    throw Error(ErrorCode::numeric, "covariance has a negative diagonal entry");
  }
  // Uncertainty relation: V + (i/2) sigma >= 0 with [X1,X2] = [Y1,Y2] = i.
  Eigen::Matrix4d sigma = Eigen::Matrix4d::Zero();
  sigma(0, 1) = 1; sigma(1, 0) = -1;
  sigma(2, 3) = 1; sigma(3, 2) = -1;
  CMat c = cov.cast<Complex>() + Complex(0, 0.5) * sigma.cast<Complex>();
  Eigen::SelfAdjointEigenSolver<CMat> es(c, Eigen::EigenvaluesOnly);
  if (es.eigenvalues().minCoeff() < -1e-9) {
    throw Error(ErrorCode::numeric, "covariance violates the uncertainty bound");
  }
}

GaussianGenerator build_generator(double gp, double gm, double t,
                                  const SystemParams& params, RotatingFrame frame,
                                  const ForceSpec& force) {
  if (!std::isfinite(gp) || !std::isfinite(gm)) {
    throw Error(ErrorCode::invalid_argument, "build_generator: non-finite amplitudes");
  }
  const double dg = gm - gp;   // G- minus G+
  const double sg = gm + gp;
  const double kappa = params.kappa;
  const double gamma = params.gamma;

  GaussianGenerator gen;
  Eigen::Matrix4d& a = gen.drift;
  // Rows follow the quadrature equations of motion (X1, X2, Y1, Y2).
  a << -gamma / 2, 0, 0, -dg,
       0, -gamma / 2, sg, 0,
       0, -dg, -kappa / 2, 0,
       sg, 0, 0, -kappa / 2;
  if (frame == RotatingFrame::full) {
    const double c = std::cos(2.0 * params.omega_mech * t);
    const double s = std::sin(2.0 * params.omega_mech * t);
    a(0, 2) += -sg * s; a(0, 3) += dg * c;
    a(1, 2) += sg * c;  a(1, 3) += dg * s;
    a(2, 0) += -dg * s; a(2, 1) += dg * c;
    a(3, 0) += sg * c;  a(3, 1) += sg * s;
  }
  gen.diffusion.diagonal() << gamma * (params.n_th + 0.5), gamma * (params.n_th + 0.5),
      kappa / 2, kappa / 2;

  if (force.enabled) {
    const double sqrt2 = std::sqrt(2.0);
    const double wt = params.omega_mech * t;
    // Radiation-force scalar: drive-squared terms plus the photon-number part.
    const double rad = sqrt2 / params.g0 *
                           (gp * gp + gm * gm +
                            2.0 * gp * gm * std::cos(2.0 * params.omega_mech * t)) +
                       sqrt2 * params.g0 * force.photon_number;
    const double alpha_bar = -sqrt2 / params.g0 * (force.dgm_dt + force.dgp_dt);
    const double alpha_delta = -sqrt2 / params.g0 * (force.dgm_dt - force.dgp_dt);
    gen.force << -rad * std::sin(wt), rad * std::cos(wt), alpha_bar * std::cos(wt),
        alpha_delta * std::sin(wt);
  }
  return gen;
}

MomentTrajectory evolve_moments(const GaussianState& initial, const PulsePair& pulses,
                                const SystemParams& params, RotatingFrame frame,
                                const ForceSpec& force, int stored_every) {
  initial.validate();
  pulses.validate();
  check_grid(pulses, params, frame);

  const int n = pulses.grid.n_steps;
  const double dt = pulses.grid.dt();
  const int every = std::max(1, stored_every);

  MomentTrajectory traj;
  traj.grid = pulses.grid;
  traj.stored_every = every;
  traj.times.push_back(0.0);
  traj.states.push_back(initial);

  Eigen::Vector4d m = initial.mean;
  Eigen::Matrix4d v = initial.cov;

  // The covariance stage derivatives never involve the force, so enabling it
  // cannot change the V sequence.
  auto dv = [&](const Eigen::Matrix4d& vv, double gp, double gm, double t) {
    const GaussianGenerator g = build_generator(gp, gm, t, params, frame);
    return (g.drift * vv + vv * g.drift.transpose() + g.diffusion).eval();
  };
  auto dm = [&](const Eigen::Vector4d& mm, double gp, double gm, double t) {
    const GaussianGenerator g = build_generator(gp, gm, t, params, frame, force);
    return (g.drift * mm + g.force).eval();
  };

  for (int k = 0; k < n; ++k) {
    const double gp = pulses.g_plus(k);
    const double gm_ = pulses.g_minus(k);
    const double t0 = pulses.grid.node(k);

    const Eigen::Matrix4d kv1 = dv(v, gp, gm_, t0);
    const Eigen::Matrix4d kv2 = dv(v + (dt / 2) * kv1, gp, gm_, t0 + dt / 2);
    const Eigen::Matrix4d kv3 = dv(v + (dt / 2) * kv2, gp, gm_, t0 + dt / 2);
    const Eigen::Matrix4d kv4 = dv(v + dt * kv3, gp, gm_, t0 + dt);
    const Eigen::Vector4d km1 = dm(m, gp, gm_, t0);
    const Eigen::Vector4d km2 = dm(m + (dt / 2) * km1, gp, gm_, t0 + dt / 2);
    const Eigen::Vector4d km3 = dm(m + (dt / 2) * km2, gp, gm_, t0 + dt / 2);
    const Eigen::Vector4d km4 = dm(m + dt * km3, gp, gm_, t0 + dt);
    v += (dt / 6.0) * (kv1 + 2.0 * kv2 + 2.0 * kv3 + kv4);
    m += (dt / 6.0) * (km1 + 2.0 * km2 + 2.0 * km3 + km4);

    if ((k + 1) % every == 0 || k == n - 1) {
      GaussianState gs;
      gs.mean = m;
      gs.cov = 0.5 * (v + v.transpose());  // keep symmetry against roundoff
      gs.validate();
      traj.times.push_back(pulses.grid.node(k + 1));
      traj.states.push_back(gs);
    }
  }
  return traj;
}

GaussianState steady_state(double gp, double gm, const SystemParams& params) {
  if (!(gm > gp)) {
    throw Error(ErrorCode::invalid_argument,
                "steady_state requires G- > G+ (red drive dominant)");
  }
  const GaussianGenerator gen = build_generator(gp, gm, 0.0, params, RotatingFrame::rwa);
  const Eigen::Matrix4d a = gen.drift;
  Eigen::EigenSolver<Eigen::Matrix4d> es(a);
  if (es.eigenvalues().real().maxCoeff() >= 0) {
    throw Error(ErrorCode::numeric, "no steady state: drift matrix is not Hurwitz");
  }
  // vec(A V + V A^T) = (I (x) A + A (x) I) vec(V)
  Eigen::Matrix<double, 16, 16> big = Eigen::Matrix<double, 16, 16>::Zero();
  for (int i = 0; i < 4; ++i)
    for (int j = 0; j < 4; ++j)
      for (int k = 0; k < 4; ++k) {
        big(k * 4 + i, k * 4 + j) += a(i, j);  // I (x) A
        big(i * 4 + k, j * 4 + k) += a(i, j);  // A (x) I
      }
  Eigen::Matrix<double, 16, 1> rhs;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) rhs(j * 4 + i) = -gen.diffusion(i, j);
  const Eigen::Matrix<double, 16, 1> sol = big.fullPivLu().solve(rhs);
  GaussianState gs;
  for (int j = 0; j < 4; ++j)
    for (int i = 0; i < 4; ++i) gs.cov(i, j) = sol(j * 4 + i);
  gs.cov = 0.5 * (gs.cov + gs.cov.transpose().eval());
  gs.validate();
  return gs;
}

}  // namespace osq
