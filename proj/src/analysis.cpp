#include "osq/analysis.hpp"

#include <cmath>

namespace osq {

double variance(const CMat& rho, const CMat& op) {
  if (rho.rows() != op.rows() || rho.cols() != op.cols()) {
    throw Error(ErrorCode::invalid_argument, "variance: dimension mismatch");
  }
  if (hermiticity_defect(op) > 1e-10) {
    throw Error(ErrorCode::invalid_argument, "variance: operator must be Hermitian");
  }
  const double mean = (rho * op).trace().real();
  const double second = (rho * op * op).trace().real();
  double var = second - mean * mean;
  if (var < 0) {
    if (var < -1e-10) {
      throw Error(ErrorCode::numeric, "variance significantly negative: " + std::to_string(var));
    }
    warn("variance clamped to zero from " + std::to_string(var));
    var = 0.0;
  }
  return var;
}

CMat partial_trace(const CMat& rho, Subsystem keep, const FockCutoffs& cutoffs) {
  cutoffs.validate();
  const int nc = cutoffs.n_cav;
  const int nm = cutoffs.n_mech;
  if (rho.rows() != nc * nm || rho.cols() != nc * nm) {
    throw Error(ErrorCode::invalid_argument, "partial_trace: dimension mismatch");
  }
  if (keep == Subsystem::cavity) {
    CMat out = CMat::Zero(nc, nc);
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j)
        for (int m = 0; m < nm; ++m) out(i, j) += rho(i * nm + m, j * nm + m);
    return out;
  }
  CMat out = CMat::Zero(nm, nm);
  for (int i = 0; i < nm; ++i)
    for (int j = 0; j < nm; ++j)
      for (int c = 0; c < nc; ++c) out(i, j) += rho(c * nm + i, c * nm + j);
  return out;
}

double purity(const CMat& rho) { return (rho * rho).trace().real(); }

double squeezing_db(double var_x1) {
  if (!(var_x1 > 0)) {
    throw Error(ErrorCode::invalid_argument, "squeezing_db: variance must be positive");
  }
  return -10.0 * std::log10(var_x1 / 0.5);
}

double db_to_variance(double db) { return 0.5 * std::pow(10.0, -db / 10.0); }

double squeeze_parameter(double g_plus, double g_minus) {
  if (!(g_minus > g_plus) || g_plus < 0) {
    throw Error(ErrorCode::invalid_argument,
                "squeeze parameter undefined unless G- > G+ >= 0");
  }
  return std::atanh(g_plus / g_minus);
}

double effective_coupling(double g_plus, double g_minus) {
  if (!(g_minus > g_plus) || g_plus < 0) {
    throw Error(ErrorCode::invalid_argument,
                "effective coupling undefined unless G- > G+ >= 0");
  }
  return std::sqrt(g_minus * g_minus - g_plus * g_plus);
}

SqueezeMetrics metrics(const CMat& rho, double g_plus, double g_minus,
                       const FockCutoffs& cutoffs) {
  const QuadratureOps q = quadrature_ops(cutoffs);
  SqueezeMetrics m;
  m.var_x1 = variance(rho, q.x1);
  m.var_x2 = variance(rho, q.x2);
  m.db = squeezing_db(m.var_x1);
  m.r = squeeze_parameter(g_plus, g_minus);
  m.eff_coupling = effective_coupling(g_plus, g_minus);
  m.purity_mech = purity(partial_trace(rho, Subsystem::mech, cutoffs));
  m.purity_cav = purity(partial_trace(rho, Subsystem::cavity, cutoffs));
  m.purity_total = purity(rho);
  return m;
}

namespace {
double block_purity(const Eigen::Matrix2d& v) {
  const double det = std::max(v.determinant(), 1e-300);
  return 1.0 / (2.0 * std::sqrt(det));
}
}  // namespace

double gaussian_purity_mech(const GaussianState& gs) {
  return block_purity(gs.cov.topLeftCorner<2, 2>());
}

double gaussian_purity_cav(const GaussianState& gs) {
  return block_purity(gs.cov.bottomRightCorner<2, 2>());
}

double gaussian_purity_total(const GaussianState& gs) {
  const double det = std::max(gs.cov.determinant(), 1e-300);
  return 1.0 / (4.0 * std::sqrt(det));
}

SqueezeMetrics metrics(const GaussianState& gs, double g_plus, double g_minus) {
  SqueezeMetrics m;
  m.var_x1 = gs.cov(0, 0);
  m.var_x2 = gs.cov(1, 1);
  m.db = squeezing_db(m.var_x1);
  m.r = squeeze_parameter(g_plus, g_minus);
  m.eff_coupling = effective_coupling(g_plus, g_minus);
  m.purity_mech = gaussian_purity_mech(gs);
  m.purity_cav = gaussian_purity_cav(gs);
  m.purity_total = gaussian_purity_total(gs);
  return m;
}

}  // namespace osq
