#include "osq/fock.hpp"

#include <cmath>
#include <cstdio>
#include <iostream>

namespace osq {

double hermiticity_defect(const CMat& m) {
  return (m - m.adjoint()).cwiseAbs().maxCoeff();
}

bool is_hermitian(const CMat& m, double tol) {
  return m.rows() == m.cols() && hermiticity_defect(m) <= tol;
}

void warn(const std::string& message) {
  std::cerr << "[osq] warning: " << message << "\n";
}

void FockCutoffs::validate() const {
  if (n_cav < 2 || n_mech < 2) {
    throw Error(ErrorCode::invalid_argument,
                "Fock cutoffs must be at least 2 (got n_cav=" +
                    std::to_string(n_cav) + ", n_mech=" + std::to_string(n_mech) + ")");
  }
}

int joint_index(int i_cav, int i_mech, const FockCutoffs& cutoffs) {
  return i_cav * cutoffs.n_mech + i_mech;
}

CMat annihilation(int n) {
  if (n < 2) {
    throw Error(ErrorCode::invalid_argument,
                "annihilation: cutoff must be >= 2, got " + std::to_string(n));
  }
  CMat a = CMat::Zero(n, n);
  for (int k = 1; k < n; ++k) {
    a(k - 1, k) = std::sqrt(static_cast<double>(k));
  }
  return a;
}

CMat embed(const CMat& op, Subsystem which, const FockCutoffs& cutoffs) {
  cutoffs.validate();
  const int sub_dim = which == Subsystem::cavity ? cutoffs.n_cav : cutoffs.n_mech;
  if (op.rows() != sub_dim || op.cols() != sub_dim) {
    throw Error(ErrorCode::invalid_argument,
                "embed: operator dimension " + std::to_string(op.rows()) +
                    " does not match subsystem cutoff " + std::to_string(sub_dim));
  }
  const int nc = cutoffs.n_cav;
  const int nm = cutoffs.n_mech;
  CMat out = CMat::Zero(nc * nm, nc * nm);
  if (which == Subsystem::cavity) {
    // op x 1
    for (int i = 0; i < nc; ++i)
      for (int j = 0; j < nc; ++j)
        if (op(i, j) != Complex(0, 0))
          for (int m = 0; m < nm; ++m) out(i * nm + m, j * nm + m) = op(i, j);
  } else {
    // 1 x op
    for (int c = 0; c < nc; ++c)
      for (int i = 0; i < nm; ++i)
        for (int j = 0; j < nm; ++j)
          if (op(i, j) != Complex(0, 0)) out(c * nm + i, c * nm + j) = op(i, j);
  }
  return out;
}

ThermalState thermal_state(double n_th, int n) {
  if (n_th < 0) {
    throw Error(ErrorCode::invalid_argument, "thermal_state: n_th must be >= 0");
  }
  if (n < 2) {
    throw Error(ErrorCode::invalid_argument, "thermal_state: cutoff must be >= 2");
  }
  const double q = n_th / (n_th + 1.0);
  ThermalState out;
  out.rho = CMat::Zero(n, n);
  double norm = 0.0;
  double pk = 1.0;
  for (int k = 0; k < n; ++k) {
    out.rho(k, k) = pk;
    norm += pk;
    pk *= q;
  }
  out.rho /= norm;
  out.truncation_deficit = std::pow(q, n);  // tail of the unit-mass geometric law
  return out;
}

QuadratureOps quadrature_ops(const FockCutoffs& cutoffs) {
  cutoffs.validate();
  const double s = 1.0 / std::sqrt(2.0);
  const Complex i(0, 1);
  const CMat b = annihilation(cutoffs.n_mech);
  const CMat d = annihilation(cutoffs.n_cav);
  QuadratureOps q;
  q.x1 = embed(s * (b.adjoint() + b), Subsystem::mech, cutoffs);
  q.x2 = embed(i * s * (b.adjoint() - b), Subsystem::mech, cutoffs);
  q.y1 = embed(s * (d.adjoint() + d), Subsystem::cavity, cutoffs);
  q.y2 = embed(i * s * (d.adjoint() - d), Subsystem::cavity, cutoffs);
  return q;
}

DensityCheck validate_density_matrix(const CMat& rho, double herm_tol,
                                     double trace_tol, double eig_tol) {
  DensityCheck check{};
  check.hermiticity = hermiticity_defect(rho);
  check.trace_error = std::abs(rho.trace() - Complex(1.0, 0.0));
  Eigen::SelfAdjointEigenSolver<CMat> es(rho, Eigen::EigenvaluesOnly);
  check.min_eigenvalue = es.eigenvalues().minCoeff();
  char buf[160];
  if (check.hermiticity > herm_tol) {
    std::snprintf(buf, sizeof buf, "density matrix not Hermitian: defect %.3e > %.3e",
                  check.hermiticity, herm_tol);
    throw Error(ErrorCode::numeric, buf);
  }
  if (check.trace_error > trace_tol) {
    std::snprintf(buf, sizeof buf, "density matrix trace off unity by %.3e > %.3e",
                  check.trace_error, trace_tol);
    throw Error(ErrorCode::numeric, buf);
  }
  if (check.min_eigenvalue < -eig_tol) {
    std::snprintf(buf, sizeof buf, "density matrix min eigenvalue %.3e < -%.3e",
                  check.min_eigenvalue, eig_tol);
    throw Error(ErrorCode::numeric, buf);
  }
  return check;
}

}  // namespace osq
