#pragma once

#include "osq/common.hpp"

namespace osq {

/// Truncation sizes of the joint cavity x mechanics Fock space.
///
/// Joint basis ordering is cavity-slow / mech-fast:
/// |i_cav, i_mech> maps to row i_cav * n_mech + i_mech.
struct FockCutoffs {
  int n_cav = 2;
  int n_mech = 2;

  int joint_dim() const { return n_cav * n_mech; }
  void validate() const;
};

enum class Subsystem { cavity, mech };

int joint_index(int i_cav, int i_mech, const FockCutoffs& cutoffs);

/// n x n annihilation operator, sqrt(k) on the superdiagonal.
CMat annihilation(int n);

/// Lift a subsystem operator onto the joint space (op x 1 or 1 x op).
CMat embed(const CMat& op, Subsystem which, const FockCutoffs& cutoffs);

struct ThermalState {
  CMat rho;
  /// Geometric tail mass removed by the cutoff, before renormalization.
  double truncation_deficit = 0.0;
};
ThermalState thermal_state(double n_th, int n);

struct QuadratureOps {
  CMat x1, x2;  // mechanics
  CMat y1, y2;  // cavity
};
QuadratureOps quadrature_ops(const FockCutoffs& cutoffs);

struct DensityCheck {
  double trace_error;
  double hermiticity;
  double min_eigenvalue;
};

/// Checks the density-matrix invariants and throws Error(numeric) on violation.
DensityCheck validate_density_matrix(const CMat& rho, double herm_tol = 1e-10,
                                     double trace_tol = 1e-8,
                                     double eig_tol = 1e-8);

}  // namespace osq
