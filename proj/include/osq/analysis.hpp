#pragma once

#include "osq/fock.hpp"
#include "osq/moments.hpp"

namespace osq {

/// <op^2> - <op>^2 for Hermitian op; tiny negatives from roundoff clamp to 0.
double variance(const CMat& rho, const CMat& op);

CMat partial_trace(const CMat& rho, Subsystem keep, const FockCutoffs& cutoffs);

/// tr(rho^2)
double purity(const CMat& rho);

/// -10 log10(var / (1/2)); larger is more squeezed.
double squeezing_db(double var_x1);
double db_to_variance(double db);

/// r = artanh(G+/G-); requires G- > G+ >= 0.
double squeeze_parameter(double g_plus, double g_minus);
/// sqrt(G-^2 - G+^2)
double effective_coupling(double g_plus, double g_minus);

struct SqueezeMetrics {
  double var_x1 = 0;
  double var_x2 = 0;
  double db = 0;
  double r = 0;
  double eff_coupling = 0;  // rad/s
  double purity_mech = 0;
  double purity_cav = 0;
  double purity_total = 0;
};

SqueezeMetrics metrics(const CMat& rho, double g_plus, double g_minus,
                       const FockCutoffs& cutoffs);
SqueezeMetrics metrics(const GaussianState& gs, double g_plus, double g_minus);

/// Gaussian purities: 1/(2 sqrt(det V_sub)) per mode, 1/(4 sqrt(det V)) joint.
double gaussian_purity_mech(const GaussianState& gs);
double gaussian_purity_cav(const GaussianState& gs);
double gaussian_purity_total(const GaussianState& gs);

}  // namespace osq
