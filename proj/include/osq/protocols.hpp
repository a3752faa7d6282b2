#pragma once

#include <optional>
#include <span>
#include <string>

#include "osq/moments.hpp"

namespace osq {

enum class ProtocolKind { constant, linear, delayed, file };

struct ProtocolSpec {
  ProtocolKind kind = ProtocolKind::constant;
  TimeGrid grid;
  double g_minus = 0.0;           // rad/s
  double ratio_final = 0.0;       // G+(T)/G-(T), in [0, 1)
  double g_plus_initial = 0.0;    // rad/s, linear kind
  std::optional<double> t_delay;  // delayed kind; empty = cooling-trigger auto
  std::string label;
  std::string pulse_file;  // file kind

  void validate() const;
};

PulsePair make_pulses(const ProtocolSpec& spec);

/// Pulse CSV (t_s, g_plus_rad_s, g_minus_rad_s); row count must match the grid.
PulsePair load_pulse_csv(const std::string& path, const TimeGrid& grid);

/// Deterministic "cooling done" trigger for the delayed protocol.
///
/// Cooling-only (G+ = 0) dynamics are passive, so the X1 variance approaches a
/// floor slightly above the zero-point value 1/2 without ever crossing it.
/// The trigger therefore fires at the first grid node where the excess above
/// the floor has dropped to `excess_fraction` of its initial value (default
/// 5%, about three e-folds of the cooling transient), with the floor taken
/// from the cooling-only RWA steady state. Returns 0 when already there (e.g.
/// n_th = 0). Throws Error(numeric) when the trigger is not reached within the
/// grid.
double cooling_delay_time(double g_minus, const SystemParams& params, const TimeGrid& grid,
                          double excess_fraction = 0.05);

enum class SqueezeObjective { min_terminal, min_over_time };

struct LineSearchResult {
  double ratio = 0.0;
  double achieved_db = 0.0;
};

/// Best final ratio G+/G- for a protocol family, evaluated with the moments
/// engine; coarse scan over `ratio_grid` then golden-section refinement to
/// +-0.005.
LineSearchResult line_search_ratio(ProtocolKind kind, double g_minus, const TimeGrid& grid,
                                   const SystemParams& params, SqueezeObjective objective,
                                   std::span<const double> ratio_grid,
                                   RotatingFrame frame = RotatingFrame::full,
                                   double g_plus_initial = 0.0);

/// Default ratio grid for line searches: 0.30, 0.395, ..., 0.97.
std::vector<double> default_ratio_grid();

}  // namespace osq
