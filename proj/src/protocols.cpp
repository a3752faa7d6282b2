#include "osq/protocols.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>

namespace osq {

void ProtocolSpec::validate() const {
  grid.validate();
  if (kind == ProtocolKind::file) {
    if (pulse_file.empty()) {
      throw Error(ErrorCode::invalid_argument, "file protocol needs a pulse_file path");
    }
    return;
  }
  if (!(g_minus > 0)) {
    throw Error(ErrorCode::invalid_argument, "protocol needs g_minus > 0");
  }
  if (!(ratio_final >= 0 && ratio_final < 1)) {
    throw Error(ErrorCode::invalid_argument, "ratio_final must lie in [0, 1)");
  }
  if (kind == ProtocolKind::linear && g_plus_initial < 0) {
    throw Error(ErrorCode::invalid_argument, "g_plus_initial must be >= 0");
  }
  if (kind == ProtocolKind::delayed && t_delay &&
      (*t_delay < 0 || *t_delay > grid.duration)) {
    throw Error(ErrorCode::invalid_argument, "t_delay must lie in [0, T]");
  }
}

PulsePair make_pulses(const ProtocolSpec& spec) {
  spec.validate();
  if (spec.kind == ProtocolKind::file) {
    return load_pulse_csv(spec.pulse_file, spec.grid);
  }
  const int n = spec.grid.n_steps;
  PulsePair p;
  p.grid = spec.grid;
  p.g_minus = RVec::Constant(n + 1, spec.g_minus);
  p.g_plus = RVec::Zero(n + 1);
  const double g_plus_final = spec.ratio_final * spec.g_minus;
  switch (spec.kind) {
    case ProtocolKind::constant:
      p.g_plus.setConstant(g_plus_final);
      break;
    case ProtocolKind::linear:
      for (int k = 0; k <= n; ++k) {
        const double frac = static_cast<double>(k) / n;
        p.g_plus(k) = spec.g_plus_initial + (g_plus_final - spec.g_plus_initial) * frac;
      }
      break;
    case ProtocolKind::delayed: {
      if (!spec.t_delay) {
        throw Error(ErrorCode::invalid_argument,
                    "delayed protocol: resolve t_delay before make_pulses");
      }
      for (int k = 0; k <= n; ++k) {
        if (spec.grid.node(k) >= *spec.t_delay) p.g_plus(k) = g_plus_final;
      }
      break;
    }
    case ProtocolKind::file:
      break;  // handled above
  }
  return p;
}

PulsePair load_pulse_csv(const std::string& path, const TimeGrid& grid) {
  std::ifstream in(path);
  if (!in) {
    throw Error(ErrorCode::io, "cannot open pulse file: " + path);
  }
  PulsePair p;
  p.grid = grid;
  p.g_plus = RVec::Zero(grid.n_steps + 1);
  p.g_minus = RVec::Zero(grid.n_steps + 1);
  std::string line;
  int row = 0;
  while (std::getline(in, line)) {
    if (line.empty() || line[0] == '#') continue;
    if (line.rfind("t_s", 0) == 0) continue;  // header
    std::istringstream ss(line);
    std::string cell;
    double vals[3];
    for (int c = 0; c < 3; ++c) {
      if (!std::getline(ss, cell, ',')) {
        throw Error(ErrorCode::io, "pulse file row " + std::to_string(row) + ": need 3 columns");
      }
      vals[c] = std::stod(cell);
    }
    if (row > grid.n_steps) {
      throw Error(ErrorCode::io, "pulse file has more rows than grid nodes");
    }
    if (std::abs(vals[0] - grid.node(row)) > 1e-9 * std::max(1.0, grid.duration)) {
      throw Error(ErrorCode::io, "pulse file time column does not match the grid at row " +
                                     std::to_string(row));
    }
    p.g_plus(row) = vals[1];
    p.g_minus(row) = vals[2];
    ++row;
  }
  if (row != grid.n_steps + 1) {
    throw Error(ErrorCode::io, "pulse file has " + std::to_string(row) +
                                   " rows, grid needs " + std::to_string(grid.n_steps + 1));
  }
  return p;
}

double cooling_delay_time(double g_minus, const SystemParams& params, const TimeGrid& grid,
                          double excess_fraction) {
  if (!(g_minus > 0)) {
    throw Error(ErrorCode::invalid_argument, "cooling_delay_time needs G- > 0");
  }
  const double v_floor = steady_state(0.0, g_minus, params).cov(0, 0);
  const double v0 = params.n_th + 0.5;
  const double threshold = v_floor + excess_fraction * (v0 - v_floor);
  if (v0 <= threshold) return 0.0;

  const PulsePair cooling = PulsePair::constant(grid, 0.0, g_minus);
  const MomentTrajectory traj =
      evolve_moments(GaussianState::thermal(params.n_th), cooling, params, RotatingFrame::rwa);
  for (size_t i = 0; i < traj.states.size(); ++i) {
    if (traj.states[i].cov(0, 0) <= threshold) return traj.times[i];
  }
  throw Error(ErrorCode::numeric, "cooling trigger not reached within the grid duration");
}

namespace {

double family_objective(ProtocolKind kind, double ratio, double g_minus,
                        const TimeGrid& grid, const SystemParams& params,
                        SqueezeObjective objective, RotatingFrame frame,
                        double g_plus_initial, std::optional<double> t_delay) {
  ProtocolSpec spec;
  spec.kind = kind;
  spec.grid = grid;
  spec.g_minus = g_minus;
  spec.ratio_final = ratio;
  spec.g_plus_initial = g_plus_initial;
  spec.t_delay = t_delay;
  const PulsePair pulses = make_pulses(spec);
  const MomentTrajectory traj =
      evolve_moments(GaussianState::thermal(params.n_th), pulses, params, frame);
  if (objective == SqueezeObjective::min_terminal) {
    return traj.terminal().cov(0, 0);
  }
  double best = traj.states.front().cov(0, 0);
  for (const GaussianState& gs : traj.states) best = std::min(best, gs.cov(0, 0));
  return best;
}

}  // namespace

std::vector<double> default_ratio_grid() {
  std::vector<double> grid;
  for (int i = 0; i < 8; ++i) grid.push_back(0.30 + i * (0.97 - 0.30) / 7.0);
  return grid;
}

LineSearchResult line_search_ratio(ProtocolKind kind, double g_minus, const TimeGrid& grid,
                                   const SystemParams& params, SqueezeObjective objective,
                                   std::span<const double> ratio_grid, RotatingFrame frame,
                                   double g_plus_initial) {
  if (ratio_grid.size() < 2) {
    throw Error(ErrorCode::invalid_argument, "line search needs at least 2 grid ratios");
  }
  for (double r : ratio_grid) {
    if (!(r >= 0 && r < 1)) {
      throw Error(ErrorCode::invalid_argument, "ratio grid must lie in [0, 1)");
    }
  }
  // The delay trigger depends on G- only; resolve once for the whole search.
  std::optional<double> t_delay;
  if (kind == ProtocolKind::delayed) {
    t_delay = cooling_delay_time(g_minus, params, grid);
  }
  auto obj = [&](double r) {
    return family_objective(kind, r, g_minus, grid, params, objective, frame,
                            g_plus_initial, t_delay);
  };

  size_t best = 0;
  std::vector<double> vals(ratio_grid.size());
  for (size_t i = 0; i < ratio_grid.size(); ++i) {
    vals[i] = obj(ratio_grid[i]);
    if (vals[i] < vals[best]) best = i;
  }
  double lo = ratio_grid[best == 0 ? 0 : best - 1];
  double hi = ratio_grid[std::min(best + 1, ratio_grid.size() - 1)];

  const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
  double c = hi - phi * (hi - lo);
  double d = lo + phi * (hi - lo);
  double fc = obj(c);
  double fd = obj(d);
  while (hi - lo > 0.005) {
    if (fc < fd) {
      hi = d; d = c; fd = fc;
      c = hi - phi * (hi - lo);
      fc = obj(c);
    } else {
      lo = c; c = d; fc = fd;
      d = lo + phi * (hi - lo);
      fd = obj(d);
    }
  }
  LineSearchResult result;
  result.ratio = 0.5 * (lo + hi);
  result.achieved_db = -10.0 * std::log10(obj(result.ratio) / 0.5);
  return result;
}

}  // namespace osq
