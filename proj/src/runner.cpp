#include "osq/runner.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <thread>

#include <nlohmann/json.hpp>

#include "osq/analysis.hpp"

namespace osq {

using Json = nlohmann::ordered_json;

namespace {

constexpr const char* kSchemaVersion = "1";

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.12g", v);
  return buf;
}

void parallel_for(size_t count, const std::function<void(size_t)>& fn) {
  const size_t workers =
      std::min<size_t>(count, std::max(1u, std::thread::hardware_concurrency()));
  if (workers <= 1) {
    for (size_t i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<size_t> next{0};
  std::vector<std::thread> pool;
  std::vector<std::exception_ptr> errors(workers);
  for (size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&, w] {
      try {
        for (size_t i = next.fetch_add(1); i < count; i = next.fetch_add(1)) fn(i);
      } catch (...) {
        errors[w] = std::current_exception();
      }
    });
  }
  for (auto& t : pool) t.join();
  for (auto& e : errors) {
    if (e) std::rethrow_exception(e);
  }
}

/// One simulated protocol reduced to the trajectory-CSV observables.
struct TrajectoryData {
  std::vector<double> times;
  std::vector<double> g_plus, g_minus;
  std::vector<double> var_x1, var_x2;
  std::vector<double> purity_mech, purity_cav, purity_total;

  size_t argmin_var() const {
    size_t best = 0;
    for (size_t i = 1; i < var_x1.size(); ++i)
      if (var_x1[i] < var_x1[best]) best = i;
    return best;
  }
};

TrajectoryData simulate_pulses(const PulsePair& pulses, const SystemParams& params,
                               const FockCutoffs& cutoffs, EngineKind engine,
                               RotatingFrame frame, const ForceSpec& force, int stored_max) {
  TrajectoryData data;
  const int n = pulses.grid.n_steps;
  auto node_pulse = [&](double t, double& gp, double& gm) {
    int k = static_cast<int>(std::llround(t / pulses.grid.dt()));
    k = std::clamp(k, 0, n);
    gp = pulses.g_plus(k);
    gm = pulses.g_minus(k);
  };
  if (engine == EngineKind::moments) {
    // Full-resolution states are cheap here; keep them all so the variance
    // minimum is exact, and thin only for storage.
    const MomentTrajectory traj =
        evolve_moments(GaussianState::thermal(params.n_th), pulses, params, frame, force);
    data.times = traj.times;
    for (const GaussianState& gs : traj.states) {
      data.var_x1.push_back(gs.cov(0, 0));
      data.var_x2.push_back(gs.cov(1, 1));
      data.purity_mech.push_back(gaussian_purity_mech(gs));
      data.purity_cav.push_back(gaussian_purity_cav(gs));
      data.purity_total.push_back(gaussian_purity_total(gs));
    }
  } else {
    PropagationOptions opts;
    opts.stored_every = std::max(1, (n + stored_max - 1) / stored_max);
    const CMat rho0 = standard_initial_state(params, cutoffs);
    const Trajectory traj = propagate_forward(rho0, pulses, params, cutoffs, frame, opts);
    const QuadratureOps q = quadrature_ops(cutoffs);
    data.times = traj.times;
    for (const CMat& rho : traj.states) {
      data.var_x1.push_back(variance(rho, q.x1));
      data.var_x2.push_back(variance(rho, q.x2));
      data.purity_mech.push_back(purity(partial_trace(rho, Subsystem::mech, cutoffs)));
      data.purity_cav.push_back(purity(partial_trace(rho, Subsystem::cavity, cutoffs)));
      data.purity_total.push_back(purity(rho));
    }
  }
  data.g_plus.resize(data.times.size());
  data.g_minus.resize(data.times.size());
  for (size_t i = 0; i < data.times.size(); ++i) {
    node_pulse(data.times[i], data.g_plus[i], data.g_minus[i]);
  }
  return data;
}

const char* kTrajectoryHeader =
    "t_s,g_plus_rad_s,g_minus_rad_s,var_x1,var_x2,db,purity_mech,purity_cav,"
    "purity_total,engine,mode,protocol";

void append_trajectory_rows(std::string& csv, const TrajectoryData& data,
                            const std::string& engine, const std::string& mode,
                            const std::string& protocol, int stored_max) {
  const size_t count = data.times.size();
  const size_t every = std::max<size_t>(1, (count + stored_max - 1) / stored_max);
  for (size_t i = 0; i < count; ++i) {
    if (i % every != 0 && i != count - 1) continue;
    csv += fmt(data.times[i]) + "," + fmt(data.g_plus[i]) + "," + fmt(data.g_minus[i]) +
           "," + fmt(data.var_x1[i]) + "," + fmt(data.var_x2[i]) + "," +
           fmt(-10.0 * std::log10(std::max(data.var_x1[i], 1e-300) / 0.5)) + "," +
           fmt(data.purity_mech[i]) + "," + fmt(data.purity_cav[i]) + "," +
           fmt(data.purity_total[i]) + "," + engine + "," + mode + "," + protocol + "\n";
  }
}

std::string csv_preamble(const RunConfig& cfg) {
  return "# config_hash=" + cfg.hash + " schema_version=" + kSchemaVersion + "\n" +
         kTrajectoryHeader + "\n";
}

Json summary_base(const RunConfig& cfg) {
  Json j;
  j["schema_version"] = kSchemaVersion;
  j["config_hash"] = cfg.hash;
  j["command"] = cfg.command;
  j["engine"] = to_string(cfg.engine);
  j["mode"] = to_string(cfg.frame);
  return j;
}

/// Resolve a protocol's pulses on a grid sized for the requested frame.
PulsePair resolve_pulses(const RunConfig& cfg, ProtocolSpec spec,
                         const SystemParams& params, RotatingFrame frame, double duration) {
  const double max_amp = std::max(spec.g_minus, spec.g_plus_initial);
  RunConfig sized = cfg;
  sized.duration = duration;
  spec.grid = sized.make_grid(params, frame, max_amp);
  if (spec.kind == ProtocolKind::delayed && !spec.t_delay) {
    spec.t_delay = cooling_delay_time(spec.g_minus, params, spec.grid);
  }
  return make_pulses(spec);
}

double db_of(double var) { return -10.0 * std::log10(std::max(var, 1e-300) / 0.5); }

/// Moving average over a window of `width` samples (odd-sized, centered).
std::vector<double> smooth(const std::vector<double>& v, size_t width) {
  if (width <= 1 || v.size() < width) return v;
  std::vector<double> out(v.size() - width + 1);
  double acc = 0;
  for (size_t i = 0; i < width; ++i) acc += v[i];
  out[0] = acc / width;
  for (size_t i = width; i < v.size(); ++i) {
    acc += v[i] - v[i - width];
    out[i - width + 1] = acc / width;
  }
  return out;
}

struct ExtremaCount {
  int minima = 0;
  int maxima = 0;
  std::optional<size_t> first_min_index;
};

/// Direction-change counter with relative hysteresis so ripple below `rel_tol`
/// is not mistaken for structure.
ExtremaCount count_extrema(const std::vector<double>& v, double rel_tol) {
  ExtremaCount out;
  if (v.size() < 3) return out;
  int direction = 0;  // +1 rising, -1 falling
  double ext = v[0];
  size_t ext_idx = 0;
  for (size_t i = 1; i < v.size(); ++i) {
    const double x = v[i];
    if (direction >= 0 && x < ext * (1.0 - rel_tol)) {
      if (direction > 0) ++out.maxima;
      direction = -1;
      ext = x;
      ext_idx = i;
    } else if (direction <= 0 && x > ext * (1.0 + rel_tol)) {
      if (direction < 0) {
        ++out.minima;
        if (!out.first_min_index) out.first_min_index = ext_idx;
      }
      direction = 1;
      ext = x;
      ext_idx = i;
    } else if ((direction >= 0 && x > ext) || (direction <= 0 && x < ext)) {
      ext = x;
      ext_idx = i;
    }
  }
  return out;
}

}  // namespace

const Artifact* RunResult::find(const std::string& name) const {
  for (const Artifact& a : artifacts) {
    if (a.name == name) return &a;
  }
  return nullptr;
}

const std::string& RunResult::summary_json() const {
  const Artifact* a = find("summary.json");
  if (!a) throw Error(ErrorCode::internal, "result has no summary.json");
  return a->content;
}

RunResult run_simulate(const RunConfig& cfg) {
  const PulsePair pulses =
      resolve_pulses(cfg, cfg.protocol, cfg.params, cfg.frame, cfg.duration);
  const TrajectoryData data = simulate_pulses(pulses, cfg.params, cfg.cutoffs, cfg.engine,
                                              cfg.frame, cfg.force, cfg.stored_max);
  std::string csv = csv_preamble(cfg);
  const std::string label =
      cfg.protocol.label.empty() ? to_string(cfg.protocol.kind) : cfg.protocol.label;
  append_trajectory_rows(csv, data, to_string(cfg.engine), to_string(cfg.frame), label,
                         cfg.stored_max);

  const size_t imin = data.argmin_var();
  Json j = summary_base(cfg);
  j["protocol"] = to_string(cfg.protocol.kind);
  j["max_db"] = db_of(data.var_x1[imin]);
  j["t_of_max_s"] = data.times[imin];
  j["terminal_db"] = db_of(data.var_x1.back());
  j["terminal_var_x1"] = data.var_x1.back();
  j["min_var_x1"] = data.var_x1[imin];

  RunResult result;
  result.artifacts.push_back({"trajectory.csv", std::move(csv)});
  result.artifacts.push_back({"summary.json", j.dump(2) + "\n"});
  return result;
}

RunResult run_compare(const RunConfig& cfg) {
  if (cfg.compare_list.size() < 2) {
    throw Error(ErrorCode::config, "compare needs compare.list with at least 2 protocols");
  }
  const double threshold = cfg.sweep.threshold_db;
  std::vector<TrajectoryData> runs(cfg.compare_list.size());
  std::vector<PulsePair> pulse_sets(cfg.compare_list.size());
  parallel_for(cfg.compare_list.size(), [&](size_t i) {
    pulse_sets[i] =
        resolve_pulses(cfg, cfg.compare_list[i], cfg.params, cfg.frame, cfg.duration);
    runs[i] = simulate_pulses(pulse_sets[i], cfg.params, cfg.cutoffs, cfg.engine, cfg.frame,
                              cfg.force, cfg.stored_max);
  });

  std::string csv = csv_preamble(cfg);
  Json table = Json::array();
  for (size_t i = 0; i < runs.size(); ++i) {
    const ProtocolSpec& spec = cfg.compare_list[i];
    append_trajectory_rows(csv, runs[i], to_string(cfg.engine), to_string(cfg.frame),
                           spec.label, cfg.stored_max);
    const size_t imin = runs[i].argmin_var();
    Json row;
    row["protocol"] = spec.label;
    row["kind"] = to_string(spec.kind);
    row["g_minus_rad_s"] = spec.g_minus;
    row["ratio_final"] = spec.ratio_final;
    row["max_db"] = db_of(runs[i].var_x1[imin]);
    row["t_of_max_s"] = runs[i].times[imin];
    row["terminal_db"] = db_of(runs[i].var_x1.back());
    bool crossed = false;
    for (size_t k = 0; k < runs[i].times.size(); ++k) {
      if (db_of(runs[i].var_x1[k]) >= threshold) {
        row["time_to_threshold_s"] = runs[i].times[k];
        crossed = true;
        break;
      }
    }
    if (!crossed) row["time_to_threshold_s"] = nullptr;
    table.push_back(row);
  }

  Json j = summary_base(cfg);
  j["threshold_db"] = threshold;
  j["protocols"] = table;

  RunResult result;
  result.artifacts.push_back({"compare.csv", std::move(csv)});
  result.artifacts.push_back({"summary.json", j.dump(2) + "\n"});
  return result;
}

namespace {

/// Piecewise-constant refinement: each coarse step splits into `factor` fine
/// steps carrying the same sample, so the physical pulses are unchanged.
PulsePair refine_pulses(const PulsePair& coarse, int factor) {
  if (factor <= 1) return coarse;
  PulsePair fine;
  fine.grid.duration = coarse.grid.duration;
  fine.grid.n_steps = coarse.grid.n_steps * factor;
  fine.g_plus = RVec::Zero(fine.grid.n_steps + 1);
  fine.g_minus = RVec::Zero(fine.grid.n_steps + 1);
  for (int j = 0; j <= fine.grid.n_steps; ++j) {
    const int k = std::min(j / factor, coarse.grid.n_steps);
    fine.g_plus(j) = coarse.g_plus(k);
    fine.g_minus(j) = coarse.g_minus(k);
  }
  return fine;
}

std::string pulses_csv(const RunConfig& cfg, const PulsePair& pulses) {
  std::string csv = "# config_hash=" + cfg.hash + " schema_version=" + kSchemaVersion +
                    "\nt_s,g_plus_rad_s,g_minus_rad_s\n";
  for (int k = 0; k <= pulses.grid.n_steps; ++k) {
    csv += fmt(pulses.grid.node(k)) + "," + fmt(pulses.g_plus(k)) + "," +
           fmt(pulses.g_minus(k)) + "\n";
  }
  return csv;
}

}  // namespace

RunResult run_optimize(const RunConfig& cfg) {
  if (cfg.engine != EngineKind::fock) {
    throw Error(ErrorCode::config, "optimize requires engine = fock");
  }
  const PulsePair guess =
      resolve_pulses(cfg, cfg.protocol, cfg.params, cfg.krotov.frame, cfg.duration);
  const CMat rho0 = standard_initial_state(cfg.params, cfg.cutoffs);
  const OptimizationRecord record =
      optimize(rho0, guess, cfg.krotov, cfg.params, cfg.cutoffs);

  // Re-evaluate the optimized pulses with and without the RWA; refine the
  // grid when the full-mode dt rule needs it.
  auto evaluate = [&](RotatingFrame frame) {
    PulsePair pulses = record.pulses_final;
    const int needed = required_steps(pulses.grid.duration, cfg.params, pulses.max_abs(), frame);
    const int target = static_cast<int>(std::ceil(needed * cfg.oversample));
    if (pulses.grid.n_steps < target) {
      const int factor = (target + pulses.grid.n_steps - 1) / pulses.grid.n_steps;
      pulses = refine_pulses(pulses, factor);
    }
    return simulate_pulses(pulses, cfg.params, cfg.cutoffs, EngineKind::fock, frame,
                           cfg.force, cfg.stored_max);
  };
  const TrajectoryData eval_rwa = evaluate(RotatingFrame::rwa);
  const TrajectoryData eval_full = evaluate(RotatingFrame::full);

  Json j = summary_base(cfg);
  j["optimize_mode"] = to_string(cfg.krotov.frame);
  Json iters = Json::array();
  for (const IterationEntry& e : record.iterations) {
    Json row;
    row["iter"] = e.iter;
    row["j_terminal"] = e.j_terminal;
    row["j_running"] = e.j_running;
    row["monotonic"] = e.monotonic;
    row["retries"] = e.retries;
    iters.push_back(row);
  }
  j["iterations"] = iters;
  j["lambda_plus"] = record.lambda_plus_used;
  j["lambda_minus"] = record.lambda_minus_used;
  j["converged"] = record.converged;
  j["non_monotonic_warning"] = record.non_monotonic_warning;
  j["j_guess"] = record.iterations.front().j_terminal;
  j["j_final"] = record.iterations.back().j_terminal;
  j["mean_g_plus_rad_s"] = record.pulses_final.g_plus.mean();
  j["mean_g_minus_rad_s"] = record.pulses_final.g_minus.mean();
  j["rwa_max_db"] = db_of(eval_rwa.var_x1[eval_rwa.argmin_var()]);
  j["full_max_db"] = db_of(eval_full.var_x1[eval_full.argmin_var()]);
  j["config"] = cfg.raw;

  std::string traj_csv = csv_preamble(cfg);
  append_trajectory_rows(traj_csv, eval_full, "fock", "full", "optimized", cfg.stored_max);

  RunResult result;
  result.artifacts.push_back({"pulses.csv", pulses_csv(cfg, record.pulses_final)});
  result.artifacts.push_back({"trajectory.csv", std::move(traj_csv)});
  result.artifacts.push_back({"summary.json", j.dump(2) + "\n"});
  return result;
}

namespace {

struct FamilyOutcome {
  bool ok = false;
  std::string error;
  double ratio = 0;
  double db_full = 0;
};

struct SweepPoint {
  double duration = 0;
  std::map<std::string, FamilyOutcome> families;
  std::string best_family;
  double best_ratio = 0;
  double max_db_full = 0;
  double max_db_rwa = 0;
  double var_ratio_full_over_rwa = 0;
  bool ok = false;
  std::string error;
};

}  // namespace

RunResult run_qsl_sweep(const RunConfig& cfg) {
  if (cfg.engine != EngineKind::moments) {
    throw Error(ErrorCode::config, "qsl-sweep runs on the moments engine");
  }
  if (cfg.sweep.policy == SweepPolicy::krotov) {
    throw Error(ErrorCode::unsupported,
                "sweep.policy = krotov: use the optimize command per duration; "
                "the sweep front-end drives line-searched protocol families");
  }
  double g_minus = cfg.sweep.g_minus;
  double g_plus_initial = cfg.sweep.g_plus_initial;
  if (cfg.krotov.amplitude_cap) {
    g_minus = std::min(g_minus, *cfg.krotov.amplitude_cap);
    g_plus_initial = std::min(g_plus_initial, *cfg.krotov.amplitude_cap);
  }

  const std::vector<double> ratio_grid = default_ratio_grid();
  std::vector<SweepPoint> points(cfg.sweep.t_list.size());

  parallel_for(points.size(), [&](size_t i) {
    SweepPoint& pt = points[i];
    pt.duration = cfg.sweep.t_list[i];
    RunConfig sized = cfg;
    sized.duration = pt.duration;
    sized.n_steps.reset();
    const TimeGrid grid_full = sized.make_grid(cfg.params, RotatingFrame::full, g_minus);
    for (ProtocolKind kind : cfg.sweep.families) {
      FamilyOutcome out;
      try {
        const LineSearchResult ls = line_search_ratio(
            kind, g_minus, grid_full, cfg.params, SqueezeObjective::min_over_time,
            ratio_grid, RotatingFrame::full, g_plus_initial);
        out.ok = true;
        out.ratio = ls.ratio;
        out.db_full = ls.achieved_db;
      } catch (const Error& e) {
        out.error = e.what();
      }
      pt.families[to_string(kind)] = out;
      if (out.ok && (!pt.ok || out.db_full > pt.max_db_full)) {
        pt.ok = true;
        pt.best_family = to_string(kind);
        pt.best_ratio = out.ratio;
        pt.max_db_full = out.db_full;
      }
    }
    if (!pt.ok) {
      pt.error = "no protocol family produced a result";
      return;
    }
    // Same winning pulses without the counterrotating terms.
    ProtocolSpec spec;
    spec.kind = ProtocolKind::constant;
    for (ProtocolKind k : cfg.sweep.families) {
      if (to_string(k) == pt.best_family) spec.kind = k;
    }
    spec.g_minus = g_minus;
    spec.ratio_final = pt.best_ratio;
    spec.g_plus_initial = g_plus_initial;
    spec.grid = grid_full;
    if (spec.kind == ProtocolKind::delayed) {
      spec.t_delay = cooling_delay_time(g_minus, cfg.params, grid_full);
    }
    const PulsePair pulses = make_pulses(spec);
    const MomentTrajectory rwa_traj = evolve_moments(
        GaussianState::thermal(cfg.params.n_th), pulses, cfg.params, RotatingFrame::rwa);
    double best_var = rwa_traj.states.front().cov(0, 0);
    for (const GaussianState& gs : rwa_traj.states)
      best_var = std::min(best_var, gs.cov(0, 0));
    pt.max_db_rwa = db_of(best_var);
    pt.var_ratio_full_over_rwa = std::pow(10.0, (pt.max_db_rwa - pt.max_db_full) / 10.0);
  });

  Json j = summary_base(cfg);
  j["threshold_db"] = cfg.sweep.threshold_db;
  j["g_minus_rad_s"] = g_minus;
  if (cfg.krotov.amplitude_cap) j["amplitude_cap_rad_s"] = *cfg.krotov.amplitude_cap;
  Json rows = Json::array();
  std::optional<double> smallest_above;
  std::string csv = "# config_hash=" + cfg.hash + " schema_version=" + kSchemaVersion +
                    "\nT_s,T_kappa_units,best_family,best_ratio,max_db_rwa,max_db_full,"
                    "var_ratio_full_over_rwa\n";
  for (const SweepPoint& pt : points) {
    Json row;
    row["T_s"] = pt.duration;
    row["T_kappa_units"] = pt.duration * cfg.params.kappa / kTwoPi;
    if (pt.ok) {
      row["best_family"] = pt.best_family;
      row["best_ratio"] = pt.best_ratio;
      row["max_db_full"] = pt.max_db_full;
      row["max_db_rwa"] = pt.max_db_rwa;
      row["var_ratio_full_over_rwa"] = pt.var_ratio_full_over_rwa;
      if (!smallest_above && pt.max_db_full >= cfg.sweep.threshold_db) {
        smallest_above = pt.duration;
      }
      csv += fmt(pt.duration) + "," + fmt(pt.duration * cfg.params.kappa / kTwoPi) + "," +
             pt.best_family + "," + fmt(pt.best_ratio) + "," + fmt(pt.max_db_rwa) + "," +
             fmt(pt.max_db_full) + "," + fmt(pt.var_ratio_full_over_rwa) + "\n";
    } else {
      row["error"] = pt.error;
    }
    Json fam;
    for (const auto& [name, out] : pt.families) {
      Json f;
      if (out.ok) {
        f["ratio"] = out.ratio;
        f["max_db_full"] = out.db_full;
      } else {
        f["error"] = out.error;
      }
      fam[name] = f;
    }
    row["families"] = fam;
    rows.push_back(row);
  }
  j["points"] = rows;
  if (smallest_above) {
    j["smallest_T_above_threshold_s"] = *smallest_above;
  } else {
    j["smallest_T_above_threshold_s"] = nullptr;
  }

  RunResult result;
  result.artifacts.push_back({"qsl.csv", std::move(csv)});
  result.artifacts.push_back({"summary.json", j.dump(2) + "\n"});
  return result;
}

RunResult run_kappa_study(const RunConfig& cfg) {
  if (cfg.engine != EngineKind::moments) {
    throw Error(ErrorCode::config, "kappa-study runs on the moments engine");
  }
  if (cfg.params.n_th != 0.0) {
    throw Error(ErrorCode::config, "kappa-study is defined for params.n_th = 0");
  }
  struct StudyPoint {
    double reduction = 1;
    TrajectoryData data;
    double plateau_var = 0;
    bool oscillatory = false;
    int minima = 0, maxima = 0;
    double t_first_min = 0;
  };
  std::vector<StudyPoint> points(cfg.kappa_study.reductions.size());

  parallel_for(points.size(), [&](size_t i) {
    StudyPoint& pt = points[i];
    pt.reduction = cfg.kappa_study.reductions[i];
    SystemParams reduced = cfg.params;
    reduced.kappa = cfg.params.kappa / pt.reduction;

    // Window run over the configured duration (fast scales unchanged, so the
    // grid from the unreduced parameters stays valid).
    const PulsePair pulses =
        resolve_pulses(cfg, cfg.protocol, cfg.params, cfg.frame, cfg.duration);
    pt.data = simulate_pulses(pulses, reduced, cfg.cutoffs, EngineKind::moments, cfg.frame,
                              cfg.force, cfg.stored_max);

    // Extremum structure on the 2*Omega-averaged envelope.
    const double dt = pulses.grid.dt();
    const size_t window = std::max<size_t>(1, std::llround(kTwoPi / (2 * cfg.params.omega_mech) / dt));
    const std::vector<double> envelope = smooth(pt.data.var_x1, window);
    const ExtremaCount ext = count_extrema(envelope, 0.005);
    pt.minima = ext.minima;
    pt.maxima = ext.maxima;
    pt.oscillatory = ext.minima + ext.maxima >= 2;
    if (ext.first_min_index) {
      pt.t_first_min = pt.data.times[std::min(*ext.first_min_index + window / 2,
                                              pt.data.times.size() - 1)];
    } else {
      pt.t_first_min = pt.data.times[pt.data.argmin_var()];
    }

    // Plateau from a settle-length run, averaged over the last 5%.
    const double g_term = pulses.g_minus(pulses.grid.n_steps);
    const double ratio = pulses.g_plus(pulses.grid.n_steps) / g_term;
    const double coupling_sq = g_term * g_term * std::max(1e-12, 1.0 - ratio * ratio);
    const double slow_rate =
        std::min(4.0 * coupling_sq / reduced.kappa, reduced.kappa / 2.0);
    const double settle = std::max(cfg.duration, cfg.kappa_study.settle_efolds / slow_rate);
    RunConfig sized = cfg;
    sized.duration = settle;
    sized.n_steps.reset();
    const PulsePair long_pulses =
        resolve_pulses(sized, cfg.protocol, cfg.params, cfg.frame, settle);
    const MomentTrajectory long_traj =
        evolve_moments(GaussianState::thermal(reduced.n_th), long_pulses, reduced, cfg.frame);
    const size_t start = long_traj.states.size() * 95 / 100;
    double acc = 0;
    for (size_t k = start; k < long_traj.states.size(); ++k)
      acc += long_traj.states[k].cov(0, 0);
    pt.plateau_var = acc / (long_traj.states.size() - start);
  });

  std::string csv = csv_preamble(cfg);
  Json rows = Json::array();
  for (const StudyPoint& pt : points) {
    char label[48];
    std::snprintf(label, sizeof label, "kappa_over_%g", pt.reduction);
    append_trajectory_rows(csv, pt.data, "moments", to_string(cfg.frame), label,
                           cfg.stored_max);
    Json row;
    row["reduction"] = pt.reduction;
    row["kappa_rad_s"] = cfg.params.kappa / pt.reduction;
    row["plateau_var_x1"] = pt.plateau_var;
    row["plateau_db"] = db_of(pt.plateau_var);
    row["oscillatory"] = pt.oscillatory;
    row["n_minima"] = pt.minima;
    row["n_maxima"] = pt.maxima;
    row["t_first_min_s"] = pt.t_first_min;
    row["min_var_x1"] = pt.data.var_x1[pt.data.argmin_var()];
    row["max_db"] = db_of(pt.data.var_x1[pt.data.argmin_var()]);
    rows.push_back(row);
  }
  Json j = summary_base(cfg);
  j["points"] = rows;

  RunResult result;
  result.artifacts.push_back({"kappa_study.csv", std::move(csv)});
  result.artifacts.push_back({"summary.json", j.dump(2) + "\n"});
  return result;
}

RunResult run_command(const RunConfig& cfg, const std::string& command) {
  if (command == "simulate") return run_simulate(cfg);
  if (command == "compare") return run_compare(cfg);
  if (command == "optimize") return run_optimize(cfg);
  if (command == "qsl-sweep") return run_qsl_sweep(cfg);
  if (command == "kappa-study") return run_kappa_study(cfg);
  throw Error(ErrorCode::invalid_argument, "unknown command: " + command);
}

void write_result(const RunResult& result, const std::string& out_dir) {
  namespace fs = std::filesystem;
  std::error_code ec;
  fs::create_directories(out_dir, ec);
  if (ec) {
    throw Error(ErrorCode::io, "cannot create output directory " + out_dir);
  }
  for (const Artifact& a : result.artifacts) {
    const fs::path path = fs::path(out_dir) / a.name;
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::io, "cannot open " + path.string());
    out << a.content;
    if (!out) throw Error(ErrorCode::io, "failed writing " + path.string());
  }
}

}  // namespace osq
