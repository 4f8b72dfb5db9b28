#pragma once

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <functional>
#include <future>
#include <iomanip>
#include <optional>
#include <ostream>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "mpcgh/hologram_io.hpp"
#include "mpcgh/metrics.hpp"
#include "mpcgh/run_config.hpp"
#include "mpcgh/scene.hpp"
#include "mpcgh/solvers.hpp"
#include "mpcgh/targeting.hpp"

namespace mpcgh {

inline RgbdScene load_run_scene(const RunConfig& cfg) {
  if (cfg.image) return load_scene(*cfg.image, *cfg.depth);
  return three_rectangle_scene(cfg.synthetic_height, cfg.synthetic_width);
}

/// Image channel that feeds wavelength `i` (gray scenes are broadcast).
inline std::size_t channel_for_wavelength(const RgbdScene& scene, const RunConfig& cfg, std::size_t i) {
  if (scene.channels.size() == 1) return 0;
  if (scene.channels.size() != cfg.wavelengths.size()) {
    throw ConfigError("scene has " + std::to_string(scene.channels.size()) + " channels but " +
                      std::to_string(cfg.wavelengths.size()) + " wavelengths are configured");
  }
  return i;
}

inline SolverConfig solver_for_wavelength(const RunConfig& cfg, const RgbdScene& scene, std::size_t i) {
  SolverConfig s = cfg.solver;
  s.optics = OpticalConfig{cfg.wavelengths.at(i), cfg.pixel_pitch, scene.rows(), scene.cols()};
  s.seed = cfg.seed;
  return s;
}

inline std::filesystem::path channel_dir(const std::filesystem::path& root, std::size_t i) {
  return root / ("channel_" + std::to_string(i));
}

inline HologramMetadata metadata_for(const SolverConfig& s, const PlaneTargetSet& targets, bool grating) {
  HologramMetadata m;
  m.wavelength = s.optics.wavelength;
  m.pixel_pitch = s.optics.pixel_pitch;
  m.height = s.optics.height;
  m.width = s.optics.width;
  m.hop_distance = s.hop_distance;
  m.plane_offsets = resolve_plane_offsets(targets, s);
  m.regime = s.regime;
  m.algorithm = s.algorithm;
  m.grating = grating;
  m.band_limit = s.propagation.band_limit;
  m.zero_pad = s.propagation.zero_pad;
  m.compare_amplitude = s.loss.compare_amplitude;
  m.seed = s.seed;
  return m;
}

struct ChannelResult {
  double wavelength = 0.0;
  PlaneTargetSet targets;
  SolverTrace trace;
  RealGrid displayed;
  FocalStack stack;
  ReconstructionReport report;
};

/// Targets for mode `mode`, and the `ours` set used as the defocus reference.
inline std::pair<PlaneTargetSet, PlaneTargetSet> targets_with_reference(const RgbdScene& scene, std::size_t ch,
                                                                        TargetingParams params) {
  PlaneTargetSet targets = compose_targets(scene, ch, params);
  if (params.mode == TargetingMode::ours) return {targets, targets};
  params.mode = TargetingMode::ours;
  return {std::move(targets), compose_targets(scene, ch, params)};
}

/// Solve one configuration and score it; no files are written.
inline ChannelResult solve_and_score(const PlaneTargetSet& targets, const PlaneTargetSet& reference,
                                     const SolverConfig& s) {
  ChannelResult res;
  res.wavelength = s.optics.wavelength;
  res.targets = targets;
  res.trace = run_solver(targets, s);
  res.displayed = display_phase(res.trace.final, s);
  res.stack = reconstruct_stack(res.displayed, s, resolve_plane_offsets(targets, s));
  res.report = make_report(res.stack, targets, s.loss, &reference);
  res.report.iterations = static_cast<int>(res.trace.losses.size());
  res.report.wall_time_s = res.trace.wall_time_s;
  return res;
}

/// Full pipeline for every wavelength; writes hologram, sidecar, stack and report per channel.
inline std::vector<ChannelResult> run_optimize(const RunConfig& cfg) {
  cfg.validate();
  const RgbdScene scene = load_run_scene(cfg);
  std::vector<ChannelResult> results;
  for (std::size_t i = 0; i < cfg.wavelengths.size(); ++i) {
    const std::size_t ch = channel_for_wavelength(scene, cfg, i);
    const SolverConfig s = solver_for_wavelength(cfg, scene, i);
    auto [targets, reference] = targets_with_reference(scene, ch, cfg.targeting);
    ChannelResult res = solve_and_score(targets, reference, s);

    const auto dir = channel_dir(cfg.output_dir, i);
    // The grating is applied on the quantized codes so it stays an exact half cycle.
    save_hologram(res.displayed, dir / "hologram.png", metadata_for(s, targets, cfg.grating));
    Json echo = to_json(cfg);
    echo["channel_wavelength_m"] = s.optics.wavelength;
    save_stack_and_report(res.stack, res.report, dir, echo, &res.trace);
    results.push_back(std::move(res));
  }
  return results;
}

/// Writes target and mask previews for every wavelength channel.
inline std::vector<PlaneTargetSet> run_target(const RunConfig& cfg) {
  cfg.validate();
  const RgbdScene scene = load_run_scene(cfg);
  std::vector<PlaneTargetSet> sets;
  for (std::size_t i = 0; i < cfg.wavelengths.size(); ++i) {
    const std::size_t ch = channel_for_wavelength(scene, cfg, i);
    PlaneTargetSet t = compose_targets(scene, ch, cfg.targeting);
    const auto dir = channel_dir(cfg.output_dir, i);
    const double peak = t.peak();
    for (std::size_t k = 0; k < t.n_planes(); ++k) {
      write_png(dir / ("target_" + std::to_string(k) + ".png"), to_gray8(t.targets[k], peak));
      write_png(dir / ("mask_" + std::to_string(k) + ".png"), to_gray8(t.masks[k], 1.0));
    }
    sets.push_back(std::move(t));
  }
  return sets;
}

struct ReconstructResult {
  FocalStack stack;
  std::optional<ReconstructionReport> report;
};

/// Re-simulates an exported hologram. With a run config, the stack is scored
/// against the targets of channel `channel`.
inline ReconstructResult run_reconstruct(const std::filesystem::path& hologram_png,
                                         const std::filesystem::path& out_dir,
                                         const std::optional<RunConfig>& cfg = std::nullopt,
                                         std::size_t channel = 0) {
  const LoadedHologram h = load_hologram(hologram_png);
  const SolverConfig s = replay_config(h.meta);
  ReconstructResult out;
  out.stack = reconstruct_stack(h.phase, s, h.meta.plane_offsets);
  if (cfg) {
    const RgbdScene scene = load_run_scene(*cfg);
    const std::size_t ch = channel_for_wavelength(scene, *cfg, channel);
    auto [targets, reference] = targets_with_reference(scene, ch, cfg->targeting);
    if (targets.n_planes() != out.stack.images.size()) {
      throw ConfigError("run config has " + std::to_string(targets.n_planes()) +
                        " planes but the hologram sidecar lists " +
                        std::to_string(out.stack.images.size()));
    }
    LossWeights w = cfg->solver.loss;
    w.compare_amplitude = h.meta.compare_amplitude;
    out.report = make_report(out.stack, targets, w, &reference);
    save_stack_and_report(out.stack, *out.report, out_dir, to_json(*cfg));
  } else {
    std::filesystem::create_directories(out_dir);
    const double peak = out.stack.peak();
    for (std::size_t k = 0; k < out.stack.images.size(); ++k)
      write_png(out_dir / ("plane_" + std::to_string(k) + ".png"), to_gray8(out.stack.images[k], peak));
  }
  return out;
}

inline unsigned worker_threads() {
  if (const char* env = std::getenv("MPCGH_THREADS")) {
    const int n = std::atoi(env);
    if (n > 0) return static_cast<unsigned>(n);
  }
  return 1;
}

struct CompareRow {
  Algorithm algorithm;
  TargetingMode mode;
  Regime regime;
  ReconstructionReport report;
  double initial_loss = 0.0;
  double final_loss = 0.0;
};

/// {sgd_dp, gs, dp} x {ours, naive} on the first wavelength; defocus scores use `ours` targets.
inline std::vector<CompareRow> run_compare(const RunConfig& cfg) {
  cfg.validate();
  const RgbdScene scene = load_run_scene(cfg);
  const std::size_t ch = channel_for_wavelength(scene, cfg, 0);
  const SolverConfig base = solver_for_wavelength(cfg, scene, 0);

  struct Job {
    Algorithm algorithm;
    TargetingMode mode;
  };
  std::vector<Job> jobs;
  for (Algorithm a : {Algorithm::sgd_dp, Algorithm::gs, Algorithm::dp})
    for (TargetingMode m : {TargetingMode::ours, TargetingMode::naive}) jobs.push_back({a, m});

  auto run_job = [&](const Job& job) {
    TargetingParams tp = cfg.targeting;
    tp.mode = job.mode;
    auto [targets, reference] = targets_with_reference(scene, ch, tp);
    SolverConfig s = base;
    s.algorithm = job.algorithm;
    if (job.algorithm == Algorithm::gs) s.regime = Regime::far;
    ChannelResult res = solve_and_score(targets, reference, s);
    return CompareRow{job.algorithm, job.mode, s.regime, res.report, res.trace.losses.front(),
                      res.report.final_objective};
  };

  std::vector<CompareRow> rows(jobs.size());
  const unsigned threads = std::max(1u, worker_threads());
  for (std::size_t start = 0; start < jobs.size(); start += threads) {
    std::vector<std::future<CompareRow>> batch;
    for (std::size_t j = start; j < std::min(jobs.size(), start + threads); ++j) {
      batch.push_back(std::async(threads > 1 ? std::launch::async : std::launch::deferred, run_job, jobs[j]));
    }
    for (std::size_t j = 0; j < batch.size(); ++j) rows[start + j] = batch[j].get();
  }

  Json out = Json::array();
  for (const auto& r : rows) {
    Json jr = to_json(r.report);
    jr["algorithm"] = to_string(r.algorithm);
    jr["targeting"] = to_string(r.mode);
    jr["regime"] = to_string(r.regime);
    out.push_back(std::move(jr));
  }
  write_json(cfg.output_dir / "compare.json", Json{{"runs", out}, {"config", to_json(cfg)}});
  return rows;
}

inline std::string format_db(double v) {
  if (std::isinf(v)) return "inf";
  std::ostringstream os;
  os << std::fixed << std::setprecision(2) << v;
  return os.str();
}

/// Side-by-side table: mean per-plane metrics of each compare run.
inline void print_compare_table(const std::vector<CompareRow>& rows, std::ostream& os) {
  os << std::left << std::setw(8) << "algo" << std::setw(8) << "target" << std::setw(7) << "regime"
     << std::right << std::setw(12) << "objective" << std::setw(11) << "psnr" << std::setw(11)
     << "focus" << std::setw(11) << "defocus" << std::setw(8) << "ssim" << '\n';
  for (const auto& r : rows) {
    double p = 0, f = 0, d = 0, s = 0;
    std::size_t nd = 0;
    for (const auto& pl : r.report.planes) {
      p += pl.psnr_db;
      f += pl.focus_psnr_db;
      s += pl.ssim;
      if (pl.defocus_psnr_db) {
        d += *pl.defocus_psnr_db;
        ++nd;
      }
    }
    const double n = static_cast<double>(r.report.planes.size());
    os << std::left << std::setw(8) << to_string(r.algorithm) << std::setw(8) << to_string(r.mode)
       << std::setw(7) << to_string(r.regime) << std::right << std::setw(12) << std::setprecision(5)
       << r.final_loss << std::setw(11) << format_db(p / n) << std::setw(11) << format_db(f / n)
       << std::setw(11) << (nd ? format_db(d / static_cast<double>(nd)) : std::string("-"))
       << std::setw(8) << std::fixed << std::setprecision(3) << s / n << std::defaultfloat << '\n';
  }
}

}  // namespace mpcgh
