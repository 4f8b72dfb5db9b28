// Command-line front end: optimize, target, reconstruct, compare, selftest.

#include <CLI11.hpp>

#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "mpcgh/app.hpp"
#include "mpcgh/selftest.hpp"
#include "mpcgh/version.hpp"

namespace {

// Optional overrides shared by every config-driven subcommand.
struct Overrides {
  std::string config_path;
  std::optional<std::string> image, depth, out, algorithm, regime, mode, init;
  std::optional<std::vector<double>> wavelengths;
  std::optional<double> pitch, lr, hop, spacing, sigma0, m0, m1, w0, w1, w2, initial_offset;
  std::optional<int> iterations, planes;
  std::optional<std::size_t> size;
  std::optional<std::uint64_t> seed;
  bool grating = false, no_band_limit = false, pad = false, step_per_plane = false,
       compare_amplitude = false;
};

void add_override_flags(CLI::App* cmd, Overrides& o) {
  cmd->add_option("-c,--config", o.config_path, "Run configuration JSON")->check(CLI::ExistingFile);
  cmd->add_option("--image", o.image, "8-bit gray or RGB PNG");
  cmd->add_option("--depth", o.depth, "8-bit gray depth PNG (0 = nearest)");
  cmd->add_option("--size", o.size, "Edge length of the built-in synthetic scene");
  cmd->add_option("-o,--out", o.out, "Output directory");
  cmd->add_option("--wavelength", o.wavelengths, "Wavelength(s) in meters, one run each");
  cmd->add_option("--pitch", o.pitch, "Pixel pitch in meters");
  cmd->add_option("--algorithm", o.algorithm, "sgd_dp | gs | dp");
  cmd->add_option("--regime", o.regime, "near | far");
  cmd->add_option("--init", o.init, "random | zeros");
  cmd->add_option("--iterations", o.iterations);
  cmd->add_option("--lr", o.lr, "Adam learning rate");
  cmd->add_option("--hop", o.hop, "Hop distance in meters");
  cmd->add_option("--spacing", o.spacing, "Plane spacing in meters");
  cmd->add_option("--planes", o.planes, "Number of depth planes (2-16)");
  cmd->add_option("--mode", o.mode, "Targeting: ours | naive");
  cmd->add_option("--sigma0", o.sigma0, "Blur per plane of separation (pixels)");
  cmd->add_option("--m0", o.m0);
  cmd->add_option("--m1", o.m1);
  cmd->add_option("--w0", o.w0);
  cmd->add_option("--w1", o.w1);
  cmd->add_option("--w2", o.w2);
  cmd->add_option("--initial-offset", o.initial_offset);
  cmd->add_option("--seed", o.seed, "Seed for every random draw");
  cmd->add_flag("--grating", o.grating, "Add the half-cycle row grating to exported holograms");
  cmd->add_flag("--no-band-limit", o.no_band_limit, "Disable the angular-spectrum band limit");
  cmd->add_flag("--pad", o.pad, "Propagate on a 2x zero-padded grid");
  cmd->add_flag("--step-per-plane", o.step_per_plane, "One optimizer step per plane");
  cmd->add_flag("--compare-amplitude", o.compare_amplitude, "Compare |U| instead of |U|^2");
}

mpcgh::RunConfig build_config(const Overrides& o) {
  using namespace mpcgh;
  RunConfig c = o.config_path.empty() ? RunConfig{} : load_run_config(o.config_path);
  if (o.image) c.image = *o.image;
  if (o.depth) c.depth = *o.depth;
  if (o.size) c.synthetic_height = c.synthetic_width = *o.size;
  if (o.out) c.output_dir = *o.out;
  if (o.wavelengths) c.wavelengths = *o.wavelengths;
  if (o.pitch) c.pixel_pitch = *o.pitch;
  if (o.algorithm) c.solver.algorithm = parse_algorithm(*o.algorithm);
  if (o.regime) c.solver.regime = parse_regime(*o.regime);
  if (o.init) c.solver.init = parse_phase_init(*o.init);
  if (o.iterations) c.solver.iterations = *o.iterations;
  if (o.lr) c.solver.learning_rate = *o.lr;
  if (o.hop) c.solver.hop_distance = *o.hop;
  if (o.spacing) c.targeting.plane_spacing = *o.spacing;
  if (o.planes) c.targeting.n_planes = *o.planes;
  if (o.mode) c.targeting.mode = parse_targeting_mode(*o.mode);
  if (o.sigma0) c.targeting.sigma0 = *o.sigma0;
  if (o.m0) c.solver.loss.m0 = *o.m0;
  if (o.m1) c.solver.loss.m1 = *o.m1;
  if (o.w0) c.targeting.w0 = *o.w0;
  if (o.w1) c.targeting.w1 = *o.w1;
  if (o.w2) c.targeting.w2 = *o.w2;
  if (o.initial_offset) c.solver.initial_offset = *o.initial_offset;
  if (o.seed) c.seed = *o.seed;
  if (o.grating) c.grating = true;
  if (o.no_band_limit) c.solver.propagation.band_limit = false;
  if (o.pad) c.solver.propagation.zero_pad = true;
  if (o.step_per_plane) c.solver.step_per_plane = true;
  if (o.compare_amplitude) c.solver.loss.compare_amplitude = true;
  if (c.solver.init == PhaseInit::provided) {
    throw ConfigError("phase init 'provided' is only available through the library API");
  }
  c.solver.seed = c.seed;
  c.validate();
  return c;
}

void print_report(const mpcgh::ReconstructionReport& rep, std::ostream& os) {
  for (std::size_t k = 0; k < rep.planes.size(); ++k) {
    const auto& p = rep.planes[k];
    os << "  plane " << k << " offset " << p.offset * 1e3 << " mm: loss " << p.loss.total << ", psnr "
       << mpcgh::format_db(p.psnr_db) << " dB, focus " << mpcgh::format_db(p.focus_psnr_db) << " dB";
    if (p.defocus_psnr_db) os << ", defocus " << mpcgh::format_db(*p.defocus_psnr_db) << " dB";
    os << ", ssim " << p.ssim << '\n';
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Multiplane phase-only hologram generation with blur-aware targets"};
  app.set_version_flag("--version", mpcgh::kVersion);
  app.require_subcommand(1);

  Overrides opt_o, tgt_o, cmp_o;
  auto* optimize = app.add_subcommand("optimize", "Compute holograms for every wavelength channel");
  add_override_flags(optimize, opt_o);
  auto* target = app.add_subcommand("target", "Write per-plane target and mask previews");
  add_override_flags(target, tgt_o);
  auto* compare = app.add_subcommand("compare", "Run {sgd_dp, gs, dp} x {ours, naive} and tabulate metrics");
  add_override_flags(compare, cmp_o);

  auto* reconstruct = app.add_subcommand("reconstruct", "Re-simulate an exported hologram PNG");
  std::string hologram_path, recon_out = "reconstruction", recon_config;
  std::size_t recon_channel = 0;
  reconstruct->add_option("hologram", hologram_path, "Hologram PNG (sidecar JSON next to it)")
      ->required()
      ->check(CLI::ExistingFile);
  reconstruct->add_option("-o,--out", recon_out, "Output directory");
  reconstruct->add_option("-c,--config", recon_config, "Run config used to score against targets")
      ->check(CLI::ExistingFile);
  reconstruct->add_option("--channel", recon_channel, "Scene channel the hologram belongs to");

  auto* selftest = app.add_subcommand("selftest", "Run the built-in invariant checks");

  CLI11_PARSE(app, argc, argv);

  try {
    if (*optimize) {
      const auto cfg = build_config(opt_o);
      const auto results = mpcgh::run_optimize(cfg);
      for (std::size_t i = 0; i < results.size(); ++i) {
        const auto& r = results[i];
        std::cout << "channel " << i << " (" << r.wavelength * 1e9 << " nm): loss " << r.trace.losses.front()
                  << " -> " << r.report.final_objective << " in " << r.trace.losses.size()
                  << " iterations, " << r.trace.wall_time_s << " s\n";
        print_report(r.report, std::cout);
      }
      std::cout << "wrote " << cfg.output_dir.string() << '\n';
    } else if (*target) {
      const auto cfg = build_config(tgt_o);
      const auto sets = mpcgh::run_target(cfg);
      std::cout << "wrote targets for " << sets.size() << " channel(s) to " << cfg.output_dir.string() << '\n';
    } else if (*reconstruct) {
      std::optional<mpcgh::RunConfig> cfg;
      if (!recon_config.empty()) cfg = mpcgh::load_run_config(recon_config);
      const auto res = mpcgh::run_reconstruct(hologram_path, recon_out, cfg, recon_channel);
      if (res.report) print_report(*res.report, std::cout);
      std::cout << "wrote " << recon_out << '\n';
    } else if (*compare) {
      const auto cfg = build_config(cmp_o);
      const auto rows = mpcgh::run_compare(cfg);
      mpcgh::print_compare_table(rows, std::cout);
    } else if (*selftest) {
      return mpcgh::run_selftest(std::cout) ? 0 : 1;
    }
  } catch (const mpcgh::ConfigError& e) {
    std::cerr << "configuration error: " << e.what() << '\n';
    return 2;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
