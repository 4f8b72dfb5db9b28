// Acceptance suite: one [PASS]/[FAIL] line per criterion, non-zero exit if any fails.
//
// usage: mpcgh_acceptance <path to mpcgh cli> [scratch dir]

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <sys/wait.h>

#include "mpcgh/app.hpp"
#include "mpcgh/selftest.hpp"

using namespace mpcgh;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string sci(double v) {
  std::ostringstream os;
  os << std::scientific << std::setprecision(2) << v;
  return os.str();
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

// Default run on the shipped scene, shared by criteria 4 and 5.
struct DefaultRuns {
  ChannelResult ours, naive;
  double ours_s = 0.0;
};

ChannelResult run_scene(TargetingMode mode, const SolverConfig& base, const RgbdScene& scene) {
  TargetingParams tp;
  tp.mode = mode;
  auto [targets, reference] = targets_with_reference(scene, 0, tp);
  SolverConfig s = base;
  s.optics = OpticalConfig{639e-9, 8e-6, scene.rows(), scene.cols()};
  return solve_and_score(targets, reference, s);
}

const DefaultRuns& default_runs() {
  static const DefaultRuns runs = [] {
    const RgbdScene scene = three_rectangle_scene();
    DefaultRuns r;
    const auto t0 = std::chrono::steady_clock::now();
    r.ours = run_scene(TargetingMode::ours, SolverConfig{}, scene);
    r.ours_s = seconds_since(t0);
    r.naive = run_scene(TargetingMode::naive, SolverConfig{}, scene);
    return r;
  }();
  return runs;
}

Outcome round_trip() {
  const auto t0 = std::chrono::steady_clock::now();
  const OpticalConfig cfg{639e-9, 8e-6, 256, 256};
  const PropagationOptions opt{false, false};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ComplexField f(random_complex_grid(256, 256, seed), cfg);
    for (double r : {1e-3, 0.30}) {
      const ComplexField back = propagate(propagate(f, r, opt), -r, opt);
      worst = std::max(worst, max_abs_diff(back.values(), f.values()) / max_abs(f.values()));
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 5.0, "max relative error " + sci(worst) + ", " + sci(t) + " s"};
}

Outcome adjoint() {
  const auto t0 = std::chrono::steady_clock::now();
  const OpticalConfig cfg{639e-9, 8e-6, 256, 256};
  double worst = 0.0;
  for (std::uint64_t seed = 0; seed < 10; ++seed) {
    const ComplexField a(random_complex_grid(256, 256, 1000 + seed), cfg);
    const ComplexField b(random_complex_grid(256, 256, 2000 + seed), cfg);
    for (double r : {1e-3, 0.05, 0.30}) {
      const Complex lhs = inner_product(propagate(a, r).values(), b.values());
      const Complex rhs = inner_product(a.values(), propagate_adjoint(b, r).values());
      worst = std::max(worst, std::abs(lhs - rhs) / std::abs(lhs));
    }
  }
  const double t = seconds_since(t0);
  return {worst <= 1e-10 && t < 5.0, "max relative error " + sci(worst) + ", " + sci(t) + " s"};
}

Outcome gradient() {
  const auto t0 = std::chrono::steady_clock::now();
  const PlaneTargetSet targets = small_gradient_problem(16, 21);
  SolverConfig c;
  c.optics = OpticalConfig{639e-9, 8e-6, 16, 16};
  c.seed = 22;
  const HologramPhase h{initial_phase(c), 0.6};
  // 64 phase coordinates plus the offset.
  const double err = gradient_check_error(targets, c, h, 64, 1e-5, 23);
  const double t = seconds_since(t0);
  return {err <= 1e-4 && t < 30.0, "relative error " + sci(err) + " over 65 coordinates, " + sci(t) + " s"};
}

Outcome convergence() {
  const DefaultRuns& r = default_runs();
  const auto& losses = r.ours.trace.losses;
  const double ratio = r.ours.report.final_objective / losses.front();
  bool psnr_ok = true;
  std::string per_plane;
  for (const auto& p : r.ours.report.planes) {
    psnr_ok = psnr_ok && p.focus_psnr_db >= 25.0;
    per_plane += (per_plane.empty() ? "" : "/") + format_db(p.focus_psnr_db);
  }
  const bool pass = ratio <= 0.1 && psnr_ok && r.ours_s < 300.0;
  return {pass, "loss " + sci(losses.front()) + " -> " + sci(r.ours.report.final_objective) + " (ratio " +
                    sci(ratio) + "), in-focus " + per_plane + " dB, " + sci(r.ours_s) + " s"};
}

std::pair<bool, std::string> differential(const ChannelResult& ours, const ChannelResult& naive) {
  bool ok = true;
  std::string detail;
  for (std::size_t k = 0; k < ours.report.planes.size(); ++k) {
    const double a = *ours.report.planes[k].defocus_psnr_db;
    const double b = *naive.report.planes[k].defocus_psnr_db;
    ok = ok && a - b >= 3.0;
    detail += (detail.empty() ? "" : ", ") + ("plane " + std::to_string(k) + " " + format_db(a) + " vs " +
                                              format_db(b) + " dB");
  }
  return {ok, detail};
}

Outcome defocus_differential() {
  const DefaultRuns& r = default_runs();
  auto [ok, detail] = differential(r.ours, r.naive);
  return {ok, "ours vs naive " + detail};
}

// Same comparison with a step size that lets the optimizer converge; reported only.
std::string converged_differential() {
  const RgbdScene scene = three_rectangle_scene();
  SolverConfig s;
  s.learning_rate = 0.05;
  s.init = PhaseInit::zeros;
  const ChannelResult ours = run_scene(TargetingMode::ours, s, scene);
  const ChannelResult naive = run_scene(TargetingMode::naive, s, scene);
  auto [ok, detail] = differential(ours, naive);
  std::string focus;
  for (const auto& p : ours.report.planes) focus += (focus.empty() ? "" : "/") + format_db(p.focus_psnr_db);
  return std::string(ok ? "margin met" : "margin missed") + ": " + detail + "; loss ratio " +
         sci(ours.report.final_objective / ours.trace.losses.front()) + ", in-focus " + focus + " dB";
}

Outcome dp_identity() {
  const RgbdScene scene = three_rectangle_scene();
  const PlaneTargetSet targets = compose_targets(scene, 0, TargetingParams{});
  SolverConfig c;
  c.algorithm = Algorithm::dp;
  c.optics = OpticalConfig{639e-9, 8e-6, 256, 256};
  const DoublePhaseResult r = dp_encode(targets, c);
  const RealGrid& holo = r.hologram.phase;
  double worst = 0.0;
  for (std::size_t i = 0; i < holo.size(); ++i) {
    const Complex avg = (std::polar(1.0, r.encoding.low[i]) + std::polar(1.0, r.encoding.high[i])) / 2.0;
    worst = std::max(worst, std::abs(avg - r.normalized_field[i]));
  }
  // The displayed hologram carries the low/high pair on neighbouring pixels.
  bool interleaved = true;
  for (std::size_t row = 0; row < holo.rows(); ++row)
    for (std::size_t col = 0; col < holo.cols(); ++col)
      interleaved = interleaved && holo(row, col) == ((row + col) % 2 == 0 ? r.encoding.low(row, col)
                                                                           : r.encoding.high(row, col));
  return {worst <= 1e-12 && interleaved, "max error " + sci(worst) + (interleaved ? "" : ", bad interleave")};
}

Outcome constraint_algebra() {
  std::mt19937_64 rng(31);
  std::uniform_real_distribution<double> u(-20.0, 20.0);
  double worst_mean = 0.0, worst_struct = 0.0;
  for (int trial = 0; trial < 10; ++trial) {
    RealGrid phi(16, 16);
    for (auto& v : phi) v = u(rng);
    const double offset = u(rng) / 10.0;
    const RealGrid psi = phase_constrain(phi, offset);
    double mean = 0.0, mean_phi = 0.0;
    for (std::size_t i = 0; i < psi.size(); ++i) {
      mean += psi[i];
      mean_phi += phi[i];
    }
    mean /= static_cast<double>(psi.size());
    mean_phi /= static_cast<double>(psi.size());
    worst_mean = std::max(worst_mean, std::abs(mean));
    for (std::size_t r = 0; r < 16; ++r)
      for (std::size_t c = 0; c < 16; ++c) {
        const double expected = phi(r, c) - mean_phi + ((r + c) % 2 == 0 ? -offset : offset);
        worst_struct = std::max(worst_struct, std::abs(psi(r, c) - expected));
      }
  }
  return {worst_mean <= 1e-12 && worst_struct <= 1e-12,
          "max |mean| " + sci(worst_mean) + ", max structure error " + sci(worst_struct)};
}

Outcome grating() {
  const std::size_t n = 64;
  const OpticalConfig cfg{639e-9, 8e-6, n, n};
  const double phi0 = 1.234;
  const RealGrid flat(n, n, phi0);
  const ComplexGrid spec = fft2(from_phase(apply_grating(flat), cfg).values());
  const double dc = std::abs(spec(0, 0)) / static_cast<double>(n);

  const Image8 plain = encode_hologram(flat, false);
  const Image8 grated = encode_hologram(flat, true);
  bool shifted = true;
  for (std::size_t r = 0; r < n; ++r)
    for (std::size_t c = 0; c < n; ++c) {
      const int expected = r % 2 ? (plain.at(r, c) + 128) % 256 : plain.at(r, c);
      shifted = shifted && grated.at(r, c) == expected;
    }
  // Displayed 8-bit codes: 128 codes is slightly more than half a cycle under the 255-step law.
  const ComplexGrid shown = fft2(from_phase(decode_hologram(grated, false), cfg).values());
  const double shown_dc = std::abs(shown(0, 0)) / static_cast<double>(n);
  return {dc <= 1e-12 && shifted, "relative DC " + sci(dc) + ", odd rows +128 " + (shifted ? "ok" : "wrong") +
                                      " (8-bit DC " + sci(shown_dc) + ")"};
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = "\"" + cli + "\" " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome determinism(const std::string& cli, const fs::path& scratch) {
  const fs::path a = scratch / "det_a", b = scratch / "det_b";
  fs::remove_all(a);
  fs::remove_all(b);
  const std::string args = "optimize --seed 7 --grating -o ";
  if (run_cli(cli, args + a.string()) != 0 || run_cli(cli, args + b.string()) != 0) {
    return {false, "optimize exited with an error"};
  }
  const std::string ha = slurp(a / "channel_0" / "hologram.png");
  const std::string hb = slurp(b / "channel_0" / "hologram.png");
  const bool same = !ha.empty() && ha == hb;
  return {same, std::to_string(ha.size()) + " bytes, " + (same ? "identical" : "different")};
}

Outcome gs_smoke() {
  const RgbdScene scene = three_rectangle_scene(128, 128);
  TargetingParams tp;
  tp.n_planes = 2;
  const PlaneTargetSet targets = compose_targets(scene, 0, tp);
  SolverConfig c;
  c.algorithm = Algorithm::gs;
  c.regime = Regime::far;
  c.iterations = 100;
  c.optics = OpticalConfig{639e-9, 8e-6, 128, 128};
  const SolverTrace t = run_solver(targets, c);
  return {t.losses.back() < t.losses.front() && t.losses.size() == 100,
          "loss " + sci(t.losses.front()) + " -> " + sci(t.losses.back())};
}

// GS conserves hologram energy, so its output is a scaled copy of the targets at best.
// Loss after the best single brightness scale, before and after the 100 iterations.
std::string gs_scale_fit() {
  const RgbdScene scene = three_rectangle_scene(128, 128);
  TargetingParams tp;
  tp.n_planes = 2;
  const PlaneTargetSet targets = compose_targets(scene, 0, tp);
  SolverConfig c;
  c.algorithm = Algorithm::gs;
  c.regime = Regime::far;
  c.optics = OpticalConfig{639e-9, 8e-6, 128, 128};
  auto fitted = [&](const RealGrid& phase) {
    const FocalStack s = reconstruct_stack(phase, c, targets.plane_offsets);
    double total = 0.0;
    for (std::size_t k = 0; k < s.images.size(); ++k) {
      double num = 0.0, den = 0.0;
      for (std::size_t i = 0; i < s.images[k].size(); ++i) {
        num += s.images[k][i] * targets.targets[k][i];
        den += s.images[k][i] * s.images[k][i];
      }
      RealGrid scaled = s.images[k];
      for (auto& v : scaled) v *= den > 0.0 ? num / den : 0.0;
      total += multiplane_loss(scaled, targets.targets[k], targets.masks[k], c.loss);
    }
    return total;
  };
  c.iterations = 100;
  const double before = fitted(initial_phase(c));
  const double after = fitted(run_solver(targets, c).final.phase);
  return sci(before) + " -> " + sci(after);
}

}  // namespace

int main(int argc, char** argv) {
  if (argc < 2) {
    std::cerr << "usage: " << argv[0] << " <mpcgh cli> [scratch dir]\n";
    return 2;
  }
  const std::string cli = argv[1];
  const fs::path scratch = argc > 2 ? fs::path(argv[2]) : fs::temp_directory_path() / "mpcgh_acceptance";
  fs::create_directories(scratch);

  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"1 propagation round trip", round_trip},
      {"2 adjoint correctness", adjoint},
      {"3 objective gradient check", gradient},
      {"4 SGD-DP convergence at defaults", convergence},
      {"5 defocus realism differential", defocus_differential},
      {"6 double phase identity", dp_identity},
      {"7 phase constraint algebra", constraint_algebra},
      {"8 grating", grating},
      {"9 determinism", [&] { return determinism(cli, scratch); }},
      {"10 GS smoke", gs_smoke},
  };

  int failures = 0;
  for (const auto& [name, fn] : criteria) {
    Outcome o;
    try {
      o = fn();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failures += o.pass ? 0 : 1;
    std::cout << (o.pass ? "[PASS] " : "[FAIL] ") << name << " (" << o.detail << ")" << std::endl;
  }
  try {
    std::cout << "[INFO] differential with lr 0.05, zero init (" << converged_differential() << ")" << std::endl;
  } catch (const std::exception& e) {
    std::cout << "[INFO] converged differential failed: " << e.what() << std::endl;
  }
  try {
    std::cout << "[INFO] GS loss at best brightness scale (" << gs_scale_fit() << ")" << std::endl;
  } catch (const std::exception& e) {
    std::cout << "[INFO] GS scale fit failed: " << e.what() << std::endl;
  }
  std::cout << (failures == 0 ? "all criteria passed" : std::to_string(failures) + " criteria failed") << std::endl;
  return failures == 0 ? 0 : 1;
}
