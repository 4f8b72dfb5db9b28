#pragma once

#include <chrono>
#include <cmath>
#include <cstdint>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

#include "mpcgh/adam.hpp"
#include "mpcgh/field.hpp"
#include "mpcgh/loss.hpp"
#include "mpcgh/propagation.hpp"
#include "mpcgh/targeting.hpp"

namespace mpcgh {

enum class Algorithm { sgd_dp, gs, dp };
// near: hop out and back to planes around the hologram; far: single forward hop.
enum class Regime { near, far };
enum class PhaseInit { random, zeros, provided };

inline std::string to_string(Algorithm a) {
  switch (a) {
    case Algorithm::sgd_dp: return "sgd_dp";
    case Algorithm::gs: return "gs";
    case Algorithm::dp: return "dp";
  }
  return "?";
}
inline std::string to_string(Regime r) { return r == Regime::near ? "near" : "far"; }
inline std::string to_string(PhaseInit p) {
  switch (p) {
    case PhaseInit::random: return "random";
    case PhaseInit::zeros: return "zeros";
    case PhaseInit::provided: return "provided";
  }
  return "?";
}

inline Algorithm parse_algorithm(const std::string& s) {
  if (s == "sgd_dp") return Algorithm::sgd_dp;
  if (s == "gs") return Algorithm::gs;
  if (s == "dp") return Algorithm::dp;
  throw ConfigError("unknown algorithm '" + s + "' (expected sgd_dp|gs|dp)");
}
inline Regime parse_regime(const std::string& s) {
  if (s == "near") return Regime::near;
  if (s == "far") return Regime::far;
  throw ConfigError("unknown regime '" + s + "' (expected near|far)");
}
inline PhaseInit parse_phase_init(const std::string& s) {
  if (s == "random") return PhaseInit::random;
  if (s == "zeros") return PhaseInit::zeros;
  if (s == "provided") return PhaseInit::provided;
  throw ConfigError("unknown phase init '" + s + "' (expected random|zeros|provided)");
}

/// Optimization variable: unwrapped phase plus the checkerboard offset.
struct HologramPhase {
  RealGrid phase;
  double offset = 0.0;
};

class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(int iteration, double loss)
      : std::runtime_error("solver diverged at iteration " + std::to_string(iteration) +
                           " (loss = " + std::to_string(loss) + ")"),
        iteration_(iteration) {}
  int iteration() const noexcept { return iteration_; }

 private:
  int iteration_;
};

struct SolverConfig {
  Algorithm algorithm = Algorithm::sgd_dp;
  int iterations = 200;
  double learning_rate = 1e-3;
  double hop_distance = 0.30;  // m
  // Overrides the target set's offsets when non-empty.
  std::vector<double> plane_offsets;
  Regime regime = Regime::near;
  LossWeights loss;
  PhaseInit init = PhaseInit::random;
  RealGrid initial_phase;  // used with PhaseInit::provided
  double initial_offset = kPi / 2.0;
  std::uint64_t seed = 1;
  // One optimizer step per plane instead of one per iteration.
  bool step_per_plane = false;
  PropagationOptions propagation;
  OpticalConfig optics;
  AdamParams adam;

  void validate() const {
    optics.validate();
    loss.validate();
    if (iterations < 1) throw ConfigError("iterations must be >= 1");
    if (!(learning_rate > 0.0)) throw ConfigError("learning rate must be > 0");
    if (!(hop_distance > 0.0)) throw ConfigError("hop distance must be > 0");
    if (!std::isfinite(initial_offset)) throw ConfigError("initial offset must be finite");
  }
};

struct SolverTrace {
  std::vector<double> losses;       // total objective at the start of each iteration
  std::vector<double> focus_terms;  // sum over planes of the unweighted in-focus MSE
  HologramPhase final;
  double wall_time_s = 0.0;
};

/// -1 on (x + y) even pixels, +1 on odd: the sign of `offset` in the constraint.
inline double checkerboard_sign(std::size_t r, std::size_t c) { return ((r + c) % 2 == 0) ? -1.0 : 1.0; }

/// Mean-removed phase split into a low/high checkerboard by +-offset.
inline RealGrid phase_constrain(const RealGrid& phi, double offset) {
  if (phi.rows() % 2 != 0 || phi.cols() % 2 != 0) {
    throw ConfigError("phase_constrain requires even grid dimensions, got " +
                      shape_string(phi.rows(), phi.cols()));
  }
  double mean = 0.0;
  for (double v : phi) mean += v;
  mean /= static_cast<double>(phi.size());
  RealGrid out(phi.rows(), phi.cols());
  for (std::size_t r = 0; r < phi.rows(); ++r)
    for (std::size_t c = 0; c < phi.cols(); ++c)
      out(r, c) = (phi(r, c) - mean) + checkerboard_sign(r, c) * offset;
  return out;
}

/// Adjoint of phase_constrain: maps dL/dpsi to (dL/dphi, dL/doffset).
inline std::pair<RealGrid, double> phase_constrain_adjoint(const RealGrid& grad_psi) {
  double mean = 0.0;
  for (double v : grad_psi) mean += v;
  mean /= static_cast<double>(grad_psi.size());
  RealGrid g(grad_psi.rows(), grad_psi.cols());
  double g_offset = 0.0;
  for (std::size_t r = 0; r < g.rows(); ++r) {
    for (std::size_t c = 0; c < g.cols(); ++c) {
      g(r, c) = grad_psi(r, c) - mean;
      g_offset += checkerboard_sign(r, c) * grad_psi(r, c);
    }
  }
  return {std::move(g), g_offset};
}

/// Adds pi to every odd row, steering the signal away from undiffracted light.
inline RealGrid apply_grating(const RealGrid& phi) {
  RealGrid out = phi;
  for (std::size_t r = 1; r < out.rows(); r += 2)
    for (std::size_t c = 0; c < out.cols(); ++c) out(r, c) += kPi;
  return out;
}

inline bool uses_phase_constraint(const SolverConfig& config) {
  return config.algorithm == Algorithm::sgd_dp && config.regime == Regime::near;
}

/// Phase shown on the modulator for a solver result.
inline RealGrid display_phase(const HologramPhase& h, const SolverConfig& config) {
  return uses_phase_constraint(config) ? phase_constrain(h.phase, h.offset) : h.phase;
}

inline std::vector<double> resolve_plane_offsets(const PlaneTargetSet& targets,
                                                 const SolverConfig& config) {
  const auto& offsets = config.plane_offsets.empty() ? targets.plane_offsets : config.plane_offsets;
  if (offsets.size() != targets.n_planes()) {
    throw ConfigError("expected " + std::to_string(targets.n_planes()) + " plane offsets, got " +
                      std::to_string(offsets.size()));
  }
  return offsets;
}

inline void check_targets(const PlaneTargetSet& targets, const SolverConfig& config) {
  if (targets.n_planes() == 0) throw ConfigError("target set is empty");
  if (targets.masks.size() != targets.n_planes()) throw ConfigError("target/mask count mismatch");
  for (std::size_t k = 0; k < targets.n_planes(); ++k) {
    if (targets.targets[k].rows() != config.optics.height ||
        targets.targets[k].cols() != config.optics.width) {
      throw ConfigError("target shape " +
                        shape_string(targets.targets[k].rows(), targets.targets[k].cols()) +
                        " does not match optics " +
                        shape_string(config.optics.height, config.optics.width));
    }
    require_same_shape(targets.targets[k], targets.masks[k], "target vs mask");
  }
}

/// Field at the plane with axial offset `offset` for the configured regime.
inline ComplexField simulate_plane(const ComplexField& hologram, double offset,
                                   const SolverConfig& config) {
  return config.regime == Regime::near
             ? forward_model_near(hologram, config.hop_distance, offset, config.propagation)
             : forward_model_far(hologram, config.hop_distance + offset, config.propagation);
}

/// Adjoint of simulate_plane.
inline ComplexField simulate_plane_adjoint(const ComplexField& cotangent, double offset,
                                           const SolverConfig& config) {
  return config.regime == Regime::near
             ? forward_model_near_adjoint(cotangent, config.hop_distance, offset, config.propagation)
             : forward_model_far_adjoint(cotangent, config.hop_distance + offset, config.propagation);
}

struct ObjectiveEvaluation {
  double total = 0.0;
  std::vector<LossTerms> planes;
  RealGrid grad_phase;
  double grad_offset = 0.0;
};

/// Objective summed over `planes` (all planes when empty) and its exact gradient.
inline ObjectiveEvaluation evaluate_objective(const HologramPhase& h, const PlaneTargetSet& targets,
                                              const SolverConfig& config,
                                              const std::vector<std::size_t>& planes = {}) {
  const auto offsets = resolve_plane_offsets(targets, config);
  const bool constrained = uses_phase_constraint(config);
  const RealGrid psi = constrained ? phase_constrain(h.phase, h.offset) : h.phase;
  const ComplexField hologram = from_phase(psi, config.optics);

  std::vector<std::size_t> active = planes;
  if (active.empty())
    for (std::size_t k = 0; k < targets.n_planes(); ++k) active.push_back(k);

  ObjectiveEvaluation out;
  const double r = config.hop_distance;
  const auto& prop = config.propagation;
  const bool near = config.regime == Regime::near;
  // Near regime shares the outgoing hop across planes.
  const ComplexField hop = near ? propagate(hologram, r, prop) : hologram;
  ComplexGrid back(hologram.rows(), hologram.cols());
  for (std::size_t k : active) {
    const double d = near ? -r + offsets[k] : r + offsets[k];
    const ComplexField u = propagate(hop, d, prop);
    const RealGrid image = loss_image(u.values(), config.loss);
    const LossTerms terms = loss_terms(image, targets.targets[k], targets.masks[k], config.loss);
    out.planes.push_back(terms);
    out.total += terms.total;
    const ComplexField cot(loss_gradient_wrt_field(u.values(), targets.targets[k], targets.masks[k],
                                                   config.loss),
                           config.optics);
    const ComplexField b = propagate_adjoint(cot, d, prop);
    for (std::size_t i = 0; i < back.size(); ++i) back[i] += b.values()[i];
  }
  ComplexField grad_field(std::move(back), config.optics);
  if (near) grad_field = propagate_adjoint(grad_field, r, prop);

  // O = exp(i psi): dL/dpsi = 2 Im(G * conj(O)).
  RealGrid grad_psi(psi.rows(), psi.cols());
  for (std::size_t i = 0; i < psi.size(); ++i) {
    grad_psi[i] = 2.0 * (grad_field.values()[i] * std::conj(hologram.values()[i])).imag();
  }
  if (constrained) {
    auto [g, go] = phase_constrain_adjoint(grad_psi);
    out.grad_phase = std::move(g);
    out.grad_offset = go;
  } else {
    out.grad_phase = std::move(grad_psi);
    out.grad_offset = 0.0;
  }
  return out;
}

/// Objective value only; used by finite-difference checks.
inline double objective_value(const HologramPhase& h, const PlaneTargetSet& targets,
                              const SolverConfig& config) {
  const auto offsets = resolve_plane_offsets(targets, config);
  const RealGrid psi = uses_phase_constraint(config) ? phase_constrain(h.phase, h.offset) : h.phase;
  const ComplexField hologram = from_phase(psi, config.optics);
  double total = 0.0;
  for (std::size_t k = 0; k < targets.n_planes(); ++k) {
    const ComplexField u = simulate_plane(hologram, offsets[k], config);
    total += multiplane_loss(loss_image(u.values(), config.loss), targets.targets[k],
                             targets.masks[k], config.loss);
  }
  return total;
}

inline RealGrid initial_phase(const SolverConfig& config) {
  const std::size_t rows = config.optics.height, cols = config.optics.width;
  switch (config.init) {
    case PhaseInit::zeros:
      return RealGrid(rows, cols, 0.0);
    case PhaseInit::provided:
      if (config.initial_phase.rows() != rows || config.initial_phase.cols() != cols) {
        throw ConfigError("provided initial phase has shape " +
                          shape_string(config.initial_phase.rows(), config.initial_phase.cols()));
      }
      return config.initial_phase;
    case PhaseInit::random: {
      RealGrid phi(rows, cols);
      std::mt19937_64 rng(config.seed);
      std::uniform_real_distribution<double> dist(-kPi, kPi);
      for (auto& v : phi) v = dist(rng);
      return phi;
    }
  }
  return RealGrid(rows, cols, 0.0);
}

/// Gradient descent on (phase, offset) with Adam through the regime's forward model.
inline SolverTrace solve_sgd_dp(const PlaneTargetSet& targets, const SolverConfig& config) {
  config.validate();
  check_targets(targets, config);
  const auto start = std::chrono::steady_clock::now();

  HologramPhase h{initial_phase(config), config.initial_offset};
  const std::size_t n = h.phase.size();
  std::vector<double> params(n + 1);
  std::vector<double> grads(n + 1);
  AdamState state(n + 1);
  AdamParams hp = config.adam;
  hp.learning_rate = config.learning_rate;

  auto load = [&] {
    for (std::size_t i = 0; i < n; ++i) params[i] = h.phase[i];
    params[n] = h.offset;
  };
  auto store = [&] {
    for (std::size_t i = 0; i < n; ++i) h.phase[i] = params[i];
    h.offset = params[n];
  };
  auto step = [&](const ObjectiveEvaluation& e) {
    for (std::size_t i = 0; i < n; ++i) grads[i] = e.grad_phase[i];
    grads[n] = e.grad_offset;
    load();
    adam_step(params, grads, state, hp);
    store();
  };

  SolverTrace trace;
  trace.losses.reserve(static_cast<std::size_t>(config.iterations));
  for (int it = 0; it < config.iterations; ++it) {
    double total = 0.0, focus = 0.0;
    if (!config.step_per_plane) {
      const ObjectiveEvaluation e = evaluate_objective(h, targets, config);
      total = e.total;
      for (const auto& t : e.planes) focus += t.focus;
      if (!std::isfinite(total)) throw DivergenceError(it, total);
      step(e);
    } else {
      for (std::size_t k = 0; k < targets.n_planes(); ++k) {
        const ObjectiveEvaluation e = evaluate_objective(h, targets, config, {k});
        if (!std::isfinite(e.total)) throw DivergenceError(it, e.total);
        total += e.total;
        focus += e.planes.front().focus;
        step(e);
      }
    }
    trace.losses.push_back(total);
    trace.focus_terms.push_back(focus);
  }
  trace.final = std::move(h);
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

/// Replaces the magnitude of `field` by `target_amplitude`, keeping its phase.
inline Complex project_amplitude(Complex field, double target_amplitude) {
  if (field == Complex{}) return {target_amplitude, 0.0};
  return std::polar(target_amplitude, std::arg(field));
}

/// Multiplane Gerchberg-Saxton with averaged back-propagated fields.
inline SolverTrace solve_gs(const PlaneTargetSet& targets, const SolverConfig& config) {
  config.validate();
  check_targets(targets, config);
  if (config.regime != Regime::far) {
    throw ConfigError("Gerchberg-Saxton runs in the far regime only");
  }
  const auto start = std::chrono::steady_clock::now();
  const auto offsets = resolve_plane_offsets(targets, config);
  const auto& prop = config.propagation;
  const double inv_planes = 1.0 / static_cast<double>(targets.n_planes());

  RealGrid phi = initial_phase(config);
  SolverTrace trace;
  for (int it = 0; it < config.iterations; ++it) {
    const ComplexField hologram = from_phase(phi, config.optics);
    ComplexGrid merged(phi.rows(), phi.cols());
    double total = 0.0, focus = 0.0;
    for (std::size_t k = 0; k < targets.n_planes(); ++k) {
      const double d = config.hop_distance + offsets[k];
      ComplexField u = propagate(hologram, d, prop);
      const LossTerms terms = loss_terms(loss_image(u.values(), config.loss), targets.targets[k],
                                         targets.masks[k], config.loss);
      total += terms.total;
      focus += terms.focus;
      for (std::size_t i = 0; i < u.values().size(); ++i) {
        const double p = targets.targets[k][i];
        const double amp = config.loss.compare_amplitude ? p : std::sqrt(std::max(p, 0.0));
        u.values()[i] = project_amplitude(u.values()[i], amp);
      }
      const ComplexField b = propagate(u, -d, prop);
      for (std::size_t i = 0; i < merged.size(); ++i) merged[i] += b.values()[i] * inv_planes;
    }
    if (!std::isfinite(total)) throw DivergenceError(it, total);
    trace.losses.push_back(total);
    trace.focus_terms.push_back(focus);
    phi = phase(merged);
  }
  trace.final = HologramPhase{std::move(phi), 0.0};
  trace.wall_time_s =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return trace;
}

struct DoublePhaseEncoding {
  RealGrid low;          // theta - arccos(a)
  RealGrid high;         // theta + arccos(a)
  RealGrid interleaved;  // low on (x + y) even, high on odd
};

/// Splits a field with |value| <= 1 into two unit phasors whose mean is the field.
inline DoublePhaseEncoding double_phase_encode(const ComplexGrid& normalized) {
  if (normalized.rows() % 2 != 0 || normalized.cols() % 2 != 0) {
    throw ConfigError("double phase encoding requires even grid dimensions");
  }
  DoublePhaseEncoding enc{RealGrid(normalized.rows(), normalized.cols()),
                          RealGrid(normalized.rows(), normalized.cols()),
                          RealGrid(normalized.rows(), normalized.cols())};
  for (std::size_t r = 0; r < normalized.rows(); ++r) {
    for (std::size_t c = 0; c < normalized.cols(); ++c) {
      const Complex v = normalized(r, c);
      const double a = std::min(std::abs(v), 1.0);
      const double theta = v == Complex{} ? 0.0 : std::arg(v);
      const double split = std::acos(a);
      enc.low(r, c) = theta - split;
      enc.high(r, c) = theta + split;
      enc.interleaved(r, c) = checkerboard_sign(r, c) < 0.0 ? enc.low(r, c) : enc.high(r, c);
    }
  }
  return enc;
}

struct DoublePhaseResult {
  HologramPhase hologram;  // offset is always 0
  ComplexGrid normalized_field;
  DoublePhaseEncoding encoding;
};

/// Random-phase plane fields pulled back to the hologram and double-phase encoded.
inline DoublePhaseResult dp_encode(const PlaneTargetSet& targets, const SolverConfig& config) {
  config.validate();
  check_targets(targets, config);
  const auto offsets = resolve_plane_offsets(targets, config);
  std::mt19937_64 rng(config.seed ^ 0x9e3779b97f4a7c15ULL);
  std::uniform_real_distribution<double> dist(-kPi, kPi);

  ComplexGrid sum(config.optics.height, config.optics.width);
  for (std::size_t k = 0; k < targets.n_planes(); ++k) {
    ComplexGrid field(sum.rows(), sum.cols());
    for (std::size_t i = 0; i < field.size(); ++i) {
      const double p = targets.targets[k][i];
      const double amp = config.loss.compare_amplitude ? p : std::sqrt(std::max(p, 0.0));
      field[i] = std::polar(amp, dist(rng));
    }
    const ComplexField back =
        simulate_plane_adjoint(ComplexField(std::move(field), config.optics), offsets[k], config);
    for (std::size_t i = 0; i < sum.size(); ++i) sum[i] += back.values()[i];
  }
  double peak = 0.0;
  for (const auto& v : sum) peak = std::max(peak, std::abs(v));
  if (peak > 0.0)
    for (auto& v : sum) v /= peak;

  DoublePhaseResult result;
  result.encoding = double_phase_encode(sum);
  result.hologram = HologramPhase{result.encoding.interleaved, 0.0};
  result.normalized_field = std::move(sum);
  return result;
}

/// Runs the configured algorithm. Double phase reports a single loss entry.
inline SolverTrace run_solver(const PlaneTargetSet& targets, const SolverConfig& config) {
  switch (config.algorithm) {
    case Algorithm::sgd_dp:
      return solve_sgd_dp(targets, config);
    case Algorithm::gs:
      return solve_gs(targets, config);
    case Algorithm::dp: {
      const auto start = std::chrono::steady_clock::now();
      DoublePhaseResult dp = dp_encode(targets, config);
      SolverTrace trace;
      const auto offsets = resolve_plane_offsets(targets, config);
      const ComplexField hologram = from_phase(dp.hologram.phase, config.optics);
      double total = 0.0, focus = 0.0;
      for (std::size_t k = 0; k < targets.n_planes(); ++k) {
        const ComplexField u = simulate_plane(hologram, offsets[k], config);
        const LossTerms t = loss_terms(loss_image(u.values(), config.loss), targets.targets[k],
                                       targets.masks[k], config.loss);
        total += t.total;
        focus += t.focus;
      }
      trace.losses.push_back(total);
      trace.focus_terms.push_back(focus);
      trace.final = std::move(dp.hologram);
      trace.wall_time_s =
          std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
      return trace;
    }
  }
  throw ConfigError("unknown algorithm");
}

}  // namespace mpcgh
