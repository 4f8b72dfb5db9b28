#pragma once

#include <cmath>
#include <functional>
#include <ostream>
#include <random>
#include <string>
#include <vector>

#include "mpcgh/fft.hpp"
#include "mpcgh/hologram_io.hpp"
#include "mpcgh/loss.hpp"
#include "mpcgh/propagation.hpp"
#include "mpcgh/solvers.hpp"
#include "mpcgh/targeting.hpp"

namespace mpcgh {

inline ComplexGrid random_complex_grid(std::size_t rows, std::size_t cols, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> n(0.0, 1.0);
  ComplexGrid g(rows, cols);
  for (auto& v : g) v = Complex(n(rng), n(rng));
  return g;
}

inline double max_abs(const ComplexGrid& g) {
  double m = 0.0;
  for (const auto& v : g) m = std::max(m, std::abs(v));
  return m;
}

inline double max_abs_diff(const ComplexGrid& a, const ComplexGrid& b) {
  double m = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) m = std::max(m, std::abs(a[i] - b[i]));
  return m;
}

/// Relative L2 error of the analytic (phase, offset) gradient against central differences.
inline double gradient_check_error(const PlaneTargetSet& targets, const SolverConfig& config,
                                   const HologramPhase& at, std::size_t samples, double step,
                                   std::uint64_t seed) {
  const ObjectiveEvaluation e = evaluate_objective(at, targets, config);
  const std::size_t n = at.phase.size();
  std::vector<double> params(at.phase.begin(), at.phase.end());
  params.push_back(at.offset);
  std::vector<double> analytic(e.grad_phase.begin(), e.grad_phase.end());
  analytic.push_back(e.grad_offset);

  std::vector<std::size_t> coords = sample_indices(n, samples, seed);
  if (uses_phase_constraint(config)) coords.push_back(n);  // offset

  auto loss = [&](std::span<const double> p) {
    HologramPhase h{RealGrid(at.phase.rows(), at.phase.cols(),
                             std::vector<double>(p.begin(), p.begin() + static_cast<long>(n))),
                    p[n]};
    return objective_value(h, targets, config);
  };
  const std::vector<double> numeric = finite_difference_oracle(loss, params, step, coords);
  double diff = 0.0, norm = 0.0;
  for (std::size_t i = 0; i < coords.size(); ++i) {
    const double a = analytic[coords[i]];
    diff += (a - numeric[i]) * (a - numeric[i]);
    norm += a * a;
  }
  return std::sqrt(diff / norm);
}

/// Small two-plane problem used by the gradient checks.
inline PlaneTargetSet small_gradient_problem(std::size_t size, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  RealGrid image(size, size), depth(size, size);
  for (auto& v : image) v = u(rng);
  for (std::size_t r = 0; r < size; ++r)
    for (std::size_t c = 0; c < size; ++c) depth(r, c) = c < size / 2 ? 0.2 : 0.8;
  TargetingParams p;
  p.n_planes = 2;
  p.sigma0 = 1.0;
  return compose_targets(image, depth, p);
}

struct SelftestCheck {
  std::string name;
  std::function<bool(std::string&)> run;
};

/// Quick invariant suite; prints one line per check and returns true when all pass.
inline bool run_selftest(std::ostream& os) {
  const OpticalConfig optics{639e-9, 8e-6, 32, 32};
  std::vector<SelftestCheck> checks;

  checks.push_back({"fft round trip and Parseval", [&](std::string& detail) {
    const ComplexGrid f = random_complex_grid(32, 32, 1);
    const ComplexGrid F = fft2(f);
    double e0 = 0, e1 = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      e0 += std::norm(f[i]);
      e1 += std::norm(F[i]);
    }
    const double rt = max_abs_diff(ifft2(F), f) / max_abs(f);
    const double parseval = std::abs(e1 - e0) / e0;
    detail = "round trip " + std::to_string(rt) + ", energy " + std::to_string(parseval);
    return rt <= 1e-12 && parseval <= 1e-12;
  }});

  checks.push_back({"propagation round trip", [&](std::string& detail) {
    const ComplexField f(random_complex_grid(32, 32, 2), optics);
    const PropagationOptions opt{false, false};
    const ComplexField back = propagate(propagate(f, 0.01, opt), -0.01, opt);
    const double err = max_abs_diff(back.values(), f.values()) / max_abs(f.values());
    detail = "relative error " + std::to_string(err);
    return err <= 1e-10;
  }});

  checks.push_back({"propagation adjoint", [&](std::string& detail) {
    const ComplexField a(random_complex_grid(32, 32, 3), optics);
    const ComplexField b(random_complex_grid(32, 32, 4), optics);
    double worst = 0;
    for (double d : {0.0, 1e-3, 0.3}) {
      const Complex lhs = inner_product(propagate(a, d).values(), b.values());
      const Complex rhs = inner_product(a.values(), propagate_adjoint(b, d).values());
      worst = std::max(worst, std::abs(lhs - rhs) / std::max(std::abs(lhs), 1e-300));
    }
    detail = "relative error " + std::to_string(worst);
    return worst <= 1e-10;
  }});

  checks.push_back({"objective gradient (near and far)", [&](std::string& detail) {
    const PlaneTargetSet t = small_gradient_problem(16, 5);
    double worst = 0;
    for (Regime regime : {Regime::near, Regime::far}) {
      SolverConfig c;
      c.optics = OpticalConfig{639e-9, 8e-6, 16, 16};
      c.regime = regime;
      c.seed = 6;
      const HologramPhase h{initial_phase(c), 0.7};
      worst = std::max(worst, gradient_check_error(t, c, h, 64, 1e-5, 7));
    }
    detail = "max relative error " + std::to_string(worst);
    return worst <= 1e-4;
  }});

  checks.push_back({"phase constraint algebra", [&](std::string& detail) {
    std::mt19937_64 rng(8);
    std::uniform_real_distribution<double> u(-10.0, 10.0);
    RealGrid phi(8, 8);
    for (auto& v : phi) v = u(rng);
    const double offset = 0.37;
    const RealGrid out = phase_constrain(phi, offset);
    const RealGrid base = phase_constrain(phi, 0.0);
    double mean = 0;
    for (double v : out) mean += v;
    mean /= static_cast<double>(out.size());
    double worst = 0;
    for (std::size_t r = 0; r < 8; ++r)
      for (std::size_t c = 0; c < 8; ++c)
        worst = std::max(worst, std::abs(out(r, c) - base(r, c) - checkerboard_sign(r, c) * offset));
    detail = "mean " + std::to_string(mean) + ", structure error " + std::to_string(worst);
    return std::abs(mean) <= 1e-12 && worst <= 1e-12;
  }});

  checks.push_back({"double phase identity", [&](std::string& detail) {
    ComplexGrid f = random_complex_grid(16, 16, 9);
    const double peak = max_abs(f);
    for (auto& v : f) v /= peak;
    const DoublePhaseEncoding e = double_phase_encode(f);
    double worst = 0;
    for (std::size_t i = 0; i < f.size(); ++i) {
      const Complex avg = (std::polar(1.0, e.low[i]) + std::polar(1.0, e.high[i])) / 2.0;
      worst = std::max(worst, std::abs(avg - f[i]));
    }
    detail = "max error " + std::to_string(worst);
    return worst <= 1e-12;
  }});

  checks.push_back({"phase quantization bound", [&](std::string& detail) {
    std::mt19937_64 rng(10);
    std::uniform_real_distribution<double> u(0.0, kTwoPi);
    double worst = 0;
    for (int i = 0; i < 10000; ++i) {
      const double p = u(rng);
      double d = std::abs(dequantize_phase(quantize_phase(p)) - p);
      d = std::min(d, kTwoPi - d);
      worst = std::max(worst, d);
    }
    detail = "max error " + std::to_string(worst);
    return worst <= kPi / 255.0 + 1e-12;
  }});

  bool all = true;
  for (auto& c : checks) {
    std::string detail;
    bool ok = false;
    try {
      ok = c.run(detail);
    } catch (const std::exception& e) {
      detail = std::string("exception: ") + e.what();
    }
    all = all && ok;
    os << (ok ? "[PASS] " : "[FAIL] ") << c.name << " (" << detail << ")\n";
  }
  return all;
}

}  // namespace mpcgh
