#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include "mpcgh/hologram_io.hpp"
#include "mpcgh/solvers.hpp"
#include "mpcgh/targeting.hpp"

namespace mpcgh {

/// Everything one `optimize` run needs; loaded from JSON, overridable from the CLI.
struct RunConfig {
  // Scene rasters; the built-in three-rectangle scene is used when unset.
  std::optional<std::filesystem::path> image;
  std::optional<std::filesystem::path> depth;
  std::size_t synthetic_height = 256;
  std::size_t synthetic_width = 256;

  // One optimization per entry; a gray image is broadcast to every wavelength.
  std::vector<double> wavelengths{639e-9};
  double pixel_pitch = 8e-6;

  TargetingParams targeting;
  SolverConfig solver;

  std::filesystem::path output_dir = "out";
  bool grating = false;
  std::uint64_t seed = 1;

  void validate() const {
    if (image.has_value() != depth.has_value()) {
      throw ConfigError("scene needs both an image and a depth path");
    }
    if (image && !std::filesystem::exists(*image)) throw ConfigError("image '" + image->string() + "' does not exist");
    if (depth && !std::filesystem::exists(*depth)) throw ConfigError("depth '" + depth->string() + "' does not exist");
    if (wavelengths.empty()) throw ConfigError("at least one wavelength is required");
    for (double w : wavelengths)
      if (!(w > 0.0)) throw ConfigError("wavelengths must be positive");
    if (!(pixel_pitch > 0.0)) throw ConfigError("pixel pitch must be positive");
    validate_targeting(targeting);
    SolverConfig probe = solver;
    probe.optics = OpticalConfig{wavelengths.front(), pixel_pitch, 2, 2};
    probe.validate();
  }
};

namespace detail {

template <class T>
void read_if(const Json& j, const char* key, T& out) {
  if (j.contains(key) && !j.at(key).is_null()) out = j.at(key).get<T>();
}

}  // namespace detail

inline RunConfig run_config_from_json(const Json& j, const std::filesystem::path& base_dir = {}) {
  using detail::read_if;
  RunConfig c;
  auto resolve = [&](const std::string& p) {
    std::filesystem::path path(p);
    return path.is_relative() && !base_dir.empty() ? base_dir / path : path;
  };
  try {
    if (j.contains("scene")) {
      const Json& s = j.at("scene");
      if (s.contains("image")) c.image = resolve(s.at("image").get<std::string>());
      if (s.contains("depth")) c.depth = resolve(s.at("depth").get<std::string>());
      read_if(s, "synthetic_height", c.synthetic_height);
      read_if(s, "synthetic_width", c.synthetic_width);
    }
    if (j.contains("optics")) {
      const Json& o = j.at("optics");
      read_if(o, "wavelengths_m", c.wavelengths);
      read_if(o, "pixel_pitch_m", c.pixel_pitch);
      read_if(o, "band_limit", c.solver.propagation.band_limit);
      read_if(o, "zero_pad", c.solver.propagation.zero_pad);
    }
    if (j.contains("targeting")) {
      const Json& t = j.at("targeting");
      read_if(t, "n_planes", c.targeting.n_planes);
      read_if(t, "w0", c.targeting.w0);
      read_if(t, "w1", c.targeting.w1);
      read_if(t, "w2", c.targeting.w2);
      read_if(t, "sigma0_px", c.targeting.sigma0);
      read_if(t, "plane_spacing_m", c.targeting.plane_spacing);
      if (t.contains("mode")) c.targeting.mode = parse_targeting_mode(t.at("mode").get<std::string>());
    }
    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      if (s.contains("algorithm")) c.solver.algorithm = parse_algorithm(s.at("algorithm").get<std::string>());
      if (s.contains("regime")) c.solver.regime = parse_regime(s.at("regime").get<std::string>());
      if (s.contains("init")) c.solver.init = parse_phase_init(s.at("init").get<std::string>());
      read_if(s, "iterations", c.solver.iterations);
      read_if(s, "learning_rate", c.solver.learning_rate);
      read_if(s, "hop_distance_m", c.solver.hop_distance);
      read_if(s, "plane_offsets_m", c.solver.plane_offsets);
      read_if(s, "m0", c.solver.loss.m0);
      read_if(s, "m1", c.solver.loss.m1);
      read_if(s, "compare_amplitude", c.solver.loss.compare_amplitude);
      read_if(s, "initial_offset", c.solver.initial_offset);
      read_if(s, "step_per_plane", c.solver.step_per_plane);
    }
    if (j.contains("output")) {
      const Json& o = j.at("output");
      if (o.contains("dir")) c.output_dir = resolve(o.at("dir").get<std::string>());
      read_if(o, "grating", c.grating);
    }
    read_if(j, "seed", c.seed);
  } catch (const Json::exception& e) {
    throw ConfigError(std::string("invalid run config: ") + e.what());
  }
  c.solver.seed = c.seed;
  return c;
}

inline RunConfig load_run_config(const std::filesystem::path& path) {
  return run_config_from_json(read_json(path), path.parent_path());
}

inline Json to_json(const RunConfig& c) {
  Json scene = {{"synthetic_height", c.synthetic_height}, {"synthetic_width", c.synthetic_width}};
  if (c.image) scene["image"] = c.image->string();
  if (c.depth) scene["depth"] = c.depth->string();
  return Json{
      {"scene", scene},
      {"optics",
       {{"wavelengths_m", c.wavelengths},
        {"pixel_pitch_m", c.pixel_pitch},
        {"band_limit", c.solver.propagation.band_limit},
        {"zero_pad", c.solver.propagation.zero_pad}}},
      {"targeting",
       {{"n_planes", c.targeting.n_planes},
        {"w0", c.targeting.w0},
        {"w1", c.targeting.w1},
        {"w2", c.targeting.w2},
        {"sigma0_px", c.targeting.sigma0},
        {"plane_spacing_m", c.targeting.plane_spacing},
        {"mode", to_string(c.targeting.mode)}}},
      {"solver",
       {{"algorithm", to_string(c.solver.algorithm)},
        {"regime", to_string(c.solver.regime)},
        {"init", to_string(c.solver.init)},
        {"iterations", c.solver.iterations},
        {"learning_rate", c.solver.learning_rate},
        {"hop_distance_m", c.solver.hop_distance},
        {"plane_offsets_m", c.solver.plane_offsets},
        {"m0", c.solver.loss.m0},
        {"m1", c.solver.loss.m1},
        {"compare_amplitude", c.solver.loss.compare_amplitude},
        {"initial_offset", c.solver.initial_offset},
        {"step_per_plane", c.solver.step_per_plane}}},
      {"output", {{"dir", c.output_dir.string()}, {"grating", c.grating}}},
      {"seed", c.seed}};
}

}  // namespace mpcgh
