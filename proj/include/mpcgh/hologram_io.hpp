#pragma once

#include "json.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "mpcgh/field.hpp"
#include "mpcgh/image_io.hpp"
#include "mpcgh/metrics.hpp"
#include "mpcgh/solvers.hpp"
#include "mpcgh/version.hpp"

namespace mpcgh {

using Json = nlohmann::json;

/// Sidecar describing how an exported hologram was made and must be replayed.
struct HologramMetadata {
  double wavelength = 639e-9;
  double pixel_pitch = 8e-6;
  std::size_t height = 0;
  std::size_t width = 0;
  double hop_distance = 0.30;
  std::vector<double> plane_offsets;
  Regime regime = Regime::near;
  Algorithm algorithm = Algorithm::sgd_dp;
  bool grating = false;
  bool band_limit = true;
  bool zero_pad = false;
  bool compare_amplitude = false;
  std::uint64_t seed = 0;
  std::string software_version = kVersion;
};

inline Json to_json(const HologramMetadata& m) {
  return Json{{"wavelength_m", m.wavelength},
              {"pixel_pitch_m", m.pixel_pitch},
              {"height", m.height},
              {"width", m.width},
              {"hop_distance_m", m.hop_distance},
              {"plane_offsets_m", m.plane_offsets},
              {"regime", to_string(m.regime)},
              {"algorithm", to_string(m.algorithm)},
              {"grating", m.grating},
              {"band_limit", m.band_limit},
              {"zero_pad", m.zero_pad},
              {"compare_amplitude", m.compare_amplitude},
              {"seed", m.seed},
              {"depth_convention", "plane 0 is nearest to the viewer"},
              {"phase_encoding", "code = round(wrap(phi) * 255 / 2pi); grating adds 128 mod 256 on odd rows"},
              {"software_version", m.software_version}};
}

inline HologramMetadata metadata_from_json(const Json& j) {
  HologramMetadata m;
  m.wavelength = j.at("wavelength_m").get<double>();
  m.pixel_pitch = j.at("pixel_pitch_m").get<double>();
  m.height = j.at("height").get<std::size_t>();
  m.width = j.at("width").get<std::size_t>();
  m.hop_distance = j.at("hop_distance_m").get<double>();
  m.plane_offsets = j.at("plane_offsets_m").get<std::vector<double>>();
  m.regime = parse_regime(j.at("regime").get<std::string>());
  m.algorithm = parse_algorithm(j.at("algorithm").get<std::string>());
  m.grating = j.at("grating").get<bool>();
  m.band_limit = j.value("band_limit", true);
  m.zero_pad = j.value("zero_pad", false);
  m.compare_amplitude = j.value("compare_amplitude", false);
  m.seed = j.value("seed", std::uint64_t{0});
  m.software_version = j.value("software_version", std::string{});
  return m;
}

/// Solver configuration that replays a hologram described by `m`.
inline SolverConfig replay_config(const HologramMetadata& m) {
  SolverConfig c;
  c.algorithm = m.algorithm;
  c.regime = m.regime;
  c.hop_distance = m.hop_distance;
  c.plane_offsets = m.plane_offsets;
  c.optics = OpticalConfig{m.wavelength, m.pixel_pitch, m.height, m.width};
  c.propagation = PropagationOptions{m.band_limit, m.zero_pad};
  c.loss.compare_amplitude = m.compare_amplitude;
  c.seed = m.seed;
  return c;
}

/// 8-bit code of a phase: round-half-up of wrap(phi) * 255 / 2pi.
inline std::uint8_t quantize_phase(double phi) {
  const double code = std::floor(wrap_phase(phi) * 255.0 / kTwoPi + 0.5);
  return static_cast<std::uint8_t>(std::min(code, 255.0));
}

inline double dequantize_phase(std::uint8_t code) { return static_cast<double>(code) * kTwoPi / 255.0; }

/// Quantized hologram codes; the grating shifts odd rows by 128 codes (half a cycle).
inline Image8 encode_hologram(const RealGrid& phi, bool grating) {
  Image8 img{phi.rows(), phi.cols(), 1, std::vector<std::uint8_t>(phi.size())};
  for (std::size_t r = 0; r < phi.rows(); ++r)
    for (std::size_t c = 0; c < phi.cols(); ++c) {
      std::uint8_t code = quantize_phase(phi(r, c));
      if (grating && r % 2 == 1) code = static_cast<std::uint8_t>(code + 128);
      img.at(r, c) = code;
    }
  return img;
}

inline RealGrid decode_hologram(const Image8& img, bool grating) {
  if (img.channels != 1) throw IoError("hologram PNG must be single-channel");
  RealGrid phi(img.rows, img.cols);
  for (std::size_t r = 0; r < img.rows; ++r)
    for (std::size_t c = 0; c < img.cols; ++c) {
      std::uint8_t code = img.at(r, c);
      if (grating && r % 2 == 1) code = static_cast<std::uint8_t>(code - 128);
      phi(r, c) = dequantize_phase(code);
    }
  return phi;
}

inline std::filesystem::path sidecar_path(const std::filesystem::path& png) {
  auto p = png;
  p.replace_extension(".json");
  return p;
}

inline void write_json(const std::filesystem::path& path, const Json& j) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << j.dump(2) << '\n';
  if (!out) throw IoError("failed writing '" + path.string() + "'");
}

inline Json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot read '" + path.string() + "'");
  try {
    return Json::parse(in);
  } catch (const Json::parse_error& e) {
    throw IoError("invalid JSON in '" + path.string() + "': " + e.what());
  }
}

/// Writes the 8-bit hologram PNG and its JSON sidecar.
inline void save_hologram(const RealGrid& phi, const std::filesystem::path& path,
                          const HologramMetadata& meta) {
  write_png(path, encode_hologram(phi, meta.grating));
  write_json(sidecar_path(path), to_json(meta));
}

struct LoadedHologram {
  RealGrid phase;  // grating removed, in [0, 2pi)
  HologramMetadata meta;
};

inline LoadedHologram load_hologram(const std::filesystem::path& path) {
  LoadedHologram h;
  h.meta = metadata_from_json(read_json(sidecar_path(path)));
  const Image8 img = read_png(path);
  if (img.rows != h.meta.height || img.cols != h.meta.width) {
    throw IoError("hologram '" + path.string() + "' is " + shape_string(img.rows, img.cols) +
                  " but sidecar says " + shape_string(h.meta.height, h.meta.width));
  }
  h.phase = decode_hologram(img, h.meta.grating);
  return h;
}

inline Json db_to_json(double db) {
  if (std::isinf(db)) return db > 0 ? "inf" : "-inf";
  return db;
}

inline double db_from_json(const Json& j) {
  if (j.is_string()) {
    return j.get<std::string>() == "-inf" ? -std::numeric_limits<double>::infinity()
                                          : std::numeric_limits<double>::infinity();
  }
  return j.get<double>();
}

inline Json to_json(const ReconstructionReport& rep) {
  Json planes = Json::array();
  for (const auto& p : rep.planes) {
    Json jp{{"offset_m", p.offset},
            {"loss_full", p.loss.full},
            {"loss_focus", p.loss.focus},
            {"loss_total", p.loss.total},
            {"psnr_db", db_to_json(p.psnr_db)},
            {"focus_psnr_db", db_to_json(p.focus_psnr_db)},
            {"ssim", p.ssim}};
    jp["out_of_focus_psnr_db"] = p.out_of_focus_psnr_db ? db_to_json(*p.out_of_focus_psnr_db) : Json();
    jp["defocus_psnr_db"] = p.defocus_psnr_db ? db_to_json(*p.defocus_psnr_db) : Json();
    planes.push_back(std::move(jp));
  }
  return Json{{"planes", planes},
              {"final_objective", rep.final_objective},
              {"iterations", rep.iterations},
              {"peak", rep.peak},
              {"wall_time_s", rep.wall_time_s}};
}

inline ReconstructionReport report_from_json(const Json& j) {
  ReconstructionReport rep;
  rep.final_objective = j.at("final_objective").get<double>();
  rep.iterations = j.at("iterations").get<int>();
  rep.peak = j.at("peak").get<double>();
  rep.wall_time_s = j.at("wall_time_s").get<double>();
  for (const auto& jp : j.at("planes")) {
    PlaneReport p;
    p.offset = jp.at("offset_m").get<double>();
    p.loss.full = jp.at("loss_full").get<double>();
    p.loss.focus = jp.at("loss_focus").get<double>();
    p.loss.total = jp.at("loss_total").get<double>();
    p.psnr_db = db_from_json(jp.at("psnr_db"));
    p.focus_psnr_db = db_from_json(jp.at("focus_psnr_db"));
    p.ssim = jp.at("ssim").get<double>();
    if (!jp.at("out_of_focus_psnr_db").is_null()) p.out_of_focus_psnr_db = db_from_json(jp["out_of_focus_psnr_db"]);
    if (!jp.at("defocus_psnr_db").is_null()) p.defocus_psnr_db = db_from_json(jp["defocus_psnr_db"]);
    rep.planes.push_back(p);
  }
  return rep;
}

/// Per-plane PNGs (scaled to the stack maximum), report.json and loss.csv.
inline void save_stack_and_report(const FocalStack& stack, const ReconstructionReport& report,
                                  const std::filesystem::path& dir, const Json& config_echo = {},
                                  const SolverTrace* trace = nullptr) {
  std::filesystem::create_directories(dir);
  const double peak = stack.peak();
  for (std::size_t k = 0; k < stack.images.size(); ++k) {
    write_png(dir / ("plane_" + std::to_string(k) + ".png"), to_gray8(stack.images[k], peak));
  }
  Json j = to_json(report);
  j["config"] = config_echo;
  write_json(dir / "report.json", j);
  if (trace) {
    std::ofstream csv(dir / "loss.csv");
    if (!csv) throw IoError("cannot write '" + (dir / "loss.csv").string() + "'");
    csv << "iteration,loss,focus_term\n";
    csv.precision(17);
    for (std::size_t i = 0; i < trace->losses.size(); ++i) {
      csv << i << ',' << trace->losses[i] << ',' << trace->focus_terms[i] << '\n';
    }
  }
}

}  // namespace mpcgh
