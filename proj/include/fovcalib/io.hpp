#pragma once

#include <nlohmann/json.hpp>

#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

#include "fovcalib/error.hpp"
#include "fovcalib/geometry.hpp"
#include "fovcalib/model.hpp"
#include "fovcalib/refine.hpp"
#include "fovcalib/synth.hpp"
#include "fovcalib/zeroshot.hpp"

// JSON schemas of every file the toolkit reads or writes. Each top-level
// object carries "format_version": 1. Angles are in degrees.

namespace fovcalib::io {

using nlohmann::json;

inline constexpr int kFormatVersion = 1;

namespace detail {

inline void check_version(const json& j, std::string_view what) {
  if (!j.is_object()) throw FormatError(std::string(what) + ": expected a JSON object");
  if (j.contains("format_version")) {
    if (!j["format_version"].is_number_integer() || j["format_version"].get<int>() != kFormatVersion) {
      throw FormatError(std::string(what) + ": unsupported format_version");
    }
  }
}

template <typename T>
T get(const json& j, const char* key, std::string_view what) {
  if (!j.contains(key)) throw FormatError(std::string(what) + ": missing field '" + key + "'");
  try {
    return j.at(key).get<T>();
  } catch (const json::exception&) {
    throw FormatError(std::string(what) + ": field '" + key + "' has the wrong type");
  }
}

inline RadialModel get_model(const json& j, std::string_view what) {
  if (!j.contains("model")) return kDefaultModel;
  const auto name = get<std::string>(j, "model", what);
  const auto m = parse_radial_model(name);
  if (!m) throw FormatError(std::string(what) + ": unknown model '" + name + "'");
  return *m;
}

inline json point2(const Eigen::Vector2d& p) { return json::array({p.x(), p.y()}); }

}  // namespace detail

// --- CameraSpec -------------------------------------------------------------

inline json to_json(const CameraSpec& s) {
  json j{{"format_version", kFormatVersion},
         {"name", s.name},
         {"width", s.width},
         {"height", s.height},
         {"fov_h_deg", s.fov_h_deg}};
  if (s.fov_v_deg) j["fov_v_deg"] = *s.fov_v_deg;
  j["model"] = std::string(to_string(s.model));
  return j;
}

inline CameraSpec camera_spec_from_json(const json& j) {
  constexpr std::string_view what = "camera spec";
  detail::check_version(j, what);
  CameraSpec s;
  s.name = j.contains("name") ? detail::get<std::string>(j, "name", what) : std::string();
  s.width = detail::get<int>(j, "width", what);
  s.height = detail::get<int>(j, "height", what);
  s.fov_h_deg = detail::get<double>(j, "fov_h_deg", what);
  if (j.contains("fov_v_deg") && !j["fov_v_deg"].is_null()) {
    s.fov_v_deg = detail::get<double>(j, "fov_v_deg", what);
  }
  s.model = detail::get_model(j, what);
  return s;
}

// --- Intrinsics -------------------------------------------------------------

inline json to_json(const Intrinsics& in) {
  return json{{"format_version", kFormatVersion},
              {"f", in.f},
              {"cx", in.cx},
              {"cy", in.cy},
              {"omega", in.omega},
              {"model", std::string(to_string(in.model))},
              {"width", in.width},
              {"height", in.height}};
}

inline Intrinsics intrinsics_from_json(const json& j) {
  constexpr std::string_view what = "intrinsics";
  detail::check_version(j, what);
  Intrinsics in;
  in.f = detail::get<double>(j, "f", what);
  in.width = detail::get<int>(j, "width", what);
  in.height = detail::get<int>(j, "height", what);
  in.cx = j.contains("cx") ? detail::get<double>(j, "cx", what) : in.width / 2.0;
  in.cy = j.contains("cy") ? detail::get<double>(j, "cy", what) : in.height / 2.0;
  in.omega = detail::get<double>(j, "omega", what);
  in.model = detail::get_model(j, what);
  return in;
}

// --- ZeroShotResult ---------------------------------------------------------

inline json to_json(const ZeroShotResult& r) {
  json j{{"omega_star", r.omega_star},
         {"f_star", r.f_star},
         {"fx_perspective", r.fx_perspective},
         {"fx_star", r.fx_star},
         {"clamped", r.clamped},
         {"iterations", r.iterations},
         {"model", std::string(to_string(r.model))}};
  j["fy_perspective"] = r.fy_perspective ? json(*r.fy_perspective) : json(nullptr);
  j["fy_star"] = r.fy_star ? json(*r.fy_star) : json(nullptr);
  return j;
}

// --- Board / correspondences ------------------------------------------------

inline json to_json(const BoardSpec& b) {
  return json{{"rows", b.rows}, {"cols", b.cols}, {"square_size", b.square_size}};
}

inline BoardSpec board_from_json(const json& j) {
  constexpr std::string_view what = "board";
  if (!j.is_object()) throw FormatError("board: expected a JSON object");
  return BoardSpec{detail::get<int>(j, "rows", what), detail::get<int>(j, "cols", what),
                   detail::get<double>(j, "square_size", what)};
}

inline json to_json(const CorrespondenceSet& d) {
  json images = json::array();
  for (const auto& img : d.images) {
    json pts = json::array();
    for (const auto& p : img.points) pts.push_back(detail::point2(p));
    images.push_back(json{{"name", img.name}, {"points", std::move(pts)}});
  }
  return json{{"format_version", kFormatVersion},
              {"board", to_json(d.board)},
              {"width", d.width},
              {"height", d.height},
              {"images", std::move(images)}};
}

inline CorrespondenceSet correspondences_from_json(const json& j) {
  constexpr std::string_view what = "dataset";
  detail::check_version(j, what);
  CorrespondenceSet d;
  d.board = board_from_json(detail::get<json>(j, "board", what));
  d.width = detail::get<int>(j, "width", what);
  d.height = detail::get<int>(j, "height", what);
  const auto images = detail::get<json>(j, "images", what);
  if (!images.is_array()) throw FormatError("dataset: 'images' must be an array");
  for (size_t i = 0; i < images.size(); ++i) {
    const auto& ji = images[i];
    ImagePoints img;
    img.name = ji.contains("name") ? detail::get<std::string>(ji, "name", what) : synth_image_name(i);
    const auto pts = detail::get<json>(ji, "points", what);
    if (!pts.is_array()) throw FormatError("dataset: image '" + img.name + "' points must be an array");
    for (const auto& p : pts) {
      if (!p.is_array() || p.size() != 2 || !p[0].is_number() || !p[1].is_number()) {
        throw FormatError("dataset: image '" + img.name + "' has a point that is not [x, y]");
      }
      img.points.emplace_back(p[0].get<double>(), p[1].get<double>());
    }
    d.images.push_back(std::move(img));
  }
  return d;
}

// --- Pose / reports ---------------------------------------------------------

inline json to_json(const Pose& p) {
  json r = json::array();
  for (int i = 0; i < 3; ++i) r.push_back(json::array({p.R(i, 0), p.R(i, 1), p.R(i, 2)}));
  return json{{"rotation", std::move(r)}, {"translation", json::array({p.t.x(), p.t.y(), p.t.z()})}};
}

inline Pose pose_from_json(const json& j) {
  constexpr std::string_view what = "pose";
  const auto r = detail::get<std::vector<std::vector<double>>>(j, "rotation", what);
  const auto t = detail::get<std::vector<double>>(j, "translation", what);
  if (r.size() != 3 || t.size() != 3) throw FormatError("pose: rotation must be 3x3 and translation 3-vector");
  Pose p;
  for (int i = 0; i < 3; ++i) {
    if (r[i].size() != 3) throw FormatError("pose: rotation must be 3x3");
    for (int k = 0; k < 3; ++k) p.R(i, k) = r[i][k];
  }
  p.t = Eigen::Vector3d(t[0], t[1], t[2]);
  if ((p.R.transpose() * p.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff() > 1e-6 ||
      p.R.determinant() < 0.0) {
    throw DomainError("pose: rotation is not orthonormal");
  }
  p.R = orthonormalize(p.R);
  return p;
}

inline json to_json(const CalibrationReport& r) {
  json poses = json::array();
  for (const auto& p : r.poses) poses.push_back(to_json(p));
  json per_image = json::array();
  for (size_t i = 0; i < r.per_image_rms.size(); ++i) {
    per_image.push_back(json{{"name", i < r.image_names.size() ? r.image_names[i] : synth_image_name(i)},
                             {"rms", r.per_image_rms[i]}});
  }
  json j{{"format_version", kFormatVersion},
         {"intrinsics", to_json(r.intrinsics)},
         {"rms", r.rms},
         {"per_image", std::move(per_image)},
         {"poses", std::move(poses)},
         {"initial_rms", r.initial_rms},
         {"iterations", r.iterations},
         {"termination", std::string(to_string(r.termination))}};
  if (r.f_err) j["f_err"] = *r.f_err;
  if (r.eps_gen) j["eps_gen"] = *r.eps_gen;
  if (r.eps_fit) j["eps_fit"] = *r.eps_fit;
  return j;
}

inline json to_json(const SweepResult& s) {
  json folds = json::array();
  for (const auto& f : s.folds) {
    folds.push_back(json{{"name", f.name}, {"gen", f.gen}, {"fit", f.fit}, {"intrinsics", to_json(f.intrinsics)}});
  }
  return json{{"format_version", kFormatVersion},
              {"eps_gen", s.eps_gen},
              {"eps_fit", s.eps_fit},
              {"folds", std::move(folds)}};
}

// --- Scenario ---------------------------------------------------------------

/// Scenario file: intrinsics, board, noise_sigma, seed and either explicit
/// "poses" or "num_images" for randomly sampled poses.
inline SynthScenario scenario_from_json(const json& j) {
  constexpr std::string_view what = "scenario";
  detail::check_version(j, what);
  SynthScenario sc;
  sc.intrinsics = intrinsics_from_json(detail::get<json>(j, "intrinsics", what));
  sc.board = board_from_json(detail::get<json>(j, "board", what));
  sc.noise_sigma = j.contains("noise_sigma") ? detail::get<double>(j, "noise_sigma", what) : 0.0;
  sc.seed = j.contains("seed") ? detail::get<std::uint64_t>(j, "seed", what) : 0;
  if (j.contains("poses")) {
    for (const auto& p : detail::get<json>(j, "poses", what)) sc.poses.push_back(pose_from_json(p));
  } else {
    const int n = detail::get<int>(j, "num_images", what);
    if (n < 1) throw DomainError("scenario: num_images must be >= 1");
    sc.poses = random_poses(sc.intrinsics, sc.board, n, sc.seed);
  }
  return sc;
}

inline json to_json(const SynthScenario& sc) {
  json poses = json::array();
  for (const auto& p : sc.poses) poses.push_back(to_json(p));
  return json{{"format_version", kFormatVersion},
              {"intrinsics", to_json(sc.intrinsics)},
              {"board", to_json(sc.board)},
              {"noise_sigma", sc.noise_sigma},
              {"seed", sc.seed},
              {"poses", std::move(poses)}};
}

// --- Files ------------------------------------------------------------------

inline json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw FormatError("malformed JSON in " + path.string() + ": " + e.what());
  }
}

inline void write_json_file(const std::filesystem::path& path, const json& j) {
  std::ofstream out(path);
  if (!out) throw FormatError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw FormatError("write failed for " + path.string());
}

}  // namespace fovcalib::io
