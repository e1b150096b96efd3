#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <string_view>

#include "fovcalib/error.hpp"

namespace fovcalib {

inline constexpr double kPi = std::numbers::pi;

inline constexpr double deg_to_rad(double deg) { return deg * kPi / 180.0; }
inline constexpr double rad_to_deg(double rad) { return rad * 180.0 / kPi; }

// Below this the distortion parameter is treated as exactly zero.
inline constexpr double kOmegaIdentityThreshold = 1e-12;

enum class RadialModel {
  Perspective,
  Stereographic,
  Equidistance,
  EquisolidAngle,
  Orthographic,
};

inline constexpr RadialModel kDefaultModel = RadialModel::Equidistance;

inline constexpr RadialModel kAllModels[] = {
    RadialModel::Perspective, RadialModel::Stereographic, RadialModel::Equidistance,
    RadialModel::EquisolidAngle, RadialModel::Orthographic};

inline std::string_view to_string(RadialModel model) {
  switch (model) {
    case RadialModel::Perspective: return "perspective";
    case RadialModel::Stereographic: return "stereographic";
    case RadialModel::Equidistance: return "equidistance";
    case RadialModel::EquisolidAngle: return "equisolid";
    case RadialModel::Orthographic: return "orthographic";
  }
  return "unknown";
}

inline std::optional<RadialModel> parse_radial_model(std::string_view name) {
  for (RadialModel m : kAllModels) {
    if (to_string(m) == name) return m;
  }
  if (name == "equisolid_angle") return RadialModel::EquisolidAngle;
  return std::nullopt;
}

/// Manufacturer-published camera facts. Angles are stored in degrees, as
/// quoted on data sheets.
struct CameraSpec {
  std::string name;
  int width = 0;
  int height = 0;
  double fov_h_deg = 0.0;
  std::optional<double> fov_v_deg;
  RadialModel model = kDefaultModel;

  double half_width() const { return width / 2.0; }
  double half_height() const { return height / 2.0; }
};

/// Throws DomainError naming the offending field.
inline void validate(const CameraSpec& spec) {
  if (spec.width < 1) throw DomainError("camera spec: width must be >= 1");
  if (spec.height < 1) throw DomainError("camera spec: height must be >= 1");
  auto angle_ok = [](double a) { return std::isfinite(a) && a > 0.0 && a < 180.0; };
  if (!angle_ok(spec.fov_h_deg)) {
    throw DomainError("camera spec: fov_h_deg must lie strictly between 0 and 180 degrees");
  }
  if (spec.fov_v_deg && !angle_ok(*spec.fov_v_deg)) {
    throw DomainError("camera spec: fov_v_deg must lie strictly between 0 and 180 degrees");
  }
}

/// Upper bound on omega * r_d for which the inverse mapping is defined
/// (incidence angle below 90 degrees). Infinite for the pinhole model.
inline double distorted_radius_bound(RadialModel model) {
  switch (model) {
    case RadialModel::Perspective: return std::numeric_limits<double>::infinity();
    case RadialModel::Stereographic: return 2.0;
    case RadialModel::Equidistance: return kPi / 2.0;
    case RadialModel::EquisolidAngle: return std::numbers::sqrt2;
    case RadialModel::Orthographic: return 1.0;
  }
  return 0.0;
}

/// Largest distorted radius (pixels) representable for the given omega.
inline double max_distorted_radius(RadialModel model, double omega) {
  if (omega < kOmegaIdentityThreshold) return std::numeric_limits<double>::infinity();
  return distorted_radius_bound(model) / omega;
}

/// Undistorted (pinhole) radius -> distorted radius. The fisheye law of the
/// chosen model is applied with focal scale 1/omega to the incidence angle
/// atan(omega * r_u).
inline double radial_forward(RadialModel model, double omega, double r_u) {
  if (!(r_u >= 0.0) || !std::isfinite(r_u)) {
    throw DomainError("radial_forward: undistorted radius must be finite and non-negative");
  }
  if (!(omega >= 0.0)) throw DomainError("radial_forward: omega must be non-negative");
  if (model == RadialModel::Perspective || omega < kOmegaIdentityThreshold) return r_u;

  const double theta = std::atan(omega * r_u);
  switch (model) {
    case RadialModel::Stereographic: return 2.0 * std::tan(theta / 2.0) / omega;
    case RadialModel::Equidistance: return theta / omega;
    case RadialModel::EquisolidAngle: return 2.0 * std::sin(theta / 2.0) / omega;
    case RadialModel::Orthographic:
      if (theta >= kPi / 2.0) {
        throw DomainError("radial_forward: incidence angle reaches 90 degrees (orthographic)");
      }
      return std::sin(theta) / omega;
    case RadialModel::Perspective: break;
  }
  return r_u;
}

/// Distorted radius -> undistorted (pinhole) radius; inverse of radial_forward.
inline double radial_inverse(RadialModel model, double omega, double r_d) {
  if (!(r_d >= 0.0) || !std::isfinite(r_d)) {
    throw DomainError("radial_inverse: distorted radius must be finite and non-negative");
  }
  if (!(omega >= 0.0)) throw DomainError("radial_inverse: omega must be non-negative");
  if (model == RadialModel::Perspective || omega < kOmegaIdentityThreshold) return r_d;

  const double x = omega * r_d;
  if (x >= distorted_radius_bound(model)) {
    throw DomainError("field of view exceeds model domain");
  }
  double theta = 0.0;
  switch (model) {
    case RadialModel::Stereographic: theta = 2.0 * std::atan(x / 2.0); break;
    case RadialModel::Equidistance: theta = x; break;
    case RadialModel::EquisolidAngle: theta = 2.0 * std::asin(x / 2.0); break;
    case RadialModel::Orthographic: theta = std::asin(x); break;
    case RadialModel::Perspective: break;
  }
  return std::tan(theta) / omega;
}

/// Camera parameters under the simplified model: square pixels, zero skew,
/// a single radial distortion parameter.
struct Intrinsics {
  double f = 0.0;
  double cx = 0.0;
  double cy = 0.0;
  double omega = 0.0;
  RadialModel model = kDefaultModel;
  int width = 0;
  int height = 0;

  /// Largest in-image distorted radius about the principal point.
  double max_image_radius() const {
    const double dx = std::max(cx, width - cx);
    const double dy = std::max(cy, height - cy);
    return std::hypot(dx, dy);
  }

  double forward(double r_u) const { return radial_forward(model, omega, r_u); }
  double inverse(double r_d) const { return radial_inverse(model, omega, r_d); }
};

inline void validate(const Intrinsics& intr) {
  if (!(intr.f > 0.0) || !std::isfinite(intr.f)) {
    throw DomainError("intrinsics: focal length f must be positive");
  }
  if (!(intr.omega >= 0.0) || !std::isfinite(intr.omega)) {
    throw DomainError("intrinsics: omega must be non-negative");
  }
  if (!std::isfinite(intr.cx) || !std::isfinite(intr.cy)) {
    throw DomainError("intrinsics: principal point must be finite");
  }
  if (intr.width < 1 || intr.height < 1) {
    throw DomainError("intrinsics: image size must be positive");
  }
  if (intr.omega * intr.max_image_radius() >= distorted_radius_bound(intr.model) &&
      intr.omega >= kOmegaIdentityThreshold) {
    throw DomainError("intrinsics: field of view exceeds model domain (omega * half-diagonal)");
  }
}

/// Principal point at the image centre, as the simplified model prescribes.
inline Intrinsics intrinsics_from_spec(const CameraSpec& spec, double f, double omega,
                                       RadialModel model) {
  validate(spec);
  Intrinsics intr{f, spec.half_width(), spec.half_height(), omega, model, spec.width, spec.height};
  validate(intr);
  return intr;
}

}  // namespace fovcalib
