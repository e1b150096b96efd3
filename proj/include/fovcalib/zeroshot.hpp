#pragma once

#include <algorithm>
#include <cmath>
#include <optional>
#include <string>

#include "fovcalib/error.hpp"
#include "fovcalib/model.hpp"

namespace fovcalib {

/// Settings of the damped Newton iteration on the stabilized residual.
struct SolverConfig {
  double omega0 = 1e-4;
  // Base learning rate. The step factor grows towards 1 while the residual
  // shrinks monotonically and falls back to gamma on overshoot.
  double gamma = 0.1;
  bool adaptive_step = true;
  int max_iters = 200;
  double tol = 1e-12;
  double derivative_step = 1e-9;
  // A root whose distortion moves the image edge by less than this many
  // pixels is indistinguishable from a pinhole camera and reported as omega = 0.
  double min_edge_distortion_px = 0.1;
};

inline void validate(const SolverConfig& cfg) {
  if (!(cfg.omega0 > 0.0)) throw DomainError("solver config: omega0 must be positive");
  if (!(cfg.gamma > 0.0 && cfg.gamma <= 1.0)) {
    throw DomainError("solver config: gamma must lie in (0, 1]");
  }
  if (cfg.max_iters < 30) throw DomainError("solver config: max_iters must be >= 30");
  if (!(cfg.tol > 0.0)) throw DomainError("solver config: tol must be positive");
  if (!(cfg.derivative_step > 0.0)) {
    throw DomainError("solver config: derivative_step must be positive");
  }
  if (!(cfg.min_edge_distortion_px >= 0.0)) {
    throw DomainError("solver config: min_edge_distortion_px must be non-negative");
  }
}

struct ZeroShotResult {
  double omega_star = 0.0;
  double f_star = 0.0;
  double fx_perspective = 0.0;
  std::optional<double> fy_perspective;
  // Distortion-corrected per-axis focal lengths at omega_star.
  double fx_star = 0.0;
  std::optional<double> fy_star;
  bool clamped = false;
  int iterations = 0;
  RadialModel model = kDefaultModel;
};

/// Pinhole focal length that makes `half_extent` pixels subtend half of `fov_deg`.
inline double perspective_focal(double half_extent, double fov_deg) {
  if (!(half_extent > 0.0)) throw DomainError("perspective_focal: half extent must be positive");
  if (!(fov_deg > 0.0 && fov_deg < 180.0)) {
    throw DomainError("perspective_focal: field of view must lie in (0, 180) degrees");
  }
  return half_extent / std::tan(deg_to_rad(fov_deg) / 2.0);
}

/// Open upper end of the omega interval on which the objective is defined:
/// the longer image half-extent must stay inside the model's domain.
inline double omega_upper_bound(const CameraSpec& spec) {
  const double half_long = std::max(spec.width, spec.height) / 2.0;
  return distorted_radius_bound(spec.model) / half_long;
}

namespace detail {

inline double require_fov_v(const CameraSpec& spec) {
  if (!spec.fov_v_deg) {
    throw DomainError("camera spec: fov_v_deg is required to evaluate the focal consistency objective");
  }
  return *spec.fov_v_deg;
}

inline void check_omega_domain(double omega, const CameraSpec& spec) {
  if (!(omega > 0.0) || !(omega < omega_upper_bound(spec))) {
    throw DomainError("omega outside the objective's domain (0, bound / half-width)");
  }
}

}  // namespace detail

/// Difference of the undistorted horizontal and vertical focal lengths (pixels).
inline double objective_J(double omega, const CameraSpec& spec) {
  const double fov_v = detail::require_fov_v(spec);
  detail::check_omega_domain(omega, spec);
  const double fx = radial_inverse(spec.model, omega, spec.half_width()) /
                    std::tan(deg_to_rad(spec.fov_h_deg) / 2.0);
  const double fy = radial_inverse(spec.model, omega, spec.half_height()) /
                    std::tan(deg_to_rad(fov_v) / 2.0);
  return fx - fy;
}

/// Dimensionless rearrangement of objective_J with the same zero set:
/// tan(fov_v/2)/tan(fov_h/2) - G^-1(H/2)/G^-1(W/2).
inline double objective_J_stable(double omega, const CameraSpec& spec) {
  const double fov_v = detail::require_fov_v(spec);
  detail::check_omega_domain(omega, spec);
  const double fov_ratio = std::tan(deg_to_rad(fov_v) / 2.0) /
                           std::tan(deg_to_rad(spec.fov_h_deg) / 2.0);
  return fov_ratio - radial_inverse(spec.model, omega, spec.half_height()) /
                         radial_inverse(spec.model, omega, spec.half_width());
}

namespace detail {

inline constexpr double kDomainMargin = 1e-10;

inline ZeroShotResult clamped_result(const CameraSpec& spec) {
  ZeroShotResult r;
  r.model = spec.model;
  r.clamped = true;
  r.fx_perspective = perspective_focal(spec.half_width(), spec.fov_h_deg);
  r.fx_star = r.fx_perspective;
  if (spec.fov_v_deg) {
    r.fy_perspective = perspective_focal(spec.half_height(), *spec.fov_v_deg);
    r.fy_star = r.fy_perspective;
    r.f_star = (r.fx_perspective + *r.fy_perspective) / 2.0;
  } else {
    r.f_star = r.fx_perspective;
  }
  return r;
}

/// Clamped result when the spec admits no positive root, otherwise nullopt.
/// The ratio G^-1(H/2)/G^-1(W/2) starts at H/W and moves monotonically towards
/// 0 (W > H) or infinity (W < H), so a root exists iff the residual at 0+
/// points the opposite way.
inline std::optional<ZeroShotResult> clamp_without_root(const CameraSpec& spec) {
  if (!spec.fov_v_deg || spec.model == RadialModel::Perspective || spec.width == spec.height) {
    return clamped_result(spec);
  }
  const double fov_ratio = std::tan(deg_to_rad(*spec.fov_v_deg) / 2.0) /
                           std::tan(deg_to_rad(spec.fov_h_deg) / 2.0);
  const double residual_at_zero = fov_ratio - static_cast<double>(spec.height) / spec.width;
  const bool wide = spec.width > spec.height;
  if ((wide && residual_at_zero >= 0.0) || (!wide && residual_at_zero <= 0.0)) {
    return clamped_result(spec);
  }
  return std::nullopt;
}

/// Builds the rooted result, or the clamped one when the root's distortion is
/// negligible at the image edge.
inline ZeroShotResult finish_root(const CameraSpec& spec, double omega, int iterations,
                                  const SolverConfig& cfg) {
  const double half_long = std::max(spec.width, spec.height) / 2.0;
  const double edge_shift = radial_inverse(spec.model, omega, half_long) - half_long;
  if (edge_shift < cfg.min_edge_distortion_px) {
    ZeroShotResult r = clamped_result(spec);
    r.iterations = iterations;
    return r;
  }
  ZeroShotResult r;
  r.model = spec.model;
  r.omega_star = omega;
  r.iterations = iterations;
  r.fx_perspective = perspective_focal(spec.half_width(), spec.fov_h_deg);
  r.fy_perspective = perspective_focal(spec.half_height(), *spec.fov_v_deg);
  r.fx_star = radial_inverse(spec.model, omega, spec.half_width()) /
              std::tan(deg_to_rad(spec.fov_h_deg) / 2.0);
  r.fy_star = radial_inverse(spec.model, omega, spec.half_height()) /
              std::tan(deg_to_rad(*spec.fov_v_deg) / 2.0);
  r.f_star = (r.fx_star + *r.fy_star) / 2.0;
  return r;
}

}  // namespace detail

/// Estimates omega* and f* from the spec alone by damped Newton iteration on
/// objective_J_stable, with a central-difference derivative.
inline ZeroShotResult solve_omega(const CameraSpec& spec, const SolverConfig& cfg = {}) {
  validate(spec);
  validate(cfg);
  if (auto clamped = detail::clamp_without_root(spec)) return *clamped;

  const double lo = detail::kDomainMargin;
  const double hi = omega_upper_bound(spec) - detail::kDomainMargin;
  auto project = [&](double w) { return std::clamp(w, lo, hi); };
  auto residual = [&](double w) { return objective_J_stable(w, spec); };

  double omega = project(cfg.omega0);
  double j = residual(omega);
  if (std::abs(j) < cfg.tol) return detail::finish_root(spec, omega, 0, cfg);

  double step = cfg.gamma;
  for (int it = 1; it <= cfg.max_iters; ++it) {
    const double h = cfg.derivative_step;
    const double a = project(omega - h);
    const double b = project(omega + h);
    const double slope = (residual(b) - residual(a)) / (b - a);
    if (!std::isfinite(slope) || slope == 0.0) {
      throw ConvergenceError("solve_omega: vanishing derivative of the residual", omega);
    }
    double next = project(omega - step * j / slope);
    double j_next = residual(next);
    if (cfg.adaptive_step) {
      // Backtrack while |J| does not decrease (e.g. a step onto the pole at
      // the domain bound).
      double t = step;
      while (!(std::abs(j_next) < std::abs(j)) && t > 1e-8) {
        t /= 2.0;
        next = project(omega - t * j / slope);
        j_next = residual(next);
      }
      if (std::abs(j_next) < std::abs(j) && std::signbit(j_next) == std::signbit(j)) {
        step = std::min(1.0, step * 2.0);
      } else {
        step = std::max(cfg.gamma, step / 2.0);
      }
    }
    omega = next;
    j = j_next;
    if (std::abs(j) < cfg.tol) return detail::finish_root(spec, omega, it, cfg);
  }
  throw ConvergenceError("solve_omega: no convergence within max_iters (last omega " +
                             std::to_string(omega) + ")",
                         omega);
}

/// Independent cross-check of solve_omega: a dense sign-change scan of the
/// residual followed by bisection. Clamps when no sign change is found.
inline ZeroShotResult solve_omega_oracle(const CameraSpec& spec, const SolverConfig& cfg = {}) {
  validate(spec);
  if (!spec.fov_v_deg || spec.model == RadialModel::Perspective) {
    return detail::clamped_result(spec);
  }
  constexpr int kScanPoints = 10000;
  const double lo = detail::kDomainMargin;
  const double hi = omega_upper_bound(spec) - detail::kDomainMargin;
  auto residual = [&](double w) { return objective_J_stable(w, spec); };

  double prev_w = lo;
  double prev_j = residual(lo);
  for (int i = 1; i < kScanPoints; ++i) {
    const double w = lo + (hi - lo) * i / (kScanPoints - 1);
    const double j = residual(w);
    if (prev_j == 0.0 && j != 0.0) return detail::finish_root(spec, prev_w, 0, cfg);
    if (prev_j * j < 0.0) {
      double a = prev_w;
      double b = w;
      double ja = prev_j;
      int iters = 0;
      while (b - a > 1e-18 && iters < 200) {
        const double mid = 0.5 * (a + b);
        if (mid <= a || mid >= b) break;
        const double jm = residual(mid);
        if (jm == 0.0) {
          a = b = mid;
          break;
        }
        if ((jm < 0.0) == (ja < 0.0)) {
          a = mid;
          ja = jm;
        } else {
          b = mid;
        }
        ++iters;
      }
      return detail::finish_root(spec, 0.5 * (a + b), iters, cfg);
    }
    prev_w = w;
    prev_j = j;
  }
  return detail::clamped_result(spec);
}

/// Intrinsics with the principal point at the image centre.
inline Intrinsics to_intrinsics(const CameraSpec& spec, const ZeroShotResult& r) {
  return intrinsics_from_spec(spec, r.f_star, r.omega_star, r.model);
}

}  // namespace fovcalib
