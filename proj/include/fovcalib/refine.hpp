#pragma once

#include <Eigen/Cholesky>
#include <Eigen/Core>

#include <algorithm>
#include <cmath>
#include <limits>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "fovcalib/error.hpp"
#include "fovcalib/geometry.hpp"
#include "fovcalib/model.hpp"

namespace fovcalib {

struct RefineConfig {
  bool optimize_principal_point = false;
  int max_iters = 100;
  double lambda0 = 1e-3;
  double lambda_up = 10.0;
  double lambda_down = 0.1;
  double cost_tol = 1e-12;
};

inline void validate(const RefineConfig& cfg) {
  if (cfg.max_iters < 1) throw DomainError("refine config: max_iters must be >= 1");
  if (!(cfg.lambda0 > 0.0)) throw DomainError("refine config: lambda0 must be positive");
  if (!(cfg.lambda_up > 0.0) || !(cfg.lambda_down > 0.0)) {
    throw DomainError("refine config: damping multipliers must be positive");
  }
  if (!(cfg.cost_tol >= 0.0)) throw DomainError("refine config: cost_tol must be non-negative");
}

enum class Termination {
  NotRun,          // evaluation only
  CostTolerance,   // relative cost decrease fell below cost_tol
  Gradient,        // residual orthogonal to the Jacobian columns
  DampingLimit,    // no decrease up to lambda > 1e12, at a numerical minimum
  MaxIterations,
  Stalled,         // no decrease up to lambda > 1e12 away from a minimum
};

inline std::string_view to_string(Termination t) {
  switch (t) {
    case Termination::NotRun: return "not_run";
    case Termination::CostTolerance: return "cost_tolerance";
    case Termination::Gradient: return "gradient";
    case Termination::DampingLimit: return "damping_limit";
    case Termination::MaxIterations: return "max_iterations";
    case Termination::Stalled: return "stalled";
  }
  return "unknown";
}

struct CalibrationReport {
  Intrinsics intrinsics;
  std::vector<Pose> poses;
  std::vector<std::string> image_names;
  double rms = 0.0;
  std::vector<double> per_image_rms;
  std::optional<double> f_err;
  std::optional<double> eps_gen;
  std::optional<double> eps_fit;
  // Optimizer diagnostics; trivial for pure evaluation.
  double initial_rms = 0.0;
  int iterations = 0;
  Termination termination = Termination::NotRun;
  std::vector<double> cost_history;

  bool stalled() const { return termination == Termination::Stalled; }
};

/// Relative focal-length deviation |f - f_gt| / f_gt.
inline double deviation_error(double f, double f_gt) {
  if (!(f_gt > 0.0)) throw DomainError("deviation_error: ground-truth focal length must be positive");
  return std::abs(f - f_gt) / f_gt;
}

namespace detail {

/// Sum of squared residual norms per image for fixed poses.
inline std::vector<double> squared_error_per_image(const Intrinsics& intr,
                                                   const std::vector<Pose>& poses,
                                                   const CorrespondenceSet& data) {
  const auto world = board_points(data.board);
  std::vector<double> sums(data.images.size(), 0.0);
  for (size_t i = 0; i < data.images.size(); ++i) {
    const auto& pts = data.images[i].points;
    for (size_t j = 0; j < world.size(); ++j) {
      sums[i] += (pts[j] - project(intr, poses[i], world[j])).squaredNorm();
    }
  }
  return sums;
}

inline void fill_errors(CalibrationReport& report, const CorrespondenceSet& data) {
  const auto sums = squared_error_per_image(report.intrinsics, report.poses, data);
  const double m = data.board.corner_count();
  double total = 0.0;
  report.per_image_rms.clear();
  for (double s : sums) {
    total += s;
    report.per_image_rms.push_back(std::sqrt(s / m));
  }
  report.rms = std::sqrt(total / (m * static_cast<double>(sums.size())));
  report.image_names.clear();
  for (const auto& img : data.images) report.image_names.push_back(img.name);
}

inline std::vector<Pose> estimate_all_poses(const Intrinsics& intr, const CorrespondenceSet& data) {
  std::vector<Pose> poses;
  poses.reserve(data.images.size());
  for (const auto& img : data.images) {
    try {
      poses.push_back(estimate_planar_pose(intr, data.board, img.points));
    } catch (const EstimationError& e) {
      throw EstimationError("image '" + img.name + "': " + e.what());
    } catch (const DomainError& e) {
      throw EstimationError("image '" + img.name + "': " + e.what());
    }
  }
  return poses;
}

}  // namespace detail

/// RMS pixel reprojection error with per-image poses from estimate_planar_pose.
inline CalibrationReport rms_reprojection(const Intrinsics& intr, const CorrespondenceSet& data) {
  validate(intr);
  validate(data);
  CalibrationReport report;
  report.intrinsics = intr;
  report.poses = detail::estimate_all_poses(intr, data);
  detail::fill_errors(report, data);
  report.initial_rms = report.rms;
  return report;
}

/// Joint least-squares problem over intrinsics and all board poses.
///
/// Parameter layout: [log f, omega * s, (cx, cy), then per image
/// (axis-angle, translation)], with s the image half-diagonal so that the
/// distortion coordinate is O(1).
class CalibrationProblem {
 public:
  CalibrationProblem(const CorrespondenceSet& data, const Intrinsics& base, bool optimize_pp)
      : data_(data), base_(base), optimize_pp_(optimize_pp), world_(board_points(data.board)) {
    omega_scale_ = 0.5 * std::hypot(static_cast<double>(base.width), static_cast<double>(base.height));
  }

  int intrinsic_count() const { return optimize_pp_ ? 4 : 2; }
  int param_count() const { return intrinsic_count() + 6 * static_cast<int>(data_.images.size()); }
  int residual_count() const {
    return 2 * static_cast<int>(world_.size() * data_.images.size());
  }

  Eigen::VectorXd pack(const Intrinsics& intr, const std::vector<Pose>& poses) const {
    Eigen::VectorXd x(param_count());
    x(0) = std::log(intr.f);
    x(1) = intr.omega * omega_scale_;
    if (optimize_pp_) {
      x(2) = intr.cx;
      x(3) = intr.cy;
    }
    for (size_t i = 0; i < poses.size(); ++i) {
      const auto off = pose_offset(i);
      x.segment<3>(off) = axis_angle_from_rotation(poses[i].R);
      x.segment<3>(off + 3) = poses[i].t;
    }
    return x;
  }

  Intrinsics intrinsics(const Eigen::VectorXd& x) const {
    Intrinsics intr = base_;
    intr.f = std::exp(x(0));
    intr.omega = x(1) / omega_scale_;
    if (optimize_pp_) {
      intr.cx = x(2);
      intr.cy = x(3);
    }
    return intr;
  }

  Pose pose(const Eigen::VectorXd& x, size_t i) const {
    const auto off = pose_offset(i);
    return Pose{rotation_from_axis_angle(x.segment<3>(off)), x.segment<3>(off + 3)};
  }

  /// Keeps omega non-negative.
  void project_feasible(Eigen::VectorXd& x) const { x(1) = std::max(0.0, x(1)); }

  /// Whether x satisfies the Intrinsics invariants.
  bool feasible(const Eigen::VectorXd& x) const {
    try {
      validate(intrinsics(x));
    } catch (const DomainError&) {
      return false;
    }
    return x.allFinite();
  }

  /// Stacked (measured - projected) residuals. Throws DomainError when a
  /// point becomes unimageable.
  Eigen::VectorXd residuals(const Eigen::VectorXd& x) const {
    Eigen::VectorXd r(residual_count());
    const Intrinsics intr = intrinsics(x);
    for (size_t i = 0; i < data_.images.size(); ++i) image_residuals(intr, pose(x, i), i, r);
    return r;
  }

  /// Forward-difference Jacobian, exploiting that pose blocks only touch
  /// their own image's residuals.
  Eigen::MatrixXd jacobian(const Eigen::VectorXd& x, const Eigen::VectorXd& r0) const {
    Eigen::MatrixXd jac = Eigen::MatrixXd::Zero(residual_count(), param_count());
    for (int k = 0; k < intrinsic_count(); ++k) {
      const double h = step_for(x(k));
      Eigen::VectorXd xp = x;
      xp(k) += h;
      jac.col(k) = (residuals(xp) - r0) / h;
    }
    const Intrinsics intr = intrinsics(x);
    Eigen::VectorXd rp(residual_count());
    for (size_t i = 0; i < data_.images.size(); ++i) {
      const auto off = pose_offset(i);
      const auto rows = residual_block(i);
      for (int k = 0; k < 6; ++k) {
        Eigen::VectorXd xp = x.segment<6>(off);
        const double h = step_for(xp(k));
        xp(k) += h;
        const Pose p{rotation_from_axis_angle(xp.head<3>()), xp.tail<3>()};
        image_residuals(intr, p, i, rp);
        jac.block(rows.first, off + k, rows.second, 1) =
            (rp.segment(rows.first, rows.second) - r0.segment(rows.first, rows.second)) / h;
      }
    }
    return jac;
  }

  static double step_for(double value) { return 1e-7 * std::max(1.0, std::abs(value)); }

 private:
  Eigen::Index pose_offset(size_t i) const {
    return intrinsic_count() + 6 * static_cast<Eigen::Index>(i);
  }

  std::pair<Eigen::Index, Eigen::Index> residual_block(size_t i) const {
    const auto m = static_cast<Eigen::Index>(world_.size());
    return {2 * m * static_cast<Eigen::Index>(i), 2 * m};
  }

  void image_residuals(const Intrinsics& intr, const Pose& p, size_t i, Eigen::VectorXd& r) const {
    const auto base = residual_block(i).first;
    const auto& pts = data_.images[i].points;
    for (size_t j = 0; j < world_.size(); ++j) {
      r.segment<2>(base + 2 * static_cast<Eigen::Index>(j)) = pts[j] - project(intr, p, world_[j]);
    }
  }

  const CorrespondenceSet& data_;
  Intrinsics base_;
  bool optimize_pp_;
  std::vector<Eigen::Vector3d> world_;
  double omega_scale_ = 1.0;
};

namespace detail {

inline constexpr double kMaxDamping = 1e12;
// Largest cosine between the residual and any Jacobian column still counted
// as a minimum when damping runs away.
inline constexpr double kStallCosine = 1e-5;
inline constexpr double kGradientCosine = 1e-14;
// RMS below which residuals are floating-point noise of the pixel coordinates.
inline constexpr double kResidualFloorPx = 1e-9;

inline double half_cost(const CalibrationProblem& problem, const Eigen::VectorXd& x) {
  if (!problem.feasible(x)) return std::numeric_limits<double>::infinity();
  try {
    const double c = 0.5 * problem.residuals(x).squaredNorm();
    return std::isfinite(c) ? c : std::numeric_limits<double>::infinity();
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
}

/// max_k |J_k . r| / (|J_k| |r|)
inline double max_cosine(const Eigen::MatrixXd& jac, const Eigen::VectorXd& r) {
  const double rn = r.norm();
  if (rn == 0.0) return 0.0;
  double worst = 0.0;
  for (Eigen::Index k = 0; k < jac.cols(); ++k) {
    const double cn = jac.col(k).norm();
    if (cn == 0.0) continue;
    worst = std::max(worst, std::abs(jac.col(k).dot(r)) / (cn * rn));
  }
  return worst;
}

}  // namespace detail

/// Levenberg-Marquardt over intrinsics and every board pose, minimizing the
/// summed squared pixel reprojection error. Poses start from
/// estimate_planar_pose under `init`.
inline CalibrationReport full_calibrate(const CorrespondenceSet& data, const Intrinsics& init,
                                        const RefineConfig& cfg = {}) {
  validate(cfg);
  validate(init);
  validate(data);
  if (data.width != init.width || data.height != init.height) {
    throw DomainError("dataset image size does not match intrinsics image size");
  }

  const CalibrationProblem problem(data, init, cfg.optimize_principal_point);
  Eigen::VectorXd x = problem.pack(init, detail::estimate_all_poses(init, data));
  double cost = detail::half_cost(problem, x);
  if (!std::isfinite(cost)) throw EstimationError("full_calibrate: initial parameters are not imageable");

  CalibrationReport report;
  report.cost_history.push_back(cost);
  const double n_res = problem.residual_count() / 2.0;
  report.initial_rms = std::sqrt(2.0 * cost / n_res);

  double lambda = cfg.lambda0;
  Termination why = Termination::MaxIterations;
  int it = 0;
  for (; it < cfg.max_iters; ++it) {
    const Eigen::VectorXd r = problem.residuals(x);
    const Eigen::MatrixXd jac = problem.jacobian(x, r);
    const double cosine = detail::max_cosine(jac, r);
    if (cosine <= detail::kGradientCosine) {
      why = Termination::Gradient;
      break;
    }
    const Eigen::MatrixXd jtj = jac.transpose() * jac;
    const Eigen::VectorXd g = jac.transpose() * r;
    Eigen::VectorXd diag = jtj.diagonal();
    for (Eigen::Index k = 0; k < diag.size(); ++k) diag(k) = std::max(diag(k), 1e-12);

    bool accepted = false;
    bool done = false;
    while (!accepted) {
      Eigen::MatrixXd a = jtj;
      a.diagonal() += lambda * diag;
      Eigen::VectorXd x_trial = x + a.ldlt().solve(-g);
      problem.project_feasible(x_trial);
      const double trial = detail::half_cost(problem, x_trial);
      if (trial < cost) {
        const double decrease = (cost - trial) / cost;
        x = x_trial;
        cost = trial;
        report.cost_history.push_back(cost);
        lambda = std::max(lambda * cfg.lambda_down, 1e-15);
        accepted = true;
        if (decrease < cfg.cost_tol || cost == 0.0) {
          why = Termination::CostTolerance;
          done = true;
        }
      } else {
        lambda *= cfg.lambda_up;
        if (lambda > detail::kMaxDamping) {
          const bool at_floor = std::sqrt(2.0 * cost / n_res) <= detail::kResidualFloorPx;
          why = cosine <= detail::kStallCosine || at_floor ? Termination::DampingLimit : Termination::Stalled;
          done = true;
          break;
        }
      }
    }
    if (done) {
      ++it;
      break;
    }
  }

  report.intrinsics = problem.intrinsics(x);
  report.poses.clear();
  for (size_t i = 0; i < data.images.size(); ++i) report.poses.push_back(problem.pose(x, i));
  detail::fill_errors(report, data);
  report.iterations = it;
  report.termination = why;
  return report;
}

/// Per-image subset of a dataset.
inline CorrespondenceSet subset(const CorrespondenceSet& data, std::span<const size_t> indices) {
  CorrespondenceSet out{data.board, data.width, data.height, {}};
  for (size_t i : indices) out.images.push_back(data.images.at(i));
  return out;
}

struct SweepFold {
  std::string name;
  Intrinsics intrinsics;
  double gen = 0.0;
  double fit = 0.0;
};

struct SweepResult {
  double eps_gen = 0.0;
  double eps_fit = 0.0;
  std::vector<SweepFold> folds;
};

/// Single-shot calibration on each image in turn. The fitting error is the
/// RMS on the training image; the generalization error is the RMS over every
/// image (poses re-estimated under the fold's intrinsics). Both are averaged
/// over folds.
inline SweepResult single_shot_sweep(const CorrespondenceSet& data, const Intrinsics& init,
                                     const RefineConfig& cfg = {}) {
  validate(data);
  if (data.images.size() < 2) throw DomainError("single_shot_sweep: at least 2 images are required");

  SweepResult out;
  for (size_t k = 0; k < data.images.size(); ++k) {
    const size_t idx[] = {k};
    SweepFold fold;
    fold.name = data.images[k].name;
    try {
      const CalibrationReport fit = full_calibrate(subset(data, idx), init, cfg);
      fold.intrinsics = fit.intrinsics;
      fold.fit = fit.rms;
      fold.gen = rms_reprojection(fit.intrinsics, data).rms;
    } catch (const std::runtime_error& e) {
      throw EstimationError("single-shot fold '" + fold.name + "': " + e.what());
    }
    out.folds.push_back(fold);
  }
  for (const auto& f : out.folds) {
    out.eps_gen += f.gen;
    out.eps_fit += f.fit;
  }
  out.eps_gen /= static_cast<double>(out.folds.size());
  out.eps_fit /= static_cast<double>(out.folds.size());
  return out;
}

}  // namespace fovcalib
