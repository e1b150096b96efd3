#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "fovcalib/error.hpp"
#include "fovcalib/model.hpp"

namespace fovcalib {

// Pixel convention: integer coordinate (i, j) addresses the centre of pixel
// (i, j); the principal point (W/2, H/2) lives in the same continuous frame.

/// Checkerboard inner-corner grid. World points lie on Z = 0.
struct BoardSpec {
  int rows = 0;
  int cols = 0;
  double square_size = 1.0;

  int corner_count() const { return rows * cols; }
};

inline void validate(const BoardSpec& board) {
  if (board.rows < 2) throw DomainError("board: rows must be >= 2");
  if (board.cols < 2) throw DomainError("board: cols must be >= 2");
  if (!(board.square_size > 0.0) || !std::isfinite(board.square_size)) {
    throw DomainError("board: square_size must be positive");
  }
}

/// Board corners in row-major order: index = row * cols + col,
/// position = (col * square_size, row * square_size, 0).
inline std::vector<Eigen::Vector3d> board_points(const BoardSpec& board) {
  std::vector<Eigen::Vector3d> pts;
  pts.reserve(static_cast<size_t>(board.corner_count()));
  for (int r = 0; r < board.rows; ++r) {
    for (int c = 0; c < board.cols; ++c) {
      pts.emplace_back(c * board.square_size, r * board.square_size, 0.0);
    }
  }
  return pts;
}

struct ImagePoints {
  std::string name;
  std::vector<Eigen::Vector2d> points;
};

struct CorrespondenceSet {
  BoardSpec board;
  int width = 0;
  int height = 0;
  std::vector<ImagePoints> images;

  size_t image_count() const { return images.size(); }
};

inline void validate(const CorrespondenceSet& data) {
  validate(data.board);
  if (data.width < 1 || data.height < 1) throw DomainError("dataset: image size must be positive");
  if (data.images.empty()) throw DomainError("dataset: at least one image is required");
  const auto m = static_cast<size_t>(data.board.corner_count());
  for (const auto& img : data.images) {
    if (img.points.size() != m) {
      throw DomainError("dataset: image '" + img.name + "' has " +
                        std::to_string(img.points.size()) + " points, expected " +
                        std::to_string(m));
    }
    for (const auto& p : img.points) {
      if (!p.allFinite()) throw DomainError("dataset: image '" + img.name + "' has a non-finite point");
    }
  }
}

/// Rigid world-to-camera transform.
struct Pose {
  Eigen::Matrix3d R = Eigen::Matrix3d::Identity();
  Eigen::Vector3d t = Eigen::Vector3d::Zero();

  Eigen::Vector3d apply(const Eigen::Vector3d& p) const { return R * p + t; }
};

/// Nearest rotation matrix in the Frobenius sense.
inline Eigen::Matrix3d orthonormalize(const Eigen::Matrix3d& m) {
  Eigen::JacobiSVD<Eigen::Matrix3d> svd(m, Eigen::ComputeFullU | Eigen::ComputeFullV);
  Eigen::Matrix3d r = svd.matrixU() * svd.matrixV().transpose();
  if (r.determinant() < 0.0) {
    Eigen::Matrix3d u = svd.matrixU();
    u.col(2) *= -1.0;
    r = u * svd.matrixV().transpose();
  }
  return r;
}

inline Eigen::Matrix3d rotation_from_axis_angle(const Eigen::Vector3d& v) {
  const double angle = v.norm();
  if (angle == 0.0) return Eigen::Matrix3d::Identity();
  return Eigen::AngleAxisd(angle, v / angle).toRotationMatrix();
}

inline Eigen::Vector3d axis_angle_from_rotation(const Eigen::Matrix3d& r) {
  const Eigen::AngleAxisd aa(r);
  return aa.angle() * aa.axis();
}

/// Angle of the relative rotation a^T b, in radians.
inline double rotation_angle_between(const Eigen::Matrix3d& a, const Eigen::Matrix3d& b) {
  const double c = std::clamp(((a.transpose() * b).trace() - 1.0) / 2.0, -1.0, 1.0);
  return std::acos(c);
}

/// Projects a camera-frame point. Throws DomainError when the point is not
/// imageable (non-positive depth).
inline Eigen::Vector2d project_camera_point(const Intrinsics& intr, const Eigen::Vector3d& pc) {
  if (!(pc.z() > 0.0)) throw DomainError("point not imageable: non-positive depth");
  const double rho = std::hypot(pc.x(), pc.y());
  if (rho == 0.0) return {intr.cx, intr.cy};
  const double r_u = intr.f * rho / pc.z();
  const double r_d = intr.forward(r_u);
  const double scale = r_d / rho;
  return {intr.cx + scale * pc.x(), intr.cy + scale * pc.y()};
}

/// Pinhole projection composed with the radial mapping.
inline Eigen::Vector2d project(const Intrinsics& intr, const Pose& pose, const Eigen::Vector3d& p) {
  return project_camera_point(intr, pose.apply(p));
}

/// Undistorted normalized image coordinates (x/z, y/z) of a pixel.
inline Eigen::Vector2d undistort_normalized(const Intrinsics& intr, const Eigen::Vector2d& pixel) {
  const Eigen::Vector2d d(pixel.x() - intr.cx, pixel.y() - intr.cy);
  const double r_d = d.norm();
  if (r_d == 0.0) return Eigen::Vector2d::Zero();
  const double r_u = intr.inverse(r_d);
  return d * (r_u / (r_d * intr.f));
}

/// Unit viewing ray of a pixel.
inline Eigen::Vector3d unproject(const Intrinsics& intr, const Eigen::Vector2d& pixel) {
  const Eigen::Vector2d n = undistort_normalized(intr, pixel);
  return Eigen::Vector3d(n.x(), n.y(), 1.0).normalized();
}

namespace detail {

/// Similarity transform moving the centroid to the origin with mean distance sqrt(2).
inline Eigen::Matrix3d hartley_normalizer(std::span<const Eigen::Vector2d> pts) {
  Eigen::Vector2d centroid = Eigen::Vector2d::Zero();
  for (const auto& p : pts) centroid += p;
  centroid /= static_cast<double>(pts.size());
  double mean_dist = 0.0;
  for (const auto& p : pts) mean_dist += (p - centroid).norm();
  mean_dist /= static_cast<double>(pts.size());
  if (!(mean_dist > 0.0)) throw EstimationError("homography: all points coincide");
  const double s = std::sqrt(2.0) / mean_dist;
  Eigen::Matrix3d t;
  t << s, 0, -s * centroid.x(), 0, s, -s * centroid.y(), 0, 0, 1;
  return t;
}

}  // namespace detail

/// Normalized DLT homography with dst ~ H * src. Requires >= 4 points in
/// general position.
inline Eigen::Matrix3d estimate_homography(std::span<const Eigen::Vector2d> src,
                                           std::span<const Eigen::Vector2d> dst) {
  if (src.size() != dst.size()) throw EstimationError("homography: point count mismatch");
  const auto n = src.size();
  if (n < 4) throw EstimationError("homography: at least 4 correspondences are required");

  const Eigen::Matrix3d ts = detail::hartley_normalizer(src);
  const Eigen::Matrix3d td = detail::hartley_normalizer(dst);

  Eigen::MatrixXd a(2 * n, 9);
  for (size_t i = 0; i < n; ++i) {
    const Eigen::Vector3d s = ts * src[i].homogeneous();
    const Eigen::Vector3d d = td * dst[i].homogeneous();
    const auto r = static_cast<Eigen::Index>(2 * i);
    a.row(r) << 0, 0, 0, -s.x(), -s.y(), -1, d.y() * s.x(), d.y() * s.y(), d.y();
    a.row(r + 1) << s.x(), s.y(), 1, 0, 0, 0, -d.x() * s.x(), -d.x() * s.y(), -d.x();
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(a, Eigen::ComputeFullV);
  const auto& sv = svd.singularValues();
  // Eight constraints are needed; a second (near-)null direction means the
  // points are collinear or otherwise degenerate.
  if (sv(7) <= 1e-10 * sv(0)) {
    throw EstimationError("homography: degenerate point configuration (rank-deficient DLT system)");
  }
  const Eigen::VectorXd h = svd.matrixV().col(8);
  Eigen::Matrix3d hn;
  hn << h(0), h(1), h(2), h(3), h(4), h(5), h(6), h(7), h(8);
  Eigen::Matrix3d hm = td.inverse() * hn * ts;
  if (hm(2, 2) != 0.0) hm /= hm(2, 2);
  return hm;
}

namespace detail {

inline double pose_cost(const Intrinsics& intr, const Pose& pose,
                        std::span<const Eigen::Vector3d> world,
                        std::span<const Eigen::Vector2d> pixels) {
  double sum = 0.0;
  try {
    for (size_t j = 0; j < world.size(); ++j) {
      sum += (project(intr, pose, world[j]) - pixels[j]).squaredNorm();
    }
  } catch (const DomainError&) {
    return std::numeric_limits<double>::infinity();
  }
  return std::isfinite(sum) ? sum : std::numeric_limits<double>::infinity();
}

inline Pose perturb_pose(const Pose& pose, const Eigen::Matrix<double, 6, 1>& delta) {
  Pose out;
  out.R = orthonormalize(rotation_from_axis_angle(delta.head<3>()) * pose.R);
  out.t = pose.t + delta.tail<3>();
  return out;
}

/// Gauss-Newton on (axis-angle, translation) minimizing squared pixel
/// reprojection, with step halving whenever the cost would increase.
inline Pose refine_pose(const Intrinsics& intr, Pose pose, std::span<const Eigen::Vector3d> world,
                        std::span<const Eigen::Vector2d> pixels, int max_iters = 20) {
  const auto m = static_cast<Eigen::Index>(world.size());
  double cost = pose_cost(intr, pose, world, pixels);
  for (int it = 0; it < max_iters && std::isfinite(cost); ++it) {
    Eigen::MatrixXd jac(2 * m, 6);
    Eigen::VectorXd res(2 * m);
    for (Eigen::Index j = 0; j < m; ++j) {
      res.segment<2>(2 * j) = project(intr, pose, world[j]) - pixels[j];
    }
    const double scale = std::max(1.0, pose.t.norm());
    for (int k = 0; k < 6; ++k) {
      const double h = (k < 3 ? 1e-6 : 1e-6 * scale);
      Eigen::Matrix<double, 6, 1> d = Eigen::Matrix<double, 6, 1>::Zero();
      d(k) = h;
      const Pose plus = perturb_pose(pose, d);
      d(k) = -h;
      const Pose minus = perturb_pose(pose, d);
      try {
        for (Eigen::Index j = 0; j < m; ++j) {
          jac.block<2, 1>(2 * j, k) =
              (project(intr, plus, world[j]) - project(intr, minus, world[j])) / (2.0 * h);
        }
      } catch (const DomainError&) {
        return pose;
      }
    }
    const Eigen::VectorXd grad = jac.transpose() * res;
    if (grad.lpNorm<Eigen::Infinity>() < 1e-12) break;
    const Eigen::Matrix<double, 6, 1> step =
        (jac.transpose() * jac).ldlt().solve(-grad);
    if (!step.allFinite()) break;

    double alpha = 1.0;
    bool accepted = false;
    for (int ls = 0; ls < 30; ++ls, alpha *= 0.5) {
      const Pose trial = perturb_pose(pose, alpha * step);
      const double c = pose_cost(intr, trial, world, pixels);
      if (c < cost) {
        pose = trial;
        cost = c;
        accepted = true;
        break;
      }
    }
    if (!accepted || step.norm() * alpha < 1e-15 * scale) break;
  }
  return pose;
}

}  // namespace detail

/// Planar target pose from one image: DLT homography between board XY and
/// undistorted normalized coordinates, decomposed into [r1 r2 t], then
/// refined on pixel reprojection error.
inline Pose estimate_planar_pose(const Intrinsics& intr, const BoardSpec& board,
                                 std::span<const Eigen::Vector2d> pixels) {
  validate(board);
  const auto world = board_points(board);
  if (pixels.size() != world.size()) {
    throw EstimationError("pose: expected " + std::to_string(world.size()) + " points, got " +
                          std::to_string(pixels.size()));
  }
  if (pixels.size() < 4) throw EstimationError("pose: at least 4 points are required");

  std::vector<Eigen::Vector2d> plane(world.size());
  std::vector<Eigen::Vector2d> normalized(world.size());
  try {
    for (size_t j = 0; j < world.size(); ++j) {
      plane[j] = world[j].head<2>();
      normalized[j] = undistort_normalized(intr, pixels[j]);
    }
  } catch (const DomainError& e) {
    throw EstimationError(std::string("pose: control point outside the model domain: ") + e.what());
  }

  const Eigen::Matrix3d h = estimate_homography(plane, normalized);
  const double norm1 = h.col(0).norm();
  const double norm2 = h.col(1).norm();
  if (!(norm1 > 0.0 && norm2 > 0.0)) throw EstimationError("pose: degenerate homography");
  double s = 2.0 / (norm1 + norm2);
  if (h(2, 2) * s < 0.0) s = -s;  // board must lie in front of the camera

  Eigen::Matrix3d r;
  r.col(0) = s * h.col(0);
  r.col(1) = s * h.col(1);
  r.col(2) = r.col(0).cross(r.col(1));
  Pose pose;
  pose.R = orthonormalize(r);
  pose.t = s * h.col(2);

  pose = detail::refine_pose(intr, pose, world, pixels);
  if (!pose.R.allFinite() || !pose.t.allFinite()) throw EstimationError("pose: non-finite estimate");
  return pose;
}

}  // namespace fovcalib
