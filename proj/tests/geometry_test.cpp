#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "fovcalib/geometry.hpp"
#include "fovcalib/synth.hpp"

namespace fovcalib {
namespace {

Intrinsics camera(double f, double omega, int w = 1280, int h = 720) {
  return Intrinsics{f, w / 2.0, h / 2.0, omega, RadialModel::Equidistance, w, h};
}

Pose shifted(double z) { return Pose{Eigen::Matrix3d::Identity(), Eigen::Vector3d(0, 0, z)}; }

TEST(Project, OnAxisHitsPrincipalPoint) {
  const auto p = project(camera(900, 0), shifted(10), Eigen::Vector3d::Zero());
  EXPECT_EQ(p, Eigen::Vector2d(640, 360));
}

TEST(Project, PinholeClosedForm) {
  const auto p = project(camera(900, 0), shifted(10), Eigen::Vector3d(1, 0, 0));
  EXPECT_NEAR(p.x(), 640 + 90, 1e-12);
  EXPECT_NEAR(p.y(), 360, 1e-12);

  // Random points against u = cx + f X/Z, v = cy + f Y/Z.
  std::mt19937_64 rng(1);
  std::uniform_real_distribution<double> u(-1, 1);
  const auto intr = camera(750, 0);
  for (int i = 0; i < 200; ++i) {
    const Eigen::Vector3d pc(u(rng), u(rng), 2 + u(rng));
    const auto px = project_camera_point(intr, pc);
    EXPECT_NEAR(px.x(), 640 + 750 * pc.x() / pc.z(), 1e-9);
    EXPECT_NEAR(px.y(), 360 + 750 * pc.y() / pc.z(), 1e-9);
  }
}

TEST(Project, EquidistanceRadius) {
  // atan(0.001 * 90) / 0.001 (mpmath).
  const auto p = project(camera(900, 0.001), shifted(10), Eigen::Vector3d(1, 0, 0));
  EXPECT_NEAR(p.x(), 640 + 89.758174189950523, 1e-9);
  EXPECT_NEAR(p.y(), 360, 1e-12);
}

TEST(Project, BehindCameraIsNotImageable) {
  EXPECT_THROW(project(camera(900, 0.001), shifted(-1), Eigen::Vector3d::Zero()), DomainError);
}

TEST(Unproject, Examples) {
  const auto intr = camera(900, 0);
  EXPECT_EQ(unproject(intr, {640, 360}), Eigen::Vector3d(0, 0, 1));
  const auto ray = unproject(intr, {640 + 900, 360});
  EXPECT_LT((ray - Eigen::Vector3d(1, 0, 1).normalized()).norm(), 1e-15);
}

TEST(Unproject, RoundTripRandomPixels) {
  const auto intr = camera(870.9, 0.001239);
  std::mt19937_64 rng(2);
  std::uniform_real_distribution<double> ux(0, 1279), uy(0, 719);
  for (int i = 0; i < 1000; ++i) {
    const Eigen::Vector2d px(ux(rng), uy(rng));
    const Eigen::Vector3d ray = unproject(intr, px);
    EXPECT_NEAR(ray.norm(), 1.0, 1e-12);
    const auto back = project_camera_point(intr, ray);
    EXPECT_LT((back - px).norm(), 1e-6);
  }
}

TEST(Unproject, ParallelToCameraFrameDirection) {
  const auto intr = camera(600, 0.0015);
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-0.9, 0.9);
  for (int i = 0; i < 500; ++i) {
    const Eigen::Vector3d pc(u(rng), 0.5 * u(rng), 1.0 + std::abs(u(rng)));
    const auto ray = unproject(intr, project_camera_point(intr, pc));
    const double angle = std::atan2(ray.cross(pc.normalized()).norm(), ray.dot(pc.normalized()));
    EXPECT_LT(angle, 1e-9);
  }
}

TEST(Homography, RecoversKnownMapping) {
  Eigen::Matrix3d h;
  h << 1.2, 0.1, 30, -0.05, 0.9, 12, 1e-4, 2e-4, 1;
  std::vector<Eigen::Vector2d> src, dst;
  for (int i = 0; i < 4; ++i) {
    for (int j = 0; j < 3; ++j) {
      src.emplace_back(i * 10.0, j * 10.0);
      dst.push_back((h * src.back().homogeneous()).hnormalized());
    }
  }
  const Eigen::Matrix3d est = estimate_homography(src, dst);
  EXPECT_LT((est - h).cwiseAbs().maxCoeff() / h.cwiseAbs().maxCoeff(), 1e-9);
}

TEST(Homography, DegenerateInputs) {
  std::vector<Eigen::Vector2d> three = {{0, 0}, {1, 0}, {0, 1}};
  EXPECT_THROW(estimate_homography(three, three), EstimationError);
  std::vector<Eigen::Vector2d> line;
  for (int i = 0; i < 8; ++i) line.emplace_back(i, 2.0 * i);
  EXPECT_THROW(estimate_homography(line, line), EstimationError);
}

TEST(PlanarPose, RecoversSyntheticPose) {
  const auto intr = camera(870.9, 0.001239);
  const BoardSpec board{6, 9, 0.03};
  const auto poses = random_poses(intr, board, 20, 42);
  const auto world = board_points(board);
  for (const auto& truth : poses) {
    std::vector<Eigen::Vector2d> px;
    for (const auto& p : world) px.push_back(project(intr, truth, p));
    const Pose est = estimate_planar_pose(intr, board, px);
    EXPECT_LT(rotation_angle_between(est.R, truth.R), 1e-6);
    EXPECT_LT((est.t - truth.t).norm() / truth.t.norm(), 1e-8);
    double sq = 0;
    for (size_t j = 0; j < world.size(); ++j) sq += (project(intr, est, world[j]) - px[j]).squaredNorm();
    EXPECT_LT(std::sqrt(sq / world.size()), 1e-6);
    EXPECT_LT((est.R.transpose() * est.R - Eigen::Matrix3d::Identity()).cwiseAbs().maxCoeff(), 1e-9);
    EXPECT_NEAR(est.R.determinant(), 1.0, 1e-9);
  }
}

TEST(PlanarPose, FrontalBoard) {
  const auto intr = camera(900, 0.0008);
  const BoardSpec board{6, 9, 0.05};
  const Pose truth{Eigen::Matrix3d::Identity(), Eigen::Vector3d(-0.1, -0.05, 1.5)};
  std::vector<Eigen::Vector2d> px;
  for (const auto& p : board_points(board)) px.push_back(project(intr, truth, p));
  const Pose est = estimate_planar_pose(intr, board, px);
  EXPECT_LT((est.t - Eigen::Vector3d(-0.1, -0.05, 1.5)).norm(), 1e-9);
  EXPECT_LT(rotation_angle_between(est.R, Eigen::Matrix3d::Identity()), 1e-9);
}

TEST(PlanarPose, ErrorPaths) {
  const auto intr = camera(900, 0);
  const BoardSpec board{2, 2, 1.0};
  std::vector<Eigen::Vector2d> three = {{1, 1}, {2, 1}, {1, 2}};
  EXPECT_THROW(estimate_planar_pose(intr, board, three), EstimationError);
  std::vector<Eigen::Vector2d> collinear = {{100, 100}, {200, 100}, {300, 100}, {400, 100}};
  EXPECT_THROW(estimate_planar_pose(intr, board, collinear), EstimationError);
}

TEST(BoardPoints, RowMajorOrdering) {
  const auto pts = board_points(BoardSpec{2, 3, 0.5});
  ASSERT_EQ(pts.size(), 6u);
  EXPECT_EQ(pts[1], Eigen::Vector3d(0.5, 0, 0));
  EXPECT_EQ(pts[3], Eigen::Vector3d(0, 0.5, 0));
  EXPECT_THROW(validate(BoardSpec{1, 3, 0.5}), DomainError);
  EXPECT_THROW(validate(BoardSpec{3, 3, 0.0}), DomainError);
}

TEST(CorrespondenceValidation, WrongPointCount) {
  CorrespondenceSet d{BoardSpec{2, 2, 1.0}, 640, 480, {{"a", {{1, 1}, {2, 2}, {3, 3}}}}};
  try {
    validate(d);
    FAIL();
  } catch (const DomainError& e) {
    EXPECT_NE(std::string(e.what()).find("'a'"), std::string::npos);
  }
}

}  // namespace
}  // namespace fovcalib
