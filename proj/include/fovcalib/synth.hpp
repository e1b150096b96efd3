#pragma once

#include <Eigen/Core>
#include <Eigen/Geometry>

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <string>
#include <vector>

#include "fovcalib/error.hpp"
#include "fovcalib/geometry.hpp"
#include "fovcalib/imaging.hpp"
#include "fovcalib/model.hpp"

namespace fovcalib {

/// SplitMix64 stream. Output depends only on the seed, so generated data is
/// identical across platforms and standard libraries.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : state_(seed) {}

  /// Independent stream for a sub-task (e.g. one image) of a seeded job.
  static CounterRng derived(std::uint64_t seed, std::uint64_t stream) {
    CounterRng mixer(seed ^ (0xD1B54A32D192ED03ULL * (stream + 1)));
    return CounterRng(mixer.next());
  }

  std::uint64_t next() {
    std::uint64_t z = (state_ += 0x9E3779B97F4A7C15ULL);
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Standard normal via Box-Muller (one variate per call).
  double normal() {
    const double u1 = 1.0 - uniform();  // (0, 1]
    const double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * kPi * u2);
  }

 private:
  std::uint64_t state_;
};

/// Spec that a camera with the given intrinsics would publish: the angles
/// subtended by the image half-extents after undistortion.
inline CameraSpec derive_spec(const Intrinsics& intr, int width, int height) {
  if (width < 1 || height < 1) throw DomainError("derive_spec: image size must be positive");
  if (!(intr.f > 0.0)) throw DomainError("derive_spec: focal length must be positive");
  CameraSpec spec;
  spec.name = "synthetic";
  spec.width = width;
  spec.height = height;
  spec.model = intr.model;
  spec.fov_h_deg = rad_to_deg(2.0 * std::atan(intr.inverse(width / 2.0) / intr.f));
  spec.fov_v_deg = rad_to_deg(2.0 * std::atan(intr.inverse(height / 2.0) / intr.f));
  return spec;
}

struct SynthScenario {
  Intrinsics intrinsics;
  BoardSpec board;
  std::vector<Pose> poses;
  double noise_sigma = 0.0;
  std::uint64_t seed = 0;
};

namespace detail {

inline bool board_in_frame(const Intrinsics& intr, const Pose& pose,
                           const std::vector<Eigen::Vector3d>& world) {
  for (const auto& p : world) {
    const Eigen::Vector3d pc = pose.apply(p);
    if (!(pc.z() > 0.0)) return false;
    const Eigen::Vector2d px = project_camera_point(intr, pc);
    if (!(px.x() >= 0.0 && px.x() <= intr.width - 1.0 && px.y() >= 0.0 && px.y() <= intr.height - 1.0)) {
      return false;
    }
  }
  return true;
}

}  // namespace detail

/// Random board poses: depth uniform in [0.5, 2] times the depth at which the
/// board would span the image width, up to 40 degrees off-frontal, board
/// centre aimed at a random pixel of the central region. Rejection-sampled
/// until every corner is inside the frame.
inline std::vector<Pose> random_poses(const Intrinsics& intr, const BoardSpec& board, int count,
                                      std::uint64_t seed) {
  validate(intr);
  validate(board);
  const auto world = board_points(board);
  const double bw = (board.cols - 1) * board.square_size;
  const double bh = (board.rows - 1) * board.square_size;
  const double spanning_depth = intr.f * bw / intr.width;
  const Eigen::Vector3d board_centre(bw / 2.0, bh / 2.0, 0.0);

  std::vector<Pose> poses;
  for (int i = 0; i < count; ++i) {
    CounterRng rng = CounterRng::derived(seed, static_cast<std::uint64_t>(i));
    bool placed = false;
    for (int attempt = 0; attempt < 10000 && !placed; ++attempt) {
      const double depth = spanning_depth * rng.uniform(0.5, 2.0);
      const double tilt = deg_to_rad(rng.uniform(0.0, 40.0));
      const double phi = rng.uniform(0.0, 2.0 * kPi);
      const double roll = deg_to_rad(rng.uniform(-15.0, 15.0));
      const Eigen::Matrix3d r =
          (Eigen::AngleAxisd(roll, Eigen::Vector3d::UnitZ()) *
           Eigen::AngleAxisd(tilt, Eigen::Vector3d(std::cos(phi), std::sin(phi), 0.0)))
              .toRotationMatrix();
      const Eigen::Vector2d aim(intr.cx + rng.uniform(-0.35, 0.35) * intr.width,
                                intr.cy + rng.uniform(-0.35, 0.35) * intr.height);
      const Eigen::Vector3d ray = unproject(intr, aim);
      const Eigen::Vector3d centre = ray / ray.z() * depth;
      Pose pose{r, centre - r * board_centre};
      if (detail::board_in_frame(intr, pose, world)) {
        poses.push_back(pose);
        placed = true;
      }
    }
    if (!placed) {
      throw DomainError("random_poses: could not place board for pose " + std::to_string(i));
    }
  }
  return poses;
}

inline std::string synth_image_name(size_t i) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "img_%03zu", i);
  return buf;
}

/// Projects the board through each pose and adds i.i.d. Gaussian pixel noise
/// (per image stream derived from the seed).
inline CorrespondenceSet generate_correspondences(const SynthScenario& sc) {
  validate(sc.intrinsics);
  validate(sc.board);
  if (!(sc.noise_sigma >= 0.0)) throw DomainError("scenario: noise_sigma must be non-negative");
  if (sc.poses.empty()) throw DomainError("scenario: at least one pose is required");

  const auto world = board_points(sc.board);
  CorrespondenceSet data{sc.board, sc.intrinsics.width, sc.intrinsics.height, {}};
  for (size_t i = 0; i < sc.poses.size(); ++i) {
    if (!detail::board_in_frame(sc.intrinsics, sc.poses[i], world)) {
      throw DomainError("scenario: pose " + std::to_string(i) +
                        " places a board corner outside the image or behind the camera");
    }
    CounterRng rng = CounterRng::derived(sc.seed ^ 0x5EEDULL, i);
    ImagePoints img{synth_image_name(i), {}};
    img.points.reserve(world.size());
    for (const auto& p : world) {
      Eigen::Vector2d px = project(sc.intrinsics, sc.poses[i], p);
      if (sc.noise_sigma > 0.0) {
        const double nx = rng.normal();
        const double ny = rng.normal();
        px += sc.noise_sigma * Eigen::Vector2d(nx, ny);
      }
      img.points.push_back(px);
    }
    data.images.push_back(std::move(img));
  }
  return data;
}

/// Scenario with random poses (see random_poses).
inline SynthScenario random_scenario(const Intrinsics& intr, const BoardSpec& board, int images,
                                     double noise_sigma, std::uint64_t seed) {
  return SynthScenario{intr, board, random_poses(intr, board, images, seed), noise_sigma, seed};
}

/// White image with black straight lines every `spacing` pixels, aligned on
/// the image centre.
inline Image grid_image(int width, int height, int spacing, int thickness = 3, int channels = 1) {
  if (spacing < 2) throw DomainError("grid_image: spacing must be >= 2");
  Image img(width, height, channels, 255);
  const int cx = width / 2;
  const int cy = height / 2;
  auto on_line = [&](int coord, int centre) {
    int d = (coord - centre) % spacing;
    if (d < 0) d += spacing;
    return d < thickness / 2 + 1 || spacing - d <= thickness / 2;
  };
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      if (on_line(x, cx) || on_line(y, cy)) {
        for (int c = 0; c < channels; ++c) img.at(x, y, c) = 0;
      }
    }
  }
  return img;
}

/// Renders what a camera with `intr` would record of a scene whose pinhole
/// image (same f and principal point) is `src`: each output pixel samples
/// src at the undistorted radius.
inline Image distort_image(const Image& src, const Intrinsics& intr) {
  validate(intr);
  if (src.width != intr.width || src.height != intr.height) {
    throw DomainError("distort_image: image size does not match intrinsics");
  }
  Image out(src.width, src.height, src.channels);
  for (int v = 0; v < src.height; ++v) {
    for (int u = 0; u < src.width; ++u) {
      const double dx = u - intr.cx;
      const double dy = v - intr.cy;
      const double r_d = std::hypot(dx, dy);
      double k = 1.0;
      if (r_d > 0.0) {
        try {
          k = intr.inverse(r_d) / r_d;
        } catch (const DomainError&) {
          for (int c = 0; c < src.channels; ++c) out.at(u, v, c) = 0;
          continue;
        }
      }
      sample_bilinear(src, intr.cx + dx * k, intr.cy + dy * k, &out.at(u, v));
    }
  }
  return out;
}

}  // namespace fovcalib
