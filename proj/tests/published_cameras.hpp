#pragma once

// Published zero-shot results for eleven camera configurations: spec columns,
// perspective focal lengths, omega*, f*, deviation errors and the reference
// focal length from full calibration.

#include <optional>
#include <string>
#include <vector>

#include "fovcalib/model.hpp"

namespace fovcalib::testdata {

struct CameraRow {
  std::string name;
  int width;
  int height;
  double fov_h;
  std::optional<double> fov_v;
  double fx_tilde;
  std::optional<double> fy_tilde;
  double f_tilde;
  double f_tilde_err_pct;
  double omega_star;
  double f_star;
  double f_star_err_pct;
  double f_gt;
  bool wide;

  CameraSpec spec() const { return CameraSpec{name, width, height, fov_h, fov_v, RadialModel::Equidistance}; }
};

inline const std::vector<CameraRow>& published_cameras() {
  static const std::vector<CameraRow> rows = {
      {"C905", 1280, 720, 63.1, std::nullopt, 1042.3, std::nullopt, 1042.3, 1.9, 0.0, 1042.3, 1.9, 1062.3, false},
      {"C922", 1280, 720, 70.42, 43.3, 906.9, 906.9, 906.9, 5.3, 0.0, 907.0, 5.2, 957.2, false},
      {"Hero9(N)", 1920, 1080, 73, 45, 1297.4, 1303.7, 1300.6, 0.9, 0.000152, 1306.6, 1.4, 1288.8, false},
      {"Hero9(L)", 1920, 1080, 92, 61, 927.1, 916.7, 921.9, 0.7, 0.0, 921.9, 0.7, 915.8, false},
      {"SNP-6321", 1280, 720, 62.8, 36.8, 1048.5, 1082.2, 1065.4, 4.2, 0.000570, 1097.7, 1.3, 1112.2, false},
      {"L6013R_1", 1280, 720, 86.5, 47.8, 680.3, 812.4, 746.4, 17.7, 0.001239, 870.9, 4.0, 907.2, true},
      {"L6013R_2", 1280, 720, 86.5, 47.8, 680.3, 812.4, 746.4, 17.7, 0.001239, 870.9, 4.0, 906.9, true},
      {"Hero9(W1)", 1920, 1080, 118, 69, 576.8, 785.7, 681.3, 22.0, 0.001019, 876.0, 0.3, 873.6, true},
      {"Hero9(W2)", 1920, 1440, 122, 94, 532.1, 671.4, 601.8, 27.9, 0.001051, 837.8, 0.4, 834.5, true},
      {"M2025-LE", 1280, 720, 115, 64, 407.7, 576.1, 491.9, 19.9, 0.001589, 648.8, 5.7, 613.9, true},
      {"M2026-LE", 1280, 720, 130, 73, 298.4, 486.5, 392.5, 35.4, 0.001775, 568.8, 6.3, 607.1, true},
  };
  return rows;
}

// Published group averages of the deviation errors (percent).
inline constexpr double kNarrowPerspectiveAvgPct = 2.6;
inline constexpr double kNarrowZeroShotAvgPct = 2.1;
inline constexpr double kWidePerspectiveAvgPct = 23.4;
inline constexpr double kWideZeroShotAvgPct = 3.5;

}  // namespace fovcalib::testdata
