#pragma once

// Straightness measurement for a single dark horizontal line in an image.

#include <algorithm>
#include <cmath>
#include <vector>

#include "fovcalib/imaging.hpp"

namespace fovcalib::testdata {

/// White image with one black horizontal line of the given thickness.
inline Image horizontal_line(int width, int height, int row, int thickness = 3) {
  Image img(width, height, 1, 255);
  for (int y = row - thickness / 2; y <= row + thickness / 2; ++y) {
    for (int x = 0; x < width; ++x) img.at(x, y) = 0;
  }
  return img;
}

/// Max distance of per-column darkness centroids (rows y0..y1) from their
/// least-squares line. Columns x0..x1.
inline double line_deviation(const Image& img, int x0, int x1, int y0, int y1) {
  std::vector<double> xs, ys;
  for (int x = x0; x <= x1; ++x) {
    double w_sum = 0.0, wy = 0.0;
    for (int y = y0; y <= y1; ++y) {
      const double w = 255.0 - img.at(x, y);
      w_sum += w;
      wy += w * y;
    }
    if (w_sum > 0.0) {
      xs.push_back(x);
      ys.push_back(wy / w_sum);
    }
  }
  const double n = static_cast<double>(xs.size());
  double mx = 0, my = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    mx += xs[i];
    my += ys[i];
  }
  mx /= n;
  my /= n;
  double sxy = 0, sxx = 0;
  for (size_t i = 0; i < xs.size(); ++i) {
    sxy += (xs[i] - mx) * (ys[i] - my);
    sxx += (xs[i] - mx) * (xs[i] - mx);
  }
  const double slope = sxy / sxx;
  double worst = 0.0;
  for (size_t i = 0; i < xs.size(); ++i) {
    const double resid = ys[i] - (my + slope * (xs[i] - mx));
    worst = std::max(worst, std::abs(resid) / std::sqrt(1.0 + slope * slope));
  }
  return worst;
}

/// 64-bit FNV-1a over the bytes of a file's contents.
inline std::uint64_t fnv1a(const std::vector<std::uint8_t>& bytes) {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (auto b : bytes) {
    h ^= b;
    h *= 0x100000001b3ULL;
  }
  return h;
}

}  // namespace fovcalib::testdata
