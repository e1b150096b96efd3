#pragma once

#include <algorithm>
#include <array>
#include <cctype>
#include <cmath>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>
#include <vector>

#include "fovcalib/error.hpp"
#include "fovcalib/model.hpp"

namespace fovcalib {

/// 8-bit image, row-major, interleaved channels.
struct Image {
  int width = 0;
  int height = 0;
  int channels = 1;
  std::vector<std::uint8_t> data;

  Image() = default;
  Image(int w, int h, int c, std::uint8_t fill = 0)
      : width(w), height(h), channels(c),
        data(static_cast<size_t>(w) * static_cast<size_t>(h) * static_cast<size_t>(c), fill) {
    if (w < 1 || h < 1) throw DomainError("image: size must be positive");
    if (c != 1 && c != 3) throw DomainError("image: channels must be 1 or 3");
  }

  std::uint8_t& at(int x, int y, int ch = 0) {
    return data[(static_cast<size_t>(y) * width + x) * channels + ch];
  }
  std::uint8_t at(int x, int y, int ch = 0) const {
    return data[(static_cast<size_t>(y) * width + x) * channels + ch];
  }

  bool operator==(const Image&) const = default;
};

namespace detail {

inline int read_pnm_int(std::istream& in) {
  int c = in.peek();
  while (c == '#' || std::isspace(c)) {
    if (c == '#') {
      std::string line;
      std::getline(in, line);
    } else {
      in.get();
    }
    c = in.peek();
  }
  int v = 0;
  if (!(in >> v)) throw FormatError("ppm: malformed header");
  return v;
}

}  // namespace detail

/// Reads binary PPM (P6) or PGM (P5) with maxval 255.
inline Image read_ppm(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw FormatError("ppm: cannot open " + path.string());
  std::string magic(2, '\0');
  in.read(magic.data(), 2);
  int channels = 0;
  if (magic == "P6") {
    channels = 3;
  } else if (magic == "P5") {
    channels = 1;
  } else {
    throw FormatError("ppm: unsupported magic in " + path.string() + " (expected P6 or P5)");
  }
  const int w = detail::read_pnm_int(in);
  const int h = detail::read_pnm_int(in);
  const int maxval = detail::read_pnm_int(in);
  if (w < 1 || h < 1) throw FormatError("ppm: invalid size");
  if (maxval != 255) throw FormatError("ppm: only maxval 255 is supported");
  if (!std::isspace(in.get())) throw FormatError("ppm: malformed header");
  Image img(w, h, channels);
  in.read(reinterpret_cast<char*>(img.data.data()), static_cast<std::streamsize>(img.data.size()));
  if (in.gcount() != static_cast<std::streamsize>(img.data.size())) {
    throw FormatError("ppm: truncated pixel data in " + path.string());
  }
  return img;
}

/// Writes P6 (3 channels) or P5 (1 channel), maxval 255, no comments.
inline void write_ppm(const std::filesystem::path& path, const Image& img) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw FormatError("ppm: cannot write " + path.string());
  out << (img.channels == 3 ? "P6" : "P5") << '\n'
      << img.width << ' ' << img.height << '\n'
      << 255 << '\n';
  out.write(reinterpret_cast<const char*>(img.data.data()),
            static_cast<std::streamsize>(img.data.size()));
  if (!out) throw FormatError("ppm: write failed for " + path.string());
}

/// Source coordinates in the distorted image for every output pixel.
/// Out-of-domain pixels hold NaN.
struct RectifyMap {
  int out_width = 0;
  int out_height = 0;
  int src_width = 0;
  int src_height = 0;
  double new_f = 0.0;
  std::vector<std::array<double, 2>> map;

  const std::array<double, 2>& at(int x, int y) const {
    return map[static_cast<size_t>(y) * out_width + x];
  }
  static bool is_sentinel(const std::array<double, 2>& p) { return std::isnan(p[0]); }
};

/// Focal length for which the whole distorted frame (its corners) lands
/// inside an output of the given size.
inline double fit_all_focal(const Intrinsics& intr, int out_width, int out_height) {
  validate(intr);
  const double r_u = intr.inverse(intr.max_image_radius());
  const double out_radius = 0.5 * std::hypot(static_cast<double>(out_width), static_cast<double>(out_height));
  return intr.f * out_radius / r_u;
}

/// For each output pixel of a pinhole view with focal length new_f centred at
/// (out_width/2, out_height/2), the distorted-image position it samples.
inline RectifyMap build_rectify_map(const Intrinsics& intr, int out_width, int out_height, double new_f) {
  validate(intr);
  if (out_width < 1 || out_height < 1) throw DomainError("rectify map: output size must be positive");
  if (!(new_f > 0.0)) throw DomainError("rectify map: new_f must be positive");

  RectifyMap m{out_width, out_height, intr.width, intr.height, new_f, {}};
  m.map.resize(static_cast<size_t>(out_width) * static_cast<size_t>(out_height));
  const double ocx = out_width / 2.0;
  const double ocy = out_height / 2.0;
  const double scale = intr.f / new_f;
  const double nan = std::numeric_limits<double>::quiet_NaN();

  for (int v = 0; v < out_height; ++v) {
    for (int u = 0; u < out_width; ++u) {
      const double dx = u - ocx;
      const double dy = v - ocy;
      const double r_out = std::hypot(dx, dy);
      auto& dst = m.map[static_cast<size_t>(v) * out_width + u];
      if (r_out == 0.0) {
        dst = {intr.cx, intr.cy};
        continue;
      }
      const double r_u = r_out * scale;
      const double r_d = intr.forward(r_u);
      if (!std::isfinite(r_d)) {
        dst = {nan, nan};
        continue;
      }
      const double k = r_d / r_u * scale;
      dst = {intr.cx + dx * k, intr.cy + dy * k};
    }
  }
  return m;
}

inline RectifyMap build_rectify_map(const Intrinsics& intr) {
  return build_rectify_map(intr, intr.width, intr.height, intr.f);
}

/// Bilinear sample at continuous (x, y) with pixel centres on integers. The
/// image covers [-0.5, W - 0.5] x [-0.5, H - 0.5] (edge pixels replicated
/// over the outer half pixel); outside it the sample is black.
inline void sample_bilinear(const Image& src, double x, double y, std::uint8_t* out) {
  if (!(x >= -0.5 && x <= src.width - 0.5 && y >= -0.5 && y <= src.height - 0.5)) {
    for (int c = 0; c < src.channels; ++c) out[c] = 0;
    return;
  }
  const double cxp = std::clamp(x, 0.0, static_cast<double>(src.width - 1));
  const double cyp = std::clamp(y, 0.0, static_cast<double>(src.height - 1));
  const int x0 = static_cast<int>(std::floor(cxp));
  const int y0 = static_cast<int>(std::floor(cyp));
  const int x1 = std::min(x0 + 1, src.width - 1);
  const int y1 = std::min(y0 + 1, src.height - 1);
  const double ax = cxp - x0;
  const double ay = cyp - y0;
  for (int c = 0; c < src.channels; ++c) {
    const double top = (1.0 - ax) * src.at(x0, y0, c) + ax * src.at(x1, y0, c);
    const double bottom = (1.0 - ax) * src.at(x0, y1, c) + ax * src.at(x1, y1, c);
    const double v = (1.0 - ay) * top + ay * bottom;
    out[c] = static_cast<std::uint8_t>(std::clamp(std::lround(v), 0L, 255L));
  }
}

/// Resamples `src` through `map`; sentinel pixels are black.
inline Image remap(const Image& src, const RectifyMap& map) {
  if (src.width != map.src_width || src.height != map.src_height) {
    throw DomainError("remap: image is " + std::to_string(src.width) + "x" +
                      std::to_string(src.height) + " but the map was built for " +
                      std::to_string(map.src_width) + "x" + std::to_string(map.src_height));
  }
  Image out(map.out_width, map.out_height, src.channels);
  for (int v = 0; v < map.out_height; ++v) {
    for (int u = 0; u < map.out_width; ++u) {
      const auto& p = map.at(u, v);
      std::uint8_t* px = &out.at(u, v);
      if (RectifyMap::is_sentinel(p)) {
        for (int c = 0; c < src.channels; ++c) px[c] = 0;
      } else {
        sample_bilinear(src, p[0], p[1], px);
      }
    }
  }
  return out;
}

}  // namespace fovcalib
