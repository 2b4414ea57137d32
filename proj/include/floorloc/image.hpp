#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <string>
#include <vector>

#include "floorloc/floorplan.hpp"
#include "floorloc/probvolume.hpp"

namespace floorloc {

struct GrayImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major
};

struct RgbImage {
  int width = 0;
  int height = 0;
  std::vector<std::uint8_t> pixels;  // row-major, RGB interleaved

  RgbImage(int w, int h) : width(w), height(h), pixels(static_cast<std::size_t>(w) * h * 3, 255) {}

  void set(int x, int y, std::array<std::uint8_t, 3> c) {
    if (x < 0 || y < 0 || x >= width || y >= height) return;
    const std::size_t i = (static_cast<std::size_t>(y) * width + x) * 3;
    pixels[i] = c[0], pixels[i + 1] = c[1], pixels[i + 2] = c[2];
  }
};

/// Per-cell maximum over orientation bins, scaled so the global maximum is
/// 255. Image is W x H with row y of the volume as image row y.
inline GrayImage render_max_projection(const ProbabilityVolume& p) {
  const PoseGrid& g = p.grid();
  std::vector<double> best(g.plane_size(), 0.0);
  for (int b = 0; b < g.orientation_bins; ++b)
    for (int y = 0; y < g.height(); ++y)
      for (int x = 0; x < g.width(); ++x) {
        double& m = best[g.spec.linear({x, y})];
        m = std::max(m, p.at(x, y, b));
      }
  const double top = *std::max_element(best.begin(), best.end());
  GrayImage img{g.width(), g.height(), std::vector<std::uint8_t>(g.plane_size(), 0)};
  if (top > 0.0)
    for (std::size_t i = 0; i < best.size(); ++i)
      img.pixels[i] = static_cast<std::uint8_t>(std::lround(255.0 * best[i] / top));
  return img;
}

namespace detail {

inline void draw_line(RgbImage& img, double x0, double y0, double x1, double y1, std::array<std::uint8_t, 3> c) {
  const int steps = static_cast<int>(std::ceil(std::max(std::abs(x1 - x0), std::abs(y1 - y0)))) + 1;
  for (int s = 0; s <= steps; ++s) {
    const double t = static_cast<double>(s) / steps;
    img.set(static_cast<int>(std::lround(x0 + t * (x1 - x0))), static_cast<int>(std::lround(y0 + t * (y1 - y0))), c);
  }
}

inline void draw_arrow(RgbImage& img, const GridSpec& spec, int scale, const Pose& pose, std::array<std::uint8_t, 3> c) {
  const double px = (pose.x - spec.origin.x) / spec.resolution * scale;
  const double py = (pose.y - spec.origin.y) / spec.resolution * scale;
  const double len = 5.0 * scale;
  const double a = deg_to_rad(pose.theta_deg);
  const double tx = px + len * std::cos(a), ty = py + len * std::sin(a);
  draw_line(img, px, py, tx, ty, c);
  for (double side : {+1.0, -1.0}) {
    const double b = a + kPi + side * deg_to_rad(30.0);
    draw_line(img, tx, ty, tx + 0.4 * len * std::cos(b), ty + 0.4 * len * std::sin(b), c);
  }
  for (int dy = -scale; dy <= scale; ++dy)
    for (int dx = -scale; dx <= scale; ++dx)
      img.set(static_cast<int>(px) + dx, static_cast<int>(py) + dy, c);
}

}  // namespace detail

/// Floorplan raster (wall black, window blue, door orange) with arrows for the
/// prediction (red) and, when given, ground truth (green).
inline RgbImage render_overlay(const SemanticFloorplan& fp, const Pose& pred, const std::optional<Pose>& gt, int scale = 4) {
  const GridSpec& s = fp.spec();
  RgbImage img(s.width_cells * scale, s.height_cells * scale);
  for (int y = 0; y < s.height_cells; ++y)
    for (int x = 0; x < s.width_cells; ++x) {
      std::array<std::uint8_t, 3> c{255, 255, 255};
      switch (fp.at(x, y)) {
        case SemanticClass::wall: c = {0, 0, 0}; break;
        case SemanticClass::window: c = {40, 110, 230}; break;
        case SemanticClass::door: c = {240, 150, 20}; break;
        default: break;
      }
      for (int dy = 0; dy < scale; ++dy)
        for (int dx = 0; dx < scale; ++dx) img.set(x * scale + dx, y * scale + dy, c);
    }
  if (gt) detail::draw_arrow(img, s, scale, *gt, {20, 170, 40});
  detail::draw_arrow(img, s, scale, pred, {220, 20, 20});
  return img;
}

inline std::string encode_pgm(const GrayImage& img) {
  std::string out = "P5\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

inline std::string encode_ppm(const RgbImage& img) {
  std::string out = "P6\n" + std::to_string(img.width) + " " + std::to_string(img.height) + "\n255\n";
  out.append(img.pixels.begin(), img.pixels.end());
  return out;
}

inline void write_binary(const std::string& path, const std::string& bytes) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

}  // namespace floorloc
