#pragma once

#include <cmath>
#include <compare>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>

namespace floorloc {

// ---------------------------------------------------------------------------
// Semantic labels
// ---------------------------------------------------------------------------

/// Cell / ray label. Codes 1..3 are structure; 0 is free space and never a
/// legal ray-hit label. `no_hit` marks a ray that left the range or the grid.
enum class SemanticClass : std::uint8_t {
  empty = 0,
  wall = 1,
  window = 2,
  door = 3,
  no_hit = 255,
};

/// Number of named structural classes (C).
inline constexpr int kNumClasses = 3;

constexpr int code_of(SemanticClass c) noexcept { return static_cast<int>(c); }

constexpr bool is_structural(SemanticClass c) noexcept {
  const int v = code_of(c);
  return v >= 1 && v <= kNumClasses;
}

/// Maps a file code to a grid label. Only 0..C are legal in a floorplan.
inline std::optional<SemanticClass> semantic_class_from_code(long long code) {
  if (code < 0 || code > kNumClasses) return std::nullopt;
  return static_cast<SemanticClass>(code);
}

/// Ray label codes additionally allow the no-hit sentinel.
inline std::optional<SemanticClass> ray_label_from_code(long long code) {
  if (code == code_of(SemanticClass::no_hit)) return SemanticClass::no_hit;
  if (code >= 1 && code <= kNumClasses) return static_cast<SemanticClass>(code);
  return std::nullopt;
}

constexpr std::string_view to_string(SemanticClass c) noexcept {
  switch (c) {
    case SemanticClass::empty: return "empty";
    case SemanticClass::wall: return "wall";
    case SemanticClass::window: return "window";
    case SemanticClass::door: return "door";
    case SemanticClass::no_hit: return "no_hit";
  }
  return "?";
}

// ---------------------------------------------------------------------------
// Errors
// ---------------------------------------------------------------------------

enum class ErrorCode {
  parse,
  dimension_mismatch,
  unknown_code,
  degenerate_polygon,
  out_of_bounds,
  origin_outside_grid,
  pose_in_structure,
  invalid_argument,
  length_mismatch,
  no_free_poses,
  grid_mismatch,
  shape_mismatch,
  empty_volume,
  io,
};

constexpr std::string_view to_string(ErrorCode c) noexcept {
  switch (c) {
    case ErrorCode::parse: return "parse";
    case ErrorCode::dimension_mismatch: return "dimension-mismatch";
    case ErrorCode::unknown_code: return "unknown-code";
    case ErrorCode::degenerate_polygon: return "degenerate-polygon";
    case ErrorCode::out_of_bounds: return "out-of-bounds";
    case ErrorCode::origin_outside_grid: return "origin-outside-grid";
    case ErrorCode::pose_in_structure: return "pose-in-structure";
    case ErrorCode::invalid_argument: return "invalid-argument";
    case ErrorCode::length_mismatch: return "length-mismatch";
    case ErrorCode::no_free_poses: return "no-free-poses";
    case ErrorCode::grid_mismatch: return "grid-mismatch";
    case ErrorCode::shape_mismatch: return "shape-mismatch";
    case ErrorCode::empty_volume: return "empty-volume";
    case ErrorCode::io: return "io";
  }
  return "?";
}

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// ---------------------------------------------------------------------------
// Geometry
// ---------------------------------------------------------------------------

inline constexpr double kPi = 3.14159265358979323846;

constexpr double deg_to_rad(double d) noexcept { return d * kPi / 180.0; }

/// Wraps an angle in degrees to [0, 360).
inline double wrap_degrees(double deg) {
  double r = std::fmod(deg, 360.0);
  if (r < 0.0) r += 360.0;
  if (r >= 360.0) r -= 360.0;
  return r;
}

/// Absolute wrapped difference in [0, 180].
inline double angular_distance_deg(double a, double b) {
  const double d = wrap_degrees(a - b);
  return d > 180.0 ? 360.0 - d : d;
}

struct Point2 {
  double x = 0.0;
  double y = 0.0;
  friend bool operator==(const Point2&, const Point2&) = default;
};

/// Camera pose in the floorplan frame: metres and degrees (counter-clockwise
/// from +x toward +y).
struct Pose {
  double x = 0.0;
  double y = 0.0;
  double theta_deg = 0.0;

  Point2 position() const noexcept { return {x, y}; }
  friend bool operator==(const Pose&, const Pose&) = default;
};

inline double translation_distance(const Pose& a, const Pose& b) {
  return std::hypot(a.x - b.x, a.y - b.y);
}

struct CellIndex {
  int x = 0;
  int y = 0;
  friend auto operator<=>(const CellIndex&, const CellIndex&) = default;
};

/// Raster geometry of a floorplan. Row `y` of the file is the y-th row of
/// cells; metric y grows with the row index.
struct GridSpec {
  int width_cells = 0;
  int height_cells = 0;
  double resolution = 0.1;
  Point2 origin{};

  friend bool operator==(const GridSpec&, const GridSpec&) = default;

  void validate() const {
    if (!(resolution > 0.0) || !std::isfinite(resolution))
      throw Error(ErrorCode::invalid_argument, "resolution must be positive");
    if (width_cells < 1 || height_cells < 1)
      throw Error(ErrorCode::invalid_argument, "grid must have at least one cell per axis");
  }

  std::size_t cell_count() const noexcept {
    return static_cast<std::size_t>(width_cells) * static_cast<std::size_t>(height_cells);
  }

  double extent_x() const noexcept { return width_cells * resolution; }
  double extent_y() const noexcept { return height_cells * resolution; }

  bool in_bounds(CellIndex c) const noexcept {
    return c.x >= 0 && c.y >= 0 && c.x < width_cells && c.y < height_cells;
  }

  /// True for points in the half-open metric rectangle covered by the grid.
  bool contains(Point2 p) const noexcept {
    const double gx = (p.x - origin.x) / resolution;
    const double gy = (p.y - origin.y) / resolution;
    return gx >= 0.0 && gy >= 0.0 && gx < width_cells && gy < height_cells;
  }

  CellIndex cell_of(Point2 p) const noexcept {
    return {static_cast<int>(std::floor((p.x - origin.x) / resolution)),
            static_cast<int>(std::floor((p.y - origin.y) / resolution))};
  }

  Point2 center_of(CellIndex c) const noexcept {
    return {origin.x + (c.x + 0.5) * resolution, origin.y + (c.y + 0.5) * resolution};
  }

  std::size_t linear(CellIndex c) const noexcept {
    return static_cast<std::size_t>(c.y) * static_cast<std::size_t>(width_cells) +
           static_cast<std::size_t>(c.x);
  }
};

}  // namespace floorloc
