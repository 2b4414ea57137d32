#pragma once

#include <cmath>
#include <limits>
#include <optional>
#include <vector>

#include "floorloc/core.hpp"
#include "floorloc/floorplan.hpp"

namespace floorloc {

inline constexpr double kDefaultMaxRange = 15.0;

/// Equiangular pinhole ray layout. Ray i has bearing offset
/// fov/2 - i * fov/(l-1) relative to the optical axis, so ray 0 is the
/// leftmost image column.
struct CameraModel {
  double fov_deg = 80.0;
  int ray_count = 40;
  double max_range = kDefaultMaxRange;

  friend bool operator==(const CameraModel&, const CameraModel&) = default;

  void validate() const {
    if (!(fov_deg > 0.0 && fov_deg < 180.0)) throw Error(ErrorCode::invalid_argument, "fov must be in (0, 180)");
    if (ray_count < 1) throw Error(ErrorCode::invalid_argument, "ray_count must be >= 1");
    if (!(max_range > 0.0)) throw Error(ErrorCode::invalid_argument, "max_range must be positive");
  }

  double angular_gap() const noexcept { return ray_count > 1 ? fov_deg / (ray_count - 1) : 0.0; }

  double bearing_offset(int i) const noexcept {
    return ray_count > 1 ? fov_deg / 2.0 - i * angular_gap() : 0.0;
  }

  std::vector<double> bearing_offsets() const {
    std::vector<double> out(static_cast<std::size_t>(ray_count));
    for (int i = 0; i < ray_count; ++i) out[static_cast<std::size_t>(i)] = bearing_offset(i);
    return out;
  }
};

struct RayHit {
  double depth = 0.0;
  SemanticClass label = SemanticClass::no_hit;
};

struct RayBundle {
  std::vector<double> depths;
  std::vector<SemanticClass> labels;
  std::optional<Pose> pose;
  std::optional<CameraModel> camera;

  std::size_t size() const noexcept { return depths.size(); }
};

namespace detail {

// Moves a coordinate that sits exactly on a grid line 1e-6 m into its cell.
inline double nudge_off_edge(double g, double resolution) {
  if (g == std::floor(g)) return g + 1e-6 / resolution;
  return g;
}

}  // namespace detail

/// First structural cell along a ray, by exact grid traversal. Returns
/// (max_range, no_hit) if the ray leaves the grid or the range first.
inline RayHit cast_ray(const SemanticFloorplan& fp, Point2 origin, double angle_deg, double max_range) {
  const GridSpec& spec = fp.spec();
  if (!spec.contains(origin)) throw Error(ErrorCode::origin_outside_grid, "ray origin outside the grid");
  const double res = spec.resolution;
  const double gx = detail::nudge_off_edge((origin.x - spec.origin.x) / res, res);
  const double gy = detail::nudge_off_edge((origin.y - spec.origin.y) / res, res);
  int cx = static_cast<int>(std::floor(gx));
  int cy = static_cast<int>(std::floor(gy));
  cx = std::min(cx, spec.width_cells - 1);
  cy = std::min(cy, spec.height_cells - 1);
  if (fp.is_opaque({cx, cy})) throw Error(ErrorCode::pose_in_structure, "ray origin inside a structure cell");

  const double a = deg_to_rad(angle_deg);
  double dx = std::cos(a), dy = std::sin(a);
  if (std::abs(dx) < 1e-12) dx = 0.0;
  if (std::abs(dy) < 1e-12) dy = 0.0;
  constexpr double inf = std::numeric_limits<double>::infinity();

  const int step_x = dx > 0 ? 1 : -1;
  const int step_y = dy > 0 ? 1 : -1;
  double t_max_x = dx > 0 ? (cx + 1 - gx) / dx : dx < 0 ? (gx - cx) / -dx : inf;
  double t_max_y = dy > 0 ? (cy + 1 - gy) / dy : dy < 0 ? (gy - cy) / -dy : inf;
  const double t_delta_x = dx != 0.0 ? 1.0 / std::abs(dx) : inf;
  const double t_delta_y = dy != 0.0 ? 1.0 / std::abs(dy) : inf;
  const double limit = max_range / res;

  for (;;) {
    double t;
    if (t_max_x <= t_max_y) {
      t = t_max_x;
      cx += step_x;
      t_max_x += t_delta_x;
    } else {
      t = t_max_y;
      cy += step_y;
      t_max_y += t_delta_y;
    }
    if (t > limit) break;
    if (!spec.in_bounds({cx, cy})) break;
    const SemanticClass c = fp.at(cx, cy);
    if (c != SemanticClass::empty) return {t * res, c};
  }
  return {max_range, SemanticClass::no_hit};
}

/// Reference bundle at `pose`: ray i at bearing theta + fov/2 - i*fov/(l-1).
inline RayBundle cast_bundle(const SemanticFloorplan& fp, const Pose& pose, const CameraModel& cam) {
  cam.validate();
  RayBundle b;
  b.depths.resize(static_cast<std::size_t>(cam.ray_count));
  b.labels.resize(static_cast<std::size_t>(cam.ray_count));
  for (int i = 0; i < cam.ray_count; ++i) {
    const RayHit h = cast_ray(fp, pose.position(), pose.theta_deg + cam.bearing_offset(i), cam.max_range);
    b.depths[static_cast<std::size_t>(i)] = h.depth;
    b.labels[static_cast<std::size_t>(i)] = h.label;
  }
  b.pose = pose;
  b.camera = cam;
  return b;
}

}  // namespace floorloc
