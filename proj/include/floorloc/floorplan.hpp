#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <optional>
#include <sstream>
#include <string>
#include <utility>
#include <vector>

#include <json.hpp>

#include "floorloc/core.hpp"
#include "floorloc/pose_grid.hpp"

namespace floorloc {

struct RoomPolygon {
  std::string label;
  std::vector<Point2> vertices;
  friend bool operator==(const RoomPolygon&, const RoomPolygon&) = default;
};

namespace geometry {

inline constexpr double kEps = 1e-9;

inline double cross(Point2 o, Point2 a, Point2 b) {
  return (a.x - o.x) * (b.y - o.y) - (a.y - o.y) * (b.x - o.x);
}

inline bool point_on_segment(Point2 p, Point2 a, Point2 b, double eps = kEps) {
  const double len = std::hypot(b.x - a.x, b.y - a.y);
  if (std::abs(cross(a, b, p)) > eps * std::max(1.0, len)) return false;
  return p.x >= std::min(a.x, b.x) - eps && p.x <= std::max(a.x, b.x) + eps &&
         p.y >= std::min(a.y, b.y) - eps && p.y <= std::max(a.y, b.y) + eps;
}

/// Even-odd rule; points on the boundary count as inside.
inline bool point_in_polygon(Point2 p, const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++)
    if (point_on_segment(p, poly[j], poly[i])) return true;
  bool inside = false;
  for (std::size_t i = 0, j = n - 1; i < n; j = i++) {
    const Point2 a = poly[i], b = poly[j];
    if ((a.y > p.y) != (b.y > p.y)) {
      const double xi = a.x + (p.y - a.y) * (b.x - a.x) / (b.y - a.y);
      if (p.x < xi) inside = !inside;
    }
  }
  return inside;
}

inline double signed_area(const std::vector<Point2>& poly) {
  double s = 0.0;
  for (std::size_t i = 0, j = poly.size() - 1; i < poly.size(); j = i++)
    s += poly[j].x * poly[i].y - poly[i].x * poly[j].y;
  return 0.5 * s;
}

inline bool segments_intersect(Point2 a, Point2 b, Point2 c, Point2 d) {
  const double d1 = cross(c, d, a), d2 = cross(c, d, b);
  const double d3 = cross(a, b, c), d4 = cross(a, b, d);
  if (((d1 > kEps && d2 < -kEps) || (d1 < -kEps && d2 > kEps)) &&
      ((d3 > kEps && d4 < -kEps) || (d3 < -kEps && d4 > kEps)))
    return true;
  return point_on_segment(a, c, d) || point_on_segment(b, c, d) || point_on_segment(c, a, b) ||
         point_on_segment(d, a, b);
}

/// No two non-adjacent edges touch, and adjacent edges share only their vertex.
inline bool is_simple_polygon(const std::vector<Point2>& poly) {
  const std::size_t n = poly.size();
  if (n < 3) return false;
  for (std::size_t i = 0; i < n; ++i) {
    const Point2 a = poly[i], b = poly[(i + 1) % n];
    if (a == b) return false;
    for (std::size_t j = i + 1; j < n; ++j) {
      const bool adjacent = (j == i + 1) || (i == 0 && j == n - 1);
      if (adjacent) continue;
      if (segments_intersect(a, b, poly[j], poly[(j + 1) % n])) return false;
    }
  }
  return std::abs(signed_area(poly)) > kEps;
}

}  // namespace geometry

/// Labeled raster floorplan with optional room polygons and interior mask.
/// Immutable once constructed; the constructor enforces every invariant.
class SemanticFloorplan {
 public:
  SemanticFloorplan() = default;

  SemanticFloorplan(GridSpec spec, std::vector<SemanticClass> cells, std::vector<RoomPolygon> rooms = {},
                    std::optional<std::vector<std::uint8_t>> interior = std::nullopt)
      : spec_(spec), cells_(std::move(cells)), rooms_(std::move(rooms)), interior_(std::move(interior)) {
    spec_.validate();
    if (cells_.size() != spec_.cell_count())
      throw Error(ErrorCode::dimension_mismatch, "cells: expected " + std::to_string(spec_.cell_count()) +
                                                     " entries, got " + std::to_string(cells_.size()));
    for (std::size_t i = 0; i < cells_.size(); ++i)
      if (code_of(cells_[i]) > kNumClasses)
        throw Error(ErrorCode::unknown_code, "cells[" + std::to_string(i) + "]");
    for (std::size_t r = 0; r < rooms_.size(); ++r) validate_room(rooms_[r], r);
    if (interior_ && interior_->size() != spec_.cell_count())
      throw Error(ErrorCode::dimension_mismatch, "interior: expected " + std::to_string(spec_.cell_count()) +
                                                     " entries, got " + std::to_string(interior_->size()));
  }

  const GridSpec& spec() const noexcept { return spec_; }
  const std::vector<SemanticClass>& cells() const noexcept { return cells_; }
  const std::vector<RoomPolygon>& rooms() const noexcept { return rooms_; }
  const std::optional<std::vector<std::uint8_t>>& interior() const noexcept { return interior_; }

  SemanticClass at(CellIndex c) const noexcept { return cells_[spec_.linear(c)]; }
  SemanticClass at(int x, int y) const noexcept { return at(CellIndex{x, y}); }

  /// Any nonzero in-bounds cell blocks rays.
  bool is_opaque(CellIndex c) const noexcept {
    return spec_.in_bounds(c) && cells_[spec_.linear(c)] != SemanticClass::empty;
  }

  bool is_free_point(Point2 p) const noexcept {
    return spec_.contains(p) && !is_opaque(spec_.cell_of(p));
  }

  /// Label of the first room polygon containing `p`, if any.
  std::optional<std::string> room_at(Point2 p) const {
    for (const auto& r : rooms_)
      if (geometry::point_in_polygon(p, r.vertices)) return r.label;
    return std::nullopt;
  }

  std::size_t free_cell_count() const noexcept {
    return static_cast<std::size_t>(std::count(cells_.begin(), cells_.end(), SemanticClass::empty));
  }

  friend bool operator==(const SemanticFloorplan&, const SemanticFloorplan&) = default;

 private:
  void validate_room(const RoomPolygon& room, std::size_t idx) const {
    const std::string where = "rooms[" + std::to_string(idx) + "] (\"" + room.label + "\")";
    if (room.vertices.size() < 3)
      throw Error(ErrorCode::degenerate_polygon, where + ": fewer than 3 vertices");
    if (!geometry::is_simple_polygon(room.vertices))
      throw Error(ErrorCode::degenerate_polygon, where + ": polygon is not simple or has zero area");
    const double tol = 1e-6;
    for (std::size_t v = 0; v < room.vertices.size(); ++v) {
      const Point2 p = room.vertices[v];
      if (p.x < spec_.origin.x - tol || p.y < spec_.origin.y - tol ||
          p.x > spec_.origin.x + spec_.extent_x() + tol || p.y > spec_.origin.y + spec_.extent_y() + tol)
        throw Error(ErrorCode::out_of_bounds, where + ".vertices[" + std::to_string(v) + "] outside the grid");
    }
  }

  GridSpec spec_{};
  std::vector<SemanticClass> cells_;
  std::vector<RoomPolygon> rooms_;
  std::optional<std::vector<std::uint8_t>> interior_;
};

// ---------------------------------------------------------------------------
// Masks
// ---------------------------------------------------------------------------

namespace detail {

/// Row-major H x W plane: 1 where the cell center lies in any of `polys`.
inline std::vector<std::uint8_t> rasterize_polygons(const GridSpec& spec,
                                                    const std::vector<const RoomPolygon*>& polys) {
  std::vector<std::uint8_t> plane(spec.cell_count(), 0);
  for (const RoomPolygon* poly : polys) {
    double lo_x = poly->vertices[0].x, hi_x = lo_x, lo_y = poly->vertices[0].y, hi_y = lo_y;
    for (const auto& v : poly->vertices) {
      lo_x = std::min(lo_x, v.x), hi_x = std::max(hi_x, v.x);
      lo_y = std::min(lo_y, v.y), hi_y = std::max(hi_y, v.y);
    }
    const int x0 = std::max(0, static_cast<int>(std::floor((lo_x - spec.origin.x) / spec.resolution)) - 1);
    const int y0 = std::max(0, static_cast<int>(std::floor((lo_y - spec.origin.y) / spec.resolution)) - 1);
    const int x1 = std::min(spec.width_cells - 1, static_cast<int>(std::ceil((hi_x - spec.origin.x) / spec.resolution)));
    const int y1 = std::min(spec.height_cells - 1, static_cast<int>(std::ceil((hi_y - spec.origin.y) / spec.resolution)));
    for (int y = y0; y <= y1; ++y)
      for (int x = x0; x <= x1; ++x)
        if (geometry::point_in_polygon(spec.center_of({x, y}), poly->vertices)) plane[spec.linear({x, y})] = 1;
  }
  return plane;
}

}  // namespace detail

struct RoomMask {
  PoseMask mask;
  bool found = false;  ///< false: label not among the rooms, mask is all-false
};

/// Pose mask that is true exactly where the cell center lies inside any room
/// polygon carrying `label`.
inline RoomMask room_mask(const SemanticFloorplan& fp, const std::string& label, int orientation_bins) {
  const PoseGrid grid{fp.spec(), orientation_bins};
  std::vector<const RoomPolygon*> polys;
  for (const auto& r : fp.rooms())
    if (r.label == label) polys.push_back(&r);
  if (polys.empty()) return {PoseMask(grid, false), false};
  return {PoseMask::from_plane(grid, detail::rasterize_polygons(fp.spec(), polys)), true};
}

/// Explicit interior mask if present, else the union of all room polygons,
/// else all-true.
inline PoseMask interior_mask(const SemanticFloorplan& fp, int orientation_bins) {
  const PoseGrid grid{fp.spec(), orientation_bins};
  if (fp.interior()) return PoseMask::from_plane(grid, *fp.interior());
  if (fp.rooms().empty()) return PoseMask(grid, true);
  std::vector<const RoomPolygon*> polys;
  for (const auto& r : fp.rooms()) polys.push_back(&r);
  return PoseMask::from_plane(grid, detail::rasterize_polygons(fp.spec(), polys));
}

// ---------------------------------------------------------------------------
// File format
// ---------------------------------------------------------------------------

inline nlohmann::json floorplan_to_json(const SemanticFloorplan& fp) {
  nlohmann::json j;
  j["resolution_m"] = fp.spec().resolution;
  j["width"] = fp.spec().width_cells;
  j["height"] = fp.spec().height_cells;
  j["origin"] = {fp.spec().origin.x, fp.spec().origin.y};
  std::vector<int> cells;
  cells.reserve(fp.cells().size());
  for (auto c : fp.cells()) cells.push_back(code_of(c));
  j["cells"] = std::move(cells);
  nlohmann::json rooms = nlohmann::json::array();
  for (const auto& r : fp.rooms()) {
    nlohmann::json verts = nlohmann::json::array();
    for (const auto& v : r.vertices) verts.push_back({v.x, v.y});
    rooms.push_back({{"label", r.label}, {"vertices", std::move(verts)}});
  }
  j["rooms"] = std::move(rooms);
  if (fp.interior()) {
    std::vector<int> bits(fp.interior()->begin(), fp.interior()->end());
    j["interior"] = std::move(bits);
  }
  return j;
}

namespace detail {

inline const nlohmann::json& require(const nlohmann::json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end()) throw Error(ErrorCode::parse, std::string("missing field \"") + key + "\"");
  return *it;
}

inline double as_number(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number()) throw Error(ErrorCode::parse, where + ": expected a number");
  return j.get<double>();
}

inline long long as_integer(const nlohmann::json& j, const std::string& where) {
  if (!j.is_number_integer()) throw Error(ErrorCode::parse, where + ": expected an integer");
  return j.get<long long>();
}

inline Point2 as_point(const nlohmann::json& j, const std::string& where) {
  if (!j.is_array() || j.size() != 2) throw Error(ErrorCode::parse, where + ": expected [x, y]");
  return {as_number(j[0], where + "[0]"), as_number(j[1], where + "[1]")};
}

}  // namespace detail

inline SemanticFloorplan floorplan_from_json(const nlohmann::json& j) {
  using detail::as_integer;
  using detail::as_number;
  if (!j.is_object()) throw Error(ErrorCode::parse, "floorplan document must be a JSON object");
  GridSpec spec;
  spec.resolution = as_number(detail::require(j, "resolution_m"), "resolution_m");
  spec.width_cells = static_cast<int>(as_integer(detail::require(j, "width"), "width"));
  spec.height_cells = static_cast<int>(as_integer(detail::require(j, "height"), "height"));
  spec.origin = detail::as_point(detail::require(j, "origin"), "origin");
  spec.validate();

  const auto& jc = detail::require(j, "cells");
  if (!jc.is_array()) throw Error(ErrorCode::parse, "cells: expected an array");
  if (jc.size() != spec.cell_count())
    throw Error(ErrorCode::dimension_mismatch, "cells: expected width*height = " + std::to_string(spec.cell_count()) +
                                                   " entries, got " + std::to_string(jc.size()));
  std::vector<SemanticClass> cells(jc.size());
  for (std::size_t i = 0; i < jc.size(); ++i) {
    const std::string where = "cells[" + std::to_string(i) + "] (row " + std::to_string(i / spec.width_cells) +
                              ", col " + std::to_string(i % spec.width_cells) + ")";
    const auto code = semantic_class_from_code(as_integer(jc[i], where));
    if (!code) throw Error(ErrorCode::unknown_code, where + ": code " + jc[i].dump() + " is not in 0.." +
                                                        std::to_string(kNumClasses));
    cells[i] = *code;
  }

  std::vector<RoomPolygon> rooms;
  if (auto it = j.find("rooms"); it != j.end()) {
    if (!it->is_array()) throw Error(ErrorCode::parse, "rooms: expected an array");
    for (std::size_t r = 0; r < it->size(); ++r) {
      const auto& jr = (*it)[r];
      const std::string where = "rooms[" + std::to_string(r) + "]";
      if (!jr.is_object()) throw Error(ErrorCode::parse, where + ": expected an object");
      RoomPolygon room;
      const auto& label = detail::require(jr, "label");
      if (!label.is_string()) throw Error(ErrorCode::parse, where + ".label: expected a string");
      room.label = label.get<std::string>();
      const auto& verts = detail::require(jr, "vertices");
      if (!verts.is_array()) throw Error(ErrorCode::parse, where + ".vertices: expected an array");
      for (std::size_t v = 0; v < verts.size(); ++v)
        room.vertices.push_back(detail::as_point(verts[v], where + ".vertices[" + std::to_string(v) + "]"));
      rooms.push_back(std::move(room));
    }
  }

  std::optional<std::vector<std::uint8_t>> interior;
  if (auto it = j.find("interior"); it != j.end() && !it->is_null()) {
    if (!it->is_array()) throw Error(ErrorCode::parse, "interior: expected an array");
    if (it->size() != spec.cell_count())
      throw Error(ErrorCode::dimension_mismatch, "interior: expected " + std::to_string(spec.cell_count()) +
                                                     " entries, got " + std::to_string(it->size()));
    std::vector<std::uint8_t> bits(it->size());
    for (std::size_t i = 0; i < it->size(); ++i) {
      const auto v = as_integer((*it)[i], "interior[" + std::to_string(i) + "]");
      if (v != 0 && v != 1) throw Error(ErrorCode::parse, "interior[" + std::to_string(i) + "]: expected 0 or 1");
      bits[i] = static_cast<std::uint8_t>(v);
    }
    interior = std::move(bits);
  }
  return SemanticFloorplan(spec, std::move(cells), std::move(rooms), std::move(interior));
}

inline SemanticFloorplan parse_floorplan(const std::string& text) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(text);
  } catch (const nlohmann::json::parse_error& e) {
    throw Error(ErrorCode::parse, "byte " + std::to_string(e.byte) + ": " + e.what());
  }
  return floorplan_from_json(j);
}

/// Canonical text form: compact JSON, sorted keys, trailing newline.
inline std::string serialize_floorplan(const SemanticFloorplan& fp) { return floorplan_to_json(fp).dump() + "\n"; }

inline std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::io, "cannot open " + path);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

inline void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  out << text;
}

inline SemanticFloorplan load_floorplan(const std::string& path) {
  try {
    return parse_floorplan(read_text_file(path));
  } catch (const Error& e) {
    if (e.code() == ErrorCode::io) throw;
    throw Error(e.code(), path + ": " + std::string(e.what()).substr(to_string(e.code()).size() + 2));
  }
}

inline void save_floorplan(const SemanticFloorplan& fp, const std::string& path) {
  write_text_file(path, serialize_floorplan(fp));
}

}  // namespace floorloc
