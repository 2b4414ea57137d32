#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdint>
#include <map>
#include <memory>
#include <numeric>
#include <optional>
#include <random>
#include <set>
#include <string>
#include <vector>

#include <json.hpp>

#include "floorloc/core.hpp"
#include "floorloc/extraction.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/parallel.hpp"
#include "floorloc/raycast.hpp"
#include "floorloc/rays.hpp"

namespace floorloc {

// ---------------------------------------------------------------------------
// Seeds
// ---------------------------------------------------------------------------

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b, std::uint64_t c = 0) {
  return splitmix64(splitmix64(splitmix64(a) ^ b) ^ c);
}

// ---------------------------------------------------------------------------
// Synthetic scenes
// ---------------------------------------------------------------------------

enum class SceneMode { standard, ambiguity_pair };

struct SceneParams {
  double extent_x = 10.0;
  double extent_y = 8.0;
  int rooms_x = 3;
  int rooms_y = 2;
  double opening_density = 0.5;  ///< fraction of each exterior wall run covered by windows
  std::uint64_t seed = 1;
  double resolution = 0.1;
  double split_jitter = 0.3;  ///< +- fraction of the nominal room span applied to internal walls
  double stub_density = 2.0;    ///< expected wall stubs (partial walls) per room
  double pillar_density = 1.0;  ///< probability of a free-standing pillar per room
  double extra_door_prob = 0.4;  ///< chance of a door on each shared wall outside the spanning tree
  double door_width = 0.9;
  SceneMode mode = SceneMode::standard;
  double pair_opening_width = 1.6;  ///< width of the distinguishing opening in pair mode
};

struct Rect {
  double x0 = 0, y0 = 0, x1 = 0, y1 = 0;
  bool contains(Point2 p) const noexcept { return p.x >= x0 && p.x <= x1 && p.y >= y0 && p.y <= y1; }
  Point2 center() const noexcept { return {(x0 + x1) / 2, (y0 + y1) / 2}; }
};

/// Two point-symmetric rooms that differ only in one opening class.
struct AmbiguityPair {
  int room_a = 0;
  int room_b = 1;
  Point2 opening_a{};  ///< center of room A's distinguishing opening
  Point2 opening_b{};
  SemanticClass class_a = SemanticClass::window;
  SemanticClass class_b = SemanticClass::door;
};

struct GeneratedScene {
  SemanticFloorplan plan;
  std::vector<Rect> room_rects;  ///< same order as plan.rooms()
  std::optional<AmbiguityPair> pair;
  int doors = 0;    ///< door openings placed
  int windows = 0;  ///< window openings placed
};

inline const std::vector<std::string>& room_vocabulary() {
  static const std::vector<std::string> v = {"Living Room", "Kitchen", "Bedroom",  "Bathroom",
                                             "Dining Room", "Study",   "Corridor", "Balcony"};
  return v;
}

namespace detail {

class Raster {
 public:
  Raster(int w, int h) : w_(w), h_(h), cells_(static_cast<std::size_t>(w) * h, SemanticClass::empty) {}
  SemanticClass& at(int x, int y) { return cells_[static_cast<std::size_t>(y) * w_ + x]; }
  void hline(int y, int x0, int x1, SemanticClass c) {
    for (int x = x0; x <= x1; ++x) at(x, y) = c;
  }
  void vline(int x, int y0, int y1, SemanticClass c) {
    for (int y = y0; y <= y1; ++y) at(x, y) = c;
  }
  // Openings only replace wall cells.
  void opening(bool vertical, int fixed, int from, int len, SemanticClass c) {
    for (int k = 0; k < len; ++k) {
      SemanticClass& cell = vertical ? at(fixed, from + k) : at(from + k, fixed);
      if (cell == SemanticClass::wall) cell = c;
    }
  }
  std::vector<SemanticClass> take() { return std::move(cells_); }

 private:
  int w_, h_;
  std::vector<SemanticClass> cells_;
};

inline int uniform_int(std::mt19937_64& rng, int lo, int hi) {
  if (hi <= lo) return lo;
  return std::uniform_int_distribution<int>(lo, hi)(rng);
}

inline double uniform_real(std::mt19937_64& rng, double lo, double hi) {
  return std::uniform_real_distribution<double>(lo, hi)(rng);
}

// Start of a `len`-cell opening on the wall run [lo, hi] keeping `margin`
// cells from both ends (centered when the run is too short).
inline int place_on_run(std::mt19937_64& rng, int lo, int hi, int len, int margin) {
  const int a = lo + margin, b = hi - margin - len + 1;
  if (b < a) return std::max(lo, lo + (hi - lo + 1 - len) / 2);
  return uniform_int(rng, a, b);
}

inline RoomPolygon rect_polygon(const std::string& label, const Rect& r) {
  return {label, {{r.x0, r.y0}, {r.x1, r.y0}, {r.x1, r.y1}, {r.x0, r.y1}}};
}

inline GeneratedScene generate_standard(const SceneParams& p) {
  const double res = p.resolution;
  const int w = static_cast<int>(std::lround(p.extent_x / res));
  const int h = static_cast<int>(std::lround(p.extent_y / res));
  const int min_room = static_cast<int>(std::lround(1.5 / res));
  if (p.rooms_x < 1 || p.rooms_y < 1) throw Error(ErrorCode::invalid_argument, "room grid must be at least 1x1");
  if (w - 1 < p.rooms_x * (min_room + 1) || h - 1 < p.rooms_y * (min_room + 1))
    throw Error(ErrorCode::invalid_argument, "extent too small for the room grid");
  std::mt19937_64 rng(p.seed);

  auto splits = [&](int n, int cells) {
    std::vector<int> s(static_cast<std::size_t>(n + 1));
    s[0] = 0;
    s[static_cast<std::size_t>(n)] = cells - 1;
    const double span = static_cast<double>(cells - 1) / n;
    for (int k = 1; k < n; ++k) {
      const double jitter = p.split_jitter > 0.0 ? uniform_real(rng, -p.split_jitter, p.split_jitter) * span : 0.0;
      const int lo = s[static_cast<std::size_t>(k - 1)] + min_room + 1;
      const int hi = (cells - 1) - (n - k) * (min_room + 1);
      s[static_cast<std::size_t>(k)] = std::clamp(static_cast<int>(std::lround(k * span + jitter)), lo, hi);
    }
    return s;
  };
  const std::vector<int> xs = splits(p.rooms_x, w);
  const std::vector<int> ys = splits(p.rooms_y, h);

  Raster r(w, h);
  for (int x : xs) r.vline(x, 0, h - 1, SemanticClass::wall);
  for (int y : ys) r.hline(y, 0, w - 1, SemanticClass::wall);

  GeneratedScene scene;
  const int n_rooms = p.rooms_x * p.rooms_y;
  auto room_id = [&](int i, int j) { return j * p.rooms_x + i; };
  const int door_cells = std::max(1, static_cast<int>(std::lround(p.door_width / res)));
  const int margin = 3;

  // Spanning tree over the room grid by randomized depth-first search.
  std::vector<char> seen(static_cast<std::size_t>(n_rooms), 0);
  std::vector<int> stack{0};
  std::set<std::pair<int, int>> joined;
  seen[0] = 1;
  while (!stack.empty()) {
    const int cur = stack.back();
    const int ci = cur % p.rooms_x, cj = cur / p.rooms_x;
    std::vector<std::pair<int, int>> next;
    for (auto [di, dj] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
      const int ni = ci + di, nj = cj + dj;
      if (ni < 0 || nj < 0 || ni >= p.rooms_x || nj >= p.rooms_y || seen[static_cast<std::size_t>(room_id(ni, nj))]) continue;
      next.emplace_back(ni, nj);
    }
    if (next.empty()) {
      stack.pop_back();
      continue;
    }
    const auto [ni, nj] = next[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(next.size()) - 1))];
    if (ni != ci) {
      const int wall_x = xs[static_cast<std::size_t>(std::max(ci, ni))];
      const int y0 = ys[static_cast<std::size_t>(cj)] + 1, y1 = ys[static_cast<std::size_t>(cj) + 1] - 1;
      r.opening(true, wall_x, place_on_run(rng, y0, y1, door_cells, margin), door_cells, SemanticClass::door);
    } else {
      const int wall_y = ys[static_cast<std::size_t>(std::max(cj, nj))];
      const int x0 = xs[static_cast<std::size_t>(ci)] + 1, x1 = xs[static_cast<std::size_t>(ci) + 1] - 1;
      r.opening(false, wall_y, place_on_run(rng, x0, x1, door_cells, margin), door_cells, SemanticClass::door);
    }
    ++scene.doors;
    joined.emplace(std::min(cur, room_id(ni, nj)), std::max(cur, room_id(ni, nj)));
    seen[static_cast<std::size_t>(room_id(ni, nj))] = 1;
    stack.push_back(room_id(ni, nj));
  }

  // Extra doors on shared walls the tree left closed.
  for (int j = 0; j < p.rooms_y; ++j)
    for (int i = 0; i < p.rooms_x; ++i) {
      if (i + 1 < p.rooms_x && !joined.count({room_id(i, j), room_id(i + 1, j)}) &&
          uniform_real(rng, 0.0, 1.0) < p.extra_door_prob) {
        const int y0 = ys[static_cast<std::size_t>(j)] + 1, y1 = ys[static_cast<std::size_t>(j) + 1] - 1;
        r.opening(true, xs[static_cast<std::size_t>(i) + 1], place_on_run(rng, y0, y1, door_cells, margin), door_cells,
                  SemanticClass::door);
        ++scene.doors;
      }
      if (j + 1 < p.rooms_y && !joined.count({room_id(i, j), room_id(i, j + 1)}) &&
          uniform_real(rng, 0.0, 1.0) < p.extra_door_prob) {
        const int x0 = xs[static_cast<std::size_t>(i)] + 1, x1 = xs[static_cast<std::size_t>(i) + 1] - 1;
        r.opening(false, ys[static_cast<std::size_t>(j) + 1], place_on_run(rng, x0, x1, door_cells, margin), door_cells,
                  SemanticClass::door);
        ++scene.doors;
      }
    }

  // Exterior wall runs: (vertical?, fixed coordinate, run lo, run hi).
  struct Run {
    bool vertical;
    int fixed, lo, hi;
  };
  std::vector<Run> exterior;
  for (int j = 0; j < p.rooms_y; ++j)
    for (int i = 0; i < p.rooms_x; ++i) {
      const int x0 = xs[static_cast<std::size_t>(i)] + 1, x1 = xs[static_cast<std::size_t>(i) + 1] - 1;
      const int y0 = ys[static_cast<std::size_t>(j)] + 1, y1 = ys[static_cast<std::size_t>(j) + 1] - 1;
      if (j == 0) exterior.push_back({false, 0, x0, x1});
      if (j == p.rooms_y - 1) exterior.push_back({false, h - 1, x0, x1});
      if (i == 0) exterior.push_back({true, 0, y0, y1});
      if (i == p.rooms_x - 1) exterior.push_back({true, w - 1, y0, y1});
    }
  {
    const Run& e = exterior[static_cast<std::size_t>(uniform_int(rng, 0, static_cast<int>(exterior.size()) - 1))];
    r.opening(e.vertical, e.fixed, place_on_run(rng, e.lo, e.hi, door_cells, margin), door_cells, SemanticClass::door);
    ++scene.doors;
  }
  // Windows cover roughly opening_density of each exterior run, split into
  // openings of varied width so facades do not repeat.
  for (const Run& e : exterior) {
    const int run = e.hi - e.lo + 1 - 2 * margin;
    const int target = static_cast<int>(std::lround(p.opening_density * run));
    std::vector<char> used(static_cast<std::size_t>(e.hi - e.lo + 1), 0);
    int covered = 0;
    for (int attempt = 0; attempt < 40 && covered < target; ++attempt) {
      const int len = std::min(static_cast<int>(std::lround(uniform_real(rng, 0.5, 1.5) / res)), target - covered + 2);
      if (len < 3) break;
      const int at = place_on_run(rng, e.lo, e.hi, len, margin);
      bool clash = at < e.lo + margin || at + len - 1 > e.hi - margin;
      for (int k = -3; k < len + 3 && !clash; ++k) {
        const int c = at + k - e.lo;
        if (c >= 0 && c < static_cast<int>(used.size()) && used[static_cast<std::size_t>(c)]) clash = true;
        const int x = e.vertical ? e.fixed : at + k, y = e.vertical ? at + k : e.fixed;
        if (x >= 0 && y >= 0 && x < w && y < h && r.at(x, y) == SemanticClass::door) clash = true;
      }
      if (clash) continue;
      r.opening(e.vertical, e.fixed, at, len, SemanticClass::window);
      for (int k = 0; k < len; ++k) used[static_cast<std::size_t>(at + k - e.lo)] = 1;
      covered += len;
      ++scene.windows;
    }
  }

  // Architectural irregularity: wall stubs attached to a room side and
  // free-standing pillars. Both only fill empty cells and keep clear of
  // openings so doors stay passable.
  auto near_opening = [&](int x, int y, int reach) {
    for (int dy = -reach; dy <= reach; ++dy)
      for (int dx = -reach; dx <= reach; ++dx) {
        const int xx = x + dx, yy = y + dy;
        if (xx < 0 || yy < 0 || xx >= w || yy >= h) continue;
        const SemanticClass c = r.at(xx, yy);
        if (c == SemanticClass::door || c == SemanticClass::window) return true;
      }
    return false;
  };
  const int corner_margin = static_cast<int>(std::lround(0.5 / res));
  for (int j = 0; j < p.rooms_y; ++j)
    for (int i = 0; i < p.rooms_x; ++i) {
      const int x0 = xs[static_cast<std::size_t>(i)] + 1, x1 = xs[static_cast<std::size_t>(i) + 1] - 1;
      const int y0 = ys[static_cast<std::size_t>(j)] + 1, y1 = ys[static_cast<std::size_t>(j) + 1] - 1;
      double budget = p.stub_density;
      while (budget > 0.0) {
        const bool place = budget >= 1.0 || uniform_real(rng, 0.0, 1.0) < budget;
        budget -= 1.0;
        if (!place) continue;
        const int side = uniform_int(rng, 0, 3);
        const bool vertical_wall = side >= 2;  // stub grows along x from a left/right wall
        const int run_lo = (vertical_wall ? y0 : x0) + corner_margin;
        const int run_hi = (vertical_wall ? y1 : x1) - corner_margin;
        if (run_hi < run_lo) continue;
        const int at = uniform_int(rng, run_lo, run_hi);
        const int depth_span = vertical_wall ? (x1 - x0 + 1) : (y1 - y0 + 1);
        const int len = std::min(static_cast<int>(std::lround(uniform_real(rng, 0.4, 1.0) / res)), depth_span / 3);
        int sx = 0, sy = 0, ddx = 0, ddy = 0;
        switch (side) {
          case 0: sx = at, sy = y0, ddy = 1; break;
          case 1: sx = at, sy = y1, ddy = -1; break;
          case 2: sx = x0, sy = at, ddx = 1; break;
          default: sx = x1, sy = at, ddx = -1; break;
        }
        if (near_opening(sx - ddx, sy - ddy, 4)) continue;
        for (int k = 0; k < len; ++k) r.at(sx + k * ddx, sy + k * ddy) = SemanticClass::wall;
      }
      if (uniform_real(rng, 0.0, 1.0) < p.pillar_density) {
        const int size = uniform_int(rng, 2, 4);
        const int clear = static_cast<int>(std::lround(0.7 / res));
        const int px0 = x0 + clear, px1 = x1 - clear - size + 1;
        const int py0 = y0 + clear, py1 = y1 - clear - size + 1;
        if (px1 >= px0 && py1 >= py0) {
          const int px = uniform_int(rng, px0, px1), py = uniform_int(rng, py0, py1);
          for (int yy = py; yy < py + size; ++yy)
            for (int xx = px; xx < px + size; ++xx) r.at(xx, yy) = SemanticClass::wall;
        }
      }
    }

  std::vector<int> perm(room_vocabulary().size());
  std::iota(perm.begin(), perm.end(), 0);
  std::shuffle(perm.begin(), perm.end(), rng);
  std::vector<RoomPolygon> rooms;
  for (int j = 0; j < p.rooms_y; ++j)
    for (int i = 0; i < p.rooms_x; ++i) {
      const Rect rect{(xs[static_cast<std::size_t>(i)] + 1) * res, (ys[static_cast<std::size_t>(j)] + 1) * res,
                      xs[static_cast<std::size_t>(i) + 1] * res, ys[static_cast<std::size_t>(j) + 1] * res};
      const auto& label = room_vocabulary()[static_cast<std::size_t>(perm[static_cast<std::size_t>(room_id(i, j)) % perm.size()])];
      rooms.push_back(rect_polygon(label, rect));
      scene.room_rects.push_back(rect);
    }
  scene.plan = SemanticFloorplan(GridSpec{w, h, res, {0.0, 0.0}}, r.take(), std::move(rooms));
  return scene;
}

// Two rooms side by side, related by a 180 degree rotation about the plan
// center, identical except that room A's distinguishing opening is a window
// where room B has a door.
inline GeneratedScene generate_pair(const SceneParams& p) {
  const double res = p.resolution;
  const int w = static_cast<int>(std::lround(p.extent_x / res)) | 1;
  const int h = static_cast<int>(std::lround(p.extent_y / res));
  const int c = (w - 1) / 2;
  const int min_room = static_cast<int>(std::lround(2.0 / res));
  if (c - 1 < min_room || h - 2 < min_room)
    throw Error(ErrorCode::invalid_argument, "extent too small for an ambiguity pair");
  std::mt19937_64 rng(p.seed);
  Raster r(w, h);
  r.hline(0, 0, w - 1, SemanticClass::wall);
  r.hline(h - 1, 0, w - 1, SemanticClass::wall);
  r.vline(0, 0, h - 1, SemanticClass::wall);
  r.vline(w - 1, 0, h - 1, SemanticClass::wall);
  r.vline(c, 0, h - 1, SemanticClass::wall);
  auto mirror_x = [&](int x) { return w - 1 - x; };
  auto mirror_y = [&](int y) { return h - 1 - y; };

  GeneratedScene scene;
  // Central door, symmetric about the plan center.
  int door = std::max(2, static_cast<int>(std::lround(p.door_width / res)));
  if ((h - door) % 2 != 0) ++door;
  r.opening(true, c, (h - door) / 2, door, SemanticClass::door);
  ++scene.doors;

  // Symmetric window pair on the outer side walls.
  const int win = static_cast<int>(std::lround(uniform_real(rng, 0.8, 1.4) / res));
  const int wy = place_on_run(rng, 1, h - 2, win, 3);
  r.opening(true, 0, wy, win, SemanticClass::window);
  r.opening(true, w - 1, mirror_y(wy + win - 1), win, SemanticClass::window);
  scene.windows += 2;

  // Room A's top wall holds a wall stub and the distinguishing opening, one in
  // each half; room B gets the rotated copies.
  const int open_len = std::max(1, static_cast<int>(std::lround(p.pair_opening_width / res)));
  const int half = (1 + (c - 1)) / 2;
  const bool opening_left = uniform_int(rng, 0, 1) == 0;
  const int o_lo = opening_left ? 1 : half + 1, o_hi = opening_left ? half - 1 : c - 1;
  const int s_lo = opening_left ? half + 1 : 1, s_hi = opening_left ? c - 1 : half - 1;
  const int ox = place_on_run(rng, o_lo, o_hi, open_len, 3);
  const int stub_x = uniform_int(rng, s_lo + 4, s_hi - 4);
  const int stub_len = static_cast<int>(std::lround(uniform_real(rng, 0.5, 0.9) / res));
  r.vline(stub_x, 1, stub_len, SemanticClass::wall);
  r.vline(mirror_x(stub_x), mirror_y(stub_len), h - 2, SemanticClass::wall);
  r.opening(false, 0, ox, open_len, SemanticClass::window);
  r.opening(false, h - 1, mirror_x(ox + open_len - 1), open_len, SemanticClass::door);
  ++scene.windows;
  ++scene.doors;

  AmbiguityPair pair;
  pair.opening_a = {(ox + open_len / 2.0) * res, 0.5 * res};
  pair.opening_b = {w * res - pair.opening_a.x, h * res - pair.opening_a.y};
  scene.pair = pair;

  const Rect a{res, res, c * res, (h - 1) * res};
  const Rect b{(c + 1) * res, res, (w - 1) * res, (h - 1) * res};
  scene.room_rects = {a, b};
  scene.plan = SemanticFloorplan(GridSpec{w, h, res, {0.0, 0.0}}, r.take(),
                                 {rect_polygon("Bedroom", a), rect_polygon("Bedroom", b)});
  return scene;
}

}  // namespace detail

/// Rectilinear multi-room plan, deterministic per seed.
inline GeneratedScene generate_scene(const SceneParams& p) {
  if (!(p.resolution > 0.0)) throw Error(ErrorCode::invalid_argument, "resolution must be positive");
  if (!(p.opening_density >= 0.0 && p.opening_density <= 1.0))
    throw Error(ErrorCode::invalid_argument, "opening_density must be in [0, 1]");
  return p.mode == SceneMode::ambiguity_pair ? detail::generate_pair(p) : detail::generate_standard(p);
}

// ---------------------------------------------------------------------------
// Query sampling
// ---------------------------------------------------------------------------

/// Distance from `p` to the nearest structure cell, capped at `cap`.
inline double clearance(const SemanticFloorplan& fp, Point2 p, double cap) {
  const GridSpec& s = fp.spec();
  const CellIndex c = s.cell_of(p);
  const int reach = static_cast<int>(std::ceil(cap / s.resolution)) + 1;
  double best = cap;
  for (int y = c.y - reach; y <= c.y + reach; ++y)
    for (int x = c.x - reach; x <= c.x + reach; ++x) {
      if (!s.in_bounds({x, y})) continue;
      if (!fp.is_opaque({x, y})) continue;
      const double x0 = s.origin.x + x * s.resolution, y0 = s.origin.y + y * s.resolution;
      const double dx = std::max({x0 - p.x, 0.0, p.x - (x0 + s.resolution)});
      const double dy = std::max({y0 - p.y, 0.0, p.y - (y0 + s.resolution)});
      best = std::min(best, std::hypot(dx, dy));
    }
  return best;
}

inline constexpr double kQueryClearance = 0.3;

/// Uniform position inside `region` at least kQueryClearance from structure.
inline Point2 sample_position(const SemanticFloorplan& fp, const Rect& region, std::mt19937_64& rng) {
  for (int attempt = 0; attempt < 100000; ++attempt) {
    const Point2 p{detail::uniform_real(rng, region.x0, region.x1), detail::uniform_real(rng, region.y0, region.y1)};
    if (fp.is_free_point(p) && clearance(fp, p, kQueryClearance) >= kQueryClearance) return p;
  }
  throw Error(ErrorCode::no_free_poses, "no position with sufficient clearance");
}

struct QuerySample {
  int scene = 0;
  int index = 0;
  Pose gt;
  RayBundle prediction;
  std::optional<std::string> gt_room;

  std::string id() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "s%03d_q%03d", scene, index);
    return buf;
  }
};

/// Ground-truth pose for query `index` of a scene. Standard scenes: a room
/// chosen uniformly, position uniform in it, heading uniform in [0, 360).
/// Pair scenes: the heading points at the room's distinguishing opening +-15
/// degrees, with a clear line of sight to it.
inline Pose sample_query_pose(const GeneratedScene& scene, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  const auto& fp = scene.plan;
  if (!scene.pair) {
    const auto& rect = scene.room_rects[static_cast<std::size_t>(
        detail::uniform_int(rng, 0, static_cast<int>(scene.room_rects.size()) - 1))];
    const Point2 p = sample_position(fp, rect, rng);
    return {p.x, p.y, detail::uniform_real(rng, 0.0, 360.0)};
  }
  const auto& pair = *scene.pair;
  for (int attempt = 0; attempt < 10000; ++attempt) {
    const bool in_a = detail::uniform_int(rng, 0, 1) == 0;
    const Rect& rect = scene.room_rects[static_cast<std::size_t>(in_a ? pair.room_a : pair.room_b)];
    const Point2 target = in_a ? pair.opening_a : pair.opening_b;
    const SemanticClass cls = in_a ? pair.class_a : pair.class_b;
    const Point2 p = sample_position(fp, rect, rng);
    const double bearing = std::atan2(target.y - p.y, target.x - p.x) * 180.0 / kPi;
    const double jitter = detail::uniform_real(rng, -15.0, 15.0);
    if (cast_ray(fp, p, bearing, kDefaultMaxRange).label != cls) continue;
    return {p.x, p.y, wrap_degrees(bearing + jitter)};
  }
  throw Error(ErrorCode::no_free_poses, "no query pose with a view of the distinguishing opening");
}

// ---------------------------------------------------------------------------
// Metrics
// ---------------------------------------------------------------------------

struct PoseError {
  double translation_m = 0.0;
  double rotation_deg = 0.0;
};

inline PoseError pose_error(const Pose& pred, const Pose& gt) {
  return {translation_distance(pred, gt), angular_distance_deg(pred.theta_deg, gt.theta_deg)};
}

/// Percentages at 0.1 m, 0.5 m, 1 m (distance <= d) and 1 m with rotation
/// strictly under 30 degrees.
struct RecallSummary {
  double r01 = 0.0;
  double r05 = 0.0;
  double r1 = 0.0;
  double r1_30 = 0.0;
  friend bool operator==(const RecallSummary&, const RecallSummary&) = default;
};

inline bool within(const PoseError& e, double dist) { return e.translation_m <= dist; }
inline bool within_1m_30(const PoseError& e) { return e.translation_m <= 1.0 && e.rotation_deg < 30.0; }

inline RecallSummary summarize_recall(const std::vector<PoseError>& errors) {
  if (errors.empty()) return {};
  std::size_t a = 0, b = 0, c = 0, d = 0;
  for (const auto& e : errors) {
    a += within(e, 0.1);
    b += within(e, 0.5);
    c += within(e, 1.0);
    d += within_1m_30(e);
  }
  const double n = static_cast<double>(errors.size());
  return {100.0 * a / n, 100.0 * b / n, 100.0 * c / n, 100.0 * d / n};
}

struct QueryRecord {
  std::string id;
  int scene = 0;
  Pose gt;
  Pose pred;
  PoseError error;
  std::vector<Pose> candidates;  ///< coarse rank order; refined heading where available
  LocalizeFlags flags;
  StageTimings timings;
};

struct TimingStats {
  double mean = 0.0;
  double stddev = 0.0;
};

inline TimingStats timing_stats(const std::vector<double>& xs) {
  if (xs.empty()) return {};
  const double m = std::accumulate(xs.begin(), xs.end(), 0.0) / static_cast<double>(xs.size());
  double v = 0.0;
  for (double x : xs) v += (x - m) * (x - m);
  return {m, std::sqrt(v / static_cast<double>(xs.size()))};
}

struct EvalReport {
  RecallSummary recall;
  std::vector<QueryRecord> queries;
  TimingStats prediction, localization, refinement, total;
};

inline void fill_timing(EvalReport& r) {
  std::vector<double> p, l, f, t;
  for (const auto& q : r.queries) {
    p.push_back(q.timings.prediction);
    l.push_back(q.timings.localization);
    f.push_back(q.timings.refinement);
    t.push_back(q.timings.total());
  }
  r.prediction = timing_stats(p);
  r.localization = timing_stats(l);
  r.refinement = timing_stats(f);
  r.total = timing_stats(t);
}

/// Recall of a batch of predicted poses against ground truth.
inline EvalReport recall(const std::vector<Pose>& predictions, const std::vector<Pose>& gts) {
  if (predictions.size() != gts.size()) throw Error(ErrorCode::length_mismatch, "predictions and ground truth differ in length");
  EvalReport r;
  std::vector<PoseError> errs;
  for (std::size_t i = 0; i < gts.size(); ++i) {
    QueryRecord q;
    q.id = std::to_string(i);
    q.gt = gts[i];
    q.pred = predictions[i];
    q.error = pose_error(predictions[i], gts[i]);
    errs.push_back(q.error);
    r.queries.push_back(std::move(q));
  }
  r.recall = summarize_recall(errs);
  return r;
}

/// A query counts as a hit when ANY of its first K candidates is within the
/// threshold.
inline RecallSummary topk_recall(const std::vector<QueryRecord>& queries, int k) {
  if (k < 1) throw Error(ErrorCode::invalid_argument, "K must be >= 1");
  if (queries.empty()) return {};
  std::size_t a = 0, b = 0, c = 0, d = 0;
  for (const auto& q : queries) {
    bool ha = false, hb = false, hc = false, hd = false;
    const std::size_t n = std::min<std::size_t>(static_cast<std::size_t>(k), q.candidates.size());
    for (std::size_t i = 0; i < n; ++i) {
      const PoseError e = pose_error(q.candidates[i], q.gt);
      ha |= within(e, 0.1);
      hb |= within(e, 0.5);
      hc |= within(e, 1.0);
      hd |= within_1m_30(e);
    }
    a += ha, b += hb, c += hc, d += hd;
  }
  const double n = static_cast<double>(queries.size());
  return {100.0 * a / n, 100.0 * b / n, 100.0 * c / n, 100.0 * d / n};
}

// ---------------------------------------------------------------------------
// Benchmarks
// ---------------------------------------------------------------------------

struct BenchmarkSpec {
  SceneParams scene{};
  int scene_count = 20;
  int queries_per_scene = 25;
  std::uint64_t query_seed = 7;
  NoiseModel noise{};
  bool room_hints = false;
  double hint_confidence = 0.9;
  PipelineConfig pipeline{};
  int workers = 1;
};

struct PreparedScene {
  GeneratedScene scene;
  std::shared_ptr<const SceneContext> context;
};

/// Scenes, their precomputed contexts, and the (noisy) oracle queries. Built
/// once, then run under any number of pipeline configurations.
struct PreparedBenchmark {
  BenchmarkSpec spec;
  std::vector<PreparedScene> scenes;
  std::vector<QuerySample> queries;
};

inline PreparedBenchmark prepare_benchmark(const BenchmarkSpec& spec) {
  if (spec.scene_count < 1 || spec.queries_per_scene < 1)
    throw Error(ErrorCode::invalid_argument, "benchmark needs at least one scene and one query");
  spec.pipeline.validate();
  PreparedBenchmark pb;
  pb.spec = spec;
  pb.scenes.resize(static_cast<std::size_t>(spec.scene_count));
  PipelineConfig ctx_cfg = spec.pipeline;
  ctx_cfg.workers = 1;
  parallel_for(pb.scenes.size(), spec.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t s = b; s < e; ++s) {
      SceneParams p = spec.scene;
      p.seed = mix_seed(spec.scene.seed, s);
      pb.scenes[s].scene = generate_scene(p);
      pb.scenes[s].context = std::make_shared<const SceneContext>(pb.scenes[s].scene.plan, ctx_cfg);
    }
  });
  pb.queries.resize(pb.scenes.size() * static_cast<std::size_t>(spec.queries_per_scene));
  parallel_for(pb.queries.size(), spec.workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const int s = static_cast<int>(i / static_cast<std::size_t>(spec.queries_per_scene));
      const int q = static_cast<int>(i % static_cast<std::size_t>(spec.queries_per_scene));
      const GeneratedScene& scene = pb.scenes[static_cast<std::size_t>(s)].scene;
      QuerySample& qs = pb.queries[i];
      qs.scene = s;
      qs.index = q;
      qs.gt = sample_query_pose(scene, mix_seed(spec.query_seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(q)));
      NoiseModel noise = spec.noise;
      noise.rng_seed = mix_seed(spec.noise.rng_seed, static_cast<std::uint64_t>(s), static_cast<std::uint64_t>(q));
      qs.prediction = perturb(cast_bundle(scene.plan, qs.gt, spec.pipeline.camera), noise);
      qs.gt_room = scene.plan.room_at(qs.gt.position());
    }
  });
  return pb;
}

inline std::optional<RoomHint> oracle_hint(const QuerySample& q, bool enabled, double confidence) {
  if (!enabled || !q.gt_room) return std::nullopt;
  return RoomHint{*q.gt_room, confidence};
}

inline QueryRecord make_record(const QuerySample& q, const LocalizeResult& res) {
  QueryRecord rec;
  rec.id = q.id();
  rec.scene = q.scene;
  rec.gt = q.gt;
  rec.pred = res.pose;
  rec.error = pose_error(res.pose, q.gt);
  for (const auto& c : res.candidates) rec.candidates.push_back(c.refined_pose.value_or(c.pose));
  rec.flags = res.flags;
  rec.timings = res.timings;
  return rec;
}

inline EvalReport summarize(std::vector<QueryRecord> records) {
  EvalReport r;
  r.queries = std::move(records);
  std::vector<PoseError> errs;
  for (const auto& q : r.queries) errs.push_back(q.error);
  r.recall = summarize_recall(errs);
  fill_timing(r);
  return r;
}

/// Runs every prepared query through `cfg`. Queries are spread across
/// `workers`; each writes its own slot, so the report does not depend on the
/// worker count.
inline EvalReport run_prepared(const PreparedBenchmark& pb, PipelineConfig cfg, bool room_hints,
                               double hint_confidence, int workers) {
  cfg.workers = 1;
  std::vector<std::unique_ptr<Localizer>> locs;
  for (const auto& s : pb.scenes) {
    if (s.context->compatible(cfg))
      locs.push_back(std::make_unique<Localizer>(s.context, cfg));
    else
      locs.push_back(std::make_unique<Localizer>(s.scene.plan, cfg));
  }
  std::vector<QueryRecord> records(pb.queries.size());
  parallel_for(pb.queries.size(), workers, [&](std::size_t b, std::size_t e) {
    for (std::size_t i = b; i < e; ++i) {
      const QuerySample& q = pb.queries[i];
      const LocalizeResult res = locs[static_cast<std::size_t>(q.scene)]->localize(
          q.prediction, oracle_hint(q, room_hints, hint_confidence));
      records[i] = make_record(q, res);
    }
  });
  return summarize(std::move(records));
}

inline EvalReport run_benchmark(const BenchmarkSpec& spec) {
  const PreparedBenchmark pb = prepare_benchmark(spec);
  return run_prepared(pb, spec.pipeline, spec.room_hints, spec.hint_confidence, spec.workers);
}

struct SweepPoint {
  double w_s = 0.0;
  EvalReport report;
};

/// Recall as a function of the fusion weight. The coarse depth and semantic
/// volumes do not depend on w_s, so each query builds them once; alpha
/// follows w_d unless the config pins it.
inline std::vector<SweepPoint> run_weight_sweep(const PreparedBenchmark& pb, const std::vector<double>& weights,
                                                int workers) {
  PipelineConfig base = pb.spec.pipeline;
  base.workers = 1;
  std::vector<std::vector<QueryRecord>> records(weights.size(), std::vector<QueryRecord>(pb.queries.size()));
  std::vector<std::vector<std::unique_ptr<Localizer>>> locs(weights.size());
  for (std::size_t w = 0; w < weights.size(); ++w) {
    PipelineConfig cfg = base;
    cfg.w_s = weights[w];
    for (const auto& s : pb.scenes) locs[w].push_back(std::make_unique<Localizer>(s.context, cfg));
  }
  parallel_for(pb.queries.size(), workers, [&](std::size_t b, std::size_t e) {
    using clock = std::chrono::steady_clock;
    for (std::size_t i = b; i < e; ++i) {
      const QuerySample& q = pb.queries[i];
      const Localizer& first = *locs[0][static_cast<std::size_t>(q.scene)];
      const CoarseObservation obs = first.prepare(q.prediction);
      const ProbabilityVolume pd = first.depth_volume(obs);
      const ProbabilityVolume ps = first.semantic_volume(obs);
      const auto hint = oracle_hint(q, pb.spec.room_hints, pb.spec.hint_confidence);
      for (std::size_t w = 0; w < weights.size(); ++w) {
        const Localizer& loc = *locs[w][static_cast<std::size_t>(q.scene)];
        const auto t0 = clock::now();
        const Posterior post = loc.posterior(pd, ps, hint);
        LocalizeResult res;
        res.flags = post.flags;
        auto cands = loc.candidates(post.masked, loc.config().refine ? loc.config().top_k : 1);
        const auto t1 = clock::now();
        if (loc.config().refine) {
          RefineResult rr = loc.refine_candidates(q.prediction, std::move(cands));
          res.pose = rr.pose;
          res.candidates = std::move(rr.candidates);
          res.flags.refine_fallback = rr.fallback;
        } else {
          res.pose = cands.front().pose;
          res.candidates = std::move(cands);
        }
        const auto t2 = clock::now();
        res.timings = {0.0, std::chrono::duration<double>(t1 - t0).count(), std::chrono::duration<double>(t2 - t1).count()};
        records[w][i] = make_record(q, res);
      }
    }
  });
  std::vector<SweepPoint> out;
  for (std::size_t w = 0; w < weights.size(); ++w) out.push_back({weights[w], summarize(std::move(records[w]))});
  return out;
}

/// One row of the per-stage runtime breakdown (mean seconds per query).
struct TopKTimingRow {
  int k = 1;
  double prediction = 0.0;
  double localization = 0.0;
  double refinement = 0.0;
  double total() const noexcept { return prediction + localization + refinement; }
  RecallSummary recall;
};

/// Per-stage timings for several Top-K values on identical inputs. Each
/// query's coarse volumes and its Top-K list for the largest K are built and
/// timed once and charged to every row; a smaller K's list is a prefix of the
/// larger one. Refinement is then timed per K on that prefix.
inline std::vector<TopKTimingRow> run_topk_timing(const PreparedBenchmark& pb, const std::vector<int>& ks) {
  using clock = std::chrono::steady_clock;
  auto secs = [](clock::time_point a, clock::time_point b) { return std::chrono::duration<double>(b - a).count(); };
  PipelineConfig cfg = pb.spec.pipeline;
  cfg.workers = 1;
  cfg.refine = true;
  std::vector<std::unique_ptr<Localizer>> locs;
  for (const auto& s : pb.scenes) locs.push_back(std::make_unique<Localizer>(s.context, cfg));

  if (ks.empty()) throw Error(ErrorCode::invalid_argument, "no Top-K values given");
  const int k_max = *std::max_element(ks.begin(), ks.end());
  std::vector<TopKTimingRow> rows;
  for (int k : ks) rows.push_back({k, 0, 0, 0, {}});
  std::vector<std::vector<PoseError>> errs(ks.size());
  for (const QuerySample& q : pb.queries) {
    const Localizer& loc = *locs[static_cast<std::size_t>(q.scene)];
    const auto t0 = clock::now();
    const CoarseObservation obs = loc.prepare(q.prediction);
    const auto t1 = clock::now();
    const ProbabilityVolume pd = loc.depth_volume(obs);
    const ProbabilityVolume ps = loc.semantic_volume(obs);
    const Posterior post = loc.posterior(pd, ps, oracle_hint(q, pb.spec.room_hints, pb.spec.hint_confidence));
    const std::vector<Candidate> all = loc.candidates(post.masked, k_max);
    const auto t2 = clock::now();
    for (std::size_t r = 0; r < ks.size(); ++r) {
      const std::size_t n = std::min(all.size(), static_cast<std::size_t>(ks[r]));
      std::vector<Candidate> cands(all.begin(), all.begin() + static_cast<std::ptrdiff_t>(n));
      const auto a = clock::now();
      const RefineResult rr = loc.refine_candidates(q.prediction, std::move(cands));
      const auto b = clock::now();
      rows[r].prediction += secs(t0, t1);
      rows[r].localization += secs(t1, t2);
      rows[r].refinement += secs(a, b);
      errs[r].push_back(pose_error(rr.pose, q.gt));
    }
  }
  const double n = static_cast<double>(pb.queries.size());
  for (std::size_t r = 0; r < rows.size(); ++r) {
    rows[r].prediction /= n;
    rows[r].localization /= n;
    rows[r].refinement /= n;
    rows[r].recall = summarize_recall(errs[r]);
  }
  return rows;
}

// ---------------------------------------------------------------------------
// JSON / CSV
// ---------------------------------------------------------------------------

inline nlohmann::json scene_params_to_json(const SceneParams& p) {
  return {{"extent_m", {p.extent_x, p.extent_y}},
          {"rooms", {p.rooms_x, p.rooms_y}},
          {"opening_density", p.opening_density},
          {"seed", p.seed},
          {"resolution_m", p.resolution},
          {"split_jitter", p.split_jitter},
          {"stub_density", p.stub_density},
          {"pillar_density", p.pillar_density},
          {"extra_door_prob", p.extra_door_prob},
          {"door_width_m", p.door_width},
          {"mode", p.mode == SceneMode::standard ? "standard" : "ambiguity_pair"},
          {"pair_opening_width_m", p.pair_opening_width}};
}

inline void apply_scene_json(SceneParams& p, const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "scene params must be an object");
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    auto num = [&](const nlohmann::json& x) {
      if (!x.is_number()) throw Error(ErrorCode::parse, "scene." + k + ": expected a number");
      return x.get<double>();
    };
    auto pair = [&]() {
      if (!v.is_array() || v.size() != 2) throw Error(ErrorCode::parse, "scene." + k + ": expected [a, b]");
      return std::pair{num(v[0]), num(v[1])};
    };
    if (k == "extent_m") std::tie(p.extent_x, p.extent_y) = pair();
    else if (k == "rooms") {
      auto [a, b] = pair();
      p.rooms_x = static_cast<int>(a), p.rooms_y = static_cast<int>(b);
    } else if (k == "opening_density") p.opening_density = num(v);
    else if (k == "seed") {
      if (!v.is_number_integer() || v.get<std::int64_t>() < 0) throw Error(ErrorCode::parse, "scene.seed: expected a non-negative integer");
      p.seed = v.get<std::uint64_t>();
    } else if (k == "resolution_m") p.resolution = num(v);
    else if (k == "split_jitter") p.split_jitter = num(v);
    else if (k == "stub_density") p.stub_density = num(v);
    else if (k == "pillar_density") p.pillar_density = num(v);
    else if (k == "extra_door_prob") p.extra_door_prob = num(v);
    else if (k == "door_width_m") p.door_width = num(v);
    else if (k == "pair_opening_width_m") p.pair_opening_width = num(v);
    else if (k == "mode") {
      if (v == "standard") p.mode = SceneMode::standard;
      else if (v == "ambiguity_pair") p.mode = SceneMode::ambiguity_pair;
      else throw Error(ErrorCode::parse, "scene.mode: expected \"standard\" or \"ambiguity_pair\"");
    } else throw Error(ErrorCode::parse, "unknown scene key \"" + k + "\"");
  }
}

inline nlohmann::json benchmark_spec_to_json(const BenchmarkSpec& s) {
  return {{"scene", scene_params_to_json(s.scene)},
          {"scene_count", s.scene_count},
          {"queries_per_scene", s.queries_per_scene},
          {"query_seed", s.query_seed},
          {"noise", {{"depth_sigma", s.noise.depth_sigma}, {"label_flip_prob", s.noise.label_flip_prob}, {"seed", s.noise.rng_seed}}},
          {"room_hints", {{"enabled", s.room_hints}, {"confidence", s.hint_confidence}}},
          {"pipeline", config_to_json(s.pipeline)}};
}

inline BenchmarkSpec benchmark_spec_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw Error(ErrorCode::parse, "benchmark spec must be an object");
  BenchmarkSpec s;
  auto uint_of = [](const nlohmann::json& v, const char* what) {
    if (!v.is_number_integer() || v.get<std::int64_t>() < 0)
      throw Error(ErrorCode::parse, std::string(what) + ": expected a non-negative integer");
    return v.get<std::uint64_t>();
  };
  for (auto it = j.begin(); it != j.end(); ++it) {
    const std::string& k = it.key();
    const auto& v = it.value();
    if (k == "scene") apply_scene_json(s.scene, v);
    else if (k == "scene_count") s.scene_count = static_cast<int>(uint_of(v, "scene_count"));
    else if (k == "queries_per_scene") s.queries_per_scene = static_cast<int>(uint_of(v, "queries_per_scene"));
    else if (k == "query_seed") s.query_seed = uint_of(v, "query_seed");
    else if (k == "workers") s.workers = static_cast<int>(uint_of(v, "workers"));
    else if (k == "noise") {
      if (!v.is_object()) throw Error(ErrorCode::parse, "noise: expected an object");
      s.noise.depth_sigma = v.value("depth_sigma", 0.0);
      s.noise.label_flip_prob = v.value("label_flip_prob", 0.0);
      if (v.contains("seed")) s.noise.rng_seed = uint_of(v["seed"], "noise.seed");
    } else if (k == "room_hints") {
      if (!v.is_object()) throw Error(ErrorCode::parse, "room_hints: expected an object");
      s.room_hints = v.value("enabled", false);
      s.hint_confidence = v.value("confidence", 0.9);
    } else if (k == "pipeline") {
      // Echoed configs carry derived fields; accept them as overrides.
      nlohmann::json cfg = v;
      if (cfg.is_object() && cfg.contains("alpha") && cfg.contains("w_s") && cfg["alpha"].is_number() &&
          cfg["w_s"].is_number() && cfg["alpha"].get<double>() == 1.0 - cfg["w_s"].get<double>())
        cfg.erase("alpha");
      apply_config_json(s.pipeline, cfg);
    } else throw Error(ErrorCode::parse, "unknown benchmark key \"" + k + "\"");
  }
  return s;
}

inline nlohmann::json recall_to_json(const RecallSummary& r) {
  return {{"0.1m", r.r01}, {"0.5m", r.r05}, {"1m", r.r1}, {"1m30deg", r.r1_30}};
}

inline nlohmann::json timing_stats_to_json(const EvalReport& r) {
  auto ts = [](const TimingStats& t) { return nlohmann::json{{"mean", t.mean}, {"std", t.stddev}}; };
  return {{"prediction", ts(r.prediction)}, {"localization", ts(r.localization)},
          {"refinement", ts(r.refinement)}, {"total", ts(r.total)}};
}

/// Report document. Everything except the "timings_s" member is a pure
/// function of the benchmark inputs.
inline nlohmann::json report_to_json(const EvalReport& r, const nlohmann::json& provenance, bool include_timings = true) {
  nlohmann::json qs = nlohmann::json::array();
  for (const auto& q : r.queries) {
    nlohmann::json cands = nlohmann::json::array();
    for (const auto& c : q.candidates) cands.push_back(pose_to_json(c));
    qs.push_back({{"id", q.id},
                  {"gt", pose_to_json(q.gt)},
                  {"pred", pose_to_json(q.pred)},
                  {"error_m", q.error.translation_m},
                  {"error_deg", q.error.rotation_deg},
                  {"candidates", std::move(cands)},
                  {"flags", flags_to_json(q.flags)}});
  }
  nlohmann::json j{{"config", provenance}, {"recall", recall_to_json(r.recall)}, {"queries", std::move(qs)}};
  if (include_timings) j["timings_s"] = timing_stats_to_json(r);
  return j;
}

inline std::string errors_csv(const EvalReport& r) {
  std::string out = "id,gt_x,gt_y,gt_theta,pred_x,pred_y,pred_theta,error_m,error_deg\n";
  char buf[256];
  for (const auto& q : r.queries) {
    std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f,%.6f\n", q.id.c_str(), q.gt.x, q.gt.y,
                  q.gt.theta_deg, q.pred.x, q.pred.y, q.pred.theta_deg, q.error.translation_m, q.error.rotation_deg);
    out += buf;
  }
  return out;
}

}  // namespace floorloc
