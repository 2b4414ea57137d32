#pragma once

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "floorloc/core.hpp"
#include "floorloc/floorplan.hpp"
#include "floorloc/parallel.hpp"
#include "floorloc/pose_grid.hpp"
#include "floorloc/raycast.hpp"
#include "floorloc/rays.hpp"

namespace floorloc {

/// Dense nonnegative score field over (x, y, orientation bin).
class ProbabilityVolume {
 public:
  ProbabilityVolume() = default;
  explicit ProbabilityVolume(PoseGrid grid) : grid_(grid), values_(grid.size(), 0.0) {}

  const PoseGrid& grid() const noexcept { return grid_; }
  std::span<const double> values() const noexcept { return values_; }
  std::span<double> values() noexcept { return values_; }
  std::size_t size() const noexcept { return values_.size(); }

  double operator[](std::size_t i) const noexcept { return values_[i]; }
  double& operator[](std::size_t i) noexcept { return values_[i]; }
  double at(int x, int y, int bin) const noexcept { return values_[grid_.index(x, y, bin)]; }
  double& at(int x, int y, int bin) noexcept { return values_[grid_.index(x, y, bin)]; }

  bool normalized() const noexcept { return normalized_; }
  void set_normalized(bool v) noexcept { normalized_ = v; }

  /// Sum in storage order; the order is fixed so results never depend on how
  /// the values were produced.
  double sum() const noexcept {
    double s = 0.0;
    for (double v : values_) s += v;
    return s;
  }

  bool all_zero() const noexcept {
    return std::all_of(values_.begin(), values_.end(), [](double v) { return v == 0.0; });
  }

  void normalize() {
    const double s = sum();
    if (!(s > 0.0)) throw Error(ErrorCode::empty_volume, "cannot normalize an all-zero volume");
    for (double& v : values_) v /= s;
    normalized_ = true;
  }

  friend bool operator==(const ProbabilityVolume&, const ProbabilityVolume&) = default;

 private:
  PoseGrid grid_{};
  std::vector<double> values_;
  bool normalized_ = false;
};

/// Reference rays for every free cell and orientation bin at a fixed set of
/// bearing offsets. Bearings shared between (bin, ray) pairs are cast once.
/// Depends only on the floorplan, so it is built once per scene.
class ReferenceRays {
 public:
  ReferenceRays(const SemanticFloorplan& fp, int orientation_bins, std::vector<double> bearing_offsets,
                double max_range, int workers = 1)
      : grid_{fp.spec(), orientation_bins}, offsets_(std::move(bearing_offsets)), max_range_(max_range) {
    grid_.validate();
    if (offsets_.empty()) throw Error(ErrorCode::invalid_argument, "reference bundle needs at least one ray");
    if (!(max_range > 0.0)) throw Error(ErrorCode::invalid_argument, "max_range must be positive");

    const GridSpec& spec = fp.spec();
    free_.resize(spec.cell_count());
    for (int y = 0; y < spec.height_cells; ++y)
      for (int x = 0; x < spec.width_cells; ++x) free_[spec.linear({x, y})] = fp.is_opaque({x, y}) ? 0 : 1;
    free_count_ = static_cast<std::size_t>(std::count(free_.begin(), free_.end(), 1));

    std::map<long long, int> ids;
    const int v = ray_count();
    bearing_id_.resize(static_cast<std::size_t>(orientation_bins * v));
    for (int b = 0; b < orientation_bins; ++b)
      for (int i = 0; i < v; ++i) {
        const double bearing = wrap_degrees(grid_.bin_angle(b) + offsets_[static_cast<std::size_t>(i)]);
        long long key = std::llround(bearing * 1e6);
        if (key == 360'000'000LL) key = 0;
        auto [it, inserted] = ids.emplace(key, static_cast<int>(bearings_.size()));
        if (inserted) bearings_.push_back(bearing);
        bearing_id_[static_cast<std::size_t>(b * v + i)] = it->second;
      }

    const std::size_t cells = spec.cell_count();
    depths_.assign(bearings_.size() * cells, max_range);
    labels_.assign(bearings_.size() * cells, SemanticClass::no_hit);
    // One task per (bearing, row); each writes a disjoint slice.
    const std::size_t tasks = bearings_.size() * static_cast<std::size_t>(spec.height_cells);
    parallel_for(tasks, workers, [&](std::size_t begin, std::size_t end) {
      for (std::size_t t = begin; t < end; ++t) {
        const std::size_t bid = t / static_cast<std::size_t>(spec.height_cells);
        const int y = static_cast<int>(t % static_cast<std::size_t>(spec.height_cells));
        for (int x = 0; x < spec.width_cells; ++x) {
          const std::size_t c = spec.linear({x, y});
          if (!free_[c]) continue;
          const RayHit h = cast_ray(fp, spec.center_of({x, y}), bearings_[bid], max_range_);
          depths_[bid * cells + c] = h.depth;
          labels_[bid * cells + c] = h.label;
        }
      }
    });
  }

  const PoseGrid& grid() const noexcept { return grid_; }
  int ray_count() const noexcept { return static_cast<int>(offsets_.size()); }
  const std::vector<double>& bearing_offsets() const noexcept { return offsets_; }
  double max_range() const noexcept { return max_range_; }
  std::size_t distinct_bearings() const noexcept { return bearings_.size(); }
  std::size_t free_cell_count() const noexcept { return free_count_; }
  bool is_free(std::size_t cell) const noexcept { return free_[cell] != 0; }

  /// Contiguous per-cell depths for orientation `bin`, ray `i`.
  std::span<const double> depth_plane(int bin, int i) const noexcept {
    const std::size_t cells = grid_.plane_size();
    return {depths_.data() + plane_offset(bin, i) * cells, cells};
  }
  std::span<const SemanticClass> label_plane(int bin, int i) const noexcept {
    const std::size_t cells = grid_.plane_size();
    return {labels_.data() + plane_offset(bin, i) * cells, cells};
  }

 private:
  std::size_t plane_offset(int bin, int i) const noexcept {
    return static_cast<std::size_t>(bearing_id_[static_cast<std::size_t>(bin * ray_count() + i)]);
  }

  PoseGrid grid_;
  std::vector<double> offsets_;
  double max_range_;
  std::vector<std::uint8_t> free_;
  std::size_t free_count_ = 0;
  std::vector<double> bearings_;
  std::vector<int> bearing_id_;
  std::vector<double> depths_;
  std::vector<SemanticClass> labels_;
};

namespace detail {

// Fills raw = exp(-lambda * error(pose)) over free poses, 0 elsewhere, then
// normalizes. `error_of` accumulates per-cell error sums for one bin.
template <typename AccumulateRow>
ProbabilityVolume build_volume(const ReferenceRays& ref, double lambda, int workers, AccumulateRow&& accumulate) {
  if (ref.free_cell_count() == 0) throw Error(ErrorCode::no_free_poses, "floorplan has no free cells");
  if (!(lambda > 0.0)) throw Error(ErrorCode::invalid_argument, "likelihood lambda must be positive");
  const PoseGrid& grid = ref.grid();
  ProbabilityVolume vol(grid);
  const int h = grid.height();
  const int w = grid.width();
  const std::size_t tiles = static_cast<std::size_t>(grid.orientation_bins) * static_cast<std::size_t>(h);
  const double inv_v = 1.0 / ref.ray_count();
  parallel_for(tiles, workers, [&](std::size_t begin, std::size_t end) {
    std::vector<double> err(static_cast<std::size_t>(w));
    for (std::size_t t = begin; t < end; ++t) {
      const int bin = static_cast<int>(t / static_cast<std::size_t>(h));
      const int y = static_cast<int>(t % static_cast<std::size_t>(h));
      const std::size_t row = static_cast<std::size_t>(y) * static_cast<std::size_t>(w);
      std::fill(err.begin(), err.end(), 0.0);
      accumulate(bin, row, std::span<double>(err));
      for (int x = 0; x < w; ++x) {
        const std::size_t cell = row + static_cast<std::size_t>(x);
        vol.at(x, y, bin) = ref.is_free(cell) ? std::exp(-lambda * err[static_cast<std::size_t>(x)] * inv_v) : 0.0;
      }
    }
  });
  vol.normalize();
  return vol;
}

}  // namespace detail

/// Depth volume: raw score exp(-lambda_d * mean_i |pred_i - ref_i|).
inline ProbabilityVolume build_depth_volume(const ReferenceRays& ref, std::span<const double> pred_depths,
                                            double lambda_d = 1.0, int workers = 1) {
  if (pred_depths.size() != static_cast<std::size_t>(ref.ray_count()))
    throw Error(ErrorCode::length_mismatch, "expected " + std::to_string(ref.ray_count()) + " coarse depths, got " +
                                                std::to_string(pred_depths.size()));
  for (double d : pred_depths)
    if (!(d > 0.0)) throw Error(ErrorCode::invalid_argument, "predicted depths must be positive");
  const int v = ref.ray_count();
  const std::size_t w = static_cast<std::size_t>(ref.grid().width());
  return detail::build_volume(ref, lambda_d, workers, [&](int bin, std::size_t row, std::span<double> err) {
    for (int i = 0; i < v; ++i) {
      const double p = pred_depths[static_cast<std::size_t>(i)];
      const double* d = ref.depth_plane(bin, i).data() + row;
      for (std::size_t x = 0; x < w; ++x) err[x] += std::abs(p - d[x]);
    }
  });
}

/// Semantic volume: raw score exp(-lambda_s * mean_i mismatch(pred_i, ref_i)).
inline ProbabilityVolume build_semantic_volume(const ReferenceRays& ref, std::span<const SemanticClass> pred_labels,
                                               double lambda_s = 1.0, int workers = 1,
                                               SemanticErrorMode mode = SemanticErrorMode::binary) {
  if (pred_labels.size() != static_cast<std::size_t>(ref.ray_count()))
    throw Error(ErrorCode::length_mismatch, "expected " + std::to_string(ref.ray_count()) + " coarse labels, got " +
                                                std::to_string(pred_labels.size()));
  for (auto l : pred_labels)
    if (!is_structural(l) && l != SemanticClass::no_hit)
      throw Error(ErrorCode::unknown_code, "predicted labels must be structural classes or no_hit");
  const int v = ref.ray_count();
  const std::size_t w = static_cast<std::size_t>(ref.grid().width());
  return detail::build_volume(ref, lambda_s, workers, [&](int bin, std::size_t row, std::span<double> err) {
    for (int i = 0; i < v; ++i) {
      const SemanticClass p = pred_labels[static_cast<std::size_t>(i)];
      const SemanticClass* l = ref.label_plane(bin, i).data() + row;
      for (std::size_t x = 0; x < w; ++x) err[x] += label_distance(p, l[x], mode);
    }
  });
}

/// Convenience overloads that cast the low-resolution reference bundle of
/// `cam_lowres` at every pose.
inline ProbabilityVolume build_depth_volume(const SemanticFloorplan& fp, std::span<const double> pred_depths,
                                            const CameraModel& cam_lowres, const PoseGrid& grid,
                                            double lambda_d = 1.0, int workers = 1) {
  cam_lowres.validate();
  if (!(grid.spec == fp.spec())) throw Error(ErrorCode::grid_mismatch, "pose grid does not match the floorplan");
  const ReferenceRays ref(fp, grid.orientation_bins, cam_lowres.bearing_offsets(), cam_lowres.max_range, workers);
  return build_depth_volume(ref, pred_depths, lambda_d, workers);
}

inline ProbabilityVolume build_semantic_volume(const SemanticFloorplan& fp, std::span<const SemanticClass> pred_labels,
                                               const CameraModel& cam_lowres, const PoseGrid& grid,
                                               double lambda_s = 1.0, int workers = 1,
                                               SemanticErrorMode mode = SemanticErrorMode::binary) {
  cam_lowres.validate();
  if (!(grid.spec == fp.spec())) throw Error(ErrorCode::grid_mismatch, "pose grid does not match the floorplan");
  const ReferenceRays ref(fp, grid.orientation_bins, cam_lowres.bearing_offsets(), cam_lowres.max_range, workers);
  return build_semantic_volume(ref, pred_labels, lambda_s, workers, mode);
}

/// P_c = w_s * P_s + (1 - w_s) * P_d, renormalized.
inline ProbabilityVolume fuse(const ProbabilityVolume& ps, const ProbabilityVolume& pd, double w_s) {
  if (!(ps.grid() == pd.grid())) throw Error(ErrorCode::grid_mismatch, "fused volumes must share a pose grid");
  if (!ps.normalized() || !pd.normalized()) throw Error(ErrorCode::invalid_argument, "fuse expects normalized inputs");
  if (!(w_s >= 0.0 && w_s <= 1.0)) throw Error(ErrorCode::invalid_argument, "w_s must be in [0, 1]");
  const double w_d = 1.0 - w_s;
  ProbabilityVolume out(ps.grid());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = w_s * ps[i] + w_d * pd[i];
  out.normalize();
  return out;
}

struct MaskOutcome {
  ProbabilityVolume volume;
  bool applied = false;     ///< mask was applied and kept
  bool degenerate = false;  ///< mask zeroed everything; unmasked volume returned
};

/// Element-wise mask then renormalize. When `threshold_ok` is false the
/// volume passes through untouched.
inline MaskOutcome apply_mask(const ProbabilityVolume& p, const PoseMask& mask, bool threshold_ok = true) {
  if (!(mask.grid() == p.grid()) || mask.size() != p.size())
    throw Error(ErrorCode::shape_mismatch, "mask shape does not match the volume");
  if (!threshold_ok) return {p, false, false};
  ProbabilityVolume out = p;
  for (std::size_t i = 0; i < out.size(); ++i)
    if (!mask.at(i)) out[i] = 0.0;
  if (out.all_zero()) return {p, false, true};
  if (p.normalized()) out.normalize();
  return {std::move(out), true, false};
}

struct VolumeIndex {
  int x = 0;
  int y = 0;
  int bin = 0;
  friend auto operator<=>(const VolumeIndex&, const VolumeIndex&) = default;
};

/// Lexicographic (y, x, bin) order used for every tie-break.
inline bool yxb_less(const VolumeIndex& a, const VolumeIndex& b) noexcept {
  if (a.y != b.y) return a.y < b.y;
  if (a.x != b.x) return a.x < b.x;
  return a.bin < b.bin;
}

inline VolumeIndex argmax_index(const ProbabilityVolume& p) {
  const PoseGrid& g = p.grid();
  double best = 0.0;
  VolumeIndex arg{};
  bool found = false;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      for (int b = 0; b < g.orientation_bins; ++b) {
        const double v = p.at(x, y, b);
        if (v > best) {
          best = v;
          arg = {x, y, b};
          found = true;
        }
      }
  if (!found) throw Error(ErrorCode::empty_volume, "argmax of an all-zero volume");
  return arg;
}

/// Pose (cell center, bin heading) of the global maximum.
inline Pose argmax_pose(const ProbabilityVolume& p) {
  const VolumeIndex i = argmax_index(p);
  return p.grid().pose_of(i.x, i.y, i.bin);
}

// ---------------------------------------------------------------------------
// Binary export: "FLPV", u32 H, u32 W, u32 O (little endian), then H*W*O
// float32 values in (y, x, bin) order.
// ---------------------------------------------------------------------------

namespace detail {

inline void put_u32(std::string& out, std::uint32_t v) {
  for (int k = 0; k < 4; ++k) out.push_back(static_cast<char>((v >> (8 * k)) & 0xFF));
}

inline std::uint32_t get_u32(const std::string& in, std::size_t pos) {
  std::uint32_t v = 0;
  for (int k = 0; k < 4; ++k) v |= static_cast<std::uint32_t>(static_cast<unsigned char>(in[pos + k])) << (8 * k);
  return v;
}

}  // namespace detail

inline std::string encode_volume(const ProbabilityVolume& p) {
  const PoseGrid& g = p.grid();
  std::string out = "FLPV";
  detail::put_u32(out, static_cast<std::uint32_t>(g.height()));
  detail::put_u32(out, static_cast<std::uint32_t>(g.width()));
  detail::put_u32(out, static_cast<std::uint32_t>(g.orientation_bins));
  out.reserve(out.size() + p.size() * 4);
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      for (int b = 0; b < g.orientation_bins; ++b) {
        const float f = static_cast<float>(p.at(x, y, b));
        std::uint32_t bits;
        std::memcpy(&bits, &f, sizeof bits);
        detail::put_u32(out, bits);
      }
  return out;
}

/// Decodes an exported volume. Only the shape is stored, so the caller
/// supplies resolution and origin (defaults: 0.1 m, origin 0).
inline ProbabilityVolume decode_volume(const std::string& data, double resolution = 0.1, Point2 origin = {}) {
  if (data.size() < 16 || data.compare(0, 4, "FLPV") != 0)
    throw Error(ErrorCode::parse, "not a volume file (bad magic)");
  const auto h = detail::get_u32(data, 4), w = detail::get_u32(data, 8), o = detail::get_u32(data, 12);
  const std::size_t n = static_cast<std::size_t>(h) * w * o;
  if (h == 0 || w == 0 || o == 0 || data.size() != 16 + 4 * n)
    throw Error(ErrorCode::dimension_mismatch, "volume payload does not match its header");
  PoseGrid g{GridSpec{static_cast<int>(w), static_cast<int>(h), resolution, origin}, static_cast<int>(o)};
  ProbabilityVolume p(g);
  std::size_t pos = 16;
  for (int y = 0; y < g.height(); ++y)
    for (int x = 0; x < g.width(); ++x)
      for (int b = 0; b < g.orientation_bins; ++b, pos += 4) {
        const std::uint32_t bits = detail::get_u32(data, pos);
        float f;
        std::memcpy(&f, &bits, sizeof f);
        p.at(x, y, b) = f;
      }
  const double s = p.sum();
  p.set_normalized(std::abs(s - 1.0) < 1e-3);
  return p;
}

inline void save_volume(const ProbabilityVolume& p, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::io, "cannot write " + path);
  const std::string bytes = encode_volume(p);
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
}

inline ProbabilityVolume load_volume(const std::string& path, double resolution = 0.1, Point2 origin = {}) {
  return decode_volume(read_text_file(path), resolution, origin);
}

}  // namespace floorloc
