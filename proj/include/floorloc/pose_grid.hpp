#pragma once

#include <cstdint>
#include <vector>

#include "floorloc/core.hpp"

namespace floorloc {

/// Discretized pose space: the floorplan raster times O orientation bins.
/// Bin k represents heading k * 360 / O degrees.
struct PoseGrid {
  GridSpec spec{};
  int orientation_bins = 36;

  friend bool operator==(const PoseGrid&, const PoseGrid&) = default;

  void validate() const {
    spec.validate();
    if (orientation_bins < 1)
      throw Error(ErrorCode::invalid_argument, "orientation_bins must be >= 1");
  }

  double orientation_step() const noexcept { return 360.0 / orientation_bins; }
  double bin_angle(int bin) const noexcept { return bin * orientation_step(); }

  /// Nearest bin to an arbitrary heading.
  int bin_of(double theta_deg) const noexcept {
    const int b = static_cast<int>(std::lround(wrap_degrees(theta_deg) / orientation_step()));
    return b % orientation_bins;
  }

  int width() const noexcept { return spec.width_cells; }
  int height() const noexcept { return spec.height_cells; }
  std::size_t plane_size() const noexcept { return spec.cell_count(); }
  std::size_t size() const noexcept { return plane_size() * static_cast<std::size_t>(orientation_bins); }

  /// Storage is orientation-major: O slabs of H x W, each row-major.
  std::size_t index(int x, int y, int bin) const noexcept {
    return (static_cast<std::size_t>(bin) * static_cast<std::size_t>(spec.height_cells) +
            static_cast<std::size_t>(y)) *
               static_cast<std::size_t>(spec.width_cells) +
           static_cast<std::size_t>(x);
  }

  Pose pose_of(int x, int y, int bin) const noexcept {
    const Point2 c = spec.center_of({x, y});
    return {c.x, c.y, bin_angle(bin)};
  }
};

/// Boolean H x W x O pose mask, laid out like ProbabilityVolume.
class PoseMask {
 public:
  PoseMask() = default;
  PoseMask(PoseGrid grid, bool fill) : grid_(grid), bits_(grid.size(), fill ? 1 : 0) {}

  /// Replicates a row-major H x W plane across every orientation bin.
  static PoseMask from_plane(PoseGrid grid, const std::vector<std::uint8_t>& plane) {
    if (plane.size() != grid.plane_size())
      throw Error(ErrorCode::shape_mismatch, "mask plane size does not match grid");
    PoseMask m(grid, false);
    for (int b = 0; b < grid.orientation_bins; ++b)
      for (std::size_t i = 0; i < plane.size(); ++i)
        m.bits_[static_cast<std::size_t>(b) * plane.size() + i] = plane[i] ? 1 : 0;
    return m;
  }

  const PoseGrid& grid() const noexcept { return grid_; }
  std::size_t size() const noexcept { return bits_.size(); }

  bool at(std::size_t i) const noexcept { return bits_[i] != 0; }
  bool at(int x, int y, int bin) const noexcept { return bits_[grid_.index(x, y, bin)] != 0; }
  void set(std::size_t i, bool v) noexcept { bits_[i] = v ? 1 : 0; }

  std::size_t count() const noexcept {
    std::size_t n = 0;
    for (auto b : bits_) n += b;
    return n;
  }

  /// Number of true cells in a single orientation slab.
  std::size_t count_in_bin(int bin) const noexcept {
    std::size_t n = 0;
    const std::size_t base = static_cast<std::size_t>(bin) * grid_.plane_size();
    for (std::size_t i = 0; i < grid_.plane_size(); ++i) n += bits_[base + i];
    return n;
  }

  PoseMask operator&(const PoseMask& o) const {
    if (!(grid_ == o.grid_)) throw Error(ErrorCode::shape_mismatch, "mask grids differ");
    PoseMask r(grid_, false);
    for (std::size_t i = 0; i < bits_.size(); ++i) r.bits_[i] = bits_[i] & o.bits_[i];
    return r;
  }

  friend bool operator==(const PoseMask&, const PoseMask&) = default;

 private:
  PoseGrid grid_{};
  std::vector<std::uint8_t> bits_;
};

}  // namespace floorloc
