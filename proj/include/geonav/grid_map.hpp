#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <vector>

#include "geonav/geometry.hpp"

namespace geonav {

struct CellIndex {
  int x = 0;  // column
  int y = 0;  // row

  friend bool operator==(const CellIndex&, const CellIndex&) = default;
};

// Scalar field on a regular grid with a per-cell validity mask. Values are
// row-major; cell (0,0) starts at the map origin corner and cells are
// half-open intervals [low, high) along each axis.
class GridMap2D {
 public:
  GridMap2D() = default;
  GridMap2D(int width_cells, int height_cells, double resolution, const Pose2& origin,
            double fill_value = 0.0, bool fill_valid = true);

  int width() const { return width_; }
  int height() const { return height_; }
  double resolution() const { return resolution_; }
  const Pose2& origin() const { return origin_; }
  std::size_t cell_count() const { return values_.size(); }

  bool in_bounds(int x, int y) const { return x >= 0 && x < width_ && y >= 0 && y < height_; }
  bool in_bounds(CellIndex c) const { return in_bounds(c.x, c.y); }

  double at(int x, int y) const { return values_[index(x, y)]; }
  double& at(int x, int y) { return values_[index(x, y)]; }
  double at(CellIndex c) const { return at(c.x, c.y); }
  double& at(CellIndex c) { return at(c.x, c.y); }

  bool is_valid(int x, int y) const { return valid_[index(x, y)] != 0; }
  bool is_valid(CellIndex c) const { return is_valid(c.x, c.y); }
  void set_valid(int x, int y, bool valid) { valid_[index(x, y)] = valid ? 1 : 0; }

  const std::vector<double>& values() const { return values_; }
  const std::vector<std::uint8_t>& validity() const { return valid_; }
  const double* row(int y) const { return values_.data() + static_cast<std::size_t>(y) * width_; }

  // Cell containing a world point, or nullopt when out of bounds.
  std::optional<CellIndex> world_to_cell(const Pose2& p) const;
  // World position of a cell center (heading carries the map orientation).
  Pose2 cell_center(CellIndex c) const;
  // Point expressed in the map-local frame (origin corner, map axes).
  Pose2 world_to_local(const Pose2& p) const { return relative_to(origin_, p); }

  // count(valid) / total.
  double valid_fraction() const;

  friend bool operator==(const GridMap2D&, const GridMap2D&) = default;

 private:
  std::size_t index(int x, int y) const { return static_cast<std::size_t>(y) * width_ + x; }

  int width_ = 0;
  int height_ = 0;
  double resolution_ = 0.0;  // m/cell
  Pose2 origin_;             // world pose of the cell (0,0) corner
  std::vector<double> values_;
  std::vector<std::uint8_t> valid_;
};

// Binary grid file format "GM2D", little-endian:
//   magic "GM2D", u32 version=1, u32 width, u32 height,
//   f64 resolution, f64 origin_x, f64 origin_y, f64 origin_theta,
//   width*height f32 values row-major, width*height u8 validity flags.
void save_gm2d(const GridMap2D& map, const std::filesystem::path& file);
GridMap2D load_gm2d(const std::filesystem::path& file);

}  // namespace geonav
