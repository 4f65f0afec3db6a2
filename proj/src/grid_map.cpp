#include "geonav/grid_map.hpp"

#include <bit>
#include <cmath>
#include <cstring>
#include <fstream>
#include <stdexcept>

namespace geonav {

static_assert(std::endian::native == std::endian::little,
              "GM2D I/O assumes a little-endian host");

namespace {

// Absorbs floating-point noise when a point lies mathematically on a cell
// boundary, so that e.g. the map center lands in the center cell.
constexpr double kBoundarySnap = 1e-9;

constexpr char kMagic[4] = {'G', 'M', '2', 'D'};
constexpr std::uint32_t kVersion = 1;

template <typename T>
void write_raw(std::ofstream& out, const T& value) {
  out.write(reinterpret_cast<const char*>(&value), sizeof(T));
}

template <typename T>
T read_raw(std::ifstream& in) {
  T value{};
  in.read(reinterpret_cast<char*>(&value), sizeof(T));
  return value;
}

}  // namespace

GridMap2D::GridMap2D(int width_cells, int height_cells, double resolution, const Pose2& origin,
                     double fill_value, bool fill_valid)
    : width_(width_cells),
      height_(height_cells),
      resolution_(resolution),
      origin_(origin),
      values_(static_cast<std::size_t>(width_cells) * height_cells, fill_value),
      valid_(static_cast<std::size_t>(width_cells) * height_cells, fill_valid ? 1 : 0) {
  if (width_cells <= 0 || height_cells <= 0) {
    throw std::invalid_argument("GridMap2D: non-positive dimensions");
  }
  if (!(resolution > 0.0)) {
    throw std::invalid_argument("GridMap2D: resolution must be positive");
  }
}

std::optional<CellIndex> GridMap2D::world_to_cell(const Pose2& p) const {
  const Pose2 local = world_to_local(p);
  const int ix = static_cast<int>(std::floor(local.x / resolution_ + kBoundarySnap));
  const int iy = static_cast<int>(std::floor(local.y / resolution_ + kBoundarySnap));
  if (!in_bounds(ix, iy)) {
    return std::nullopt;
  }
  return CellIndex{ix, iy};
}

Pose2 GridMap2D::cell_center(CellIndex c) const {
  return compose(origin_, Pose2{(c.x + 0.5) * resolution_, (c.y + 0.5) * resolution_, 0.0});
}

double GridMap2D::valid_fraction() const {
  if (valid_.empty()) {
    return 0.0;
  }
  std::size_t count = 0;
  for (std::uint8_t v : valid_) {
    count += v != 0;
  }
  return static_cast<double>(count) / static_cast<double>(valid_.size());
}

void save_gm2d(const GridMap2D& map, const std::filesystem::path& file) {
  std::ofstream out(file, std::ios::binary);
  if (!out) {
    throw std::runtime_error("save_gm2d: cannot open " + file.string());
  }
  out.write(kMagic, sizeof(kMagic));
  write_raw(out, kVersion);
  write_raw(out, static_cast<std::uint32_t>(map.width()));
  write_raw(out, static_cast<std::uint32_t>(map.height()));
  write_raw(out, map.resolution());
  write_raw(out, map.origin().x);
  write_raw(out, map.origin().y);
  write_raw(out, map.origin().theta);
  std::vector<float> values(map.cell_count());
  for (std::size_t i = 0; i < values.size(); ++i) {
    values[i] = static_cast<float>(map.values()[i]);
  }
  out.write(reinterpret_cast<const char*>(values.data()),
            static_cast<std::streamsize>(values.size() * sizeof(float)));
  out.write(reinterpret_cast<const char*>(map.validity().data()),
            static_cast<std::streamsize>(map.validity().size()));
  if (!out) {
    throw std::runtime_error("save_gm2d: write failed for " + file.string());
  }
}

GridMap2D load_gm2d(const std::filesystem::path& file) {
  std::ifstream in(file, std::ios::binary);
  if (!in) {
    throw std::runtime_error("load_gm2d: cannot open " + file.string());
  }
  char magic[4] = {};
  in.read(magic, sizeof(magic));
  if (!in || std::memcmp(magic, kMagic, sizeof(kMagic)) != 0) {
    throw std::runtime_error("load_gm2d: bad magic in " + file.string());
  }
  const auto version = read_raw<std::uint32_t>(in);
  if (version != kVersion) {
    throw std::runtime_error("load_gm2d: unsupported version in " + file.string());
  }
  const auto width = read_raw<std::uint32_t>(in);
  const auto height = read_raw<std::uint32_t>(in);
  const auto resolution = read_raw<double>(in);
  const auto ox = read_raw<double>(in);
  const auto oy = read_raw<double>(in);
  const auto otheta = read_raw<double>(in);
  if (!in || width == 0 || height == 0 || width > 100000 || height > 100000) {
    throw std::runtime_error("load_gm2d: bad header in " + file.string());
  }
  GridMap2D map(static_cast<int>(width), static_cast<int>(height), resolution,
                Pose2{ox, oy, otheta});
  const std::size_t n = map.cell_count();
  std::vector<float> values(n);
  in.read(reinterpret_cast<char*>(values.data()), static_cast<std::streamsize>(n * sizeof(float)));
  std::vector<std::uint8_t> valid(n);
  in.read(reinterpret_cast<char*>(valid.data()), static_cast<std::streamsize>(n));
  if (!in) {
    throw std::runtime_error("load_gm2d: truncated file " + file.string());
  }
  for (std::size_t i = 0; i < n; ++i) {
    map.at(static_cast<int>(i % width), static_cast<int>(i / width)) = values[i];
    map.set_valid(static_cast<int>(i % width), static_cast<int>(i / width), valid[i] != 0);
  }
  return map;
}

}  // namespace geonav
