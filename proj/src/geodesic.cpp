#include "geonav/geodesic.hpp"

#include <cmath>
#include <limits>
#include <queue>
#include <vector>

namespace geonav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

struct QueueEntry {
  double dist;
  int index;
  friend bool operator>(const QueueEntry& a, const QueueEntry& b) { return a.dist > b.dist; }
};

}  // namespace

DistanceField compute_gdf_to_cell(const GridMap2D& obstacles, CellIndex source,
                                  bool assume_source_free) {
  if (!obstacles.in_bounds(source)) {
    throw InfeasibleGoalError("distance field source out of bounds");
  }
  if (!assume_source_free && is_obstacle_cell(obstacles, source.x, source.y)) {
    throw InfeasibleGoalError("distance field source on an obstacle cell");
  }

  const int width = obstacles.width();
  const int height = obstacles.height();
  const double res = obstacles.resolution();
  const double diag = res * std::sqrt(2.0);
  const int source_index = source.y * width + source.x;

  auto free_cell = [&](int x, int y) {
    if (assume_source_free && y * width + x == source_index) {
      return true;
    }
    return !is_obstacle_cell(obstacles, x, y);
  };

  std::vector<double> dist(static_cast<std::size_t>(width) * height, kInf);

  std::priority_queue<QueueEntry, std::vector<QueueEntry>, std::greater<QueueEntry>> queue;
  dist[source_index] = 0.0;
  queue.push({0.0, source_index});

  while (!queue.empty()) {
    const auto [d, index] = queue.top();
    queue.pop();
    if (d > dist[index]) {
      continue;  // stale entry
    }
    const int cx = index % width;
    const int cy = index / width;
    for (int dy = -1; dy <= 1; ++dy) {
      for (int dx = -1; dx <= 1; ++dx) {
        if (dx == 0 && dy == 0) {
          continue;
        }
        const int nx = cx + dx;
        const int ny = cy + dy;
        if (nx < 0 || nx >= width || ny < 0 || ny >= height || !free_cell(nx, ny)) {
          continue;
        }
        const bool diagonal = dx != 0 && dy != 0;
        if (diagonal && !free_cell(cx + dx, cy) && !free_cell(cx, cy + dy)) {
          continue;  // both shared orthogonal neighbors blocked
        }
        const double candidate = d + (diagonal ? diag : res);
        const int nindex = ny * width + nx;
        if (candidate < dist[nindex]) {
          dist[nindex] = candidate;
          queue.push({candidate, nindex});
        }
      }
    }
  }

  DistanceField field{GridMap2D(width, height, res, obstacles.origin(), kInf, true), source,
                      obstacles.cell_center(source)};
  for (int y = 0; y < height; ++y) {
    for (int x = 0; x < width; ++x) {
      field.grid.at(x, y) = dist[static_cast<std::size_t>(y) * width + x];
    }
  }
  return field;
}

DistanceField compute_gdf(const GridMap2D& obstacles, const Pose2& goal) {
  const auto cell = obstacles.world_to_cell(goal);
  if (!cell) {
    throw InfeasibleGoalError("goal out of map bounds");
  }
  if (is_obstacle_cell(obstacles, cell->x, cell->y)) {
    throw InfeasibleGoalError("goal on an obstacle cell");
  }
  DistanceField field = compute_gdf_to_cell(obstacles, *cell);
  field.goal_pose = goal;
  return field;
}

double query_distance(const DistanceField& field, const Pose2& p) {
  const auto cell = field.grid.world_to_cell(p);
  if (!cell) {
    return kInf;
  }
  return field.grid.at(*cell);
}

}  // namespace geonav
