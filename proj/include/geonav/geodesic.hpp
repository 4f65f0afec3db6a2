#pragma once

#include <stdexcept>

#include "geonav/grid_map.hpp"

namespace geonav {

struct InfeasibleGoalError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

inline bool is_obstacle_cell(const GridMap2D& obstacles, int x, int y) {
  return obstacles.at(x, y) > 0.5;
}

// Geodesic distance to the goal cell over the free cells of a binary obstacle
// grid. Obstacle and unreachable cells hold +inf; the goal cell holds 0.
// goal_pose is the pose the field was requested for (the goal cell center
// when the field was built from a cell index); it carries the goal heading
// for alignment terms.
struct DistanceField {
  GridMap2D grid;
  CellIndex goal_cell;
  Pose2 goal_pose;
};

// Exact shortest-path distances on the 8-connected free-cell graph with edge
// weights resolution * {1, sqrt(2)}. A diagonal step is blocked when both
// shared orthogonal neighbors are obstacles (no corner cutting).
// Throws InfeasibleGoalError when the goal is out of bounds or on an obstacle.
DistanceField compute_gdf(const GridMap2D& obstacles, const Pose2& goal);

// Same metric rooted at an explicit cell. With assume_source_free the source
// cell is treated as free even if the grid marks it as an obstacle (used when
// planning from a pose that already overlaps one).
DistanceField compute_gdf_to_cell(const GridMap2D& obstacles, CellIndex source,
                                  bool assume_source_free = false);

// Distance of the cell containing p; +inf when p is out of bounds.
double query_distance(const DistanceField& field, const Pose2& p);

}  // namespace geonav
