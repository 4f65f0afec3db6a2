#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <string>

#include "geonav/grid_map.hpp"

namespace geonav {

// Rectangular robot footprint. All grid queries use the margin-dilated extents.
struct Footprint {
  double half_length = 0.35;    // m, along heading
  double half_width = 0.25;     // m
  double safety_margin = 0.05;  // m

  double dilated_half_length() const { return half_length + safety_margin; }
  double dilated_half_width() const { return half_width + safety_margin; }
};

// Analytic elevation-to-traversability rule: t saturates when either the
// local slope reaches slope_max or the largest step to an 8-neighbor reaches
// step_max.
struct TraversabilityParams {
  double slope_max = 0.6;  // rise/run
  double step_max = 0.25;  // m
};

inline constexpr double kSafeTraversability = 0.3;
inline constexpr double kRiskyTraversability = 0.8;
inline constexpr double kObstacleTraversability = 0.9;
inline constexpr double kRiskyCost = 2.0;
inline constexpr double kObstacleCost = 1e5;

// Scalar cost mapping: t < 0.3 -> 0; linear ramp 0..2.0 on [0.3, 0.8];
// 2.0 on (0.8, 0.9]; 1e5 above 0.9.
double traversability_cost_value(double t);

// Per-cell t in [0, 1]; invalid elevation cells map to t = 1 and stay invalid.
// Throws std::invalid_argument for degenerate grids (<= 2 cells per side).
GridMap2D elevation_to_traversability(const GridMap2D& elevation,
                                      const TraversabilityParams& params = {});

// Applies traversability_cost_value per cell; invalid cells get the obstacle
// cost. Throws std::invalid_argument when a valid cell is outside [0, 1].
GridMap2D traversability_to_cost(const GridMap2D& trav);

// Binary grid: 1 where t > 0.9 or the cell is invalid, 0 elsewhere.
GridMap2D threshold_obstacles(const GridMap2D& trav);

// All four layers share geometry; traversability, cost and obstacles are
// derived from the elevation layer by the fixed chain above.
struct WorldScene {
  GridMap2D elevation;
  GridMap2D traversability;
  GridMap2D cost;
  GridMap2D obstacles;
  std::uint64_t generator_seed = 0;
  std::string spec_name;
};

WorldScene scene_from_elevation(GridMap2D elevation, const TraversabilityParams& params,
                                std::string spec_name, std::uint64_t seed);

struct WorldSpec {
  enum class Kind { kEmpty, kCorridor, kRandomObstacles, kBoxRoom, kStairs };

  Kind kind = Kind::kEmpty;

  // Grid geometry; the map is centered on the robot start pose (origin at
  // minus half the extent).
  int width_cells = 200;
  int height_cells = 200;
  double resolution = 0.04;  // m/cell

  double corridor_width = 1.2;  // m between inner wall faces

  int obstacle_count = 12;
  double radius_min = 0.15;      // m
  double radius_max = 0.45;      // m
  double spawn_clearance = 1.0;  // m kept free around the map center

  double door_width = 0.8;  // m; <= 0 closes the room completely

  double step_height = 0.18;  // m
  double step_depth = 0.35;   // m

  TraversabilityParams trav;

  // Parses one of: empty | corridor | random_obstacles | box_room | stairs.
  // Throws std::invalid_argument naming the valid specs otherwise.
  static WorldSpec from_name(const std::string& name);
  std::string name() const;
};

// Deterministic for fixed (spec, seed). Obstacles are realized as elevation
// pillars so the full elevation -> traversability -> cost chain is exercised.
WorldScene generate_world(const WorldSpec& spec, std::uint64_t seed);

// A scene directory holds elevation/traversability/cost/obstacles .gm2d files
// plus a scene.txt metadata file (spec name, seed, grid parameters).
void save_scene(const WorldScene& scene, const std::filesystem::path& dir);
WorldScene load_scene(const std::filesystem::path& dir);

using SceneMap = std::map<std::string, WorldScene>;

}  // namespace geonav
