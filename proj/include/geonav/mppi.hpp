#pragma once

#include <cstdint>
#include <limits>
#include <vector>

#include "geonav/geodesic.hpp"
#include "geonav/worldmodel.hpp"

namespace geonav {

struct MppiConfig {
  int horizon_steps = 50;
  double dt = 0.1;  // s

  int population_size = 1024;
  int iterations = 24;
  double temperature = 0.1;  // softmax lambda

  // Per-step Gaussian noise applied around the population mean. Noise is
  // AR(1)-correlated along the horizon (alpha = noise_correlation) with the
  // per-step marginal std kept at the configured value.
  double noise_std_vx = 0.4;     // m/s
  double noise_std_vy = 0.25;    // m/s
  double noise_std_omega = 0.5;  // rad/s
  double noise_correlation = 0.8;

  double w_trav = 1.0;
  double w_goal = 1.0;
  double w_effort = 0.05;

  // Inner effort weights on |vx|, |vy|, |omega|.
  double w_lin = 1.0;
  double w_lat = 2.0;
  double w_ang = 0.5;

  double goal_align_radius = 0.5;  // m; heading term active inside this radius

  VelocityLimits limits;
  Footprint footprint;
  std::uint64_t seed = 0;

  // Throws std::invalid_argument on violated bounds.
  void validate() const;
};

struct CostBreakdown {
  double trav = 0.0;
  double goal = 0.0;
  double effort = 0.0;
  double total = 0.0;
};

struct PlanResult {
  Path path;  // map frame; path == rollout(start, commands)
  CommandSequence commands;
  CostBreakdown cost;
  bool collided = false;
  double final_geodesic_distance = std::numeric_limits<double>::infinity();
  int iterations_run = 0;
  // Set when the requested goal cell was infeasible or unreachable and the
  // distance field was retargeted to the nearest start-reachable free cell.
  bool goal_retargeted = false;
};

// Sum over waypoints of the cost-map cells covered by the dilated footprint
// rasterized at each waypoint pose. Cells outside the map contribute the
// obstacle cost each.
double cost_traversability(const Path& path, const GridMap2D& cost_map, const Footprint& fp);

// Sum of per-waypoint geodesic distances plus, within align_radius of the
// goal, the absolute wrapped heading difference to the goal heading.
double cost_goal(const Path& path, const DistanceField& field, const Pose2& goal,
                 double align_radius);

// Sum over commands of w_lin*|vx| + w_lat*|vy| + w_ang*|omega|.
double cost_effort(const CommandSequence& cmds, double w_lin, double w_lat, double w_ang);

// Weighted combination of the three terms; the rollout happens internally.
CostBreakdown total_cost(const Pose2& start, const CommandSequence& cmds, const WorldScene& scene,
                         const DistanceField& field, const MppiConfig& cfg);

// Softmax update: weights exp(-(J_k - min_J)/lambda) normalized to sum 1,
// new mean = sum of weighted command sequences. When no population cost is
// finite the previous mean is returned unchanged.
CommandSequence mppi_update(const std::vector<double>& costs,
                            const std::vector<CommandSequence>& population, double lambda,
                            const CommandSequence& previous_mean);

// True iff any waypoint's dilated-footprint rasterization covers an obstacle
// cell or leaves the map.
bool check_collision(const Path& path, const GridMap2D& obstacles, const Footprint& fp);
bool check_collision_pose(const Pose2& pose, const GridMap2D& obstacles, const Footprint& fp);

// Iterative sample -> evaluate -> update around the current mean, warm-started
// at zero commands; returns the best-cost rollout seen. Deterministic for a
// fixed config seed. An infeasible or unreachable goal retargets the distance
// field to the nearest start-reachable free cell and flags the result.
PlanResult plan(const WorldScene& scene, const Pose2& start, const Pose2& goal,
                const MppiConfig& cfg);
PlanResult plan(const WorldScene& scene, const Pose2& start, const Pose2& goal,
                const MppiConfig& cfg, const CommandSequence& initial_mean);

}  // namespace geonav
