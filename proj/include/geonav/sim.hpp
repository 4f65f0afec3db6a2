#pragma once

#include "geonav/eval.hpp"

namespace geonav {

struct FollowerConfig {
  double lookahead = 0.6;           // m along the path
  double control_dt = 1.0 / 30.0;   // s
  double replan_period = 1.0 / 6.0; // s
  double max_sim_time = 60.0;       // s
  VelocityLimits limits;
  Footprint footprint;
  double goal_tolerance = 1.0;  // m, geodesic

  void validate(double map_resolution) const;  // throws std::invalid_argument
};

struct ObstacleEvent {
  enum class Action { kAdd, kRemove };
  double time = 0.0;  // s
  Action action = Action::kAdd;
  // Axis-aligned world-frame rectangle [x0,x1] x [y0,y1].
  double x0 = 0.0, y0 = 0.0, x1 = 0.0, y1 = 0.0;
  double height = 1.2;  // m, elevation assigned on add
};

struct ObstacleSchedule {
  std::vector<ObstacleEvent> events;
};

enum class RunStatus { kReached, kCollided, kTimeout };
const char* run_status_name(RunStatus status);

struct SimState {
  double time = 0.0;
  Pose2 robot;  // world frame
  Path active_path;
  WorldScene scene;  // current, possibly schedule-mutated
  std::vector<std::pair<double, Pose2>> trace;
};

struct SimResult {
  RunStatus status = RunStatus::kTimeout;
  SimState state;
  EvalOutcome outcome;  // judged on the driven trace; p = trace length
  int planner_failures = 0;
  int replans = 0;
  double min_obstacle_clearance = std::numeric_limits<double>::infinity();  // m, robot center
};

// Drives toward the first waypoint at least `lookahead` ahead along the path
// (the last when none is); the command is a clamped proportional drive toward
// it in the body frame.
Twist2 follower_step(const Pose2& robot, const Path& path, const FollowerConfig& cfg);

// Steps the robot at control_dt with follower_step, replans every
// replan_period on the current scene (schedule events mutate it), and
// terminates on goal, collision, or max_sim_time.
SimResult run_closed_loop(const WorldScene& scene, const Pose2& start, const Pose2& goal,
                          const PlannerFn& planner, const FollowerConfig& cfg,
                          const ObstacleSchedule& schedule = {});

// Trace CSV: header "time,x,y,theta", floats at 9 significant digits.
void save_trace_csv(const std::vector<std::pair<double, Pose2>>& trace,
                    const std::filesystem::path& file);
std::vector<std::pair<double, Pose2>> load_trace_csv(const std::filesystem::path& file);

// Schedule file: JSON array of {time, action: "add"|"remove", rect: [x0,y0,x1,y1], height}.
ObstacleSchedule load_schedule_json(const std::filesystem::path& file);

// MPPI planner for closed-loop use: every replan is seeded from the call
// index and warm-started with the previous commands shifted by one replan
// period.
PlannerFn make_warm_start_mppi_planner(const MppiConfig& cfg, double replan_period);

}  // namespace geonav
