#include "geonav/sim.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "geonav/datasetgen.hpp"

namespace geonav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Re-derives the traversability chain after an elevation edit.
void apply_event(WorldScene& scene, const ObstacleEvent& event, const TraversabilityParams& trav) {
  GridMap2D elevation = scene.elevation;
  for (int y = 0; y < elevation.height(); ++y) {
    for (int x = 0; x < elevation.width(); ++x) {
      const Pose2 c = elevation.cell_center({x, y});
      if (c.x >= event.x0 && c.x <= event.x1 && c.y >= event.y0 && c.y <= event.y1) {
        elevation.at(x, y) =
            event.action == ObstacleEvent::Action::kAdd ? event.height : 0.0;
      }
    }
  }
  const std::string name = scene.spec_name;
  const std::uint64_t seed = scene.generator_seed;
  scene = scene_from_elevation(std::move(elevation), trav, name, seed);
}

std::vector<Pose2> collect_obstacle_centers(const GridMap2D& obstacles) {
  std::vector<Pose2> centers;
  for (int y = 0; y < obstacles.height(); ++y) {
    for (int x = 0; x < obstacles.width(); ++x) {
      if (is_obstacle_cell(obstacles, x, y)) {
        centers.push_back(obstacles.cell_center({x, y}));
      }
    }
  }
  return centers;
}

double clearance_at(const Pose2& robot, const std::vector<Pose2>& obstacle_centers) {
  double best = kInf;
  for (const Pose2& c : obstacle_centers) {
    best = std::min(best, std::hypot(c.x - robot.x, c.y - robot.y));
  }
  return best;
}

}  // namespace

const char* run_status_name(RunStatus status) {
  switch (status) {
    case RunStatus::kReached:
      return "reached";
    case RunStatus::kCollided:
      return "collided";
    case RunStatus::kTimeout:
      return "timeout";
  }
  return "unknown";
}

void FollowerConfig::validate(double map_resolution) const {
  if (!(lookahead >= 2.0 * map_resolution)) {
    throw std::invalid_argument("FollowerConfig: lookahead must be >= 2 * resolution");
  }
  if (!(control_dt > 0.0) || !(replan_period > 0.0) || !(max_sim_time > 0.0)) {
    throw std::invalid_argument("FollowerConfig: time parameters must be positive");
  }
  if (!(goal_tolerance > 0.0)) {
    throw std::invalid_argument("FollowerConfig: goal_tolerance must be positive");
  }
}

Twist2 follower_step(const Pose2& robot, const Path& path, const FollowerConfig& cfg) {
  if (path.empty()) {
    throw std::invalid_argument("follower_step: empty path");
  }

  // Nearest waypoint, then the first one at least `lookahead` further along.
  std::size_t nearest = 0;
  double nearest_dist = kInf;
  for (std::size_t i = 0; i < path.size(); ++i) {
    const double d = std::hypot(path[i].x - robot.x, path[i].y - robot.y);
    if (d < nearest_dist) {
      nearest_dist = d;
      nearest = i;
    }
  }
  std::size_t target = path.size() - 1;
  double arc = nearest_dist;
  for (std::size_t i = nearest; i < path.size(); ++i) {
    if (i > nearest) {
      arc += std::hypot(path[i].x - path[i - 1].x, path[i].y - path[i - 1].y);
    }
    if (arc >= cfg.lookahead) {
      target = i;
      break;
    }
  }

  const Pose2 rel = relative_to(robot, path[target]);
  return clamp_twist(Twist2{rel.x / cfg.control_dt, rel.y / cfg.control_dt,
                            rel.theta / cfg.control_dt},
                     cfg.limits);
}

SimResult run_closed_loop(const WorldScene& scene, const Pose2& start, const Pose2& goal,
                          const PlannerFn& planner, const FollowerConfig& cfg,
                          const ObstacleSchedule& schedule) {
  cfg.validate(scene.obstacles.resolution());
  for (const ObstacleEvent& event : schedule.events) {
    if (event.time < 0.0 || event.time > cfg.max_sim_time) {
      throw std::invalid_argument("run_closed_loop: event time outside the sim horizon");
    }
  }
  std::vector<ObstacleEvent> events = schedule.events;
  std::stable_sort(events.begin(), events.end(),
                   [](const ObstacleEvent& a, const ObstacleEvent& b) { return a.time < b.time; });

  const TraversabilityParams trav_params;  // scene layers re-derived with defaults

  SimResult result;
  SimState& state = result.state;
  state.scene = scene;
  state.robot = start;
  state.time = 0.0;
  state.trace.emplace_back(0.0, start);

  std::vector<Pose2> obstacle_centers = collect_obstacle_centers(state.scene.obstacles);
  result.min_obstacle_clearance = clearance_at(start, obstacle_centers);

  bool have_field = false;
  DistanceField goal_field;
  auto refresh_goal_field = [&]() {
    try {
      goal_field = compute_gdf(state.scene.obstacles, goal);
      have_field = true;
    } catch (const InfeasibleGoalError&) {
      have_field = false;
    }
  };

  auto goal_distance = [&](const Pose2& p) {
    return have_field ? query_distance(goal_field, p) : kInf;
  };

  const double initial_l = [&]() {
    refresh_goal_field();
    return goal_distance(start);
  }();

  std::size_t next_event = 0;
  double next_replan = 0.0;
  bool scene_dirty = false;

  // Initial pose already in collision or at the goal.
  if (check_collision_pose(start, state.scene.obstacles, cfg.footprint)) {
    result.status = RunStatus::kCollided;
  } else if (goal_distance(start) <= cfg.goal_tolerance) {
    result.status = RunStatus::kReached;
  } else {
    result.status = RunStatus::kTimeout;
    while (state.time < cfg.max_sim_time) {
      // Scheduled world changes take effect immediately; the planner sees
      // them at its next replan.
      while (next_event < events.size() && events[next_event].time <= state.time) {
        apply_event(state.scene, events[next_event], trav_params);
        obstacle_centers = collect_obstacle_centers(state.scene.obstacles);
        ++next_event;
        scene_dirty = true;
      }

      if (state.time >= next_replan) {
        if (scene_dirty || !have_field) {
          refresh_goal_field();
          scene_dirty = false;
        }
        try {
          state.active_path = planner(state.scene, state.robot, goal);
        } catch (const std::exception&) {
          state.active_path.clear();  // hold position until the next replan
          ++result.planner_failures;
        }
        ++result.replans;
        next_replan += cfg.replan_period;
      }

      const Twist2 cmd = state.active_path.empty()
                             ? Twist2{}
                             : follower_step(state.robot, state.active_path, cfg);
      state.robot = kinematic_step(state.robot, cmd, cfg.control_dt);
      state.time += cfg.control_dt;
      state.trace.emplace_back(state.time, state.robot);
      result.min_obstacle_clearance =
          std::min(result.min_obstacle_clearance, clearance_at(state.robot, obstacle_centers));

      if (check_collision_pose(state.robot, state.scene.obstacles, cfg.footprint)) {
        result.status = RunStatus::kCollided;
        break;
      }
      if (goal_distance(state.robot) <= cfg.goal_tolerance) {
        result.status = RunStatus::kReached;
        break;
      }
    }
  }

  // Judge the driven trace.
  EvalOutcome& outcome = result.outcome;
  outcome.eval_case =
      EvalCase{state.scene.spec_name, start, goal, std::isfinite(initial_l) ? initial_l : 0.0};
  outcome.path.reserve(state.trace.size());
  for (const auto& [t, pose] : state.trace) {
    outcome.path.push_back(pose);
  }
  outcome.executed_length = path_length(start, outcome.path);
  outcome.collided = result.status == RunStatus::kCollided;
  outcome.final_gd = goal_distance(state.robot);
  outcome.final_heading_error = heading_distance(goal.theta, state.robot.theta);
  outcome.success = !outcome.collided && outcome.final_gd <= kSuccessGdThreshold;
  return result;
}

void save_trace_csv(const std::vector<std::pair<double, Pose2>>& trace,
                    const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) {
    throw std::runtime_error("save_trace_csv: cannot open " + file.string());
  }
  out << "time,x,y,theta\n";
  std::string buffer;
  for (const auto& [t, pose] : trace) {
    buffer.clear();
    append_formatted(buffer, t);
    buffer += ',';
    append_formatted(buffer, pose.x);
    buffer += ',';
    append_formatted(buffer, pose.y);
    buffer += ',';
    append_formatted(buffer, pose.theta);
    buffer += '\n';
    out << buffer;
  }
}

std::vector<std::pair<double, Pose2>> load_trace_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("load_trace_csv: cannot open " + file.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != "time,x,y,theta") {
    throw std::runtime_error("load_trace_csv: bad header in " + file.string());
  }
  std::vector<std::pair<double, Pose2>> trace;
  while (std::getline(in, line)) {
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<double> values;
    while (std::getline(row, field, ',')) {
      values.push_back(std::stod(field));
    }
    if (values.size() != 4) {
      throw std::runtime_error("load_trace_csv: malformed row in " + file.string());
    }
    trace.emplace_back(values[0], Pose2{values[1], values[2], values[3]});
  }
  return trace;
}

PlannerFn make_warm_start_mppi_planner(const MppiConfig& cfg, double replan_period) {
  struct State {
    CommandSequence last_commands;
    std::uint64_t calls = 0;
  };
  auto state = std::make_shared<State>();
  const int shift = std::max(1, static_cast<int>(std::lround(replan_period / cfg.dt)));
  return [cfg, state, shift](const WorldScene& scene, const Pose2& start, const Pose2& goal) {
    MppiConfig per_call = cfg;
    per_call.seed = derive_seed(cfg.seed, state->calls++);
    CommandSequence mean;
    mean.dt = cfg.dt;
    mean.commands.assign(cfg.horizon_steps, Twist2{});
    const auto& prev = state->last_commands.commands;
    for (std::size_t t = 0; t < mean.commands.size() && t + shift < prev.size(); ++t) {
      mean.commands[t] = prev[t + shift];
    }
    // A scene change can turn the carried-over commands into a collision
    // course; sampling around them would explore only colliding rollouts.
    if (check_collision(rollout(start, mean), scene.obstacles, cfg.footprint)) {
      mean.commands.assign(cfg.horizon_steps, Twist2{});
    }
    const PlanResult result = plan(scene, start, goal, per_call, mean);
    state->last_commands = result.commands;
    return result.path;
  };
}

ObstacleSchedule load_schedule_json(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("load_schedule_json: cannot open " + file.string());
  }
  nlohmann::json j;
  in >> j;
  ObstacleSchedule schedule;
  for (const auto& item : j) {
    ObstacleEvent event;
    event.time = item.at("time").get<double>();
    const std::string action = item.at("action").get<std::string>();
    if (action == "add") {
      event.action = ObstacleEvent::Action::kAdd;
    } else if (action == "remove") {
      event.action = ObstacleEvent::Action::kRemove;
    } else {
      throw std::runtime_error("load_schedule_json: unknown action '" + action + "'");
    }
    const auto& rect = item.at("rect");
    event.x0 = rect.at(0).get<double>();
    event.y0 = rect.at(1).get<double>();
    event.x1 = rect.at(2).get<double>();
    event.y1 = rect.at(3).get<double>();
    event.height = item.value("height", 1.2);
    schedule.events.push_back(event);
  }
  return schedule;
}

}  // namespace geonav
