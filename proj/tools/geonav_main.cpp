// geonav command line: world generation, planning, dataset building,
// evaluation and closed-loop simulation as reproducible file-based runs.

#include <algorithm>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "geonav/datasetgen.hpp"
#include "geonav/eval.hpp"
#include "geonav/sim.hpp"

namespace fs = std::filesystem;
using namespace geonav;

namespace {

Pose2 parse_pose(const std::string& text) {
  std::istringstream in(text);
  std::string field;
  std::vector<double> values;
  while (std::getline(in, field, ',')) {
    values.push_back(std::stod(field));
  }
  if (values.size() != 3) {
    throw std::invalid_argument("pose must be 'x,y,theta', got '" + text + "'");
  }
  return Pose2{values[0], values[1], wrap_angle(values[2])};
}

nlohmann::json json_pose(const Pose2& p) { return {p.x, p.y, p.theta}; }

nlohmann::json json_finite(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return nullptr;
}

// Coarse top-down view of the obstacle grid with an overlaid path.
std::string render_ascii(const WorldScene& scene, const Path& path, const Pose2& start,
                         const Pose2& goal, int stride = 4) {
  const GridMap2D& obstacles = scene.obstacles;
  const int rows = (obstacles.height() + stride - 1) / stride;
  const int cols = (obstacles.width() + stride - 1) / stride;
  std::vector<std::string> canvas(rows, std::string(cols, '.'));

  for (int y = 0; y < obstacles.height(); ++y) {
    for (int x = 0; x < obstacles.width(); ++x) {
      if (is_obstacle_cell(obstacles, x, y)) {
        canvas[y / stride][x / stride] = '#';
      }
    }
  }
  auto mark = [&](const Pose2& p, char symbol) {
    const auto cell = obstacles.world_to_cell(p);
    if (cell) {
      canvas[cell->y / stride][cell->x / stride] = symbol;
    }
  };
  for (const Pose2& wp : path) {
    mark(wp, 'o');
  }
  mark(start, 'S');
  mark(goal, 'G');

  std::string out;
  for (int r = rows - 1; r >= 0; --r) {  // +y up
    out += canvas[r];
    out += '\n';
  }
  return out;
}

struct WorldOptions {
  std::string spec_name = "empty";
  WorldSpec spec;

  WorldSpec resolve() const {
    WorldSpec resolved = spec;
    resolved.kind = WorldSpec::from_name(spec_name).kind;
    return resolved;
  }
};

void add_world_options(CLI::App* cmd, WorldOptions& world) {
  cmd->add_option("--spec", world.spec_name,
                  "world spec: empty | corridor | random_obstacles | box_room | stairs")
      ->capture_default_str();
  cmd->add_option("--width-cells", world.spec.width_cells)->capture_default_str();
  cmd->add_option("--height-cells", world.spec.height_cells)->capture_default_str();
  cmd->add_option("--resolution", world.spec.resolution, "meters per cell")
      ->capture_default_str();
  cmd->add_option("--corridor-width", world.spec.corridor_width)->capture_default_str();
  cmd->add_option("--count", world.spec.obstacle_count, "random obstacle count")
      ->capture_default_str();
  cmd->add_option("--radius-min", world.spec.radius_min)->capture_default_str();
  cmd->add_option("--radius-max", world.spec.radius_max)->capture_default_str();
  cmd->add_option("--spawn-clearance", world.spec.spawn_clearance)->capture_default_str();
  cmd->add_option("--door-width", world.spec.door_width)->capture_default_str();
  cmd->add_option("--step-height", world.spec.step_height)->capture_default_str();
  cmd->add_option("--step-depth", world.spec.step_depth)->capture_default_str();
}

void add_mppi_options(CLI::App* cmd, MppiConfig& cfg) {
  cmd->add_option("--horizon", cfg.horizon_steps)->capture_default_str();
  cmd->add_option("--dt", cfg.dt)->capture_default_str();
  cmd->add_option("--population", cfg.population_size)->capture_default_str();
  cmd->add_option("--iterations", cfg.iterations)->capture_default_str();
  cmd->add_option("--lambda", cfg.temperature)->capture_default_str();
  cmd->add_option("--noise-vx", cfg.noise_std_vx)->capture_default_str();
  cmd->add_option("--noise-vy", cfg.noise_std_vy)->capture_default_str();
  cmd->add_option("--noise-omega", cfg.noise_std_omega)->capture_default_str();
  cmd->add_option("--noise-alpha", cfg.noise_correlation)->capture_default_str();
  cmd->add_option("--w-trav", cfg.w_trav)->capture_default_str();
  cmd->add_option("--w-goal", cfg.w_goal)->capture_default_str();
  cmd->add_option("--w-effort", cfg.w_effort)->capture_default_str();
  cmd->add_option("--w-lin", cfg.w_lin)->capture_default_str();
  cmd->add_option("--w-lat", cfg.w_lat)->capture_default_str();
  cmd->add_option("--w-ang", cfg.w_ang)->capture_default_str();
  cmd->add_option("--goal-align-radius", cfg.goal_align_radius)->capture_default_str();
  cmd->add_option("--vx-max", cfg.limits.vx_max)->capture_default_str();
  cmd->add_option("--vy-max", cfg.limits.vy_max)->capture_default_str();
  cmd->add_option("--omega-max", cfg.limits.omega_max)->capture_default_str();
  cmd->add_option("--half-length", cfg.footprint.half_length)->capture_default_str();
  cmd->add_option("--half-width", cfg.footprint.half_width)->capture_default_str();
  cmd->add_option("--safety-margin", cfg.footprint.safety_margin)->capture_default_str();
  cmd->add_option("--planner-seed", cfg.seed)->capture_default_str();
}

nlohmann::ordered_json plan_record(const PlanResult& result, const Pose2& start,
                                   const Pose2& goal, const MppiConfig& cfg) {
  nlohmann::ordered_json j;
  j["start"] = json_pose(start);
  j["goal"] = json_pose(goal);
  j["collided"] = result.collided;
  j["final_geodesic_distance"] = json_finite(result.final_geodesic_distance);
  j["goal_retargeted"] = result.goal_retargeted;
  j["iterations_run"] = result.iterations_run;
  j["cost"] = {{"total", result.cost.total},
               {"trav", result.cost.trav},
               {"goal", result.cost.goal},
               {"effort", result.cost.effort}};
  j["seed"] = cfg.seed;
  j["population"] = cfg.population_size;
  j["iterations"] = cfg.iterations;
  j["dt"] = result.commands.dt;
  nlohmann::json path = nlohmann::json::array();
  for (const Pose2& wp : result.path) {
    path.push_back(json_pose(wp));
  }
  j["path"] = path;
  nlohmann::json commands = nlohmann::json::array();
  for (const Twist2& cmd : result.commands.commands) {
    commands.push_back({cmd.vx, cmd.vy, cmd.omega});
  }
  j["commands"] = commands;
  return j;
}

std::string dataset_stats_table(const BuildResult& build) {
  std::ostringstream out;
  out << "Dataset     #Samples    Length [m]    Time [h]    Avg. vel. [m/s]\n";
  auto row = [&out](const char* name, const DatasetStats& s) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-10s %9zu %13.1f %11.4f %18.2f\n", name, s.sample_count,
                  s.total_length_m, s.total_time_h, s.avg_velocity_mps);
    out << line;
  };
  row("TEL", build.tel);
  row("GEO", build.geo);
  row("AUG", build.aug);
  return out.str();
}

int run_world(const WorldOptions& world, std::uint64_t seed, const fs::path& out) {
  const WorldSpec spec = world.resolve();
  const WorldScene scene = generate_world(spec, seed);
  save_scene(scene, out);
  std::cout << "wrote scene '" << scene.spec_name << "' (seed " << seed << ") to " << out
            << "\n";
  return 0;
}

int run_plan(const fs::path& scene_dir, const std::string& start_text,
             const std::string& goal_text, const MppiConfig& cfg, const fs::path& out,
             bool render) {
  const WorldScene scene = load_scene(scene_dir);
  const Pose2 start = parse_pose(start_text);
  const Pose2 goal = parse_pose(goal_text);
  const PlanResult result = plan(scene, start, goal, cfg);

  fs::create_directories(out);
  std::ofstream record(out / "plan.json");
  record << plan_record(result, start, goal, cfg).dump(2) << "\n";
  if (render) {
    std::ofstream view(out / "render.txt");
    view << render_ascii(scene, result.path, start, goal);
  }
  std::cout << "plan: cost=" << result.cost.total << " final_gd=" << result.final_geodesic_distance
            << (result.collided ? " COLLIDED" : "")
            << (result.goal_retargeted ? " (goal retargeted, best effort)" : "") << "\n";
  return 0;
}

int run_dataset(const std::vector<std::string>& log_files, const fs::path& scenes_dir,
                DatasetGenConfig cfg, const fs::path& out) {
  std::vector<TeleopLog> logs;
  for (const std::string& file : log_files) {
    logs.push_back(load_teleop_csv(file));
  }

  SceneMap scenes;
  if (!fs::is_directory(scenes_dir)) {
    throw std::runtime_error("dataset: scenes dir not found: " + scenes_dir.string());
  }
  std::vector<fs::path> scene_dirs;
  for (const auto& entry : fs::directory_iterator(scenes_dir)) {
    if (entry.is_directory()) {
      scene_dirs.push_back(entry.path());
    }
  }
  std::sort(scene_dirs.begin(), scene_dirs.end());
  for (const fs::path& dir : scene_dirs) {
    scenes[dir.filename().string()] = load_scene(dir);
  }

  const BuildResult build = build_dataset(logs, scenes, cfg, out);
  const std::string table = dataset_stats_table(build);
  std::cout << table;
  std::cout << "rejects:";
  if (build.reject_counts.empty()) {
    std::cout << " none";
  }
  for (const auto& [reason, count] : build.reject_counts) {
    std::cout << " " << reason << "=" << count;
  }
  std::cout << "\n";
  std::ofstream stats_txt(out / "stats.txt");
  stats_txt << table;
  return 0;
}

int run_eval(const WorldOptions& world, int n_cases, double r_min, double r_max,
             std::uint64_t seed, const std::string& planner_name, const MppiConfig& cfg,
             const fs::path& out) {
  CaseGenConfig gen;
  gen.world = world.resolve();
  gen.n_cases = n_cases;
  gen.goal_r_min = r_min;
  gen.goal_r_max = r_max;
  gen.seed = seed;
  GeneratedCases generated = generate_eval_cases(gen);

  PlannerFn planner;
  if (planner_name == "mppi") {
    planner = make_mppi_planner(cfg);
  } else if (planner_name == "straight") {
    planner = make_straight_line_planner(cfg.horizon_steps);
  } else {
    throw std::invalid_argument("eval: planner must be 'mppi' or 'straight'");
  }

  const EvalReport report = evaluate(planner, generated.cases, generated.provider, cfg.footprint);

  fs::create_directories(out);
  std::ofstream json_out(out / "report.json");
  json_out << report_to_json(report, planner_name) << "\n";
  const std::string table = report_table({{planner_name, report}});
  std::ofstream table_out(out / "report.txt");
  table_out << table;
  save_outcomes_jsonl(report.outcomes, out / "outcomes.jsonl");
  std::cout << table;
  return 0;
}

int run_sim(const fs::path& scene_dir, const std::string& start_text,
            const std::string& goal_text, const fs::path& schedule_file, FollowerConfig follower,
            const MppiConfig& cfg, double planner_margin, const fs::path& out) {
  const WorldScene scene = load_scene(scene_dir);
  const Pose2 start = parse_pose(start_text);
  const Pose2 goal = parse_pose(goal_text);
  ObstacleSchedule schedule;
  if (!schedule_file.empty()) {
    schedule = load_schedule_json(schedule_file);
  }
  follower.limits = cfg.limits;
  follower.footprint = cfg.footprint;

  // The planner keeps extra clearance so follower tracking error stays
  // inside the judged footprint.
  MppiConfig planner_cfg = cfg;
  planner_cfg.footprint.safety_margin = std::max(planner_margin, cfg.footprint.safety_margin);

  const PlannerFn planner = make_warm_start_mppi_planner(planner_cfg, follower.replan_period);
  const SimResult result = run_closed_loop(scene, start, goal, planner, follower, schedule);

  fs::create_directories(out);
  save_trace_csv(result.state.trace, out / "trace.csv");
  nlohmann::ordered_json j;
  j["status"] = run_status_name(result.status);
  j["sim_time"] = result.state.time;
  j["trace_length_m"] = result.outcome.executed_length;
  j["final_gd"] = json_finite(result.outcome.final_gd);
  j["min_obstacle_clearance"] = json_finite(result.min_obstacle_clearance);
  j["replans"] = result.replans;
  j["planner_failures"] = result.planner_failures;
  j["seed"] = cfg.seed;
  std::ofstream outcome_out(out / "outcome.json");
  outcome_out << j.dump(2) << "\n";
  std::ofstream view(out / "render.txt");
  view << render_ascii(result.state.scene, result.outcome.path, start, goal);

  std::cout << "sim: " << run_status_name(result.status) << " after " << result.state.time
            << " s, trace " << result.outcome.executed_length << " m\n";
  switch (result.status) {
    case RunStatus::kReached:
      return 0;
    case RunStatus::kCollided:
      return 2;
    case RunStatus::kTimeout:
      return 3;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"geonav: MPPI planning, dataset synthesis and evaluation on grid worlds"};
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML config file; sections match subcommands");
  app.allow_config_extras(CLI::config_extras_mode::error);
  bool print_config = false;
  app.add_flag("--print-config", print_config, "print the fully-resolved configuration");

  // world
  auto* world_cmd = app.add_subcommand("world", "generate a procedural world scene");
  WorldOptions world_opts;
  std::uint64_t world_seed = 0;
  std::string world_out = "world_out";
  add_world_options(world_cmd, world_opts);
  world_cmd->add_option("--seed", world_seed)->capture_default_str();
  world_cmd->add_option("--out", world_out, "output scene directory")->capture_default_str();

  // plan
  auto* plan_cmd = app.add_subcommand("plan", "plan one path on a stored scene");
  std::string plan_scene;
  std::string plan_start = "0,0,0";
  std::string plan_goal = "3,0,0";
  std::string plan_out = "plan_out";
  bool plan_render = false;
  MppiConfig plan_cfg;
  plan_cmd->add_option("--scene", plan_scene, "scene directory")->required();
  plan_cmd->add_option("--start", plan_start, "start pose 'x,y,theta'")->capture_default_str();
  plan_cmd->add_option("--goal", plan_goal, "goal pose 'x,y,theta'")->capture_default_str();
  plan_cmd->add_option("--out", plan_out)->capture_default_str();
  plan_cmd->add_flag("--render", plan_render, "write an ASCII rendering");
  add_mppi_options(plan_cmd, plan_cfg);

  // dataset
  auto* dataset_cmd = app.add_subcommand("dataset", "build TEL/GEO/AUG dataset files");
  std::vector<std::string> dataset_logs;
  std::string dataset_scenes;
  std::string dataset_out = "dataset_out";
  DatasetGenConfig dataset_cfg;
  dataset_cmd->add_option("--logs", dataset_logs, "teleop log CSV files")->required();
  dataset_cmd->add_option("--scenes", dataset_scenes, "directory of scene subdirectories")
      ->required();
  dataset_cmd->add_option("--out", dataset_out)->capture_default_str();
  dataset_cmd->add_option("--k", dataset_cfg.goals_per_frame, "goals per frame")
      ->capture_default_str();
  dataset_cmd->add_option("--n", dataset_cfg.horizon_steps, "waypoints per sample")
      ->capture_default_str();
  dataset_cmd->add_option("--horizon-t", dataset_cfg.horizon_T, "sample duration, seconds")
      ->capture_default_str();
  dataset_cmd->add_option("--frame-stride", dataset_cfg.frame_stride,
                          "log entries per anchor frame")
      ->capture_default_str();
  dataset_cmd->add_option("--seed", dataset_cfg.seed)->capture_default_str();
  add_mppi_options(dataset_cmd, dataset_cfg.planner);

  // eval
  auto* eval_cmd = app.add_subcommand("eval", "benchmark a planner on generated cases");
  WorldOptions eval_world;
  eval_world.spec_name = "random_obstacles";
  int eval_n_cases = 50;
  double eval_r_min = 2.0;
  double eval_r_max = 4.0;
  std::uint64_t eval_seed = 0;
  std::string eval_planner = "mppi";
  std::string eval_out = "eval_out";
  MppiConfig eval_cfg;
  add_world_options(eval_cmd, eval_world);
  eval_cmd->add_option("--n-cases", eval_n_cases)->capture_default_str();
  eval_cmd->add_option("--r-min", eval_r_min, "goal distance lower bound")->capture_default_str();
  eval_cmd->add_option("--r-max", eval_r_max, "goal distance upper bound")->capture_default_str();
  eval_cmd->add_option("--seed", eval_seed)->capture_default_str();
  eval_cmd->add_option("--planner", eval_planner, "mppi | straight")->capture_default_str();
  eval_cmd->add_option("--out", eval_out)->capture_default_str();
  add_mppi_options(eval_cmd, eval_cfg);

  // sim
  auto* sim_cmd = app.add_subcommand("sim", "closed-loop run with replanning");
  std::string sim_scene;
  std::string sim_start = "0,0,0";
  std::string sim_goal = "3,0,0";
  std::string sim_schedule;
  std::string sim_out = "sim_out";
  FollowerConfig sim_follower;
  MppiConfig sim_cfg;
  sim_cfg.population_size = 256;
  sim_cfg.iterations = 8;
  double sim_planner_margin = 0.12;
  sim_cmd->add_option("--scene", sim_scene, "scene directory")->required();
  sim_cmd->add_option("--start", sim_start)->capture_default_str();
  sim_cmd->add_option("--goal", sim_goal)->capture_default_str();
  sim_cmd->add_option("--schedule", sim_schedule, "obstacle schedule JSON file");
  sim_cmd->add_option("--out", sim_out)->capture_default_str();
  sim_cmd->add_option("--lookahead", sim_follower.lookahead)->capture_default_str();
  sim_cmd->add_option("--control-dt", sim_follower.control_dt)->capture_default_str();
  sim_cmd->add_option("--replan-period", sim_follower.replan_period)->capture_default_str();
  sim_cmd->add_option("--max-time", sim_follower.max_sim_time)->capture_default_str();
  sim_cmd->add_option("--planner-margin", sim_planner_margin,
                      "safety margin used for planning (judging keeps --safety-margin)")
      ->capture_default_str();
  add_mppi_options(sim_cmd, sim_cfg);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e);
  }

  try {
    if (print_config) {
      std::cout << app.config_to_str(true, false);
    }
    if (world_cmd->parsed()) {
      return run_world(world_opts, world_seed, world_out);
    }
    if (plan_cmd->parsed()) {
      return run_plan(plan_scene, plan_start, plan_goal, plan_cfg, plan_out, plan_render);
    }
    if (dataset_cmd->parsed()) {
      return run_dataset(dataset_logs, dataset_scenes, dataset_cfg, dataset_out);
    }
    if (eval_cmd->parsed()) {
      return run_eval(eval_world, eval_n_cases, eval_r_min, eval_r_max, eval_seed, eval_planner,
                      eval_cfg, eval_out);
    }
    if (sim_cmd->parsed()) {
      return run_sim(sim_scene, sim_start, sim_goal,
                     sim_schedule.empty() ? fs::path() : fs::path(sim_schedule), sim_follower,
                     sim_cfg, sim_planner_margin, sim_out);
    }
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
