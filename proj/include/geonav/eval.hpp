#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "geonav/mppi.hpp"

namespace geonav {

// Success threshold on the geodesic distance of the final waypoint.
inline constexpr double kSuccessGdThreshold = 1.0;  // m

struct EvalCase {
  std::string scene_ref;
  Pose2 start;
  Pose2 goal;
  double geodesic_start_distance = 0.0;  // l_i, meters; finite after filtering
};

struct EvalOutcome {
  EvalCase eval_case;
  Path path;                      // world frame
  double executed_length = 0.0;   // p_i
  bool collided = false;
  double final_gd = std::numeric_limits<double>::infinity();
  bool success = false;           // final_gd <= 1.0 m and not collided
  bool planner_failed = false;
  double final_heading_error = 0.0;  // rad, diagnostic only
};

struct EvalReport {
  double collision_pct = 0.0;
  double success_pct = 0.0;
  double spl_pct = 0.0;
  int n_cases = 0;
  int planner_failures = 0;
  std::vector<EvalOutcome> outcomes;
};

using PlannerFn =
    std::function<Path(const WorldScene& scene, const Pose2& start, const Pose2& goal)>;
using SceneProvider = std::function<std::shared_ptr<const WorldScene>(const std::string& ref)>;

SceneProvider make_map_provider(SceneMap scenes);

// Judges one case: final geodesic distance of the last waypoint, footprint
// collision along the path, executed length from the start pose. Throws
// std::logic_error when the case's goal was never reachability-filtered.
EvalOutcome judge(const EvalCase& eval_case, const Path& path, const WorldScene& scene,
                  const Footprint& footprint = {});

// Success weighted by normalized inverse path length:
// (1/N) * sum S_i * l_i / max(p_i, l_i). Throws on an empty outcome list.
double spl(const std::vector<EvalOutcome>& outcomes);

// Evenly spaced waypoints on the segment toward the goal, truncated at
// max_length; headings face the goal, final heading matches the goal when
// it is reached.
Path straight_line_baseline(const Pose2& start, const Pose2& goal, int n_waypoints = 50,
                            double max_length = 5.0);

// Keeps cases whose goal cell has finite geodesic distance from the start
// cell and fills in geodesic_start_distance; discarded counts the rest.
std::vector<EvalCase> reachability_filter(const std::vector<EvalCase>& cases,
                                          const SceneProvider& scenes, int* discarded = nullptr);

// Runs the planner per case, judges each outcome, aggregates percentages.
// A planner exception counts the case as a failure and never aborts the batch.
EvalReport evaluate(const PlannerFn& planner, const std::vector<EvalCase>& cases,
                    const SceneProvider& scenes, const Footprint& footprint = {});

// Wraps mppi::plan; the per-case seed is derived from the base config seed
// and the case index so batches stay reproducible.
PlannerFn make_mppi_planner(const MppiConfig& cfg);
PlannerFn make_straight_line_planner(int n_waypoints = 50, double max_length = 5.0);

// ----- desk-scale benchmark case generation ---------------------------------

struct CaseGenConfig {
  WorldSpec world;          // world template; each case gets its own seed
  int n_cases = 50;
  double goal_r_min = 2.0;  // m, planar distance from start
  double goal_r_max = 4.0;  // m
  std::uint64_t seed = 0;
};

struct GeneratedCases {
  std::vector<EvalCase> cases;
  SceneProvider provider;
};

// One world per case (seed = base + index), goal drawn in the annulus and
// re-drawn until the reachability filter accepts it. scene_refs encode the
// world seed so the provider can regenerate scenes on demand.
GeneratedCases generate_eval_cases(const CaseGenConfig& cfg);

// Report serialization: JSON (machine), aligned table matching the
// Col. / Succ. / SPL column order (human), JSON Lines per-case outcomes.
std::string report_to_json(const EvalReport& report, const std::string& planner_name);
std::string report_table(const std::vector<std::pair<std::string, EvalReport>>& rows);
std::string outcome_to_json(const EvalOutcome& outcome);
EvalOutcome outcome_from_json(const std::string& line);
void save_outcomes_jsonl(const std::vector<EvalOutcome>& outcomes,
                         const std::filesystem::path& file);
std::vector<EvalOutcome> load_outcomes_jsonl(const std::filesystem::path& file);

}  // namespace geonav
