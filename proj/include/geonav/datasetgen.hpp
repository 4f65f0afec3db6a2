#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <random>
#include <string>
#include <string_view>
#include <vector>

#include "geonav/mppi.hpp"

namespace geonav {

// Stable seed derivation so per-frame work units are order-independent.
std::uint64_t derive_seed(std::uint64_t base, std::string_view tag);
std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n);

struct TeleopEntry {
  double timestamp = 0.0;  // s
  Pose2 pose;              // world frame
  std::string frame_ref;
  std::string scene_ref;
};

// Time-ordered recording of a driven trajectory. Timestamps are strictly
// increasing and at least two entries are required.
struct TeleopLog {
  std::vector<TeleopEntry> entries;

  void validate() const;  // throws std::invalid_argument
  double start_time() const { return entries.front().timestamp; }
  double end_time() const { return entries.back().timestamp; }
};

// Linear position / shortest-arc heading interpolation between log entries.
// Throws std::invalid_argument when t lies outside the log range.
Pose2 interpolate_pose(const TeleopLog& log, double t);

// Teleop log CSV: header "timestamp,x,y,theta,frame_ref,scene_ref".
TeleopLog load_teleop_csv(const std::filesystem::path& file);
void save_teleop_csv(const TeleopLog& log, const std::filesystem::path& file);

enum class SampleSource { kTeleop, kGeometric };

// One dataset record: a goal and the fixed-horizon waypoint sequence toward
// it, both in the robot-centric frame of the anchor pose.
struct Sample {
  std::string frame_ref;
  std::string scene_ref;
  Pose2 goal;
  Path waypoints;
  SampleSource source = SampleSource::kTeleop;
  double displacement = 0.0;  // m, origin to final waypoint
};

struct DatasetStats {
  std::size_t sample_count = 0;
  double total_length_m = 0.0;
  double total_time_h = 0.0;      // sample_count * horizon_T / 3600
  double avg_velocity_mps = 0.0;  // total_length / total_time
};

DatasetStats compute_stats(const std::vector<Sample>& samples, double horizon_T);

// Goal distribution in the robot-centric frame (diagonal Gaussian).
struct GoalDistribution {
  double mean_x = 5.0;   // m
  double mean_y = 0.0;   // m
  double mean_theta = 0.0;
  double std_x = 2.5;    // m
  double std_y = 2.0;    // m
  double std_theta = kPi / 4.0;
};

std::vector<Pose2> sample_goals(int k, std::mt19937_64& rng, const GoalDistribution& dist = {});

// Cuts a goal-conditioned segment anchored at t0 with goal pose at tg.
// Waypoints are sampled at t0 + i*min(T, tg-t0)/n for i = 1..n, so segments
// shorter than the horizon are time-warped and end exactly on the goal.
Sample extract_teleop_segment(const TeleopLog& log, double t0, double tg, int n, double horizon_T);

struct FilterDecision {
  bool keep = true;
  std::string reason;  // "stationary" | "invalid_elevation" when rejected
};

// Teleop samples are rejected below the displacement threshold; geometric
// samples are rejected when the scene's elevation has too few valid cells.
FilterDecision filter_sample(const Sample& sample, const WorldScene& scene,
                             double min_displacement = 0.25, double min_valid_fraction = 0.25);

struct DatasetGenConfig {
  int goals_per_frame = 10;  // K
  int horizon_steps = 50;    // N
  double horizon_T = 5.0;    // s
  double min_displacement = 0.25;    // m
  double min_valid_fraction = 0.25;
  double tg_offset_min = 1.0;   // s past the anchor frame
  double tg_offset_max = 15.0;  // s
  int frame_stride = 1;         // log entries per anchor frame
  GoalDistribution goal_dist;
  MppiConfig planner;
  std::uint64_t seed = 0;
};

struct GeoBatch {
  std::vector<Sample> samples;
  int rejected_collision = 0;
  int rejected_invalid_elevation = 0;
  int rejected_planner_error = 0;
};

// Samples K goals for one frame and labels each with a planned path.
// Colliding plans are discarded; per-goal planner errors never abort the
// batch. Best-effort plans toward infeasible goals are kept.
GeoBatch generate_geo_samples(const WorldScene& scene, const std::string& scene_ref,
                              const std::string& frame_ref, const Pose2& robot_pose,
                              const DatasetGenConfig& cfg);

struct BuildResult {
  DatasetStats tel;
  DatasetStats geo;
  DatasetStats aug;
  std::map<std::string, int> reject_counts;
  std::filesystem::path tel_file;
  std::filesystem::path geo_file;
  std::filesystem::path aug_file;
  std::filesystem::path stats_file;
};

// Produces tel.jsonl, geo.jsonl, aug.jsonl (= tel + geo) and stats files in
// out_dir. Deterministic: fixed inputs and seed give byte-identical files.
BuildResult build_dataset(const std::vector<TeleopLog>& logs, const SceneMap& scenes,
                          const DatasetGenConfig& cfg, const std::filesystem::path& out_dir);

// JSON Lines records with fields
// {frame_ref, scene_ref, source, goal, waypoints, displacement};
// floats carry 9 significant digits.
std::string sample_to_json(const Sample& sample);
Sample sample_from_json(const std::string& line);
void save_samples_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& file);
std::vector<Sample> load_samples_jsonl(const std::filesystem::path& file);

// Shared 9-significant-digit float formatting for all text serialization.
void append_formatted(std::string& out, double value);
std::string format_double(double value);

}  // namespace geonav
