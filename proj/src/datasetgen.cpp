#include "geonav/datasetgen.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

namespace geonav {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

const char* source_name(SampleSource source) {
  return source == SampleSource::kTeleop ? "teleop" : "geometric";
}

SampleSource source_from_name(const std::string& name) {
  if (name == "teleop") {
    return SampleSource::kTeleop;
  }
  if (name == "geometric") {
    return SampleSource::kGeometric;
  }
  throw std::invalid_argument("unknown sample source '" + name + "'");
}

}  // namespace

std::uint64_t derive_seed(std::uint64_t base, std::string_view tag) {
  // FNV-1a over the tag, mixed with the base seed.
  std::uint64_t h = 0xcbf29ce484222325ULL ^ base;
  for (unsigned char c : tag) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return splitmix64(h);
}

std::uint64_t derive_seed(std::uint64_t base, std::uint64_t n) {
  return splitmix64(base ^ splitmix64(n));
}

void TeleopLog::validate() const {
  if (entries.size() < 2) {
    throw std::invalid_argument("TeleopLog: at least two entries required");
  }
  for (std::size_t i = 1; i < entries.size(); ++i) {
    if (!(entries[i].timestamp > entries[i - 1].timestamp)) {
      throw std::invalid_argument("TeleopLog: timestamps must be strictly increasing");
    }
  }
}

Pose2 interpolate_pose(const TeleopLog& log, double t) {
  if (log.entries.size() < 2 || t < log.start_time() || t > log.end_time()) {
    throw std::invalid_argument("interpolate_pose: time outside log range");
  }
  const auto upper = std::upper_bound(
      log.entries.begin(), log.entries.end(), t,
      [](double value, const TeleopEntry& e) { return value < e.timestamp; });
  if (upper == log.entries.begin()) {
    return log.entries.front().pose;
  }
  if (upper == log.entries.end()) {
    return log.entries.back().pose;
  }
  const TeleopEntry& b = *upper;
  const TeleopEntry& a = *(upper - 1);
  const double u = (t - a.timestamp) / (b.timestamp - a.timestamp);
  return Pose2{a.pose.x + u * (b.pose.x - a.pose.x), a.pose.y + u * (b.pose.y - a.pose.y),
               wrap_angle(a.pose.theta + u * wrap_angle(b.pose.theta - a.pose.theta))};
}

TeleopLog load_teleop_csv(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("load_teleop_csv: cannot open " + file.string());
  }
  std::string line;
  if (!std::getline(in, line) || line != "timestamp,x,y,theta,frame_ref,scene_ref") {
    throw std::runtime_error("load_teleop_csv: bad header in " + file.string());
  }
  TeleopLog log;
  std::size_t line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.empty()) {
      continue;
    }
    std::istringstream row(line);
    std::string field;
    std::vector<std::string> fields;
    while (std::getline(row, field, ',')) {
      fields.push_back(field);
    }
    if (fields.size() != 6) {
      throw std::runtime_error("load_teleop_csv: malformed row " + std::to_string(line_no) +
                               " in " + file.string());
    }
    TeleopEntry entry;
    entry.timestamp = std::stod(fields[0]);
    entry.pose = {std::stod(fields[1]), std::stod(fields[2]), std::stod(fields[3])};
    entry.frame_ref = fields[4];
    entry.scene_ref = fields[5];
    log.entries.push_back(std::move(entry));
  }
  log.validate();
  return log;
}

void save_teleop_csv(const TeleopLog& log, const std::filesystem::path& file) {
  log.validate();
  std::ofstream out(file);
  if (!out) {
    throw std::runtime_error("save_teleop_csv: cannot open " + file.string());
  }
  out << "timestamp,x,y,theta,frame_ref,scene_ref\n";
  std::string buffer;
  for (const TeleopEntry& e : log.entries) {
    if (e.frame_ref.find(',') != std::string::npos ||
        e.scene_ref.find(',') != std::string::npos) {
      throw std::invalid_argument("save_teleop_csv: refs must not contain commas");
    }
    buffer.clear();
    append_formatted(buffer, e.timestamp);
    buffer += ',';
    append_formatted(buffer, e.pose.x);
    buffer += ',';
    append_formatted(buffer, e.pose.y);
    buffer += ',';
    append_formatted(buffer, e.pose.theta);
    buffer += ',';
    buffer += e.frame_ref;
    buffer += ',';
    buffer += e.scene_ref;
    buffer += '\n';
    out << buffer;
  }
}

DatasetStats compute_stats(const std::vector<Sample>& samples, double horizon_T) {
  DatasetStats stats;
  stats.sample_count = samples.size();
  for (const Sample& s : samples) {
    stats.total_length_m += path_length(Pose2{}, s.waypoints);
  }
  const double total_time_s = static_cast<double>(stats.sample_count) * horizon_T;
  stats.total_time_h = total_time_s / 3600.0;
  stats.avg_velocity_mps = total_time_s > 0.0 ? stats.total_length_m / total_time_s : 0.0;
  return stats;
}

std::vector<Pose2> sample_goals(int k, std::mt19937_64& rng, const GoalDistribution& dist) {
  if (k < 1) {
    throw std::invalid_argument("sample_goals: k must be >= 1");
  }
  std::normal_distribution<double> gauss(0.0, 1.0);
  std::vector<Pose2> goals;
  goals.reserve(k);
  for (int i = 0; i < k; ++i) {
    const double x = dist.mean_x + dist.std_x * gauss(rng);
    const double y = dist.mean_y + dist.std_y * gauss(rng);
    const double theta = wrap_angle(dist.mean_theta + dist.std_theta * gauss(rng));
    goals.push_back(Pose2{x, y, theta});
  }
  return goals;
}

Sample extract_teleop_segment(const TeleopLog& log, double t0, double tg, int n,
                              double horizon_T) {
  log.validate();
  if (!(t0 < tg)) {
    throw std::invalid_argument("extract_teleop_segment: t0 must precede tg");
  }
  if (t0 < log.start_time() || tg > log.end_time()) {
    throw std::invalid_argument("extract_teleop_segment: times outside log range");
  }
  if (n < 1 || !(horizon_T > 0.0)) {
    throw std::invalid_argument("extract_teleop_segment: bad horizon");
  }

  const Pose2 base = interpolate_pose(log, t0);
  const double span = std::min(horizon_T, tg - t0);

  Sample sample;
  sample.source = SampleSource::kTeleop;
  sample.goal = relative_to(base, interpolate_pose(log, tg));
  sample.waypoints.reserve(n);
  for (int i = 1; i <= n; ++i) {
    const double t = t0 + span * static_cast<double>(i) / static_cast<double>(n);
    sample.waypoints.push_back(relative_to(base, interpolate_pose(log, t)));
  }
  sample.displacement = std::hypot(sample.waypoints.back().x, sample.waypoints.back().y);

  // Anchor frame: last entry at or before t0.
  const auto upper = std::upper_bound(
      log.entries.begin(), log.entries.end(), t0,
      [](double value, const TeleopEntry& e) { return value < e.timestamp; });
  const TeleopEntry& anchor = upper == log.entries.begin() ? log.entries.front() : *(upper - 1);
  sample.frame_ref = anchor.frame_ref;
  sample.scene_ref = anchor.scene_ref;
  return sample;
}

FilterDecision filter_sample(const Sample& sample, const WorldScene& scene,
                             double min_displacement, double min_valid_fraction) {
  if (sample.source == SampleSource::kTeleop && sample.displacement < min_displacement) {
    return {false, "stationary"};
  }
  if (sample.source == SampleSource::kGeometric &&
      scene.elevation.valid_fraction() < min_valid_fraction) {
    return {false, "invalid_elevation"};
  }
  return {true, {}};
}

GeoBatch generate_geo_samples(const WorldScene& scene, const std::string& scene_ref,
                              const std::string& frame_ref, const Pose2& robot_pose,
                              const DatasetGenConfig& cfg) {
  GeoBatch batch;
  if (scene.elevation.valid_fraction() < cfg.min_valid_fraction) {
    batch.rejected_invalid_elevation = cfg.goals_per_frame;
    return batch;
  }

  const std::uint64_t frame_seed = derive_seed(cfg.seed, "geo/" + frame_ref);
  std::mt19937_64 rng(frame_seed);
  const std::vector<Pose2> goals = sample_goals(cfg.goals_per_frame, rng, cfg.goal_dist);

  for (std::size_t k = 0; k < goals.size(); ++k) {
    MppiConfig planner = cfg.planner;
    planner.horizon_steps = cfg.horizon_steps;
    planner.seed = derive_seed(frame_seed, static_cast<std::uint64_t>(k));
    const Pose2 goal_world = compose(robot_pose, goals[k]);
    try {
      const PlanResult result = plan(scene, robot_pose, goal_world, planner);
      if (result.collided) {
        ++batch.rejected_collision;
        continue;
      }
      Sample sample;
      sample.frame_ref = frame_ref;
      sample.scene_ref = scene_ref;
      sample.source = SampleSource::kGeometric;
      sample.goal = goals[k];
      sample.waypoints.reserve(result.path.size());
      for (const Pose2& wp : result.path) {
        sample.waypoints.push_back(relative_to(robot_pose, wp));
      }
      sample.displacement =
          std::hypot(sample.waypoints.back().x, sample.waypoints.back().y);
      const FilterDecision decision =
          filter_sample(sample, scene, cfg.min_displacement, cfg.min_valid_fraction);
      if (!decision.keep) {
        if (decision.reason == "invalid_elevation") {
          ++batch.rejected_invalid_elevation;
        }
        continue;
      }
      batch.samples.push_back(std::move(sample));
    } catch (const std::exception&) {
      ++batch.rejected_planner_error;
    }
  }
  return batch;
}

BuildResult build_dataset(const std::vector<TeleopLog>& logs, const SceneMap& scenes,
                          const DatasetGenConfig& cfg, const std::filesystem::path& out_dir) {
  if (logs.empty()) {
    throw std::invalid_argument("build_dataset: no teleop logs given");
  }
  std::filesystem::create_directories(out_dir);

  std::vector<Sample> tel;
  std::vector<Sample> geo;
  std::map<std::string, int> rejects;

  const int stride = std::max(cfg.frame_stride, 1);
  for (const TeleopLog& log : logs) {
    log.validate();
    for (std::size_t i = 0; i < log.entries.size(); i += stride) {
      const TeleopEntry& entry = log.entries[i];
      const double t0 = entry.timestamp;

      // Teleop split: goal time drawn uniformly from (t0 + min, t0 + max],
      // clipped to the log end.
      const double tg_lo = t0 + cfg.tg_offset_min;
      const double tg_hi = std::min(t0 + cfg.tg_offset_max, log.end_time());
      if (tg_lo < tg_hi) {
        std::mt19937_64 rng(derive_seed(cfg.seed, "tel/" + entry.frame_ref));
        std::uniform_real_distribution<double> tg_dist(tg_lo, tg_hi);
        const double tg = tg_dist(rng);
        Sample sample = extract_teleop_segment(log, t0, tg, cfg.horizon_steps, cfg.horizon_T);
        const auto scene_it = scenes.find(sample.scene_ref);
        if (scene_it == scenes.end()) {
          throw std::runtime_error("build_dataset: unknown scene_ref '" + sample.scene_ref + "'");
        }
        const FilterDecision decision = filter_sample(sample, scene_it->second,
                                                      cfg.min_displacement,
                                                      cfg.min_valid_fraction);
        if (decision.keep) {
          tel.push_back(std::move(sample));
        } else {
          ++rejects[decision.reason];
        }
      }

      // Geometric split: same anchor frames, planner-labeled sampled goals.
      const auto scene_it = scenes.find(entry.scene_ref);
      if (scene_it == scenes.end()) {
        throw std::runtime_error("build_dataset: unknown scene_ref '" + entry.scene_ref + "'");
      }
      GeoBatch batch =
          generate_geo_samples(scene_it->second, entry.scene_ref, entry.frame_ref, entry.pose, cfg);
      if (batch.rejected_collision > 0) {
        rejects["collision"] += batch.rejected_collision;
      }
      if (batch.rejected_invalid_elevation > 0) {
        rejects["invalid_elevation"] += batch.rejected_invalid_elevation;
      }
      if (batch.rejected_planner_error > 0) {
        rejects["planner_error"] += batch.rejected_planner_error;
      }
      for (Sample& sample : batch.samples) {
        geo.push_back(std::move(sample));
      }
    }
  }

  std::vector<Sample> aug;
  aug.reserve(tel.size() + geo.size());
  aug.insert(aug.end(), tel.begin(), tel.end());
  aug.insert(aug.end(), geo.begin(), geo.end());

  BuildResult result;
  result.tel = compute_stats(tel, cfg.horizon_T);
  result.geo = compute_stats(geo, cfg.horizon_T);
  result.aug = compute_stats(aug, cfg.horizon_T);
  result.reject_counts = std::move(rejects);
  result.tel_file = out_dir / "tel.jsonl";
  result.geo_file = out_dir / "geo.jsonl";
  result.aug_file = out_dir / "aug.jsonl";
  result.stats_file = out_dir / "stats.json";

  save_samples_jsonl(tel, result.tel_file);
  save_samples_jsonl(geo, result.geo_file);
  save_samples_jsonl(aug, result.aug_file);

  auto stats_json = [](const DatasetStats& s) {
    return nlohmann::ordered_json{{"samples", s.sample_count},
                                  {"length_m", s.total_length_m},
                                  {"time_h", s.total_time_h},
                                  {"avg_velocity_mps", s.avg_velocity_mps}};
  };
  nlohmann::ordered_json stats;
  stats["seed"] = cfg.seed;
  stats["horizon_T"] = cfg.horizon_T;
  stats["tel"] = stats_json(result.tel);
  stats["geo"] = stats_json(result.geo);
  stats["aug"] = stats_json(result.aug);
  stats["rejects"] = result.reject_counts;
  std::ofstream stats_out(result.stats_file);
  if (!stats_out) {
    throw std::runtime_error("build_dataset: cannot write " + result.stats_file.string());
  }
  stats_out << stats.dump(2) << "\n";
  return result;
}

void append_formatted(std::string& out, double value) {
  char buffer[40];
  std::snprintf(buffer, sizeof(buffer), "%.9g", value);
  out += buffer;
}

std::string format_double(double value) {
  std::string out;
  append_formatted(out, value);
  return out;
}

std::string sample_to_json(const Sample& sample) {
  // Hand-rolled so field order and float precision stay fixed.
  const nlohmann::json frame_ref = sample.frame_ref;  // handles escaping
  const nlohmann::json scene_ref = sample.scene_ref;
  std::string out = "{\"frame_ref\":";
  out += frame_ref.dump();
  out += ",\"scene_ref\":";
  out += scene_ref.dump();
  out += ",\"source\":\"";
  out += source_name(sample.source);
  out += "\",\"goal\":[";
  append_formatted(out, sample.goal.x);
  out += ',';
  append_formatted(out, sample.goal.y);
  out += ',';
  append_formatted(out, sample.goal.theta);
  out += "],\"waypoints\":[";
  for (std::size_t i = 0; i < sample.waypoints.size(); ++i) {
    if (i > 0) {
      out += ',';
    }
    out += '[';
    append_formatted(out, sample.waypoints[i].x);
    out += ',';
    append_formatted(out, sample.waypoints[i].y);
    out += ',';
    append_formatted(out, sample.waypoints[i].theta);
    out += ']';
  }
  out += "],\"displacement\":";
  append_formatted(out, sample.displacement);
  out += '}';
  return out;
}

Sample sample_from_json(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  Sample sample;
  sample.frame_ref = j.at("frame_ref").get<std::string>();
  sample.scene_ref = j.at("scene_ref").get<std::string>();
  sample.source = source_from_name(j.at("source").get<std::string>());
  const auto& goal = j.at("goal");
  sample.goal = {goal.at(0).get<double>(), goal.at(1).get<double>(), goal.at(2).get<double>()};
  for (const auto& wp : j.at("waypoints")) {
    sample.waypoints.push_back(
        Pose2{wp.at(0).get<double>(), wp.at(1).get<double>(), wp.at(2).get<double>()});
  }
  sample.displacement = j.at("displacement").get<double>();
  return sample;
}

void save_samples_jsonl(const std::vector<Sample>& samples, const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) {
    throw std::runtime_error("save_samples_jsonl: cannot open " + file.string());
  }
  for (const Sample& sample : samples) {
    out << sample_to_json(sample) << "\n";
  }
}

std::vector<Sample> load_samples_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("load_samples_jsonl: cannot open " + file.string());
  }
  std::vector<Sample> samples;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      samples.push_back(sample_from_json(line));
    }
  }
  return samples;
}

}  // namespace geonav
