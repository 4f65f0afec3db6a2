#include "geonav/eval.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

#include <json.hpp>

#include "geonav/datasetgen.hpp"

namespace geonav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double percentage(std::size_t count, std::size_t total) {
  return total == 0 ? 0.0 : 100.0 * static_cast<double>(count) / static_cast<double>(total);
}

// JSON has no inf literal; non-finite distances serialize as null.
nlohmann::json json_finite(double v) {
  if (std::isfinite(v)) {
    return v;
  }
  return nullptr;
}

double finite_from_json(const nlohmann::json& j) {
  return j.is_null() ? kInf : j.get<double>();
}

}  // namespace

SceneProvider make_map_provider(SceneMap scenes) {
  auto shared = std::make_shared<SceneMap>(std::move(scenes));
  return [shared](const std::string& ref) -> std::shared_ptr<const WorldScene> {
    const auto it = shared->find(ref);
    if (it == shared->end()) {
      throw std::runtime_error("unknown scene_ref '" + ref + "'");
    }
    return std::shared_ptr<const WorldScene>(shared, &it->second);
  };
}

EvalOutcome judge(const EvalCase& eval_case, const Path& path, const WorldScene& scene,
                  const Footprint& footprint) {
  DistanceField field;
  try {
    field = compute_gdf(scene.obstacles, eval_case.goal);
  } catch (const InfeasibleGoalError& e) {
    throw std::logic_error(std::string("judge: case was not reachability-filtered: ") + e.what());
  }

  EvalOutcome outcome;
  outcome.eval_case = eval_case;
  outcome.path = path;
  outcome.executed_length = path_length(eval_case.start, path);
  outcome.collided = check_collision(path, scene.obstacles, footprint);
  if (!path.empty()) {
    outcome.final_gd = query_distance(field, path.back());
    outcome.final_heading_error = heading_distance(eval_case.goal.theta, path.back().theta);
  } else {
    outcome.final_gd = query_distance(field, eval_case.start);
    outcome.final_heading_error = heading_distance(eval_case.goal.theta, eval_case.start.theta);
  }
  outcome.success = !outcome.collided && outcome.final_gd <= kSuccessGdThreshold;
  return outcome;
}

double spl(const std::vector<EvalOutcome>& outcomes) {
  if (outcomes.empty()) {
    throw std::invalid_argument("spl: empty outcome list");
  }
  double sum = 0.0;
  for (const EvalOutcome& o : outcomes) {
    if (!o.success) {
      continue;
    }
    const double l = o.eval_case.geodesic_start_distance;
    const double p = o.executed_length;
    const double denom = std::max(p, l);
    sum += denom > 0.0 ? l / denom : 1.0;  // zero-demand case: full credit
  }
  return sum / static_cast<double>(outcomes.size());
}

Path straight_line_baseline(const Pose2& start, const Pose2& goal, int n_waypoints,
                            double max_length) {
  if (n_waypoints < 1) {
    throw std::invalid_argument("straight_line_baseline: n_waypoints must be >= 1");
  }
  const double dx = goal.x - start.x;
  const double dy = goal.y - start.y;
  const double dist = std::hypot(dx, dy);

  Path path;
  path.reserve(n_waypoints);
  if (dist < 1e-12) {
    for (int i = 0; i < n_waypoints; ++i) {
      path.push_back(Pose2{start.x, start.y, goal.theta});
    }
    return path;
  }

  const double reach = std::min(dist, max_length);
  const bool reaches_goal = reach >= dist;
  const double heading = std::atan2(dy, dx);
  for (int i = 1; i <= n_waypoints; ++i) {
    const double s = reach * static_cast<double>(i) / static_cast<double>(n_waypoints);
    Pose2 wp{start.x + dx / dist * s, start.y + dy / dist * s, heading};
    if (reaches_goal && i == n_waypoints) {
      wp.theta = goal.theta;
    }
    path.push_back(wp);
  }
  return path;
}

std::vector<EvalCase> reachability_filter(const std::vector<EvalCase>& cases,
                                          const SceneProvider& scenes, int* discarded) {
  std::vector<EvalCase> kept;
  int dropped = 0;
  for (const EvalCase& c : cases) {
    const auto scene = scenes(c.scene_ref);
    double l = kInf;
    try {
      const DistanceField field = compute_gdf(scene->obstacles, c.goal);
      l = query_distance(field, c.start);
    } catch (const InfeasibleGoalError&) {
      l = kInf;
    }
    if (std::isfinite(l)) {
      EvalCase accepted = c;
      accepted.geodesic_start_distance = l;
      kept.push_back(std::move(accepted));
    } else {
      ++dropped;
    }
  }
  if (discarded != nullptr) {
    *discarded = dropped;
  }
  return kept;
}

EvalReport evaluate(const PlannerFn& planner, const std::vector<EvalCase>& cases,
                    const SceneProvider& scenes, const Footprint& footprint) {
  EvalReport report;
  report.n_cases = static_cast<int>(cases.size());
  report.outcomes.reserve(cases.size());

  std::size_t collided = 0;
  std::size_t succeeded = 0;
  for (const EvalCase& c : cases) {
    const auto scene = scenes(c.scene_ref);
    EvalOutcome outcome;
    try {
      const Path path = planner(*scene, c.start, c.goal);
      outcome = judge(c, path, *scene, footprint);
    } catch (const std::exception&) {
      outcome.eval_case = c;
      outcome.planner_failed = true;
      outcome.success = false;
      ++report.planner_failures;
    }
    collided += outcome.collided ? 1 : 0;
    succeeded += outcome.success ? 1 : 0;
    report.outcomes.push_back(std::move(outcome));
  }

  report.collision_pct = percentage(collided, cases.size());
  report.success_pct = percentage(succeeded, cases.size());
  report.spl_pct = cases.empty() ? 0.0 : 100.0 * spl(report.outcomes);
  return report;
}

PlannerFn make_mppi_planner(const MppiConfig& cfg) {
  auto counter = std::make_shared<std::uint64_t>(0);
  return [cfg, counter](const WorldScene& scene, const Pose2& start, const Pose2& goal) {
    MppiConfig per_case = cfg;
    per_case.seed = derive_seed(cfg.seed, (*counter)++);
    return plan(scene, start, goal, per_case).path;
  };
}

PlannerFn make_straight_line_planner(int n_waypoints, double max_length) {
  return [n_waypoints, max_length](const WorldScene&, const Pose2& start, const Pose2& goal) {
    return straight_line_baseline(start, goal, n_waypoints, max_length);
  };
}

GeneratedCases generate_eval_cases(const CaseGenConfig& cfg) {
  if (cfg.n_cases < 1) {
    throw std::invalid_argument("generate_eval_cases: n_cases must be >= 1");
  }
  if (!(cfg.goal_r_min > 0.0) || cfg.goal_r_max < cfg.goal_r_min) {
    throw std::invalid_argument("generate_eval_cases: bad goal radius range");
  }

  const WorldSpec world = cfg.world;
  auto scene_ref_for = [&world](std::uint64_t seed) {
    return world.name() + "#seed=" + std::to_string(seed);
  };

  GeneratedCases out;
  for (int i = 0; i < cfg.n_cases; ++i) {
    const std::uint64_t world_seed = cfg.seed + static_cast<std::uint64_t>(i);
    const WorldScene scene = generate_world(world, world_seed);
    std::mt19937_64 rng(derive_seed(cfg.seed, static_cast<std::uint64_t>(i) + 0x5ca1e));
    std::uniform_real_distribution<double> radius(cfg.goal_r_min, cfg.goal_r_max);
    std::uniform_real_distribution<double> angle(-kPi, kPi);

    EvalCase c;
    c.scene_ref = scene_ref_for(world_seed);
    c.start = Pose2{0.0, 0.0, 0.0};
    bool accepted = false;
    for (int attempt = 0; attempt < 1000 && !accepted; ++attempt) {
      const double r = radius(rng);
      const double a = angle(rng);
      c.goal = Pose2{r * std::cos(a), r * std::sin(a), wrap_angle(angle(rng))};
      try {
        const DistanceField field = compute_gdf(scene.obstacles, c.goal);
        const double l = query_distance(field, c.start);
        if (std::isfinite(l)) {
          c.geodesic_start_distance = l;
          accepted = true;
        }
      } catch (const InfeasibleGoalError&) {
      }
    }
    if (!accepted) {
      throw std::runtime_error("generate_eval_cases: no reachable goal found for case " +
                               std::to_string(i));
    }
    out.cases.push_back(std::move(c));
  }

  // Regenerates scenes on demand; caches the last one since cases are
  // typically visited in order.
  struct Cache {
    std::string ref;
    std::shared_ptr<const WorldScene> scene;
  };
  auto cache = std::make_shared<Cache>();
  out.provider = [world, cache](const std::string& ref) -> std::shared_ptr<const WorldScene> {
    if (cache->scene && cache->ref == ref) {
      return cache->scene;
    }
    const auto marker = ref.rfind("#seed=");
    if (marker == std::string::npos) {
      throw std::runtime_error("unknown scene_ref '" + ref + "'");
    }
    const std::uint64_t seed = std::stoull(ref.substr(marker + 6));
    cache->ref = ref;
    cache->scene = std::make_shared<const WorldScene>(generate_world(world, seed));
    return cache->scene;
  };
  return out;
}

std::string report_to_json(const EvalReport& report, const std::string& planner_name) {
  nlohmann::ordered_json j;
  j["planner"] = planner_name;
  j["n_cases"] = report.n_cases;
  j["collision_pct"] = report.collision_pct;
  j["success_pct"] = report.success_pct;
  j["spl_pct"] = report.spl_pct;
  j["planner_failures"] = report.planner_failures;
  return j.dump(2);
}

std::string report_table(const std::vector<std::pair<std::string, EvalReport>>& rows) {
  std::ostringstream out;
  out << "Planner                      Col. (%)   Succ. (%)   SPL (%)\n";
  out << "----------------------------------------------------------\n";
  for (const auto& [name, report] : rows) {
    char line[128];
    std::snprintf(line, sizeof(line), "%-28s %8.1f %11.1f %9.1f\n", name.c_str(),
                  report.collision_pct, report.success_pct, report.spl_pct);
    out << line;
  }
  return out.str();
}

std::string outcome_to_json(const EvalOutcome& o) {
  nlohmann::ordered_json j;
  j["scene_ref"] = o.eval_case.scene_ref;
  j["start"] = {o.eval_case.start.x, o.eval_case.start.y, o.eval_case.start.theta};
  j["goal"] = {o.eval_case.goal.x, o.eval_case.goal.y, o.eval_case.goal.theta};
  j["l"] = o.eval_case.geodesic_start_distance;
  j["p"] = o.executed_length;
  j["collided"] = o.collided;
  j["final_gd"] = json_finite(o.final_gd);
  j["success"] = o.success;
  j["planner_failed"] = o.planner_failed;
  j["final_heading_error"] = o.final_heading_error;
  return j.dump();
}

EvalOutcome outcome_from_json(const std::string& line) {
  const nlohmann::json j = nlohmann::json::parse(line);
  EvalOutcome o;
  o.eval_case.scene_ref = j.at("scene_ref").get<std::string>();
  const auto& start = j.at("start");
  o.eval_case.start = {start.at(0), start.at(1), start.at(2)};
  const auto& goal = j.at("goal");
  o.eval_case.goal = {goal.at(0), goal.at(1), goal.at(2)};
  o.eval_case.geodesic_start_distance = j.at("l").get<double>();
  o.executed_length = j.at("p").get<double>();
  o.collided = j.at("collided").get<bool>();
  o.final_gd = finite_from_json(j.at("final_gd"));
  o.success = j.at("success").get<bool>();
  o.planner_failed = j.at("planner_failed").get<bool>();
  o.final_heading_error = j.at("final_heading_error").get<double>();
  return o;
}

void save_outcomes_jsonl(const std::vector<EvalOutcome>& outcomes,
                         const std::filesystem::path& file) {
  std::ofstream out(file);
  if (!out) {
    throw std::runtime_error("save_outcomes_jsonl: cannot open " + file.string());
  }
  for (const EvalOutcome& o : outcomes) {
    out << outcome_to_json(o) << "\n";
  }
}

std::vector<EvalOutcome> load_outcomes_jsonl(const std::filesystem::path& file) {
  std::ifstream in(file);
  if (!in) {
    throw std::runtime_error("load_outcomes_jsonl: cannot open " + file.string());
  }
  std::vector<EvalOutcome> outcomes;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty()) {
      outcomes.push_back(outcome_from_json(line));
    }
  }
  return outcomes;
}

}  // namespace geonav
