#include "geonav/mppi.hpp"

#include <algorithm>
#include <cmath>
#include <random>
#include <stdexcept>

namespace geonav {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Dilated footprint rectangle placed in the map-local frame.
struct FootprintPlacement {
  double px, py;        // center, map-local meters
  double cos_t, sin_t;  // heading
  double hl, hw;        // dilated half extents
  double res;

  bool covers_cell(int ix, int iy) const {
    const double dx = (ix + 0.5) * res - px;
    const double dy = (iy + 0.5) * res - py;
    const double u = cos_t * dx + sin_t * dy;
    const double v = -sin_t * dx + cos_t * dy;
    return std::abs(u) <= hl && std::abs(v) <= hw;
  }
};

FootprintPlacement make_placement(const GridMap2D& map, const Pose2& wp, const Footprint& fp) {
  const Pose2 local = map.world_to_local(wp);
  return FootprintPlacement{local.x,
                            local.y,
                            std::cos(local.theta),
                            std::sin(local.theta),
                            fp.dilated_half_length(),
                            fp.dilated_half_width(),
                            map.resolution()};
}

struct RowSpan {
  int y;
  int x_first;
  int x_last;  // inclusive; indices may lie outside the map
};

// Visits the contiguous run of covered cells per row. A cell counts as
// covered when its center lies inside the rectangle; the analytic interval
// is conservative and the endpoints are settled with the exact predicate.
// The callback returns false to stop early.
template <typename RowFn>
void for_each_covered_row(const FootprintPlacement& f, RowFn&& fn) {
  const double radius = std::hypot(f.hl, f.hw);
  const int iy_min = static_cast<int>(std::floor((f.py - radius) / f.res - 0.5));
  const int iy_max = static_cast<int>(std::ceil((f.py + radius) / f.res - 0.5));
  for (int iy = iy_min; iy <= iy_max; ++iy) {
    const double dy = (iy + 0.5) * f.res - f.py;
    double xlo = f.px - radius;
    double xhi = f.px + radius;
    bool empty = false;
    // coef * (x - px) + rest must lie in [-half, half].
    auto apply_slab = [&](double coef, double rest, double half) {
      if (std::abs(coef) > 1e-12) {
        double lo = (-half - rest) / coef;
        double hi = (half - rest) / coef;
        if (lo > hi) {
          std::swap(lo, hi);
        }
        xlo = std::max(xlo, f.px + lo);
        xhi = std::min(xhi, f.px + hi);
      } else if (std::abs(rest) > half) {
        empty = true;
      }
    };
    apply_slab(f.cos_t, f.sin_t * dy, f.hl);
    apply_slab(-f.sin_t, f.cos_t * dy, f.hw);
    if (empty || xlo > xhi) {
      continue;
    }
    int x_first = static_cast<int>(std::floor(xlo / f.res - 0.5)) - 1;
    int x_last = static_cast<int>(std::ceil(xhi / f.res - 0.5)) + 1;
    while (x_first <= x_last && !f.covers_cell(x_first, iy)) {
      ++x_first;
    }
    while (x_last >= x_first && !f.covers_cell(x_last, iy)) {
      --x_last;
    }
    if (x_first > x_last) {
      continue;
    }
    if (!fn(RowSpan{iy, x_first, x_last})) {
      return;
    }
  }
}

double footprint_cost(const GridMap2D& cost_map, const FootprintPlacement& f) {
  double total = 0.0;
  const int w = cost_map.width();
  const int h = cost_map.height();
  for_each_covered_row(f, [&](RowSpan span) {
    if (span.y < 0 || span.y >= h) {
      total += kObstacleCost * (span.x_last - span.x_first + 1);
      return true;
    }
    int lo = span.x_first;
    int hi = span.x_last;
    if (lo < 0) {
      total += kObstacleCost * (std::min(hi + 1, 0) - lo);
      lo = 0;
    }
    if (hi >= w) {
      total += kObstacleCost * (hi - std::max(lo, w) + 1);
      hi = w - 1;
    }
    const double* row = cost_map.row(span.y);
    for (int x = lo; x <= hi; ++x) {
      total += row[x];
    }
    return true;
  });
  return total;
}

bool footprint_hits_obstacle(const GridMap2D& obstacles, const FootprintPlacement& f) {
  bool hit = false;
  const int w = obstacles.width();
  const int h = obstacles.height();
  for_each_covered_row(f, [&](RowSpan span) {
    if (span.y < 0 || span.y >= h || span.x_first < 0 || span.x_last >= w) {
      hit = true;  // leaves the map
      return false;
    }
    const double* row = obstacles.row(span.y);
    for (int x = span.x_first; x <= span.x_last; ++x) {
      if (row[x] > 0.5) {
        hit = true;
        return false;
      }
    }
    return true;
  });
  return hit;
}

double evaluate_total(const Pose2& start, const CommandSequence& cmds, const WorldScene& scene,
                      const DistanceField& field, const MppiConfig& cfg, Path& scratch) {
  scratch.clear();
  Pose2 pose = start;
  for (const Twist2& cmd : cmds.commands) {
    pose = kinematic_step(pose, cmd, cmds.dt);
    scratch.push_back(pose);
  }
  const double trav = cost_traversability(scratch, scene.cost, cfg.footprint);
  const double goal = cost_goal(scratch, field, field.goal_pose, cfg.goal_align_radius);
  const double effort = cost_effort(cmds, cfg.w_lin, cfg.w_lat, cfg.w_ang);
  return cfg.w_trav * trav + cfg.w_goal * goal + cfg.w_effort * effort;
}

// Distance field used by the optimizer. Falls back to the start-reachable
// free cell nearest the requested goal when the goal cell is out of bounds,
// an obstacle, or disconnected from the start.
std::pair<DistanceField, bool> make_goal_field(const GridMap2D& obstacles, CellIndex start_cell,
                                               const Pose2& goal) {
  try {
    DistanceField field = compute_gdf(obstacles, goal);
    if (std::isfinite(field.grid.at(start_cell))) {
      return {std::move(field), false};
    }
  } catch (const InfeasibleGoalError&) {
  }

  const DistanceField from_start = compute_gdf_to_cell(obstacles, start_cell, true);
  CellIndex best = start_cell;
  double best_d2 = kInf;
  double best_start_dist = kInf;
  for (int y = 0; y < obstacles.height(); ++y) {
    for (int x = 0; x < obstacles.width(); ++x) {
      if (is_obstacle_cell(obstacles, x, y) || !std::isfinite(from_start.grid.at(x, y))) {
        continue;
      }
      const Pose2 center = obstacles.cell_center({x, y});
      const double d2 = (center.x - goal.x) * (center.x - goal.x) +
                        (center.y - goal.y) * (center.y - goal.y);
      const double sd = from_start.grid.at(x, y);
      if (d2 < best_d2 || (d2 == best_d2 && sd < best_start_dist)) {
        best = {x, y};
        best_d2 = d2;
        best_start_dist = sd;
      }
    }
  }
  DistanceField field = std::isfinite(best_d2)
                            ? compute_gdf_to_cell(obstacles, best)
                            : compute_gdf_to_cell(obstacles, start_cell, true);
  field.goal_pose = goal;  // heading alignment still targets the requested goal
  return {std::move(field), true};
}

}  // namespace

void MppiConfig::validate() const {
  if (horizon_steps < 1) {
    throw std::invalid_argument("MppiConfig: horizon_steps must be >= 1");
  }
  if (!(dt > 0.0)) {
    throw std::invalid_argument("MppiConfig: dt must be positive");
  }
  if (population_size < 2) {
    throw std::invalid_argument("MppiConfig: population_size must be >= 2");
  }
  if (iterations < 1) {
    throw std::invalid_argument("MppiConfig: iterations must be >= 1");
  }
  if (!(temperature > 0.0)) {
    throw std::invalid_argument("MppiConfig: temperature must be positive");
  }
  if (noise_std_vx < 0.0 || noise_std_vy < 0.0 || noise_std_omega < 0.0) {
    throw std::invalid_argument("MppiConfig: noise stds must be non-negative");
  }
  if (w_trav < 0.0 || w_goal < 0.0 || w_effort < 0.0 || w_lin < 0.0 || w_lat < 0.0 ||
      w_ang < 0.0) {
    throw std::invalid_argument("MppiConfig: weights must be non-negative");
  }
  if (goal_align_radius < 0.0) {
    throw std::invalid_argument("MppiConfig: goal_align_radius must be non-negative");
  }
  if (noise_correlation < 0.0 || noise_correlation >= 1.0) {
    throw std::invalid_argument("MppiConfig: noise_correlation must be in [0, 1)");
  }
  if (!(limits.vx_max > 0.0) || !(limits.vy_max > 0.0) || !(limits.omega_max > 0.0)) {
    throw std::invalid_argument("MppiConfig: velocity limits must be positive");
  }
  if (!(footprint.half_length > 0.0) || !(footprint.half_width > 0.0) ||
      footprint.safety_margin < 0.0) {
    throw std::invalid_argument("MppiConfig: footprint extents must be positive");
  }
}

double cost_traversability(const Path& path, const GridMap2D& cost_map, const Footprint& fp) {
  double total = 0.0;
  for (const Pose2& wp : path) {
    total += footprint_cost(cost_map, make_placement(cost_map, wp, fp));
  }
  return total;
}

double cost_goal(const Path& path, const DistanceField& field, const Pose2& goal,
                 double align_radius) {
  double total = 0.0;
  for (const Pose2& wp : path) {
    const double d = query_distance(field, wp);
    total += d;
    if (d <= align_radius) {
      total += heading_distance(goal.theta, wp.theta);
    }
  }
  return total;
}

double cost_effort(const CommandSequence& cmds, double w_lin, double w_lat, double w_ang) {
  double total = 0.0;
  for (const Twist2& cmd : cmds.commands) {
    total += w_lin * std::abs(cmd.vx) + w_lat * std::abs(cmd.vy) + w_ang * std::abs(cmd.omega);
  }
  return total;
}

CostBreakdown total_cost(const Pose2& start, const CommandSequence& cmds, const WorldScene& scene,
                         const DistanceField& field, const MppiConfig& cfg) {
  const Path path = rollout(start, cmds);
  CostBreakdown b;
  b.trav = cost_traversability(path, scene.cost, cfg.footprint);
  b.goal = cost_goal(path, field, field.goal_pose, cfg.goal_align_radius);
  b.effort = cost_effort(cmds, cfg.w_lin, cfg.w_lat, cfg.w_ang);
  b.total = cfg.w_trav * b.trav + cfg.w_goal * b.goal + cfg.w_effort * b.effort;
  return b;
}

CommandSequence mppi_update(const std::vector<double>& costs,
                            const std::vector<CommandSequence>& population, double lambda,
                            const CommandSequence& previous_mean) {
  if (population.empty() || costs.size() != population.size()) {
    throw std::invalid_argument("mppi_update: population and cost sizes must match");
  }
  if (!(lambda > 0.0)) {
    throw std::invalid_argument("mppi_update: lambda must be positive");
  }
  const std::size_t n = population.front().commands.size();
  for (const CommandSequence& member : population) {
    if (member.commands.size() != n) {
      throw std::invalid_argument("mppi_update: population members differ in length");
    }
  }

  double min_cost = kInf;
  for (double c : costs) {
    if (std::isfinite(c) && c < min_cost) {
      min_cost = c;
    }
  }
  if (!std::isfinite(min_cost)) {
    return previous_mean;  // degenerate population
  }

  std::vector<double> weights(costs.size(), 0.0);
  double sum = 0.0;
  for (std::size_t k = 0; k < costs.size(); ++k) {
    if (std::isfinite(costs[k])) {
      weights[k] = std::exp(-(costs[k] - min_cost) / lambda);
      sum += weights[k];
    }
  }

  CommandSequence mean;
  mean.dt = population.front().dt;
  mean.commands.assign(n, Twist2{});
  for (std::size_t k = 0; k < population.size(); ++k) {
    const double w = weights[k] / sum;
    if (w == 0.0) {
      continue;
    }
    for (std::size_t t = 0; t < n; ++t) {
      const Twist2& cmd = population[k].commands[t];
      mean.commands[t].vx += w * cmd.vx;
      mean.commands[t].vy += w * cmd.vy;
      mean.commands[t].omega += w * cmd.omega;
    }
  }
  return mean;
}

bool check_collision_pose(const Pose2& pose, const GridMap2D& obstacles, const Footprint& fp) {
  return footprint_hits_obstacle(obstacles, make_placement(obstacles, pose, fp));
}

bool check_collision(const Path& path, const GridMap2D& obstacles, const Footprint& fp) {
  for (const Pose2& wp : path) {
    if (check_collision_pose(wp, obstacles, fp)) {
      return true;
    }
  }
  return false;
}

PlanResult plan(const WorldScene& scene, const Pose2& start, const Pose2& goal,
                const MppiConfig& cfg) {
  CommandSequence zero;
  zero.dt = cfg.dt;
  zero.commands.assign(static_cast<std::size_t>(std::max(cfg.horizon_steps, 1)), Twist2{});
  return plan(scene, start, goal, cfg, zero);
}

PlanResult plan(const WorldScene& scene, const Pose2& start, const Pose2& goal,
                const MppiConfig& cfg, const CommandSequence& initial_mean) {
  cfg.validate();
  const auto start_cell = scene.obstacles.world_to_cell(start);
  if (!start_cell) {
    throw std::invalid_argument("plan: start pose out of map bounds");
  }

  auto [field, retargeted] = make_goal_field(scene.obstacles, *start_cell, goal);

  const int n = cfg.horizon_steps;
  const int pop = cfg.population_size;

  CommandSequence mean = initial_mean;
  mean.dt = cfg.dt;
  mean.commands.resize(n, Twist2{});
  for (Twist2& cmd : mean.commands) {
    cmd = clamp_twist(cmd, cfg.limits);
  }

  std::mt19937_64 rng(cfg.seed);
  std::normal_distribution<double> gauss(0.0, 1.0);

  std::vector<CommandSequence> population(pop);
  for (CommandSequence& member : population) {
    member.dt = cfg.dt;
    member.commands.resize(n);
  }
  std::vector<double> costs(static_cast<std::size_t>(pop), 0.0);

  // The warm-start mean is itself a candidate rollout.
  Path scratch;
  double best_total = evaluate_total(start, mean, scene, field, cfg, scratch);
  CommandSequence best_cmds = mean;
  double prev_best = best_total;

  const double alpha = cfg.noise_correlation;
  const double innovation = std::sqrt(std::max(0.0, 1.0 - alpha * alpha));

  for (int iter = 0; iter < cfg.iterations; ++iter) {
    for (int k = 0; k < pop; ++k) {
      std::vector<Twist2>& cmds = population[k].commands;
      double eps_vx = cfg.noise_std_vx * gauss(rng);
      double eps_vy = cfg.noise_std_vy * gauss(rng);
      double eps_omega = cfg.noise_std_omega * gauss(rng);
      for (int t = 0; t < n; ++t) {
        const Twist2& m = mean.commands[t];
        cmds[t] = clamp_twist(Twist2{m.vx + eps_vx, m.vy + eps_vy, m.omega + eps_omega},
                              cfg.limits);
        eps_vx = alpha * eps_vx + innovation * cfg.noise_std_vx * gauss(rng);
        eps_vy = alpha * eps_vy + innovation * cfg.noise_std_vy * gauss(rng);
        eps_omega = alpha * eps_omega + innovation * cfg.noise_std_omega * gauss(rng);
      }
    }

#pragma omp parallel for schedule(static)
    for (int k = 0; k < pop; ++k) {
      thread_local Path eval_scratch;
      costs[k] = evaluate_total(start, population[k], scene, field, cfg, eval_scratch);
    }

    for (int k = 0; k < pop; ++k) {
      if (costs[k] < best_total) {
        best_total = costs[k];
        best_cmds = population[k];
      }
    }

    mean = mppi_update(costs, population, cfg.temperature, mean);

    // The updated mean is itself a rollout candidate; it is typically
    // smoother than any single sample and cannot win while colliding.
    const double mean_total = evaluate_total(start, mean, scene, field, cfg, scratch);
    if (mean_total < best_total) {
      best_total = mean_total;
      best_cmds = mean;
    }

    if (best_total > prev_best) {
      throw std::logic_error("plan: best-seen cost increased across iterations");
    }
    prev_best = best_total;
  }

  PlanResult result;
  result.commands = std::move(best_cmds);
  result.path = rollout(start, result.commands);
  result.cost = total_cost(start, result.commands, scene, field, cfg);
  result.collided = check_collision(result.path, scene.obstacles, cfg.footprint);
  result.final_geodesic_distance = query_distance(field, result.path.back());
  result.iterations_run = cfg.iterations;
  result.goal_retargeted = retargeted;
  return result;
}

}  // namespace geonav
