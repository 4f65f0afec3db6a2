#include "geonav/worldmodel.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <random>
#include <sstream>
#include <stdexcept>

namespace geonav {

namespace {

constexpr double kPillarHeight = 1.2;  // m, >= 4 * step_max so pillars always read as obstacles

// Raises elevation to at least `height` for every cell whose center lies in
// the axis-aligned rectangle [x0,x1] x [y0,y1] (world frame).
void raise_rect(GridMap2D& elevation, double x0, double y0, double x1, double y1, double height) {
  for (int y = 0; y < elevation.height(); ++y) {
    for (int x = 0; x < elevation.width(); ++x) {
      const Pose2 c = elevation.cell_center({x, y});
      if (c.x >= x0 && c.x <= x1 && c.y >= y0 && c.y <= y1) {
        elevation.at(x, y) = std::max(elevation.at(x, y), height);
      }
    }
  }
}

void raise_disc(GridMap2D& elevation, double cx, double cy, double radius, double height) {
  for (int y = 0; y < elevation.height(); ++y) {
    for (int x = 0; x < elevation.width(); ++x) {
      const Pose2 c = elevation.cell_center({x, y});
      if (std::hypot(c.x - cx, c.y - cy) <= radius) {
        elevation.at(x, y) = std::max(elevation.at(x, y), height);
      }
    }
  }
}

GridMap2D base_elevation(const WorldSpec& spec) {
  const Pose2 origin{-0.5 * spec.width_cells * spec.resolution,
                     -0.5 * spec.height_cells * spec.resolution, 0.0};
  return GridMap2D(spec.width_cells, spec.height_cells, spec.resolution, origin, 0.0, true);
}

}  // namespace

double traversability_cost_value(double t) {
  if (t < kSafeTraversability) {
    return 0.0;
  }
  if (t <= kRiskyTraversability) {
    return (t - kSafeTraversability) / (kRiskyTraversability - kSafeTraversability) * kRiskyCost;
  }
  if (t <= kObstacleTraversability) {
    return kRiskyCost;
  }
  return kObstacleCost;
}

GridMap2D elevation_to_traversability(const GridMap2D& elevation,
                                      const TraversabilityParams& params) {
  if (elevation.width() <= 2 || elevation.height() <= 2) {
    throw std::invalid_argument("elevation_to_traversability: degenerate grid");
  }
  const double res = elevation.resolution();
  GridMap2D trav(elevation.width(), elevation.height(), res, elevation.origin(), 0.0, true);

  auto usable = [&](int x, int y) { return elevation.in_bounds(x, y) && elevation.is_valid(x, y); };

  for (int y = 0; y < elevation.height(); ++y) {
    for (int x = 0; x < elevation.width(); ++x) {
      if (!elevation.is_valid(x, y)) {
        trav.at(x, y) = 1.0;
        trav.set_valid(x, y, false);
        continue;
      }
      const double e = elevation.at(x, y);

      // Central-difference gradient; falls back to one-sided at borders and
      // next to invalid cells.
      auto axis_gradient = [&](int dx, int dy) {
        const bool has_prev = usable(x - dx, y - dy);
        const bool has_next = usable(x + dx, y + dy);
        if (has_prev && has_next) {
          return (elevation.at(x + dx, y + dy) - elevation.at(x - dx, y - dy)) / (2.0 * res);
        }
        if (has_next) {
          return (elevation.at(x + dx, y + dy) - e) / res;
        }
        if (has_prev) {
          return (e - elevation.at(x - dx, y - dy)) / res;
        }
        return 0.0;
      };
      const double slope = std::hypot(axis_gradient(1, 0), axis_gradient(0, 1));

      double step = 0.0;
      for (int dy = -1; dy <= 1; ++dy) {
        for (int dx = -1; dx <= 1; ++dx) {
          if ((dx == 0 && dy == 0) || !usable(x + dx, y + dy)) {
            continue;
          }
          step = std::max(step, std::abs(elevation.at(x + dx, y + dy) - e));
        }
      }

      const double t = std::max(slope / params.slope_max, step / params.step_max);
      trav.at(x, y) = std::clamp(t, 0.0, 1.0);
    }
  }
  return trav;
}

GridMap2D traversability_to_cost(const GridMap2D& trav) {
  GridMap2D cost(trav.width(), trav.height(), trav.resolution(), trav.origin(), 0.0, true);
  for (int y = 0; y < trav.height(); ++y) {
    for (int x = 0; x < trav.width(); ++x) {
      if (!trav.is_valid(x, y)) {
        cost.at(x, y) = kObstacleCost;
        cost.set_valid(x, y, false);
        continue;
      }
      const double t = trav.at(x, y);
      if (!(t >= 0.0 && t <= 1.0)) {
        throw std::invalid_argument("traversability_to_cost: value outside [0, 1]");
      }
      cost.at(x, y) = traversability_cost_value(t);
    }
  }
  return cost;
}

GridMap2D threshold_obstacles(const GridMap2D& trav) {
  GridMap2D obstacles(trav.width(), trav.height(), trav.resolution(), trav.origin(), 0.0, true);
  for (int y = 0; y < trav.height(); ++y) {
    for (int x = 0; x < trav.width(); ++x) {
      const bool obstacle = !trav.is_valid(x, y) || trav.at(x, y) > kObstacleTraversability;
      obstacles.at(x, y) = obstacle ? 1.0 : 0.0;
    }
  }
  return obstacles;
}

WorldScene scene_from_elevation(GridMap2D elevation, const TraversabilityParams& params,
                                std::string spec_name, std::uint64_t seed) {
  WorldScene scene;
  scene.traversability = elevation_to_traversability(elevation, params);
  scene.cost = traversability_to_cost(scene.traversability);
  scene.obstacles = threshold_obstacles(scene.traversability);
  scene.elevation = std::move(elevation);
  scene.generator_seed = seed;
  scene.spec_name = std::move(spec_name);
  return scene;
}

WorldSpec WorldSpec::from_name(const std::string& name) {
  WorldSpec spec;
  if (name == "empty") {
    spec.kind = Kind::kEmpty;
  } else if (name == "corridor") {
    spec.kind = Kind::kCorridor;
  } else if (name == "random_obstacles") {
    spec.kind = Kind::kRandomObstacles;
  } else if (name == "box_room") {
    spec.kind = Kind::kBoxRoom;
  } else if (name == "stairs") {
    spec.kind = Kind::kStairs;
  } else {
    throw std::invalid_argument(
        "unknown world spec '" + name +
        "'; valid specs: empty, corridor, random_obstacles, box_room, stairs");
  }
  return spec;
}

std::string WorldSpec::name() const {
  std::ostringstream out;
  switch (kind) {
    case Kind::kEmpty:
      out << "empty";
      break;
    case Kind::kCorridor:
      out << "corridor(width=" << corridor_width << ")";
      break;
    case Kind::kRandomObstacles:
      out << "random_obstacles(count=" << obstacle_count << ",r=[" << radius_min << ","
          << radius_max << "])";
      break;
    case Kind::kBoxRoom:
      out << "box_room(door_width=" << door_width << ")";
      break;
    case Kind::kStairs:
      out << "stairs(height=" << step_height << ",depth=" << step_depth << ")";
      break;
  }
  return out.str();
}

WorldScene generate_world(const WorldSpec& spec, std::uint64_t seed) {
  GridMap2D elevation = base_elevation(spec);
  const double half_x = 0.5 * spec.width_cells * spec.resolution;
  const double half_y = 0.5 * spec.height_cells * spec.resolution;
  constexpr double kWallThickness = 0.2;  // m

  switch (spec.kind) {
    case WorldSpec::Kind::kEmpty:
      break;

    case WorldSpec::Kind::kCorridor: {
      const double inner = 0.5 * spec.corridor_width;
      raise_rect(elevation, -half_x, inner, half_x, inner + kWallThickness, kPillarHeight);
      raise_rect(elevation, -half_x, -inner - kWallThickness, half_x, -inner, kPillarHeight);
      break;
    }

    case WorldSpec::Kind::kRandomObstacles: {
      std::mt19937_64 rng(seed);
      std::uniform_real_distribution<double> pos_x(-half_x + 0.5, half_x - 0.5);
      std::uniform_real_distribution<double> pos_y(-half_y + 0.5, half_y - 0.5);
      std::uniform_real_distribution<double> radius(spec.radius_min, spec.radius_max);
      for (int i = 0; i < spec.obstacle_count; ++i) {
        for (int attempt = 0; attempt < 100; ++attempt) {
          const double cx = pos_x(rng);
          const double cy = pos_y(rng);
          const double r = radius(rng);
          if (std::hypot(cx, cy) < spec.spawn_clearance + r) {
            continue;  // keep the start region free
          }
          raise_disc(elevation, cx, cy, r, kPillarHeight);
          break;
        }
      }
      break;
    }

    case WorldSpec::Kind::kBoxRoom: {
      // Room centered at (2, 0), inner half-size 1 m; the opening faces the
      // map center.
      const double cx = 2.0;
      const double inner = 1.0;
      const double outer = inner + kWallThickness;
      raise_rect(elevation, cx + inner, -outer, cx + outer, outer, kPillarHeight);   // +x wall
      raise_rect(elevation, cx - outer, inner, cx + outer, outer, kPillarHeight);    // +y wall
      raise_rect(elevation, cx - outer, -outer, cx + outer, -inner, kPillarHeight);  // -y wall
      if (spec.door_width > 0.0) {
        const double half_door = 0.5 * spec.door_width;
        raise_rect(elevation, cx - outer, half_door, cx - inner, outer, kPillarHeight);
        raise_rect(elevation, cx - outer, -outer, cx - inner, -half_door, kPillarHeight);
      } else {
        raise_rect(elevation, cx - outer, -outer, cx - inner, outer, kPillarHeight);
      }
      break;
    }

    case WorldSpec::Kind::kStairs: {
      // Ascending steps along +x starting 1 m ahead of the start pose.
      for (int y = 0; y < elevation.height(); ++y) {
        for (int x = 0; x < elevation.width(); ++x) {
          const Pose2 c = elevation.cell_center({x, y});
          if (c.x >= 1.0) {
            const int step = static_cast<int>(std::floor((c.x - 1.0) / spec.step_depth)) + 1;
            elevation.at(x, y) = step * spec.step_height;
          }
        }
      }
      break;
    }
  }

  WorldSpec named = spec;
  return scene_from_elevation(std::move(elevation), spec.trav, named.name(), seed);
}

void save_scene(const WorldScene& scene, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  save_gm2d(scene.elevation, dir / "elevation.gm2d");
  save_gm2d(scene.traversability, dir / "traversability.gm2d");
  save_gm2d(scene.cost, dir / "cost.gm2d");
  save_gm2d(scene.obstacles, dir / "obstacles.gm2d");
  std::ofstream meta(dir / "scene.txt");
  if (!meta) {
    throw std::runtime_error("save_scene: cannot write metadata in " + dir.string());
  }
  meta << "spec = " << scene.spec_name << "\n";
  meta << "seed = " << scene.generator_seed << "\n";
  meta << "width_cells = " << scene.elevation.width() << "\n";
  meta << "height_cells = " << scene.elevation.height() << "\n";
  meta << "resolution = " << scene.elevation.resolution() << "\n";
}

WorldScene load_scene(const std::filesystem::path& dir) {
  WorldScene scene;
  scene.elevation = load_gm2d(dir / "elevation.gm2d");
  scene.traversability = load_gm2d(dir / "traversability.gm2d");
  scene.cost = load_gm2d(dir / "cost.gm2d");
  scene.obstacles = load_gm2d(dir / "obstacles.gm2d");
  std::ifstream meta(dir / "scene.txt");
  if (!meta) {
    throw std::runtime_error("load_scene: missing scene.txt in " + dir.string());
  }
  std::string line;
  while (std::getline(meta, line)) {
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      continue;
    }
    auto trim = [](std::string s) {
      const auto begin = s.find_first_not_of(" \t");
      const auto end = s.find_last_not_of(" \t");
      return begin == std::string::npos ? std::string() : s.substr(begin, end - begin + 1);
    };
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key == "spec") {
      scene.spec_name = value;
    } else if (key == "seed") {
      scene.generator_seed = std::stoull(value);
    }
  }
  return scene;
}

}  // namespace geonav
