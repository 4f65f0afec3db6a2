#include "geonav/geometry.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace geonav {

double wrap_angle(double theta) {
  double y = std::fmod(theta + kPi, 2.0 * kPi);
  if (y <= 0.0) {
    y += 2.0 * kPi;
  }
  return y - kPi;
}

double heading_distance(double a, double b) { return std::abs(wrap_angle(a - b)); }

Twist2 clamp_twist(const Twist2& cmd, const VelocityLimits& limits) {
  return Twist2{std::clamp(cmd.vx, -limits.vx_max, limits.vx_max),
                std::clamp(cmd.vy, -limits.vy_max, limits.vy_max),
                std::clamp(cmd.omega, -limits.omega_max, limits.omega_max)};
}

Pose2 compose(const Pose2& a, const Pose2& b) {
  const double c = std::cos(a.theta);
  const double s = std::sin(a.theta);
  return Pose2{a.x + c * b.x - s * b.y, a.y + s * b.x + c * b.y, wrap_angle(a.theta + b.theta)};
}

Pose2 relative_to(const Pose2& reference, const Pose2& target) {
  const double c = std::cos(reference.theta);
  const double s = std::sin(reference.theta);
  const double dx = target.x - reference.x;
  const double dy = target.y - reference.y;
  return Pose2{c * dx + s * dy, -s * dx + c * dy, wrap_angle(target.theta - reference.theta)};
}

Pose2 kinematic_step(const Pose2& pose, const Twist2& cmd, double dt) {
  const double c = std::cos(pose.theta);
  const double s = std::sin(pose.theta);
  return Pose2{pose.x + (c * cmd.vx - s * cmd.vy) * dt, pose.y + (s * cmd.vx + c * cmd.vy) * dt,
               wrap_angle(pose.theta + cmd.omega * dt)};
}

Path rollout(const Pose2& start, const CommandSequence& cmds) {
  if (cmds.commands.empty()) {
    throw std::invalid_argument("rollout: empty command sequence");
  }
  if (!(cmds.dt > 0.0)) {
    throw std::invalid_argument("rollout: dt must be positive");
  }
  Path path;
  path.reserve(cmds.commands.size());
  Pose2 pose = start;
  for (const Twist2& cmd : cmds.commands) {
    pose = kinematic_step(pose, cmd, cmds.dt);
    path.push_back(pose);
  }
  return path;
}

double path_length(const Pose2& origin, const Path& path) {
  double total = 0.0;
  double px = origin.x;
  double py = origin.y;
  for (const Pose2& wp : path) {
    total += std::hypot(wp.x - px, wp.y - py);
    px = wp.x;
    py = wp.y;
  }
  return total;
}

}  // namespace geonav
