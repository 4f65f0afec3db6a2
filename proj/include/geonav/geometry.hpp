#pragma once

#include <vector>

namespace geonav {

inline constexpr double kPi = 3.14159265358979323846;

// Wraps an angle to (-pi, pi].
double wrap_angle(double theta);

// Absolute heading difference |wrap(a - b)|.
double heading_distance(double a, double b);

// Planar rigid pose. Heading is kept wrapped to (-pi, pi] by all operations.
struct Pose2 {
  double x = 0.0;      // m
  double y = 0.0;      // m
  double theta = 0.0;  // rad

  friend bool operator==(const Pose2&, const Pose2&) = default;
};

// Body-frame velocity command: vx forward, vy lateral, omega yaw rate.
struct Twist2 {
  double vx = 0.0;     // m/s
  double vy = 0.0;     // m/s
  double omega = 0.0;  // rad/s

  friend bool operator==(const Twist2&, const Twist2&) = default;
};

struct VelocityLimits {
  double vx_max = 1.0;     // m/s
  double vy_max = 0.5;     // m/s
  double omega_max = 1.0;  // rad/s
};

Twist2 clamp_twist(const Twist2& cmd, const VelocityLimits& limits);

// Waypoints ordered along the trajectory, expressed in the planning frame.
using Path = std::vector<Pose2>;

// Fixed-horizon command sequence executed at dt seconds per step.
struct CommandSequence {
  std::vector<Twist2> commands;
  double dt = 0.1;  // s

  friend bool operator==(const CommandSequence&, const CommandSequence&) = default;
};

// SE(2) group composition a * b; the result heading is rewrapped.
Pose2 compose(const Pose2& a, const Pose2& b);

// Pose of `target` expressed in the frame of `reference`:
// compose(reference, relative_to(reference, target)) == target.
Pose2 relative_to(const Pose2& reference, const Pose2& target);

// One step of the piecewise-constant velocity kinematics: the body-frame
// velocity is rotated into the world frame with the pre-step heading.
Pose2 kinematic_step(const Pose2& pose, const Twist2& cmd, double dt);

// Integrates the command sequence from `start`, one waypoint per command.
// The start pose itself is not part of the returned path.
// Throws std::invalid_argument for an empty sequence or dt <= 0.
Path rollout(const Pose2& start, const CommandSequence& cmds);

// Sum of planar segment lengths from `origin` through every waypoint in order.
double path_length(const Pose2& origin, const Path& path);

}  // namespace geonav
