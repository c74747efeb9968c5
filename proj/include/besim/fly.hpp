#pragma once

#include <span>

#include "besim/matrix.hpp"

namespace besim {

inline constexpr int kFlyMotionDims = 8;

// Motion vector layout (units mm, rad):
//   0 forward displacement      1 sideways displacement
//   2 heading change            3 left wing angle (absolute)
//   4 right wing angle (absolute)
//   5 left wing length change   6 right wing length change
//   7 body length change
struct FlyPose {
  double x = 0.0, y = 0.0;   // mm
  double heading = 0.0;      // rad, wrapped to (-pi, pi]
  double wing_angle_left = 0.0, wing_angle_right = 0.0;  // rad, [0, pi/2]
  double wing_len_left = 2.0, wing_len_right = 2.0;      // mm
  double body_len = 2.5;                                 // mm
};

// Axis-aligned rectangle or circle, centered at the origin.
struct Chamber {
  enum class Shape { RECT, CIRCLE };
  Shape shape = Shape::RECT;
  double width = 120.0, height = 80.0;  // rect, mm
  double radius = 40.0;                 // circle, mm

  static Chamber rect(double width, double height);
  static Chamber circle(double radius);

  // inflate scales the chamber about the origin (1.05 = +5% margin).
  bool contains(double x, double y, double inflate = 1.0) const;
  // Distance from an interior point along direction dir (rad) to the wall.
  double ray_to_wall(double x, double y, double dir) const;
  // Signed perpendicular distance to the nearest wall, negative outside.
  double wall_distance(double x, double y) const;
  // Heading (rad) of the inward normal of the nearest wall.
  double interior_direction(double x, double y) const;
  // Pulls a point to at least `margin` mm inside the boundary.
  void clamp_inside(double& x, double& y, double margin) const;
};

struct RetinaConfig {
  int sectors = 72;
  double sector_width_deg = 5.0;
  double sigma_fly = 20.0;       // mm, fly-channel decay
  double sigma_wall = 20.0;      // mm, wall-channel decay
  double fly_body_radius = 1.0;  // mm

  void validate() const;  // sectors x width must cover 360 degrees exactly
  int dims() const { return 2 * sectors; }
};

// Anything the fly channel can see: another fly's body or an obstacle.
struct RetinaTarget {
  double x = 0.0, y = 0.0, radius = 1.0;
};

double wrap_angle(double a);  // into (-pi, pi]

FlyPose apply_motion(const FlyPose& pose, const Vec& motion);

// Inverse of apply_motion up to the pose clamps: recovers the motion vector
// that maps prev to next.
Vec pose_delta(const FlyPose& prev, const FlyPose& next);

// v layout: sectors fly-channel intensities, then sectors wall-channel
// intensities. Sector 0 is centered on the agent's heading; sector index
// grows counterclockwise. A target at distance d subtending half-angle
// atan(r/d) lights every sector whose span intersects that interval with
// exp(-d/sigma_fly), max over targets. Wall intensities are exp(-d_w/sigma_wall)
// from a ray cast along each sector center; an agent outside the chamber
// reads wall intensity 1 everywhere.
Vec compute_retina(const FlyPose& agent, std::span<const RetinaTarget> targets,
                   const Chamber& chamber, const RetinaConfig& cfg);

std::vector<RetinaTarget> fly_targets(std::span<const FlyPose> others,
                                      const RetinaConfig& cfg);

}  // namespace besim
