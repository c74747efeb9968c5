#include "besim/fly.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "besim/errors.hpp"

namespace besim {

namespace {
constexpr double kPi = 3.14159265358979323846;
constexpr double kMinLength = 0.1;  // mm, keeps lengths physical

double clamp_wing_angle(double a) { return std::clamp(a, 0.0, kPi / 2.0); }
}  // namespace

double wrap_angle(double a) {
  a = std::fmod(a + kPi, 2.0 * kPi);
  if (a <= 0.0) a += 2.0 * kPi;
  return a - kPi;
}

Chamber Chamber::rect(double width, double height) {
  require(width > 0 && height > 0, "chamber: rect sides must be positive");
  Chamber c;
  c.shape = Shape::RECT;
  c.width = width;
  c.height = height;
  return c;
}

Chamber Chamber::circle(double radius) {
  require(radius > 0, "chamber: radius must be positive");
  Chamber c;
  c.shape = Shape::CIRCLE;
  c.radius = radius;
  return c;
}

bool Chamber::contains(double x, double y, double inflate) const {
  if (shape == Shape::RECT) {
    return std::abs(x) <= inflate * width / 2.0 &&
           std::abs(y) <= inflate * height / 2.0;
  }
  return std::hypot(x, y) <= inflate * radius;
}

double Chamber::ray_to_wall(double x, double y, double dir) const {
  const double c = std::cos(dir), s = std::sin(dir);
  if (shape == Shape::RECT) {
    double t = std::numeric_limits<double>::infinity();
    if (c > 1e-15) t = std::min(t, (width / 2.0 - x) / c);
    if (c < -1e-15) t = std::min(t, (-width / 2.0 - x) / c);
    if (s > 1e-15) t = std::min(t, (height / 2.0 - y) / s);
    if (s < -1e-15) t = std::min(t, (-height / 2.0 - y) / s);
    return std::max(t, 0.0);
  }
  const double b = x * c + y * s;
  const double disc = b * b - (x * x + y * y - radius * radius);
  if (disc <= 0.0) return 0.0;
  return std::max(-b + std::sqrt(disc), 0.0);
}

double Chamber::wall_distance(double x, double y) const {
  if (shape == Shape::RECT) {
    return std::min(width / 2.0 - std::abs(x), height / 2.0 - std::abs(y));
  }
  return radius - std::hypot(x, y);
}

double Chamber::interior_direction(double x, double y) const {
  if (shape == Shape::RECT) {
    if (width / 2.0 - std::abs(x) <= height / 2.0 - std::abs(y))
      return x > 0.0 ? kPi : 0.0;
    return y > 0.0 ? -kPi / 2.0 : kPi / 2.0;
  }
  return wrap_angle(std::atan2(-y, -x));
}

void Chamber::clamp_inside(double& x, double& y, double margin) const {
  if (shape == Shape::RECT) {
    const double mx = std::max(width / 2.0 - margin, 0.0);
    const double my = std::max(height / 2.0 - margin, 0.0);
    x = std::clamp(x, -mx, mx);
    y = std::clamp(y, -my, my);
    return;
  }
  const double r = std::hypot(x, y);
  const double rmax = std::max(radius - margin, 0.0);
  if (r > rmax && r > 0.0) {
    x *= rmax / r;
    y *= rmax / r;
  }
}

void RetinaConfig::validate() const {
  require(sectors > 0, "retina: sectors must be positive");
  require(std::abs(sectors * sector_width_deg - 360.0) < 1e-9,
          "retina: sectors x width must equal 360 degrees");
  require(sigma_fly > 0 && sigma_wall > 0, "retina: sigmas must be positive");
  require(fly_body_radius > 0, "retina: body radius must be positive");
}

FlyPose apply_motion(const FlyPose& pose, const Vec& motion) {
  require(static_cast<int>(motion.size()) == kFlyMotionDims,
          "apply_motion: motion vector must have 8 dims");
  const double c = std::cos(pose.heading), s = std::sin(pose.heading);
  FlyPose out = pose;
  out.x += motion[0] * c - motion[1] * s;
  out.y += motion[0] * s + motion[1] * c;
  out.heading = wrap_angle(pose.heading + motion[2]);
  out.wing_angle_left = clamp_wing_angle(motion[3]);
  out.wing_angle_right = clamp_wing_angle(motion[4]);
  out.wing_len_left = std::max(pose.wing_len_left + motion[5], kMinLength);
  out.wing_len_right = std::max(pose.wing_len_right + motion[6], kMinLength);
  out.body_len = std::max(pose.body_len + motion[7], kMinLength);
  return out;
}

Vec pose_delta(const FlyPose& prev, const FlyPose& next) {
  const double c = std::cos(prev.heading), s = std::sin(prev.heading);
  const double dx = next.x - prev.x, dy = next.y - prev.y;
  Vec m(kFlyMotionDims);
  m[0] = dx * c + dy * s;
  m[1] = -dx * s + dy * c;
  m[2] = wrap_angle(next.heading - prev.heading);
  m[3] = next.wing_angle_left;
  m[4] = next.wing_angle_right;
  m[5] = next.wing_len_left - prev.wing_len_left;
  m[6] = next.wing_len_right - prev.wing_len_right;
  m[7] = next.body_len - prev.body_len;
  return m;
}

Vec compute_retina(const FlyPose& agent, std::span<const RetinaTarget> targets,
                   const Chamber& chamber, const RetinaConfig& cfg) {
  cfg.validate();
  const int n = cfg.sectors;
  const double w = cfg.sector_width_deg;
  Vec v(2 * n, 0.0);

  const double heading_deg = agent.heading * 180.0 / kPi;
  for (const RetinaTarget& t : targets) {
    const double d = std::hypot(t.x - agent.x, t.y - agent.y);
    const double inten = std::exp(-d / cfg.sigma_fly);
    if (d < 1e-9) {
      for (int k = 0; k < n; ++k) v[k] = std::max(v[k], inten);
      continue;
    }
    const double alpha =
        std::atan2(t.y - agent.y, t.x - agent.x) * 180.0 / kPi - heading_deg;
    const double beta = std::atan(t.radius / d) * 180.0 / kPi;
    // Sector k spans [k*w - w/2, k*w + w/2); walk every k whose span
    // intersects [alpha - beta, alpha + beta], then wrap.
    const int k_lo = static_cast<int>(std::floor((alpha - beta) / w - 0.5)) - 1;
    const int k_hi = static_cast<int>(std::ceil((alpha + beta) / w + 0.5)) + 1;
    for (int k = k_lo; k <= k_hi; ++k) {
      const double lo = k * w - w / 2.0, hi = k * w + w / 2.0;
      if (lo <= alpha + beta && hi > alpha - beta) {
        int idx = k % n;
        if (idx < 0) idx += n;
        v[idx] = std::max(v[idx], inten);
      }
    }
  }

  if (!chamber.contains(agent.x, agent.y)) {
    for (int k = 0; k < n; ++k) v[n + k] = 1.0;
    return v;
  }
  for (int k = 0; k < n; ++k) {
    const double dir = agent.heading + k * w * kPi / 180.0;
    const double dw = chamber.ray_to_wall(agent.x, agent.y, dir);
    v[n + k] = std::exp(-dw / cfg.sigma_wall);
  }
  return v;
}

std::vector<RetinaTarget> fly_targets(std::span<const FlyPose> others,
                                      const RetinaConfig& cfg) {
  std::vector<RetinaTarget> t;
  t.reserve(others.size());
  for (const FlyPose& p : others)
    t.push_back({p.x, p.y, cfg.fly_body_radius});
  return t;
}

}  // namespace besim
