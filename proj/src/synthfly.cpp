#include "besim/synthfly.hpp"

#include <cmath>

#include "besim/errors.hpp"
#include "besim/rng.hpp"

namespace besim {

namespace {
constexpr double kDeg = 3.14159265358979323846 / 180.0;

// Stationary AR(1) with a fixed marginal: x' = rho x + noise(std sqrt(1-rho^2)).
struct Ar1 {
  double rho = 0.0, marginal_std = 1.0, value = 0.0;
  void init(Rng& rng) { value = normal(rng, 0.0, marginal_std); }
  double step(Rng& rng) {
    value = rho * value +
            normal(rng, 0.0, marginal_std * std::sqrt(1.0 - rho * rho));
    return value;
  }
};

struct WingEvent {
  int side = -1;   // 0 left, 1 right, -1 idle
  int frame = 0;   // frames elapsed within the event
};
}  // namespace

void SynthFlyParams::validate() const {
  retina.validate();
  require(speed_std > 0 && speed_rho >= 0 && speed_rho < 1,
          "synthfly: bad speed process");
  require(jitter_rho >= 0 && jitter_rho < 1, "synthfly: bad jitter process");
  require(wing_ramp > 0 && wing_hold >= 0 && wing_retract > 0,
          "synthfly: bad wing event shape");
  require(wing_start_prob >= 0 && wing_start_prob <= 1,
          "synthfly: bad wing start probability");
  require(wall_margin > 0, "synthfly: wall margin must be positive");
  require(lateral_trigger > 0 && lateral_turn_deg > 0 &&
              lateral_deadband_deg >= 0,
          "synthfly: bad lateral avoidance");
}

SynthTrack synthfly_generate(int frames, std::uint64_t seed,
                             const SynthFlyParams& p) {
  require(frames >= 1, "synthfly: frames must be >= 1");
  p.validate();
  Rng rng = make_rng(seed, 0);

  std::vector<RetinaTarget> targets;
  if (p.include_object) targets.push_back({0.0, 0.0, p.object_radius});

  SynthTrack track;
  track.poses.reserve(frames);
  track.x.reserve(frames);
  track.v.reserve(frames);
  track.labels.reserve(frames);

  FlyPose pose;
  if (p.chamber.shape == Chamber::Shape::RECT) {
    pose.x = uniform(rng, -p.chamber.width / 2.0 + 10.0,
                     p.chamber.width / 2.0 - 10.0);
    pose.y = uniform(rng, -p.chamber.height / 2.0 + 10.0,
                     p.chamber.height / 2.0 - 10.0);
  } else {
    const double r = (p.chamber.radius - 10.0) * std::sqrt(uniform01(rng));
    const double a = uniform(rng, -3.14159265358979323846, 3.14159265358979323846);
    pose.x = r * std::cos(a);
    pose.y = r * std::sin(a);
  }
  pose.heading = wrap_angle(uniform(rng, -3.2, 3.2));

  double speed = p.speed_mean + normal(rng, 0.0, p.speed_std);
  Ar1 jitter{p.jitter_rho, p.jitter_std_deg * kDeg};
  Ar1 sideways{p.sideways_rho, p.sideways_std};
  Ar1 len_noise_l{p.len_noise_rho, p.len_noise_std};
  Ar1 len_noise_r{p.len_noise_rho, p.len_noise_std};
  Ar1 len_noise_b{p.len_noise_rho, p.len_noise_std};
  jitter.init(rng);
  sideways.init(rng);
  len_noise_l.init(rng);
  len_noise_r.init(rng);
  len_noise_b.init(rng);
  const double rest_wing_len = pose.wing_len_left;
  const double rest_body_len = pose.body_len;

  WingEvent wing;
  const int wing_total = p.wing_ramp + p.wing_hold + p.wing_retract;
  int object_side = 0;  // 0 none, -1 right turn, +1 left turn

  track.poses.push_back(pose);
  track.x.push_back(Vec(kFlyMotionDims, 0.0));
  track.v.push_back(compute_retina(pose, targets, p.chamber, p.retina));
  track.labels.push_back({0, 0});

  for (int i = 1; i < frames; ++i) {
    speed = p.speed_mean + p.speed_rho * (speed - p.speed_mean) +
            normal(rng, 0.0, p.speed_std * std::sqrt(1.0 - p.speed_rho * p.speed_rho));
    const double fwd = std::clamp(speed, p.speed_min, p.speed_max);
    const double side = sideways.step(rng);

    double turn = jitter.step(rng);
    const double ahead = p.chamber.ray_to_wall(pose.x, pose.y, pose.heading);
    if (ahead < p.wall_trigger) {
      const double left =
          p.chamber.ray_to_wall(pose.x, pose.y, pose.heading + 45.0 * kDeg);
      const double right =
          p.chamber.ray_to_wall(pose.x, pose.y, pose.heading - 45.0 * kDeg);
      turn += (left >= right ? 1.0 : -1.0) * p.wall_turn_deg * kDeg;
    }
    if (p.chamber.wall_distance(pose.x, pose.y) < p.lateral_trigger) {
      const double inward = p.chamber.interior_direction(pose.x, pose.y);
      const double off = wrap_angle(inward - pose.heading);
      if (std::abs(off) > p.lateral_deadband_deg * kDeg)
        turn += (off > 0.0 ? 1.0 : -1.0) * p.lateral_turn_deg * kDeg;
    }
    if (p.include_object) {
      const double d_obj =
          std::hypot(pose.x, pose.y) - p.object_radius;
      if (d_obj < p.object_trigger) {
        if (object_side == 0) {
          object_side = uniform01(rng) < 0.5 ? 1 : -1;
          if (object_side > 0)
            ++track.stats.left_object_turns;
          else
            ++track.stats.right_object_turns;
        }
        turn += object_side * p.object_turn_deg * kDeg;
      } else {
        object_side = 0;
      }
    }

    if (wing.side < 0 && uniform01(rng) < p.wing_start_prob) {
      wing.side = uniform01(rng) < 0.5 ? 0 : 1;
      wing.frame = 0;
      if (wing.side == 0)
        ++track.stats.left_wing_events;
      else
        ++track.stats.right_wing_events;
    }
    double wing_angle = 0.0;
    std::array<std::uint8_t, 2> label = {0, 0};
    int wing_side = wing.side;
    if (wing.side >= 0) {
      ++wing.frame;
      const int f = wing.frame;
      const double peak = p.wing_max_deg * kDeg;
      if (f <= p.wing_ramp)
        wing_angle = peak * f / p.wing_ramp;
      else if (f <= p.wing_ramp + p.wing_hold)
        wing_angle = peak;
      else
        wing_angle = peak * (wing_total - f) / p.wing_retract;
      label[wing.side] = 1;
      if (f >= wing_total) wing.side = -1;
    }

    Vec u(kFlyMotionDims, 0.0);
    u[0] = fwd;
    u[1] = side;
    u[2] = turn;
    u[3] = wing_side == 0 ? wing_angle : 0.0;
    u[4] = wing_side == 1 ? wing_angle : 0.0;
    u[5] = -p.len_revert * (pose.wing_len_left - rest_wing_len) +
           len_noise_l.step(rng);
    u[6] = -p.len_revert * (pose.wing_len_right - rest_wing_len) +
           len_noise_r.step(rng);
    u[7] = -p.len_revert * (pose.body_len - rest_body_len) +
           len_noise_b.step(rng);

    FlyPose next = apply_motion(pose, u);
    p.chamber.clamp_inside(next.x, next.y, p.wall_margin);

    track.x.push_back(pose_delta(pose, next));
    pose = next;
    track.poses.push_back(pose);
    track.v.push_back(compute_retina(pose, targets, p.chamber, p.retina));
    track.labels.push_back(label);
  }
  return track;
}

}  // namespace besim
