#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "besim/fly.hpp"

namespace besim {

// Scripted stand-in behaviors:
//   locomotion   forward speed with Normal(1.0, 0.3) mm/frame marginal,
//                clipped to [0, 2]; first-order autocorrelation rho_speed
//   steering     heading jitter with Normal(0, 5 deg)/frame marginal, plus
//                wall avoidance (clearance ahead < 14 mm turns 15 deg/frame
//                toward the clearer side; within 6 mm of any wall the fly
//                also turns 10 deg/frame toward the interior until it
//                points at most 30 deg off the inward normal, so it never
//                hugs a wall) and a disc object at the chamber center
//                (within 10 mm of its surface turns 10 deg/frame to a side
//                chosen once per approach)
//   wing events  with p = 0.01/frame start an extension on one wing (side
//                chosen 50/50): ramp to 60 deg over 5 frames, hold 20,
//                retract over 5; every frame of the event carries the
//                class label for that side
// Sideways drift, wing lengths, and body length carry small mean-reverting
// autocorrelated noise so every continuous channel has temporal structure.
struct SynthFlyParams {
  Chamber chamber = Chamber::rect(120.0, 80.0);
  RetinaConfig retina;

  bool include_object = true;
  double object_radius = 5.0;  // mm, disc at chamber center

  double speed_mean = 1.0, speed_std = 0.3, speed_rho = 0.985;
  double speed_min = 0.0, speed_max = 2.0;
  double jitter_std_deg = 5.0, jitter_rho = 0.95;
  double wall_trigger = 14.0, wall_turn_deg = 15.0;
  double lateral_trigger = 6.0, lateral_turn_deg = 10.0;
  double lateral_deadband_deg = 30.0;
  double object_trigger = 10.0, object_turn_deg = 10.0;
  double wing_start_prob = 0.01;
  double wing_max_deg = 60.0;
  int wing_ramp = 5, wing_hold = 20, wing_retract = 5;
  double sideways_std = 0.08, sideways_rho = 0.9;
  double len_noise_std = 0.01, len_noise_rho = 0.9, len_revert = 0.05;
  double wall_margin = 0.5;  // mm, positions are clamped this far inside

  void validate() const;
};

inline constexpr int kSynthFlyClasses = 2;  // left_wing_ext, right_wing_ext

struct SynthFlyStats {
  long left_wing_events = 0, right_wing_events = 0;
  long left_object_turns = 0, right_object_turns = 0;
};

struct SynthTrack {
  std::vector<FlyPose> poses;                   // T
  std::vector<Vec> x;                           // T, motion into each pose
  std::vector<Vec> v;                           // T, retina at each pose
  std::vector<std::array<std::uint8_t, 2>> labels;  // T, {left, right}
  SynthFlyStats stats;
};

SynthTrack synthfly_generate(int frames, std::uint64_t seed,
                             const SynthFlyParams& params = {});

}  // namespace besim
