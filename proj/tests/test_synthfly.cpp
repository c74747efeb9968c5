#include <doctest.h>

#include <cmath>
#include <set>

#include "besim/synthfly.hpp"

using namespace besim;

TEST_CASE("synthfly is deterministic per seed") {
  const SynthTrack a = synthfly_generate(500, 9001);
  const SynthTrack b = synthfly_generate(500, 9001);
  const SynthTrack c = synthfly_generate(500, 9002);
  REQUIRE(a.poses.size() == 500);
  REQUIRE(a.x.size() == 500);
  REQUIRE(a.v.size() == 500);
  REQUIRE(a.labels.size() == 500);
  for (int i = 0; i < 500; ++i) {
    CHECK(a.poses[i].x == b.poses[i].x);
    CHECK(a.poses[i].heading == b.poses[i].heading);
    CHECK(a.x[i] == b.x[i]);
    CHECK(a.v[i] == b.v[i]);
    CHECK(a.labels[i] == b.labels[i]);
  }
  bool differs = false;
  for (int i = 0; i < 500 && !differs; ++i)
    differs = a.poses[i].x != c.poses[i].x;
  CHECK(differs);
}

TEST_CASE("synthfly stays strictly inside the chamber") {
  const SynthFlyParams p;
  const SynthTrack t = synthfly_generate(10000, 7);
  double min_wall = 1e9;
  for (const FlyPose& pose : t.poses) {
    CHECK(p.chamber.contains(pose.x, pose.y));
    min_wall = std::min(min_wall, p.chamber.width / 2.0 - std::abs(pose.x));
    min_wall = std::min(min_wall, p.chamber.height / 2.0 - std::abs(pose.y));
  }
  CHECK(min_wall > 0.0);
}

TEST_CASE("motion vectors replay the trajectory exactly") {
  const SynthTrack t = synthfly_generate(2000, 13);
  FlyPose pose = t.poses[0];
  for (size_t i = 1; i < t.poses.size(); ++i) {
    pose = apply_motion(pose, t.x[i]);
    CHECK(std::abs(pose.x - t.poses[i].x) < 1e-9);
    CHECK(std::abs(pose.y - t.poses[i].y) < 1e-9);
    CHECK(std::abs(pose.heading - t.poses[i].heading) < 1e-9);
    CHECK(pose.wing_angle_left == t.poses[i].wing_angle_left);
    CHECK(pose.wing_angle_right == t.poses[i].wing_angle_right);
    CHECK(std::abs(pose.wing_len_left - t.poses[i].wing_len_left) < 1e-9);
    CHECK(std::abs(pose.body_len - t.poses[i].body_len) < 1e-9);
  }
}

TEST_CASE("wing event sides are balanced over long runs") {
  const SynthTrack t = synthfly_generate(100000, 21);
  const double total =
      static_cast<double>(t.stats.left_wing_events + t.stats.right_wing_events);
  REQUIRE(total > 100);
  const double left_frac = t.stats.left_wing_events / total;
  CHECK(left_frac > 0.45);
  CHECK(left_frac < 0.55);
}

TEST_CASE("labels cover whole wing events and match the stats counts") {
  const SynthFlyParams p;
  const SynthTrack t = synthfly_generate(50000, 33);
  const int total = p.wing_ramp + p.wing_hold + p.wing_retract;

  // Same-side events may start back to back, merging label runs, so interior
  // runs are exact multiples of the event length; the final run may truncate.
  long events[2] = {0, 0};
  for (int side = 0; side < 2; ++side) {
    int run = 0;
    for (size_t i = 0; i < t.labels.size(); ++i) {
      if (t.labels[i][side]) {
        ++run;
      } else {
        if (run > 0) {
          CHECK(run % total == 0);
          events[side] += run / total;
        }
        run = 0;
      }
    }
    if (run > 0) events[side] += (run + total - 1) / total;
  }
  CHECK(events[0] == t.stats.left_wing_events);
  CHECK(events[1] == t.stats.right_wing_events);

  // A frame with a raised wing is always labeled on that side.
  for (size_t i = 0; i < t.poses.size(); ++i) {
    if (t.poses[i].wing_angle_left > 0.0) CHECK(t.labels[i][0] == 1);
    if (t.poses[i].wing_angle_right > 0.0) CHECK(t.labels[i][1] == 1);
    CHECK(!(t.labels[i][0] && t.labels[i][1]));
  }
}

TEST_CASE("motion dimensions respect the scripted laws") {
  const SynthFlyParams p;
  const SynthTrack t = synthfly_generate(30000, 55);
  std::set<double> wing_values;
  double mean_fwd = 0.0;
  for (size_t i = 1; i < t.x.size(); ++i) {
    CHECK(t.x[i][0] >= p.speed_min - 1e-12);
    CHECK(t.x[i][0] <= p.speed_max + 1e-12);
    wing_values.insert(t.x[i][3]);
    wing_values.insert(t.x[i][4]);
    mean_fwd += t.x[i][0];
  }
  mean_fwd /= static_cast<double>(t.x.size() - 1);
  CHECK(mean_fwd > 0.8);
  CHECK(mean_fwd < 1.2);
  // Ramp quantization leaves at most ramp+1 distinct wing angle values.
  CHECK(wing_values.size() <= static_cast<size_t>(p.wing_ramp + 1));
  CHECK(wing_values.count(0.0) == 1);
}

TEST_CASE("the center object is visible in the fly channel") {
  const SynthFlyParams p;
  const SynthTrack t = synthfly_generate(5000, 77);
  bool seen = false;
  for (const Vec& v : t.v) {
    REQUIRE(static_cast<int>(v.size()) == p.retina.dims());
    for (int k = 0; k < p.retina.sectors && !seen; ++k)
      if (v[k] > 0.0) seen = true;
  }
  CHECK(seen);
  const SynthFlyParams no_obj = [] {
    SynthFlyParams q;
    q.include_object = false;
    return q;
  }();
  const SynthTrack t2 = synthfly_generate(500, 77, no_obj);
  for (const Vec& v : t2.v)
    for (int k = 0; k < no_obj.retina.sectors; ++k) CHECK(v[k] == 0.0);
}

TEST_CASE("first frame is a rest vector") {
  const SynthTrack t = synthfly_generate(10, 99);
  for (double d : t.x[0]) CHECK(d == 0.0);
  CHECK(t.labels[0][0] == 0);
  CHECK(t.labels[0][1] == 0);
}

TEST_CASE("flies do not hug the walls") {
  SynthFlyParams p;
  const SynthTrack t = synthfly_generate(50000, 3, p);
  long near_wall = 0, run = 0, longest = 0;
  for (const FlyPose& pose : t.poses) {
    const double d = p.chamber.wall_distance(pose.x, pose.y);
    if (d < 2.0) {
      ++run;
      longest = std::max(longest, run);
    } else {
      run = 0;
    }
    if (d < 1.0) ++near_wall;
  }
  CHECK(longest < 50);
  CHECK(near_wall < t.poses.size() / 200);
}
