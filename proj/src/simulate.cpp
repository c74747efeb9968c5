#include "besim/simulate.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>

#include "besim/errors.hpp"

namespace besim {

namespace {

bool finite_pose(const FlyPose& p) {
  return std::isfinite(p.x) && std::isfinite(p.y) && std::isfinite(p.heading) &&
         std::isfinite(p.wing_angle_left) && std::isfinite(p.wing_angle_right) &&
         std::isfinite(p.wing_len_left) && std::isfinite(p.wing_len_right) &&
         std::isfinite(p.body_len);
}

std::vector<int> argmax_bins(const std::vector<Vec>& x_hat) {
  std::vector<int> out(x_hat.size());
  for (size_t d = 0; d < x_hat.size(); ++d)
    out[d] = static_cast<int>(std::max_element(x_hat[d].begin(), x_hat[d].end()) -
                              x_hat[d].begin());
  return out;
}

Vec pick_motion(const BinSpec& bins, const std::vector<Vec>& x_hat,
                const SimConfig& cfg, Rng& rng) {
  if (cfg.forced_bins) return decode_motion(bins, *cfg.forced_bins);
  if (cfg.argmax) return decode_motion(bins, argmax_bins(x_hat));
  return sample_motion(bins, x_hat, rng);
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

}  // namespace

std::vector<AgentTrajectory> simulate_flies(
    const ModelParams& model, const BinSpec& bins,
    std::span<const FlySimInput> agents, const Chamber& chamber,
    const RetinaConfig& retina, const SimConfig& cfg,
    std::span<const RetinaTarget> obstacles) {
  require(model.has_motion_output(), "simulate: model has no motion output");
  require(!agents.empty(), "simulate: need at least one agent");
  require(model.config.motion_dims == kFlyMotionDims,
          "simulate: fly model must have 8 motion dims");
  require(model.config.sensory_dims == retina.dims(),
          "simulate: sensory dims do not match the retina");

  const int n = static_cast<int>(agents.size());
  std::vector<Rng> rng;
  std::vector<ModelState> state(n, zero_state(model.config));
  std::vector<FlyPose> pose(n);
  std::vector<Vec> x_cur(n), v_cur(n);
  std::vector<AgentTrajectory> out(n);

  for (int a = 0; a < n; ++a) {
    rng.push_back(make_rng(cfg.seed, static_cast<uint64_t>(a)));
    pose[a] = agents[a].initial;
    const size_t prime =
        std::min<size_t>(agents[a].warm_x.size(),
                         cfg.warmup < 0 ? 0 : static_cast<size_t>(cfg.warmup));
    require(agents[a].warm_v.size() >= prime,
            "simulate: warm_v shorter than warm_x priming span");
    for (size_t i = 0; i < prime; ++i) {
      const StepOutput step = forward_step(model, agents[a].warm_x[i],
                                           agents[a].warm_v[i], state[a],
                                           nullptr, cfg.unit_overrides);
      state[a] = step.state;
    }
    x_cur[a] = prime ? agents[a].warm_x[prime - 1]
                     : Vec(model.config.motion_dims, 0.0);
  }

  auto sense = [&](int a) {
    std::vector<RetinaTarget> targets;
    for (int b = 0; b < n; ++b)
      if (b != a) targets.push_back({pose[b].x, pose[b].y, retina.fly_body_radius});
    targets.insert(targets.end(), obstacles.begin(), obstacles.end());
    return compute_retina(pose[a], targets, chamber, retina);
  };
  for (int a = 0; a < n; ++a) v_cur[a] = sense(a);

  std::vector<FlyPose> next(n);
  std::vector<Vec> motion(n);
  for (long step = 0; step < cfg.steps; ++step) {
    for (int a = 0; a < n; ++a) {
      const StepOutput so = forward_step(model, x_cur[a], v_cur[a], state[a],
                                         nullptr, cfg.unit_overrides);
      motion[a] = pick_motion(bins, so.x_hat, cfg, rng[a]);
      next[a] = apply_motion(pose[a], motion[a]);
      if (!finite_pose(next[a]))
        throw numeric_error("non-finite pose at step " + std::to_string(step) +
                            " for agent " + std::to_string(a));
      state[a] = so.state;
      out[a].y_hat.push_back(so.y_hat);
      out[a].states.push_back(state[a]);
    }
    pose = next;
    for (int a = 0; a < n; ++a) {
      v_cur[a] = sense(a);
      x_cur[a] = motion[a];
      out[a].poses.push_back(pose[a]);
      out[a].x.push_back(motion[a]);
      out[a].v.push_back(v_cur[a]);
    }
  }
  return out;
}

HandwritingSim simulate_handwriting(const ModelParams& model,
                                    const BinSpec& bins,
                                    const WriterStats& stats,
                                    const SimConfig& cfg,
                                    std::span<const Vec> warm_x) {
  require(model.has_motion_output(), "simulate: model has no motion output");
  require(model.config.motion_dims == 3 && model.config.sensory_dims == 0,
          "simulate: handwriting model must be (dx, dy, z) with no sensory input");
  require(bins.bins(2) == 2, "simulate: z must use 2 bins");

  Rng rng = make_rng(cfg.seed, 0);
  ModelState state = zero_state(model.config);
  const Vec empty_v;
  Vec x_cur(3, 0.0);
  const size_t prime = std::min<size_t>(
      warm_x.size(), cfg.warmup < 0 ? 0 : static_cast<size_t>(cfg.warmup));
  for (size_t i = 0; i < prime; ++i) {
    const StepOutput so =
        forward_step(model, warm_x[i], empty_v, state, nullptr, cfg.unit_overrides);
    state = so.state;
  }
  if (prime) x_cur = warm_x[prime - 1];

  HandwritingSim out;
  for (long step = 0; step < cfg.steps; ++step) {
    const StepOutput so =
        forward_step(model, x_cur, empty_v, state, nullptr, cfg.unit_overrides);
    Vec m = pick_motion(bins, so.x_hat, cfg, rng);
    m[2] = static_cast<double>(encode_dim(bins, 2, m[2]));  // z is its bin
    state = so.state;
    x_cur = m;
    out.strokes.push_back(denormalize_stroke(m, stats));
    out.y_hat.push_back(so.y_hat);
  }
  return out;
}

void export_hidden_states(const ModelParams& model,
                          std::span<const TrialData> trials,
                          const std::filesystem::path& path) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write " + path.string());

  const ModelConfig& cfg = model.config;
  f << "trial,agent,frame";
  for (int c = 0; c < cfg.actions; ++c) f << ",label" << c;
  f << ",mask";
  for (int l = 0; l < cfg.stack_levels(); ++l)
    for (int u = 0; u < cfg.stack_units(l); ++u) f << ",h" << l + 1 << "_" << u;
  if (cfg.variant == Variant::BESNET)
    for (int l = 0; l < cfg.levels; ++l)
      for (int u = 0; u < cfg.units[l]; ++u) f << ",hh" << l + 1 << "_" << u;
  f << "\n";

  for (const TrialData& trial : trials)
    for (const AgentTrack& track : trial.agents) {
      ModelState state = zero_state(cfg);
      for (int i = 0; i < track.frames(); ++i) {
        const StepOutput so = forward_step(model, track.x[i], track.v[i], state);
        state = so.state;
        f << trial.trial_id << ',' << track.agent_id << ',' << i;
        for (int c = 0; c < cfg.actions; ++c)
          f << ',' << (c < static_cast<int>(track.labels[i].size())
                           ? int(track.labels[i][c])
                           : 0);
        f << ',' << int(track.label_mask[i]);
        for (const Vec& h : state.h)
          for (double val : h) f << ',' << fmt(val);
        if (cfg.variant == Variant::BESNET)
          for (const Vec& hh : state.hhat)
            for (double val : hh) f << ',' << fmt(val);
        f << "\n";
      }
    }
}

}  // namespace besim
