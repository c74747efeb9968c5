#pragma once

#include <filesystem>
#include <optional>
#include <span>

#include "besim/data.hpp"
#include "besim/fly.hpp"
#include "besim/model.hpp"

namespace besim {

struct SimConfig {
  long steps = 1000;
  uint64_t seed = 0;
  std::vector<UnitOverride> unit_overrides;
  int warmup = 50;     // priming frames consumed before going closed loop
  bool argmax = false; // sample by default
  // Test hook: replaces every sampled bin vector with these bins, decoded to
  // bin centers (deterministic motion).
  std::optional<std::vector<int>> forced_bins;
};

struct AgentTrajectory {
  std::vector<FlyPose> poses;       // steps
  std::vector<Vec> x;               // motion played into each pose
  std::vector<Vec> v;               // retina after each step
  std::vector<Vec> y_hat;           // classifier readout per step
  std::vector<ModelState> states;   // post-step hidden states
};

struct FlySimInput {
  FlyPose initial;                   // pose when the loop starts
  std::vector<Vec> warm_x, warm_v;   // real frames for state priming
};

// Closed loop: every agent takes its step (forward pass, sample, move), then
// all sensory inputs are recomputed from the new configuration. Per-agent rng
// streams come from (seed, agent index). Overrides are applied inside
// forward_step, after the discriminative pass.
std::vector<AgentTrajectory> simulate_flies(
    const ModelParams& model, const BinSpec& bins,
    std::span<const FlySimInput> agents, const Chamber& chamber,
    const RetinaConfig& retina, const SimConfig& cfg,
    std::span<const RetinaTarget> obstacles = {});

struct HandwritingSim {
  std::vector<Vec> strokes;  // (dx, dy, z), de-normalized, z in {0,1}
  std::vector<Vec> y_hat;    // per step
};

// D_v = 0 model; dx, dy are sampled uniform within their bin (normalized
// units, fed back as-is), z is its sampled bin index.
HandwritingSim simulate_handwriting(const ModelParams& model,
                                    const BinSpec& bins,
                                    const WriterStats& stats,
                                    const SimConfig& cfg,
                                    std::span<const Vec> warm_x = {});

// One row per agent-frame: trial, agent, frame, label columns, then
// h1..hL and (BESNET) hh1..hhL unit columns. %.17g so replays compare exactly.
void export_hidden_states(const ModelParams& model,
                          std::span<const TrialData> trials,
                          const std::filesystem::path& path);

}  // namespace besim
