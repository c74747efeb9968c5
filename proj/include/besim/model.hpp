#pragma once

#include <span>
#include <string>
#include <vector>

#include "besim/gru.hpp"

namespace besim {

enum class Variant { BESNET, BENET, STACKED_RNN };
enum class LabelMode { MULTITASK, MULTICLASS };

std::string to_string(Variant v);
std::string to_string(LabelMode m);
Variant variant_from_string(const std::string& s);
LabelMode label_mode_from_string(const std::string& s);

struct ModelConfig {
  int levels = 2;                 // L
  std::vector<int> units;        // per level, length L
  int actions = 0;               // N, read out of the top discriminative level
  int motion_dims = 0;           // D_x
  int sensory_dims = 0;          // D_v, may be 0
  std::vector<int> bins_per_dim; // length D_x
  double lambda = 0.5;
  Variant variant = Variant::BESNET;
  LabelMode label_mode = LabelMode::MULTITASK;

  void validate() const;
  int label_units() const { return units.back(); }
  int logit_count() const;       // sum of bins_per_dim
  int stack_levels() const;      // L, or 2L for STACKED_RNN
  int stack_units(int level) const;  // width of stack level (mirrored for STACKED_RNN)
};

// Architecture (BESNET), levels l = 1..L, step i:
//
//   discriminative:  h^1_i = f_1([x_i, v_i], h^1_{i-1})
//                    h^l_i = f_l(h^{l-1}_i, h^l_{i-1})
//   generative:      hh^L_{i+1} = g_L(h^L_i, hh^L_i)
//                    hh^l_{i+1} = g_l([hh^{l+1}_{i+1}, h^l_i], hh^l_i)
//   outputs:         x_hat_{i+1} = softmax per dimension of (W_out hh^1_{i+1} + b)
//                    y_hat_i = (h^L_i[1..N] + 1)/2
//
// BENET drops the generative stack and motion output entirely.
// STACKED_RNN arranges the same unit budget as a plain 2L-deep stack
// (widths u_1..u_L,u_L..u_1, no diagonal connections); y_hat reads from
// stack level L and x_hat from the top.
struct ModelParams {
  ModelConfig config;
  std::vector<GruCell> disc;  // stack cells (2L of them for STACKED_RNN)
  std::vector<GruCell> gen;   // BESNET only
  Parameter w_out, b_out;     // absent for BENET

  static ModelParams build(const ModelConfig& config, Rng& rng);
  std::vector<Parameter*> all();
  bool has_motion_output() const { return config.variant != Variant::BENET; }
};

struct ModelState {
  std::vector<Vec> h;     // per stack level
  std::vector<Vec> hhat;  // per generative level (BESNET only)
};

ModelState zero_state(const ModelConfig& config);

struct UnitOverride {
  int level = 0;  // 0-based stack level
  int unit = 0;
  double value = 0.0;  // in [-1, 1]
};

struct StepOutput {
  Vec y_hat;                 // N values in (0,1): (h_top[0..N-1]+1)/2
  std::vector<Vec> x_hat;    // per-dimension distributions; empty for BENET
  ModelState state;
};

struct StepCache {
  std::vector<GruCache> disc;
  std::vector<GruCache> gen;
};

// Overrides replace the named units of h after the discriminative pass,
// before the label readout, the generative stack, and the recurrent carry.
StepOutput forward_step(const ModelParams& params, const Vec& x, const Vec& v,
                        const ModelState& prev, StepCache* cache = nullptr,
                        std::span<const UnitOverride> overrides = {});

// One training window: T aligned steps of one track.
struct Window {
  std::vector<Vec> x;                        // [T][D_x]
  std::vector<Vec> v;                        // [T][D_v]
  std::vector<std::vector<int>> x_target;    // [T]; bins of frame i+1, or empty
  std::vector<std::vector<uint8_t>> labels;  // [T][N]
  std::vector<uint8_t> label_mask;           // [T]
  std::vector<uint8_t> valid;                // [T]; padded steps are 0
  bool reset = false;    // zero the slot state before this window
  int track_ref = -1;

  int steps() const { return static_cast<int>(x.size()); }
};

struct LossReport {
  double c_y = 0.0;
  double c_x = 0.0;
  double c = 0.0;  // lambda*c_y + (1-lambda)*c_x
  long labeled_frames = 0;
  long motion_frames = 0;
};

// Sums losses over the window's valid steps; see LossReport for the weighting.
LossReport compute_loss(const ModelConfig& config,
                        std::span<const StepOutput> outputs, const Window& window);

// Full backprop through the window (gradient truncation only at the window
// boundary). Adds loss_scale * dC/dtheta into every Parameter's grad.
void backward_window(ModelParams& params, const Window& window,
                     std::span<const StepCache> caches,
                     std::span<const StepOutput> outputs, double loss_scale);

}  // namespace besim
