#include "besim/model.hpp"

#include <algorithm>
#include <cmath>

#include "besim/errors.hpp"
#include "besim/losses.hpp"
#include "besim/matrix.hpp"

namespace besim {

namespace {

Vec concat(const Vec& a, const Vec& b) {
  Vec out;
  out.reserve(a.size() + b.size());
  out.insert(out.end(), a.begin(), a.end());
  out.insert(out.end(), b.begin(), b.end());
  return out;
}

// Label readout sits at level L in every variant (the top of the
// discriminative half).
int label_level(const ModelConfig& cfg) { return cfg.levels - 1; }

// Source of the motion logits: bottom generative state for BESNET, top of
// the stack for STACKED_RNN.
const Vec& logit_source(const ModelConfig& cfg, const ModelState& st) {
  return cfg.variant == Variant::BESNET ? st.hhat[0] : st.h.back();
}

}  // namespace

std::string to_string(Variant v) {
  switch (v) {
    case Variant::BESNET: return "besnet";
    case Variant::BENET: return "benet";
    case Variant::STACKED_RNN: return "stacked_rnn";
  }
  throw contract_error("bad variant");
}

std::string to_string(LabelMode m) {
  return m == LabelMode::MULTITASK ? "multitask" : "multiclass";
}

Variant variant_from_string(const std::string& s) {
  if (s == "besnet") return Variant::BESNET;
  if (s == "benet") return Variant::BENET;
  if (s == "stacked_rnn") return Variant::STACKED_RNN;
  throw data_error("unknown variant '" + s + "'");
}

LabelMode label_mode_from_string(const std::string& s) {
  if (s == "multitask") return LabelMode::MULTITASK;
  if (s == "multiclass") return LabelMode::MULTICLASS;
  throw data_error("unknown label mode '" + s + "'");
}

void ModelConfig::validate() const {
  require(levels >= 1, "levels must be >= 1");
  require(static_cast<int>(units.size()) == levels, "units list length != levels");
  for (int u : units) require(u >= 1, "level width must be >= 1");
  require(actions >= 0 && actions <= units.back(),
          "actions must fit in the top level");
  require(motion_dims >= 1, "motion_dims must be >= 1");
  require(sensory_dims >= 0, "sensory_dims must be >= 0");
  require(lambda >= 0.0 && lambda <= 1.0, "lambda must be in [0,1]");
  if (variant != Variant::BENET) {
    require(static_cast<int>(bins_per_dim.size()) == motion_dims,
            "bins_per_dim length != motion_dims");
    for (int n : bins_per_dim) require(n >= 2, "bins per dimension must be >= 2");
  }
}

int ModelConfig::logit_count() const {
  int total = 0;
  for (int n : bins_per_dim) total += n;
  return total;
}

int ModelConfig::stack_levels() const {
  return variant == Variant::STACKED_RNN ? 2 * levels : levels;
}

int ModelConfig::stack_units(int level) const {
  return level < levels ? units[level] : units[2 * levels - 1 - level];
}

ModelParams ModelParams::build(const ModelConfig& config, Rng& rng) {
  config.validate();
  ModelParams p;
  p.config = config;

  const int input_dims = config.motion_dims + config.sensory_dims;
  const int stack = config.stack_levels();
  const std::string stack_name =
      config.variant == Variant::STACKED_RNN ? "stack" : "disc";
  p.disc.reserve(stack);
  for (int l = 0; l < stack; ++l) {
    int in = l == 0 ? input_dims : config.stack_units(l - 1);
    p.disc.emplace_back(stack_name + std::to_string(l), in, config.stack_units(l));
  }

  if (config.variant == Variant::BESNET) {
    p.gen.reserve(config.levels);
    for (int l = 0; l < config.levels; ++l) {
      int in = l == config.levels - 1
                   ? config.units[l]                        // top: h^L
                   : config.units[l + 1] + config.units[l]; // [hh^{l+1}, h^l]
      p.gen.emplace_back("gen" + std::to_string(l), in, config.units[l]);
    }
  }

  if (config.variant != Variant::BENET) {
    int src = config.stack_units(stack - 1);
    if (config.variant == Variant::BESNET) src = config.units[0];
    p.w_out = Parameter("out.w", config.logit_count(), src);
    p.b_out = Parameter("out.b", config.logit_count(), 1);
  }

  for (auto& cell : p.disc) cell.init(rng);
  for (auto& cell : p.gen) cell.init(rng);
  if (config.variant != Variant::BENET)
    init_uniform(p.w_out, p.w_out.value.cols, rng);
  return p;
}

std::vector<Parameter*> ModelParams::all() {
  std::vector<Parameter*> out;
  for (auto& cell : disc)
    for (Parameter* q : cell.params()) out.push_back(q);
  for (auto& cell : gen)
    for (Parameter* q : cell.params()) out.push_back(q);
  if (config.variant != Variant::BENET) {
    out.push_back(&w_out);
    out.push_back(&b_out);
  }
  return out;
}

ModelState zero_state(const ModelConfig& config) {
  ModelState st;
  const int stack = config.stack_levels();
  st.h.resize(stack);
  for (int l = 0; l < stack; ++l) st.h[l].assign(config.stack_units(l), 0.0);
  if (config.variant == Variant::BESNET) {
    st.hhat.resize(config.levels);
    for (int l = 0; l < config.levels; ++l) st.hhat[l].assign(config.units[l], 0.0);
  }
  return st;
}

StepOutput forward_step(const ModelParams& params, const Vec& x, const Vec& v,
                        const ModelState& prev, StepCache* cache,
                        std::span<const UnitOverride> overrides) {
  const ModelConfig& cfg = params.config;
  require(static_cast<int>(x.size()) == cfg.motion_dims, "x dimension mismatch");
  require(static_cast<int>(v.size()) == cfg.sensory_dims, "v dimension mismatch");
  const int stack = cfg.stack_levels();
  require(static_cast<int>(prev.h.size()) == stack, "state level mismatch");

  StepOutput out;
  out.state.h.resize(stack);
  if (cache) {
    cache->disc.resize(stack);
    cache->gen.resize(params.gen.size());
  }

  Vec input = concat(x, v);
  for (int l = 0; l < stack; ++l) {
    const Vec& in = l == 0 ? input : out.state.h[l - 1];
    out.state.h[l] = gru_forward(params.disc[l], in, prev.h[l],
                                 cache ? &cache->disc[l] : nullptr);
  }

  for (const UnitOverride& o : overrides) {
    require(o.level >= 0 && o.level < stack, "override level out of range");
    require(o.unit >= 0 && o.unit < cfg.stack_units(o.level),
            "override unit out of range");
    require(o.value >= -1.0 && o.value <= 1.0, "override value outside [-1,1]");
    out.state.h[o.level][o.unit] = o.value;
  }

  const Vec& hy = out.state.h[label_level(cfg)];
  out.y_hat.resize(cfg.actions);
  for (int j = 0; j < cfg.actions; ++j) out.y_hat[j] = (hy[j] + 1.0) * 0.5;

  if (cfg.variant == Variant::BESNET) {
    const int L = cfg.levels;
    require(static_cast<int>(prev.hhat.size()) == L, "generative state mismatch");
    out.state.hhat.resize(L);
    out.state.hhat[L - 1] =
        gru_forward(params.gen[L - 1], out.state.h[L - 1], prev.hhat[L - 1],
                    cache ? &cache->gen[L - 1] : nullptr);
    for (int l = L - 2; l >= 0; --l) {
      Vec gin = concat(out.state.hhat[l + 1], out.state.h[l]);
      out.state.hhat[l] = gru_forward(params.gen[l], gin, prev.hhat[l],
                                      cache ? &cache->gen[l] : nullptr);
    }
  }

  if (params.has_motion_output()) {
    const Vec& src = logit_source(cfg, out.state);
    Vec logits(cfg.logit_count());
    matvec(params.w_out.value, src, logits);
    for (size_t k = 0; k < logits.size(); ++k)
      logits[k] += params.b_out.value.data[k];

    out.x_hat.resize(cfg.motion_dims);
    int off = 0;
    for (int d = 0; d < cfg.motion_dims; ++d) {
      int n = cfg.bins_per_dim[d];
      softmax_inplace(logits.data() + off, n);
      out.x_hat[d].assign(logits.begin() + off, logits.begin() + off + n);
      off += n;
    }
  }
  return out;
}

LossReport compute_loss(const ModelConfig& cfg,
                        std::span<const StepOutput> outputs, const Window& window) {
  const int steps = window.steps();
  require(static_cast<int>(outputs.size()) == steps, "outputs/window mismatch");
  LossReport report;

  for (int i = 0; i < steps; ++i) {
    if (!window.valid[i]) continue;

    if (cfg.variant != Variant::BENET && !window.x_target[i].empty()) {
      const auto& target = window.x_target[i];
      require(static_cast<int>(target.size()) == cfg.motion_dims,
              "x_target dimension mismatch");
      for (int d = 0; d < cfg.motion_dims; ++d) {
        int t = target[d];
        require(t >= 0 && t < cfg.bins_per_dim[d], "x_target bin out of range");
        double p = std::max(outputs[i].x_hat[d][t], 1e-12);
        report.c_x -= std::log(p);
      }
      report.motion_frames++;
    }

    if (window.label_mask[i]) {
      if (static_cast<int>(window.labels[i].size()) != cfg.actions)
        throw data_error("label mask set on a frame without labels");
      if (cfg.label_mode == LabelMode::MULTITASK) {
        for (int j = 0; j < cfg.actions; ++j)
          report.c_y += binary_cross_entropy(outputs[i].y_hat[j],
                                             window.labels[i][j] ? 1.0 : 0.0,
                                             nullptr);
      } else {
        int target = -1;
        for (int j = 0; j < cfg.actions; ++j)
          if (window.labels[i][j]) {
            if (target >= 0) throw data_error("multiclass frame with two labels");
            target = j;
          }
        if (target < 0) throw data_error("multiclass frame with no label");
        const Vec& hy = outputs[i].state.h[label_level(cfg)];
        Vec logits(hy.begin(), hy.begin() + cfg.actions);
        report.c_y += softmax_cross_entropy(logits, target).loss;
      }
      report.labeled_frames++;
    }
  }

  report.c = cfg.lambda * report.c_y + (1.0 - cfg.lambda) * report.c_x;
  return report;
}

void backward_window(ModelParams& params, const Window& window,
                     std::span<const StepCache> caches,
                     std::span<const StepOutput> outputs, double loss_scale) {
  const ModelConfig& cfg = params.config;
  const int steps = window.steps();
  require(static_cast<int>(caches.size()) == steps, "cache/window mismatch");
  require(static_cast<int>(outputs.size()) == steps, "outputs/window mismatch");
  const int stack = cfg.stack_levels();
  const int L = cfg.levels;
  const int ylev = label_level(cfg);
  const bool besnet = cfg.variant == Variant::BESNET;

  // Gradients flowing into each level's new state from future steps.
  std::vector<Vec> dh_carry(stack), dhhat_carry(besnet ? L : 0);
  for (int l = 0; l < stack; ++l) dh_carry[l].assign(cfg.stack_units(l), 0.0);
  for (int l = 0; l < (besnet ? L : 0); ++l)
    dhhat_carry[l].assign(cfg.units[l], 0.0);

  Vec dinput, dstate;
  for (int i = steps - 1; i >= 0; --i) {
    std::vector<Vec> dh = std::move(dh_carry);
    std::vector<Vec> dhhat = std::move(dhhat_carry);

    if (window.valid[i]) {
      if (window.label_mask[i]) {
        require(static_cast<int>(window.labels[i].size()) == cfg.actions,
                "label mask set on a frame without labels");
        const Vec& hy = outputs[i].state.h[ylev];
        if (cfg.label_mode == LabelMode::MULTITASK) {
          for (int j = 0; j < cfg.actions; ++j) {
            double d_dp = 0.0;
            binary_cross_entropy(outputs[i].y_hat[j],
                                 window.labels[i][j] ? 1.0 : 0.0, &d_dp);
            dh[ylev][j] += loss_scale * cfg.lambda * 0.5 * d_dp;
          }
        } else {
          int target = 0;
          for (int j = 0; j < cfg.actions; ++j)
            if (window.labels[i][j]) target = j;
          Vec logits(hy.begin(), hy.begin() + cfg.actions);
          auto ce = softmax_cross_entropy(logits, target);
          for (int j = 0; j < cfg.actions; ++j)
            dh[ylev][j] += loss_scale * cfg.lambda * ce.dlogits[j];
        }
      }

      if (cfg.variant != Variant::BENET && !window.x_target[i].empty()) {
        const double s = loss_scale * (1.0 - cfg.lambda);
        Vec dlogits(cfg.logit_count(), 0.0);
        int off = 0;
        for (int d = 0; d < cfg.motion_dims; ++d) {
          const int n = cfg.bins_per_dim[d];
          const Vec& probs = outputs[i].x_hat[d];
          const int t = window.x_target[i][d];
          for (int k = 0; k < n; ++k)
            dlogits[off + k] = s * (probs[k] - (k == t ? 1.0 : 0.0));
          off += n;
        }
        const Vec& src = logit_source(cfg, outputs[i].state);
        outer_add(params.w_out.grad, dlogits, src);
        for (size_t k = 0; k < dlogits.size(); ++k)
          params.b_out.grad.data[k] += dlogits[k];
        Vec& dsrc = besnet ? dhhat[0] : dh[stack - 1];
        matvec_t_add(params.w_out.value, dlogits, dsrc);
      }
    }

    if (besnet) {
      // Bottom-up: cell l feeds gradient into hh^{l+1} before cell l+1 runs.
      for (int l = 0; l < L; ++l) {
        gru_backward(params.gen[l], caches[i].gen[l], dhhat[l], dinput, dstate);
        if (l < L - 1) {
          const int up = cfg.units[l + 1];
          for (int k = 0; k < up; ++k) dhhat[l + 1][k] += dinput[k];
          for (int k = 0; k < cfg.units[l]; ++k) dh[l][k] += dinput[up + k];
        } else {
          for (int k = 0; k < cfg.units[l]; ++k) dh[l][k] += dinput[k];
        }
        dhhat_carry.push_back(std::move(dstate));
        dstate.clear();
      }
    }

    // Top-down through the discriminative stack.
    dh_carry.resize(stack);
    for (int l = stack - 1; l >= 0; --l) {
      gru_backward(params.disc[l], caches[i].disc[l], dh[l], dinput, dstate);
      dh_carry[l] = std::move(dstate);
      dstate.clear();
      if (l > 0)
        for (int k = 0; k < cfg.stack_units(l - 1); ++k) dh[l - 1][k] += dinput[k];
    }
  }
}

}  // namespace besim
