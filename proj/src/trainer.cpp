#include "besim/trainer.hpp"

#include <cmath>
#include <string>

#include "besim/errors.hpp"

namespace besim {

EpochStats train_epoch(ModelParams& params, const std::vector<Batch>& batches,
                       const TrainSettings& settings) {
  EpochStats stats;
  std::vector<Parameter*> all = params.all();
  std::vector<ModelState> slot_state;

  std::vector<StepCache> caches;
  std::vector<StepOutput> outputs;

  for (size_t b = 0; b < batches.size(); ++b) {
    const Batch& batch = batches[b];
    if (batch.windows.empty()) continue;
    const double loss_scale = 1.0 / double(batch.windows.size());

    for (size_t slot = 0; slot < batch.windows.size(); ++slot) {
      const Window& w = batch.windows[slot];
      if (slot >= slot_state.size()) slot_state.resize(slot + 1);
      if (w.reset || slot_state[slot].h.empty())
        slot_state[slot] = zero_state(params.config);

      const int steps = w.steps();
      if (steps == 0) continue;  // padding window of an exhausted slot
      caches.assign(steps, StepCache{});
      outputs.assign(steps, StepOutput{});
      ModelState st = slot_state[slot];
      for (int i = 0; i < steps; ++i) {
        outputs[i] = forward_step(params, w.x[i], w.v[i], st, &caches[i]);
        st = outputs[i].state;
      }
      slot_state[slot] = std::move(st);

      LossReport loss = compute_loss(params.config, outputs, w);
      if (!std::isfinite(loss.c))
        throw numeric_error("non-finite loss in batch " + std::to_string(b));
      stats.c += loss.c;
      stats.c_y += loss.c_y;
      stats.c_x += loss.c_x;
      stats.labeled_frames += loss.labeled_frames;
      stats.motion_frames += loss.motion_frames;
      stats.windows++;

      backward_window(params, w, caches, outputs, loss_scale);
    }

    clip_global_norm(all, settings.clip_norm);
    for (Parameter* p : all) adam_update(*p, settings.adam);
  }
  return stats;
}

}  // namespace besim
