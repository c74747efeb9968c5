#pragma once

#include <vector>

#include "besim/model.hpp"

namespace besim {

// One optimizer step's worth of windows; slot k continues slot k of the
// previous batch unless its window carries a reset marker.
struct Batch {
  std::vector<Window> windows;
};

struct TrainSettings {
  AdamSettings adam;
  double clip_norm = 5.0;
};

struct EpochStats {
  double c = 0.0;
  double c_y = 0.0;
  double c_x = 0.0;
  long labeled_frames = 0;
  long motion_frames = 0;
  long windows = 0;

  double mean_c() const { return windows ? c / double(windows) : 0.0; }
};

// Per batch: forward all slots, sum losses, full-window BPTT (loss scaled by
// 1/slots), global-norm clip, one Adam step. Hidden states persist per slot
// across batches; window.reset zeroes a slot first.
EpochStats train_epoch(ModelParams& params, const std::vector<Batch>& batches,
                       const TrainSettings& settings);

}  // namespace besim
