#pragma once

#include <span>

#include "besim/data.hpp"
#include "besim/metrics.hpp"
#include "besim/model.hpp"

namespace besim {

// Per-frame class scores from a fresh forward pass: y_hat for MULTITASK,
// softmax over the first N top-level units for MULTICLASS.
std::vector<Vec> class_scores(const ModelParams& model, const AgentTrack& track);

// Motion distributions emitted at frames 0..T-2 (each predicting the next
// frame), aligned with the loglik convention.
std::vector<std::vector<Vec>> model_motion_distributions(const ModelParams& model,
                                                         const AgentTrack& track);

double model_track_loglik(const ModelParams& model, const AgentTrack& track,
                          const BinSpec& bins);

// Full pipeline per class: smooth scores (window from the truth's mean bout
// duration), threshold at `threshold` (MULTITASK) or take the smoothed argmax
// (MULTICLASS), extract bouts per track, greedy-match, pool counts.
F1Report evaluate_classification(const ModelParams& model,
                                 std::span<const TrialData> trials,
                                 double threshold = 0.5);

}  // namespace besim
