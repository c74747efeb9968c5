#pragma once

#include <span>
#include <string>
#include <vector>

#include "besim/data.hpp"

namespace besim {

// Centered flat filter of width w = max(1, round(0.1 * mean_bout_duration)),
// renormalized where it overhangs the edges. Even widths lean one frame right.
Vec smooth_scores(const Vec& scores, double mean_bout_duration);

// Maximal runs of scores >= threshold, threshold in (0, 1).
std::vector<Bout> extract_bouts(const Vec& scores, double threshold,
                                int cls = 0);

struct BoutMatch {
  int pred = -1;
  int truth = -1;
  double iou = 0.0;
};

// Greedy one-to-one matching by descending intersection-over-union (> 0 only);
// ties prefer the earlier ground-truth start, then the earlier predicted
// start. Matches are reported in the order taken.
std::vector<BoutMatch> match_bouts(std::span<const Bout> pred,
                                   std::span<const Bout> truth);

double f_star(double f1_frame, double f1_bout);  // harmonic mean, 0 at 0

struct ClassF1 {
  double f1_frame = 0.0, f1_bout = 0.0, f_star = 0.0;
  long truth_frames = 0, truth_bouts = 0;
};

struct F1Report {
  std::vector<ClassF1> per_class;
  ClassF1 class_mean;  // unweighted average over classes
  ClassF1 weighted;    // frame F1 weighted by truth frames, bout F1 by truth bouts
};

ClassF1 f1_scores(std::span<const uint8_t> pred_frames,
                  std::span<const uint8_t> truth_frames,
                  std::span<const Bout> pred_bouts,
                  std::span<const Bout> truth_bouts);

F1Report aggregate_f1(std::vector<ClassF1> per_class);

// Sum over steps and dimensions of log probability on the true bin, each
// probability clamped at 1e-6. x_hat[i][d] is a distribution over bins.
double motion_loglik(std::span<const std::vector<Vec>> x_hat,
                     std::span<const std::vector<int>> true_bins);

enum class PolicyKind { UNIFORM, PRIOR, CONSTANT, SMOOTH_CONSTANT };
std::string to_string(PolicyKind k);
PolicyKind policy_from_string(const std::string& s);

using TrackBins = std::vector<std::vector<int>>;  // per frame, per dim

TrackBins encode_track(const BinSpec& spec, std::span<const Vec> x);

struct BaselinePolicy {
  PolicyKind kind = PolicyKind::UNIFORM;
  std::vector<int> bins_per_dim;
  std::vector<Vec> prior;  // per dim, PRIOR only
  double sigma = 1.0;      // SMOOTH_CONSTANT only

  // Distribution over the next frame's bins given the previous frame's.
  std::vector<Vec> predict(const std::vector<int>& prev_bins) const;
};

// PRIOR needs training tracks; SMOOTH_CONSTANT picks sigma from
// {0.5, 1, 2, 4, 8} by validation log-likelihood.
BaselinePolicy fit_baseline(PolicyKind kind,
                            const std::vector<int>& bins_per_dim,
                            std::span<const TrackBins> train,
                            std::span<const TrackBins> validation = {});

// Sum over the track of per-step loglik: step i predicts frame i+1.
double policy_loglik(const BaselinePolicy& policy, const TrackBins& track);

}  // namespace besim
