#include "besim/eval.hpp"

#include <cmath>

#include "besim/errors.hpp"

namespace besim {

std::vector<Vec> class_scores(const ModelParams& model, const AgentTrack& track) {
  const int n = model.config.actions;
  std::vector<Vec> out;
  out.reserve(track.frames());
  ModelState state = zero_state(model.config);
  for (int i = 0; i < track.frames(); ++i) {
    const StepOutput so = forward_step(model, track.x[i], track.v[i], state);
    state = so.state;
    if (model.config.label_mode == LabelMode::MULTITASK) {
      out.push_back(so.y_hat);
    } else {
      const Vec& h = state.h[model.config.levels - 1];
      Vec p(n);
      double mx = -1e300;
      for (int c = 0; c < n; ++c) mx = std::max(mx, h[c]);
      double sum = 0.0;
      for (int c = 0; c < n; ++c) {
        p[c] = std::exp(h[c] - mx);
        sum += p[c];
      }
      for (double& v : p) v /= sum;
      out.push_back(std::move(p));
    }
  }
  return out;
}

std::vector<std::vector<Vec>> model_motion_distributions(const ModelParams& model,
                                                         const AgentTrack& track) {
  require(model.has_motion_output(), "loglik: model has no motion output");
  std::vector<std::vector<Vec>> out;
  if (track.frames() < 2) return out;
  out.reserve(track.frames() - 1);
  ModelState state = zero_state(model.config);
  for (int i = 0; i + 1 < track.frames(); ++i) {
    StepOutput so = forward_step(model, track.x[i], track.v[i], state);
    state = so.state;
    out.push_back(std::move(so.x_hat));
  }
  return out;
}

double model_track_loglik(const ModelParams& model, const AgentTrack& track,
                          const BinSpec& bins) {
  const std::vector<std::vector<Vec>> x_hat =
      model_motion_distributions(model, track);
  std::vector<std::vector<int>> targets;
  targets.reserve(x_hat.size());
  for (size_t i = 1; i < track.x.size(); ++i)
    targets.push_back(encode_motion(bins, track.x[i]));
  return motion_loglik(x_hat, targets);
}

F1Report evaluate_classification(const ModelParams& model,
                                 std::span<const TrialData> trials,
                                 double threshold) {
  const int n = model.config.actions;
  require(n > 0, "evaluate: model has no label units");

  struct TrackEval {
    std::vector<Vec> scores;             // per frame
    const AgentTrack* track = nullptr;
  };
  std::vector<TrackEval> tracks;
  for (const TrialData& trial : trials)
    for (const AgentTrack& agent : trial.agents)
      tracks.push_back({class_scores(model, agent), &agent});

  // Mean truth bout duration per class, pooled over all tracks.
  std::vector<double> mean_dur(n, 10.0);
  for (int c = 0; c < n; ++c) {
    long frames = 0, bouts = 0;
    for (const TrackEval& te : tracks) {
      std::vector<uint8_t> column(te.track->frames());
      for (int i = 0; i < te.track->frames(); ++i)
        column[i] = te.track->labels[i][c];
      for (const Bout& b : frames_to_bouts(column)) {
        frames += b.end - b.start;
        ++bouts;
      }
    }
    if (bouts) mean_dur[c] = static_cast<double>(frames) / bouts;
  }

  std::vector<ClassF1> per_class(n);
  std::vector<std::vector<Vec>> smoothed(tracks.size());
  for (size_t k = 0; k < tracks.size(); ++k) {
    smoothed[k].resize(n);
    for (int c = 0; c < n; ++c) {
      Vec raw(tracks[k].track->frames());
      for (int i = 0; i < tracks[k].track->frames(); ++i)
        raw[i] = tracks[k].scores[i][c];
      smoothed[k][c] = smooth_scores(raw, mean_dur[c]);
    }
  }

  for (int c = 0; c < n; ++c) {
    long tp = 0, pred_pos = 0, truth_pos = 0;
    long matched = 0, pred_bouts = 0, truth_bouts = 0;
    for (size_t k = 0; k < tracks.size(); ++k) {
      const AgentTrack& track = *tracks[k].track;
      const long t = track.frames();
      std::vector<uint8_t> pred(t), truth(t);
      for (long i = 0; i < t; ++i) {
        truth[i] = track.labels[i][c];
        if (model.config.label_mode == LabelMode::MULTITASK) {
          pred[i] = smoothed[k][c][i] >= threshold;
        } else {
          int best = 0;
          for (int c2 = 1; c2 < n; ++c2)
            if (smoothed[k][c2][i] > smoothed[k][best][i]) best = c2;
          pred[i] = best == c;
        }
        tp += pred[i] && truth[i];
        pred_pos += pred[i];
        truth_pos += truth[i];
      }
      const std::vector<Bout> pb = frames_to_bouts(pred, c);
      const std::vector<Bout> tb = frames_to_bouts(truth, c);
      matched += static_cast<long>(match_bouts(pb, tb).size());
      pred_bouts += static_cast<long>(pb.size());
      truth_bouts += static_cast<long>(tb.size());
    }
    const double fp = pred_pos ? double(tp) / pred_pos : 0.0;
    const double fr = truth_pos ? double(tp) / truth_pos : 0.0;
    const double bp = pred_bouts ? double(matched) / pred_bouts : 0.0;
    const double br = truth_bouts ? double(matched) / truth_bouts : 0.0;
    per_class[c].f1_frame = fp + fr > 0 ? 2 * fp * fr / (fp + fr) : 0.0;
    per_class[c].f1_bout = bp + br > 0 ? 2 * bp * br / (bp + br) : 0.0;
    per_class[c].f_star = f_star(per_class[c].f1_frame, per_class[c].f1_bout);
    per_class[c].truth_frames = truth_pos;
    per_class[c].truth_bouts = truth_bouts;
  }
  return aggregate_f1(std::move(per_class));
}

}  // namespace besim
