#include "besim/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "besim/errors.hpp"

namespace besim {

namespace {
constexpr double kProbFloor = 1e-6;

double clamped_log(double p) { return std::log(std::max(p, kProbFloor)); }

double iou(const Bout& a, const Bout& b) {
  const long inter = std::min(a.end, b.end) - std::max(a.start, b.start);
  if (inter <= 0) return 0.0;
  const long uni = (a.end - a.start) + (b.end - b.start) - inter;
  return static_cast<double>(inter) / static_cast<double>(uni);
}

double f1(double precision, double recall) {
  return precision + recall > 0.0
             ? 2.0 * precision * recall / (precision + recall)
             : 0.0;
}
}  // namespace

Vec smooth_scores(const Vec& scores, double mean_bout_duration) {
  require(mean_bout_duration > 0, "smooth_scores: duration must be positive");
  const int w = std::max(1, static_cast<int>(std::lround(0.1 * mean_bout_duration)));
  if (w == 1) return scores;
  const long t = static_cast<long>(scores.size());
  Vec out(t);
  for (long i = 0; i < t; ++i) {
    const long lo = std::max(i - (w - 1) / 2, 0L);
    const long hi = std::min(i + w / 2, t - 1);
    double sum = 0.0;
    for (long j = lo; j <= hi; ++j) sum += scores[j];
    out[i] = sum / static_cast<double>(hi - lo + 1);
  }
  return out;
}

std::vector<Bout> extract_bouts(const Vec& scores, double threshold, int cls) {
  require(threshold > 0.0 && threshold < 1.0,
          "extract_bouts: threshold must be in (0, 1)");
  std::vector<uint8_t> on(scores.size());
  for (size_t i = 0; i < scores.size(); ++i) on[i] = scores[i] >= threshold;
  return frames_to_bouts(on, cls);
}

std::vector<BoutMatch> match_bouts(std::span<const Bout> pred,
                                   std::span<const Bout> truth) {
  std::vector<BoutMatch> candidates;
  for (size_t p = 0; p < pred.size(); ++p)
    for (size_t t = 0; t < truth.size(); ++t) {
      const double v = iou(pred[p], truth[t]);
      if (v > 0.0)
        candidates.push_back(
            {static_cast<int>(p), static_cast<int>(t), v});
    }
  std::sort(candidates.begin(), candidates.end(),
            [&](const BoutMatch& a, const BoutMatch& b) {
              if (a.iou != b.iou) return a.iou > b.iou;
              if (truth[a.truth].start != truth[b.truth].start)
                return truth[a.truth].start < truth[b.truth].start;
              if (pred[a.pred].start != pred[b.pred].start)
                return pred[a.pred].start < pred[b.pred].start;
              if (a.truth != b.truth) return a.truth < b.truth;
              return a.pred < b.pred;
            });
  std::vector<uint8_t> pred_used(pred.size(), 0), truth_used(truth.size(), 0);
  std::vector<BoutMatch> out;
  for (const BoutMatch& c : candidates) {
    if (pred_used[c.pred] || truth_used[c.truth]) continue;
    pred_used[c.pred] = 1;
    truth_used[c.truth] = 1;
    out.push_back(c);
  }
  return out;
}

double f_star(double f1_frame, double f1_bout) { return f1(f1_frame, f1_bout); }

ClassF1 f1_scores(std::span<const uint8_t> pred_frames,
                  std::span<const uint8_t> truth_frames,
                  std::span<const Bout> pred_bouts,
                  std::span<const Bout> truth_bouts) {
  require(pred_frames.size() == truth_frames.size(),
          "f1_scores: frame counts differ");
  long tp = 0, pred_pos = 0, truth_pos = 0;
  for (size_t i = 0; i < pred_frames.size(); ++i) {
    pred_pos += pred_frames[i] ? 1 : 0;
    truth_pos += truth_frames[i] ? 1 : 0;
    tp += (pred_frames[i] && truth_frames[i]) ? 1 : 0;
  }
  const double fp = pred_pos ? static_cast<double>(tp) / pred_pos : 0.0;
  const double fr = truth_pos ? static_cast<double>(tp) / truth_pos : 0.0;

  const long matched = static_cast<long>(match_bouts(pred_bouts, truth_bouts).size());
  const double bp =
      pred_bouts.empty() ? 0.0 : static_cast<double>(matched) / pred_bouts.size();
  const double br = truth_bouts.empty()
                        ? 0.0
                        : static_cast<double>(matched) / truth_bouts.size();

  ClassF1 out;
  out.f1_frame = f1(fp, fr);
  out.f1_bout = f1(bp, br);
  out.f_star = f_star(out.f1_frame, out.f1_bout);
  out.truth_frames = truth_pos;
  out.truth_bouts = static_cast<long>(truth_bouts.size());
  return out;
}

F1Report aggregate_f1(std::vector<ClassF1> per_class) {
  F1Report report;
  report.per_class = std::move(per_class);
  const size_t n = report.per_class.size();
  if (n == 0) return report;

  double frame_w = 0, bout_w = 0;
  for (const ClassF1& c : report.per_class) {
    report.class_mean.f1_frame += c.f1_frame / static_cast<double>(n);
    report.class_mean.f1_bout += c.f1_bout / static_cast<double>(n);
    report.class_mean.truth_frames += c.truth_frames;
    report.class_mean.truth_bouts += c.truth_bouts;
    frame_w += c.f1_frame * static_cast<double>(c.truth_frames);
    bout_w += c.f1_bout * static_cast<double>(c.truth_bouts);
  }
  report.class_mean.f_star =
      f_star(report.class_mean.f1_frame, report.class_mean.f1_bout);
  report.weighted.truth_frames = report.class_mean.truth_frames;
  report.weighted.truth_bouts = report.class_mean.truth_bouts;
  if (report.weighted.truth_frames)
    report.weighted.f1_frame = frame_w / report.weighted.truth_frames;
  if (report.weighted.truth_bouts)
    report.weighted.f1_bout = bout_w / report.weighted.truth_bouts;
  report.weighted.f_star =
      f_star(report.weighted.f1_frame, report.weighted.f1_bout);
  return report;
}

double motion_loglik(std::span<const std::vector<Vec>> x_hat,
                     std::span<const std::vector<int>> true_bins) {
  require(x_hat.size() == true_bins.size(), "motion_loglik: step counts differ");
  double total = 0.0;
  for (size_t i = 0; i < x_hat.size(); ++i) {
    require(x_hat[i].size() == true_bins[i].size(),
            "motion_loglik: dimension counts differ");
    for (size_t d = 0; d < x_hat[i].size(); ++d) {
      const int bin = true_bins[i][d];
      require(bin >= 0 && bin < static_cast<int>(x_hat[i][d].size()),
              "motion_loglik: bin out of range");
      total += clamped_log(x_hat[i][d][bin]);
    }
  }
  return total;
}

std::string to_string(PolicyKind k) {
  switch (k) {
    case PolicyKind::UNIFORM: return "uniform";
    case PolicyKind::PRIOR: return "prior";
    case PolicyKind::CONSTANT: return "constant";
    case PolicyKind::SMOOTH_CONSTANT: return "smooth_constant";
  }
  return "?";
}

PolicyKind policy_from_string(const std::string& s) {
  if (s == "uniform") return PolicyKind::UNIFORM;
  if (s == "prior") return PolicyKind::PRIOR;
  if (s == "constant") return PolicyKind::CONSTANT;
  if (s == "smooth_constant") return PolicyKind::SMOOTH_CONSTANT;
  throw data_error("unknown baseline policy: " + s);
}

TrackBins encode_track(const BinSpec& spec, std::span<const Vec> x) {
  TrackBins out;
  out.reserve(x.size());
  for (const Vec& row : x) out.push_back(encode_motion(spec, row));
  return out;
}

std::vector<Vec> BaselinePolicy::predict(const std::vector<int>& prev_bins) const {
  const int dims = static_cast<int>(bins_per_dim.size());
  require(static_cast<int>(prev_bins.size()) == dims,
          "baseline: dimension mismatch");
  std::vector<Vec> out(dims);
  for (int d = 0; d < dims; ++d) {
    const int n = bins_per_dim[d];
    switch (kind) {
      case PolicyKind::UNIFORM:
        out[d].assign(n, 1.0 / n);
        break;
      case PolicyKind::PRIOR:
        out[d] = prior[d];
        break;
      case PolicyKind::CONSTANT:
        out[d].assign(n, 0.0);
        out[d][prev_bins[d]] = 1.0;
        break;
      case PolicyKind::SMOOTH_CONSTANT: {
        out[d].resize(n);
        double sum = 0.0;
        for (int j = 0; j < n; ++j) {
          const double z = (j - prev_bins[d]) / sigma;
          out[d][j] = std::exp(-0.5 * z * z);
          sum += out[d][j];
        }
        for (double& p : out[d]) p /= sum;
        break;
      }
    }
  }
  return out;
}

double policy_loglik(const BaselinePolicy& policy, const TrackBins& track) {
  double total = 0.0;
  for (size_t i = 0; i + 1 < track.size(); ++i) {
    const std::vector<Vec> dist = policy.predict(track[i]);
    for (size_t d = 0; d < dist.size(); ++d)
      total += clamped_log(dist[d][track[i + 1][d]]);
  }
  return total;
}

BaselinePolicy fit_baseline(PolicyKind kind,
                            const std::vector<int>& bins_per_dim,
                            std::span<const TrackBins> train,
                            std::span<const TrackBins> validation) {
  BaselinePolicy policy;
  policy.kind = kind;
  policy.bins_per_dim = bins_per_dim;
  if (kind == PolicyKind::PRIOR) {
    const int dims = static_cast<int>(bins_per_dim.size());
    policy.prior.resize(dims);
    for (int d = 0; d < dims; ++d) policy.prior[d].assign(bins_per_dim[d], 0.0);
    double total = 0.0;
    for (const TrackBins& t : train)
      for (const std::vector<int>& frame : t) {
        for (int d = 0; d < dims; ++d) policy.prior[d][frame[d]] += 1.0;
        total += 1.0;
      }
    require_data(total > 0, "prior baseline: no training frames");
    for (Vec& h : policy.prior)
      for (double& c : h) c /= total;
  }
  if (kind == PolicyKind::SMOOTH_CONSTANT) {
    require_data(!validation.empty(),
                 "smooth_constant baseline: validation tracks required");
    const double grid[] = {0.5, 1.0, 2.0, 4.0, 8.0};
    double pick = grid[0];
    double best = -std::numeric_limits<double>::infinity();
    for (double sigma : grid) {
      policy.sigma = sigma;
      double ll = 0.0;
      for (const TrackBins& t : validation) ll += policy_loglik(policy, t);
      if (ll > best) {
        best = ll;
        pick = sigma;
      }
    }
    policy.sigma = pick;
  }
  return policy;
}

}  // namespace besim
