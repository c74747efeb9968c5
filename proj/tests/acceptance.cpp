// Acceptance gate: one line per criterion, nonzero exit if any fail.
// argv[1] is the besim CLI binary, used by the artifact-determinism check.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <sstream>
#include <string>
#include <vector>

#include "besim/data.hpp"
#include "besim/errors.hpp"
#include "besim/eval.hpp"
#include "besim/gradcheck.hpp"
#include "besim/metrics.hpp"
#include "besim/simulate.hpp"
#include "besim/synthfly.hpp"
#include "besim/trainer.hpp"

namespace fs = std::filesystem;
using namespace besim;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.6g", v);
  return buf;
}

// ---------------------------------------------------------------- shared

TrialData synth_trial(const std::string& id, int frames, uint64_t seed,
                      const SynthFlyParams& params) {
  const SynthTrack t = synthfly_generate(frames, seed, params);
  TrialData trial;
  trial.trial_id = id;
  AgentTrack a;
  a.agent_id = "00";
  a.x = t.x;
  a.v = t.v;
  for (const auto& l : t.labels) a.labels.push_back({l[0], l[1]});
  a.label_mask.assign(t.x.size(), 1);
  trial.agents.push_back(std::move(a));
  return trial;
}

BinSpec fit_trial_bins(std::span<const TrialData> trials, int n_bins) {
  const int d_x = static_cast<int>(trials[0].agents[0].x[0].size());
  std::vector<Vec> per_dim(d_x);
  for (const TrialData& trial : trials)
    for (const AgentTrack& agent : trial.agents)
      for (const Vec& x : agent.x)
        for (int d = 0; d < d_x; ++d) per_dim[d].push_back(x[d]);
  return fit_bins(per_dim, n_bins);
}

struct LoglikTable {
  double model = 0.0, uniform = 0.0, prior = 0.0, constant = 0.0, smooth = 0.0;
  long steps = 0;
};

LoglikTable loglik_table(const ModelParams& model, const BinSpec& bins,
                         std::span<const TrialData> train,
                         std::span<const TrialData> eval_trials) {
  const auto encode_all = [&](std::span<const TrialData> trials) {
    std::vector<TrackBins> out;
    for (const TrialData& trial : trials)
      for (const AgentTrack& agent : trial.agents)
        out.push_back(encode_track(bins, agent.x));
    return out;
  };
  const std::vector<TrackBins> train_bins = encode_all(train);
  const std::vector<TrackBins> eval_bins = encode_all(eval_trials);

  LoglikTable t;
  for (const TrackBins& tb : eval_bins) t.steps += static_cast<long>(tb.size()) - 1;
  for (const TrialData& trial : eval_trials)
    for (const AgentTrack& agent : trial.agents)
      t.model += model_track_loglik(model, agent, bins);
  const auto fit_eval = [&](PolicyKind kind) {
    const BaselinePolicy policy =
        fit_baseline(kind, bins.bins_per_dim(), train_bins, train_bins);
    double total = 0.0;
    for (const TrackBins& tb : eval_bins) total += policy_loglik(policy, tb);
    return total;
  };
  t.uniform = fit_eval(PolicyKind::UNIFORM);
  t.prior = fit_eval(PolicyKind::PRIOR);
  t.constant = fit_eval(PolicyKind::CONSTANT);
  t.smooth = fit_eval(PolicyKind::SMOOTH_CONSTANT);
  return t;
}

ModelParams train_model(const ModelConfig& cfg, std::span<const TrialData> trials,
                        const BinSpec& bins, int epochs, int t_window, int batch,
                        uint64_t seed, double time_budget_s, double* train_s) {
  Rng rng = make_rng(seed, 100);
  ModelParams model = ModelParams::build(cfg, rng);
  const std::vector<Batch> batches =
      make_batches(trials, bins, t_window, batch, seed);
  TrainSettings settings;
  const Clock::time_point t0 = Clock::now();
  for (int e = 0; e < epochs; ++e) {
    train_epoch(model, batches, settings);
    if (seconds_since(t0) > time_budget_s) break;
  }
  if (train_s) *train_s = seconds_since(t0);
  return model;
}

// ---------------------------------------------------------------- criteria

// L=2, 6 units/level, T=5, D_x=2, D_v=4, n=5, N=2; full loss, all variants.
Outcome criterion_gradients() {
  double worst = 0.0;
  std::string parts;
  for (Variant variant : {Variant::BESNET, Variant::BENET, Variant::STACKED_RNN}) {
    ModelConfig cfg;
    cfg.levels = 2;
    cfg.units = {6, 6};
    cfg.actions = 2;
    cfg.motion_dims = 2;
    cfg.sensory_dims = 4;
    cfg.bins_per_dim = {5, 5};
    cfg.variant = variant;
    if (variant == Variant::BENET) cfg.bins_per_dim.clear();
    Rng rng = make_rng(7);
    ModelParams params = ModelParams::build(cfg, rng);

    Window w;
    w.reset = true;
    Rng drng = make_rng(8);
    for (int i = 0; i < 5; ++i) {
      Vec x(cfg.motion_dims), v(cfg.sensory_dims);
      for (double& e : x) e = normal(drng, 0.0, 0.8);
      for (double& e : v) e = normal(drng, 0.0, 0.8);
      w.x.push_back(std::move(x));
      w.v.push_back(std::move(v));
      std::vector<int> target;
      if (i < 4)
        for (int d = 0; d < cfg.motion_dims; ++d)
          target.push_back(uniform_int(drng, 0, 4));
      w.x_target.push_back(std::move(target));
      std::vector<uint8_t> y(cfg.actions);
      for (auto& b : y) b = uniform01(drng) < 0.5;
      w.labels.push_back(std::move(y));
      w.label_mask.push_back(1);
      w.valid.push_back(1);
    }

    std::vector<Parameter*> all = params.all();
    std::vector<StepCache> caches;
    const auto loss_and_grad = [&]() {
      for (Parameter* p : all) p->zero_grad();
      caches.assign(w.steps(), StepCache{});
      std::vector<StepOutput> outs(w.steps());
      ModelState st = zero_state(cfg);
      for (int i = 0; i < w.steps(); ++i) {
        outs[i] = forward_step(params, w.x[i], w.v[i], st, &caches[i]);
        st = outs[i].state;
      }
      const LossReport r = compute_loss(cfg, outs, w);
      backward_window(params, w, caches, outs, 1.0);
      return r.c;
    };
    const double err = finite_diff_check(loss_and_grad, all, 1e-5, 25, 17);
    worst = std::max(worst, err);
    parts += " " + to_string(variant) + "=" + num(err);
  }
  return {worst < 1e-5, "max rel err" + parts + " (tol 1e-5, 64-bit)"};
}

Outcome criterion_analytic() {
  // Uniform policy on an arbitrary track: (T-1) * D * log(1/n).
  const int T = 10, D = 8, n = 21;
  BinSpec bins;
  for (int d = 0; d < D; ++d) {
    Vec edges;
    for (int b = 0; b <= n; ++b) edges.push_back(-1.0 + 2.0 * b / n);
    bins.edges.push_back(std::move(edges));
  }
  Rng rng = make_rng(33);
  std::vector<Vec> track;
  for (int i = 0; i < T; ++i) {
    Vec x(D);
    for (double& e : x) e = normal(rng, 0.0, 0.5);
    track.push_back(std::move(x));
  }
  const BaselinePolicy uniform = fit_baseline(PolicyKind::UNIFORM, bins.bins_per_dim(), {});
  const double got = policy_loglik(uniform, encode_track(bins, track));
  const double want = (T - 1) * D * std::log(1.0 / n);
  const double uniform_err = std::abs(got - want);

  // Perfect prediction: probability 1 on every true bin.
  const TrackBins true_bins = encode_track(bins, track);
  std::vector<std::vector<Vec>> x_hat;
  for (int i = 1; i < T; ++i) {
    std::vector<Vec> frame;
    for (int d = 0; d < D; ++d) {
      Vec p(n, 0.0);
      p[true_bins[i][d]] = 1.0;
      frame.push_back(std::move(p));
    }
    x_hat.push_back(std::move(frame));
  }
  std::vector<std::vector<int>> targets(true_bins.begin() + 1, true_bins.end());
  const double perfect = motion_loglik(x_hat, targets);

  const double fs = f_star(0.445, 0.585);
  const double fs_err = std::abs(fs - 0.5055);

  const bool pass = uniform_err < 1e-9 && perfect == 0.0 && fs_err < 5e-5;
  return {pass, "uniform err " + num(uniform_err) + " (tol 1e-9), perfect loglik " +
                    num(perfect) + ", f*(0.445,0.585)=" + num(fs) +
                    " err " + num(fs_err) + " (tol 5e-5)"};
}

std::vector<Bout> random_bouts(Rng& rng, int max_n) {
  std::vector<Bout> out;
  const int n = uniform_int(rng, 0, max_n);
  long pos = uniform_int(rng, 0, 30);
  for (int i = 0; i < n; ++i) {
    const long dur = uniform_int(rng, 1, 40);
    out.push_back({0, pos, pos + dur});
    pos += dur + uniform_int(rng, 2, 30);
  }
  return out;
}

// Classifier-like predictions: per truth bout dropped, jittered, or split,
// confined between adjacent gap midpoints so none straddles two truths.
std::vector<Bout> classifier_preds(Rng& rng, const std::vector<Bout>& truth) {
  std::vector<Bout> out;
  for (size_t i = 0; i < truth.size(); ++i) {
    const long lo = i == 0 ? 0 : (truth[i - 1].end + truth[i].start + 1) / 2;
    const long hi = i + 1 < truth.size()
                        ? (truth[i].end + truth[i + 1].start + 1) / 2
                        : truth[i].end + 20;
    const double roll = uniform01(rng);
    if (roll < 0.15) continue;
    long s = std::max(truth[i].start + uniform_int(rng, -3, 3), lo);
    long e = std::min(truth[i].end + uniform_int(rng, -3, 3), hi);
    if (e <= s) e = s + 1;
    if (e > hi) continue;
    if (roll < 0.75 || e - s < 4 || out.size() + 2 > 6) {
      out.push_back({0, s, e});
    } else {
      const long mid = s + (e - s) / 2;
      out.push_back({0, s, mid});
      out.push_back({0, mid + 1, e});
    }
    if (out.size() >= 6) break;
  }
  return out;
}

int brute_force_matches(const std::vector<Bout>& pred,
                        const std::vector<Bout>& truth) {
  std::vector<std::vector<char>> overlap(pred.size(),
                                         std::vector<char>(truth.size(), 0));
  for (size_t p = 0; p < pred.size(); ++p)
    for (size_t t = 0; t < truth.size(); ++t)
      overlap[p][t] = std::min(pred[p].end, truth[t].end) >
                      std::max(pred[p].start, truth[t].start);
  std::vector<char> used(truth.size(), 0);
  int best = 0;
  auto rec = [&](auto&& self, size_t p, int count) -> void {
    best = std::max(best, count);
    if (p == pred.size()) return;
    self(self, p + 1, count);
    for (size_t t = 0; t < truth.size(); ++t)
      if (!used[t] && overlap[p][t]) {
        used[t] = 1;
        self(self, p + 1, count + 1);
        used[t] = 0;
      }
  };
  rec(rec, 0, 0);
  return best;
}

Outcome criterion_matching() {
  Rng rng = make_rng(99);
  int mismatches = 0;
  for (int it = 0; it < 1000; ++it) {
    const std::vector<Bout> truth = random_bouts(rng, 6);
    const std::vector<Bout> pred = classifier_preds(rng, truth);
    const int greedy = static_cast<int>(match_bouts(pred, truth).size());
    const int best = brute_force_matches(pred, truth);
    if (greedy != best) ++mismatches;
  }
  return {mismatches == 0,
          std::to_string(1000 - mismatches) + "/1000 greedy counts equal the "
          "exhaustive optimum"};
}

struct Criterion4State {
  ModelParams model;
  BinSpec bins;
  std::vector<TrialData> eval_trials;
  bool trained = false;
};

Outcome criterion_synthfly(Criterion4State& st) {
  const SynthFlyParams params;
  std::vector<TrialData> train_trials;
  for (int k = 0; k < 5; ++k)
    train_trials.push_back(synth_trial("train_" + std::to_string(k), 50000, k, params));
  for (int k = 0; k < 2; ++k)
    st.eval_trials.push_back(synth_trial("eval_" + std::to_string(k), 10000, 100 + k, params));

  st.bins = fit_trial_bins(train_trials, 21);
  ModelConfig cfg;
  cfg.levels = 2;
  cfg.units = {64, 64};
  cfg.actions = 2;
  cfg.motion_dims = 8;
  cfg.sensory_dims = static_cast<int>(train_trials[0].agents[0].v[0].size());
  cfg.bins_per_dim = st.bins.bins_per_dim();
  cfg.validate();

  double train_s = 0.0;
  st.model = train_model(cfg, train_trials, st.bins, 16, 50, 20, 0, 25 * 60.0,
                         &train_s);
  st.trained = true;

  const LoglikTable t =
      loglik_table(st.model, st.bins, train_trials, st.eval_trials);
  const double per = 1.0 / t.steps;
  const double floor2 = std::max(t.constant, t.prior);
  const bool order = t.model > t.smooth && t.smooth > floor2 &&
                     floor2 > t.uniform;
  const bool in_budget = train_s <= 30 * 60.0;
  std::ostringstream d;
  d << "per-frame loglik: model " << num(t.model * per) << " > smooth "
    << num(t.smooth * per) << " > max(constant " << num(t.constant * per)
    << ", prior " << num(t.prior * per) << ") > uniform "
    << num(t.uniform * per) << (order ? "" : " ORDER VIOLATED")
    << "; trained " << num(train_s) << "s (cap 1800s)";
  return {order && in_budget, d.str()};
}

Outcome criterion_semisupervised() {
  const SynthFlyParams params;
  double gap_sum = 0.0;
  std::string parts;
  for (uint64_t seed = 1; seed <= 3; ++seed) {
    std::vector<TrialData> train_trials;
    for (int k = 0; k < 3; ++k)
      train_trials.push_back(synth_trial("train_" + std::to_string(k), 20000,
                                         200 + 10 * seed + k, params));
    std::vector<TrialData> eval_trials = {
        synth_trial("eval", 20000, 900 + seed, params)};
    subsample_labels(train_trials, 0.05, seed);

    const BinSpec bins = fit_trial_bins(train_trials, 15);
    double f1[2] = {0.0, 0.0};
    int slot = 0;
    for (Variant variant : {Variant::BESNET, Variant::BENET}) {
      ModelConfig cfg;
      cfg.levels = 2;
      cfg.units = {32, 32};
      cfg.actions = 2;
      cfg.motion_dims = 8;
      cfg.sensory_dims = static_cast<int>(train_trials[0].agents[0].v[0].size());
      cfg.bins_per_dim = bins.bins_per_dim();
      cfg.variant = variant;
      ModelParams model = train_model(cfg, train_trials, bins, 4, 50, 20, seed,
                                      10 * 60.0, nullptr);
      f1[slot++] =
          evaluate_classification(model, eval_trials).class_mean.f1_frame;
    }
    gap_sum += f1[0] - f1[1];
    parts += " seed" + std::to_string(seed) + ": besnet " + num(f1[0]) +
             " benet " + num(f1[1]);
  }
  const double mean_gap = gap_sum / 3.0;
  return {mean_gap >= 0.05,
          "mean F1-frame gap " + num(mean_gap) + " (need >= 0.05);" + parts};
}

Outcome criterion_containment(const Criterion4State& st) {
  if (!st.trained) return {false, "no trained model (criterion 4 failed early)"};
  const Chamber chamber = Chamber::rect(120, 80);
  RetinaConfig retina;

  std::vector<FlySimInput> agents(20);
  Rng init = make_rng(4242, 0);
  for (int a = 0; a < 20; ++a) {
    do {
      agents[a].initial.x = (2.0 * uniform01(init) - 1.0) * 60.0;
      agents[a].initial.y = (2.0 * uniform01(init) - 1.0) * 40.0;
    } while (!chamber.contains(agents[a].initial.x, agents[a].initial.y, 0.9));
    agents[a].initial.heading =
        (2.0 * uniform01(init) - 1.0) * 3.14159265358979323846;
    const AgentTrack& src = st.eval_trials[a % 2].agents[0];
    agents[a].warm_x.assign(src.x.begin(), src.x.begin() + 50);
    agents[a].warm_v.assign(src.v.begin(), src.v.begin() + 50);
  }

  SimConfig sim;
  sim.steps = 1000;
  sim.seed = 4242;
  const std::vector<RetinaTarget> obstacles = {{0.0, 0.0, 5.0}};
  std::vector<AgentTrajectory> trajs;
  try {
    trajs = simulate_flies(st.model, st.bins, agents, chamber, retina, sim,
                           obstacles);
  } catch (const numeric_error& e) {
    return {false, std::string("non-finite state: ") + e.what()};
  }

  long inside = 0, total = 0;
  for (const AgentTrajectory& t : trajs)
    for (const FlyPose& p : t.poses) {
      ++total;
      inside += chamber.contains(p.x, p.y, 1.05);
    }
  const double frac = double(inside) / total;
  return {frac >= 0.95, num(100.0 * frac) + "% of " + std::to_string(total) +
                            " agent-frames inside chamber +5% (need 95%)"};
}

Outcome criterion_override(const Criterion4State& st) {
  if (!st.trained) return {false, "no trained model (criterion 4 failed early)"};
  const Chamber chamber = Chamber::rect(120, 80);
  RetinaConfig retina;

  std::vector<FlySimInput> agents(5);
  Rng init = make_rng(777, 0);
  for (int a = 0; a < 5; ++a) {
    agents[a].initial.x = (2.0 * uniform01(init) - 1.0) * 40.0;
    agents[a].initial.y = (2.0 * uniform01(init) - 1.0) * 25.0;
    agents[a].initial.heading =
        (2.0 * uniform01(init) - 1.0) * 3.14159265358979323846;
    const AgentTrack& src = st.eval_trials[a % 2].agents[0];
    agents[a].warm_x.assign(src.x.begin(), src.x.begin() + 50);
    agents[a].warm_v.assign(src.v.begin(), src.v.begin() + 50);
  }

  SimConfig sim;
  sim.steps = 300;
  sim.seed = 777;
  const std::vector<RetinaTarget> obstacles = {{0.0, 0.0, 5.0}};
  const auto firing_rate = [&](const SimConfig& cfg) {
    const auto trajs =
        simulate_flies(st.model, st.bins, agents, chamber, retina, cfg, obstacles);
    long on = 0, total = 0;
    for (const AgentTrajectory& t : trajs)
      for (const Vec& y : t.y_hat) {
        ++total;
        on += y[0] >= 0.5;
      }
    return double(on) / total;
  };

  const double base = firing_rate(sim);
  SimConfig forced = sim;
  forced.unit_overrides = {{1, 0, 1.0}};  // left wing label unit at level L
  const double with_override = firing_rate(forced);
  const bool pass = base == 0.0 ? with_override > 0.0
                                : with_override >= 2.0 * base;
  return {pass, "left-wing firing rate " + num(base) + " -> " +
                    num(with_override) + " with the unit forced to +1"};
}

// -------------------------------------------------------------- criterion 8

std::string read_file(const fs::path& p) {
  std::ifstream f(p, std::ios::binary);
  if (!f) throw data_error("missing artifact " + p.string());
  std::ostringstream ss;
  ss << f.rdbuf();
  return ss.str();
}

bool same_tree(const fs::path& a, const fs::path& b, std::string* why) {
  std::vector<fs::path> rel;
  for (const auto& e : fs::recursive_directory_iterator(a))
    if (e.is_regular_file()) rel.push_back(fs::relative(e.path(), a));
  std::sort(rel.begin(), rel.end());
  std::vector<fs::path> rel_b;
  for (const auto& e : fs::recursive_directory_iterator(b))
    if (e.is_regular_file()) rel_b.push_back(fs::relative(e.path(), b));
  std::sort(rel_b.begin(), rel_b.end());
  if (rel != rel_b) {
    *why = "file sets differ under " + a.string() + " and " + b.string();
    return false;
  }
  for (const fs::path& r : rel)
    if (read_file(a / r) != read_file(b / r)) {
      *why = "bytes differ: " + r.string();
      return false;
    }
  return true;
}

int run_cli(const std::string& cli, const std::string& args) {
  const std::string cmd = cli + " " + args + " > /dev/null 2>&1";
  return std::system(cmd.c_str());
}

Outcome criterion_determinism(const std::string& cli) {
  if (cli.empty()) return {false, "CLI path not passed as argv[1]"};
  const fs::path root = fs::temp_directory_path() / "besim_accept_c8";
  fs::remove_all(root);
  fs::create_directories(root);
  const std::string r = root.string();

  struct Step {
    std::string name, args_a, args_b;
  };
  const std::vector<Step> steps = {
      {"gensynth", "gensynth --out " + r + "/gen_a --trials 1 --frames 3000 --seed 5",
       "gensynth --out " + r + "/gen_b --trials 1 --frames 3000 --seed 5"},
      {"train",
       "train --data " + r + "/gen_a --out " + r +
           "/model_a --units 8,8 --bins 7 --epochs 2 --twindow 25 --batch 4 --seed 3",
       "train --data " + r + "/gen_a --out " + r +
           "/model_b --units 8,8 --bins 7 --epochs 2 --twindow 25 --batch 4 --seed 3"},
      {"eval",
       "eval --model " + r + "/model_a --data " + r + "/gen_a --out " + r + "/eval_a/report.csv",
       "eval --model " + r + "/model_a --data " + r + "/gen_a --out " + r + "/eval_b/report.csv"},
      {"loglik",
       "loglik --model " + r + "/model_a --data " + r + "/gen_a --out " + r + "/ll_a/table.csv",
       "loglik --model " + r + "/model_a --data " + r + "/gen_a --out " + r + "/ll_b/table.csv"},
      {"simulate",
       "simulate --model " + r + "/model_a --out " + r +
           "/sim_a --steps 120 --agents 2 --seed 9 --data " + r + "/gen_a --warmup 20",
       "simulate --model " + r + "/model_a --out " + r +
           "/sim_b --steps 120 --agents 2 --seed 9 --data " + r + "/gen_a --warmup 20"},
      {"export-states",
       "export-states --model " + r + "/model_a --data " + r + "/gen_a --out " + r + "/ex_a/states.csv",
       "export-states --model " + r + "/model_a --data " + r + "/gen_a --out " + r + "/ex_b/states.csv"},
      {"render",
       "render --in " + r + "/sim_a/poses.csv --out " + r + "/rd_a/traj.svg",
       "render --in " + r + "/sim_a/poses.csv --out " + r + "/rd_b/traj.svg"},
  };

  for (const Step& s : steps) {
    for (const char* suffix : {"eval_a", "eval_b", "ll_a", "ll_b", "ex_a",
                               "ex_b", "rd_a", "rd_b"})
      fs::create_directories(root / suffix);
    if (run_cli(cli, s.args_a) != 0 || run_cli(cli, s.args_b) != 0)
      return {false, s.name + " exited nonzero"};
  }
  for (const auto& [a, b] : std::vector<std::pair<std::string, std::string>>{
           {"gen_a", "gen_b"}, {"model_a", "model_b"}, {"eval_a", "eval_b"},
           {"ll_a", "ll_b"}, {"sim_a", "sim_b"}, {"ex_a", "ex_b"},
           {"rd_a", "rd_b"}}) {
    std::string why;
    if (!same_tree(root / a, root / b, &why)) return {false, why};
  }
  fs::remove_all(root);
  return {true, "7 commands re-run byte-identical (gensynth, train, eval, "
                "loglik, simulate, export-states, render)"};
}

// -------------------------------------------------------------- criterion 9

Outcome criterion_properties() {
  Rng rng = make_rng(2024);

  // Codec round trips: decode lands back in its own bin, specs reload exactly.
  {
    std::vector<Vec> per_dim(3);
    for (int d = 0; d < 3; ++d)
      for (int i = 0; i < 4000; ++i)
        per_dim[d].push_back(normal(rng, d * 0.3, 1.0 + d));
    const BinSpec spec = fit_bins(per_dim, 9);
    for (int d = 0; d < 3; ++d)
      for (int b = 0; b < spec.bins(d); ++b)
        if (encode_dim(spec, d, decode_dim(spec, d, b)) != b)
          return {false, "codec: bin center escaped its bin"};
    const fs::path p = fs::temp_directory_path() / "besim_accept_bins.csv";
    save_binspec(p.string(), spec);
    const BinSpec back = load_binspec(p.string());
    fs::remove(p);
    if (back.edges != spec.edges)
      return {false, "codec: binspec did not round trip exactly"};
  }

  // Sampling frequencies follow the distribution.
  {
    BinSpec spec;
    spec.edges.push_back({0.0, 1.0, 2.0, 3.0, 4.0, 5.0});
    const std::vector<Vec> x_hat = {{0.05, 0.1, 0.35, 0.3, 0.2}};
    std::vector<long> hits(5, 0);
    const int draws = 200000;
    for (int i = 0; i < draws; ++i) {
      const Vec m = sample_motion(spec, x_hat, rng);
      const int b = encode_dim(spec, 0, m[0]);
      ++hits[b];
      if (m[0] < spec.edges[0][b] || m[0] > spec.edges[0][b + 1])
        return {false, "codec: sampled value escaped its bin"};
    }
    for (int b = 0; b < 5; ++b)
      if (std::abs(double(hits[b]) / draws - x_hat[0][b]) > 0.01)
        return {false, "codec: sampled frequency off by more than 0.01"};
  }

  // Retina: egocentric rotation invariance of the fly channel, [0,1] bounds.
  {
    const Chamber chamber = Chamber::rect(120, 80);
    const RetinaConfig retina;
    for (int it = 0; it < 200; ++it) {
      FlyPose agent;
      agent.x = (2.0 * uniform01(rng) - 1.0) * 50.0;
      agent.y = (2.0 * uniform01(rng) - 1.0) * 30.0;
      agent.heading = (2.0 * uniform01(rng) - 1.0) * 3.141;
      std::vector<RetinaTarget> targets;
      for (int k = 0; k < 3; ++k)
        targets.push_back({(2.0 * uniform01(rng) - 1.0) * 50.0,
                           (2.0 * uniform01(rng) - 1.0) * 30.0, 1.0});
      const Vec v0 = compute_retina(agent, targets, chamber, retina);
      for (double val : v0)
        if (val < 0.0 || val > 1.0) return {false, "retina: value outside [0,1]"};

      const double th = (2.0 * uniform01(rng) - 1.0) * 3.141;
      const double c = std::cos(th), s = std::sin(th);
      FlyPose rotated = agent;
      rotated.x = agent.x * c - agent.y * s;
      rotated.y = agent.x * s + agent.y * c;
      rotated.heading = std::atan2(std::sin(agent.heading + th),
                                   std::cos(agent.heading + th));
      std::vector<RetinaTarget> rt;
      for (const RetinaTarget& t : targets)
        rt.push_back({t.x * c - t.y * s, t.x * s + t.y * c, t.radius});
      const Vec v1 = compute_retina(rotated, rt, chamber, retina);
      for (int i = 0; i < retina.sectors; ++i)
        if (std::abs(v0[i] - v1[i]) > 1e-9)
          return {false, "retina: fly channel not rotation invariant"};
    }
  }

  // Stroke normalization: pen-down moments hit (0,1), round trip exact-ish.
  {
    std::vector<AgentTrack> tracks(2);
    for (AgentTrack& t : tracks)
      for (int i = 0; i < 500; ++i) {
        t.x.push_back({normal(rng, 2.0, 3.0), normal(rng, -1.0, 0.5),
                       uniform01(rng) < 0.8 ? 1.0 : 0.0});
        t.v.emplace_back();
        t.labels.emplace_back();
        t.label_mask.push_back(0);
      }
    const std::vector<AgentTrack> original = tracks;
    const WriterStats stats = normalize_strokes(tracks);
    double sum = 0.0, sum2 = 0.0;
    long n = 0;
    for (const AgentTrack& t : tracks)
      for (const Vec& x : t.x)
        if (x[2] > 0.5) {
          sum += x[0];
          sum2 += x[0] * x[0];
          ++n;
        }
    if (std::abs(sum / n) > 1e-9 || std::abs(sum2 / n - 1.0) > 1e-9)
      return {false, "normalization: pen-down dx moments off"};
    denormalize_strokes(tracks, stats);
    for (size_t t = 0; t < tracks.size(); ++t)
      for (size_t i = 0; i < tracks[t].x.size(); ++i)
        for (int d = 0; d < 3; ++d)
          if (std::abs(tracks[t].x[i][d] - original[t].x[i][d]) > 1e-12)
            return {false, "normalization: round trip drifted"};
  }

  return {true, "codec round trips, sampling frequencies, retina rotation "
                "invariance and bounds, stroke normalization"};
}

}  // namespace

int main(int argc, char** argv) {
  const std::string cli = argc > 1 ? argv[1] : "";
  Criterion4State c4;

  struct Entry {
    int id;
    const char* name;
    std::function<Outcome()> run;
  };
  const std::vector<Entry> entries = {
      {1, "gradient correctness", criterion_gradients},
      {2, "analytic values", criterion_analytic},
      {3, "matching oracle", criterion_matching},
      {4, "synthfly loglik ordering", [&]() { return criterion_synthfly(c4); }},
      {5, "semi-supervised gain", criterion_semisupervised},
      {6, "simulation containment", [&]() { return criterion_containment(c4); }},
      {7, "unit-activation effect", [&]() { return criterion_override(c4); }},
      {8, "artifact determinism", [&]() { return criterion_determinism(cli); }},
      {9, "codec and retina properties", criterion_properties},
  };

  int failures = 0;
  for (const Entry& e : entries) {
    const Clock::time_point t0 = Clock::now();
    Outcome out;
    try {
      out = e.run();
    } catch (const std::exception& ex) {
      out = {false, std::string("exception: ") + ex.what()};
    }
    failures += !out.pass;
    std::printf("%s  criterion %d (%s): %s  [%.1fs]\n",
                out.pass ? "PASS" : "FAIL", e.id, e.name, out.detail.c_str(),
                seconds_since(t0));
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
