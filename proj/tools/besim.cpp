#include <CLI11.hpp>

#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "besim/checkpoint.hpp"
#include "besim/data.hpp"
#include "besim/errors.hpp"
#include "besim/eval.hpp"
#include "besim/metrics.hpp"
#include "besim/render.hpp"
#include "besim/simulate.hpp"
#include "besim/synthfly.hpp"
#include "besim/trainer.hpp"

namespace fs = std::filesystem;
using namespace besim;

namespace {

std::string fmt17(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  for (std::string item; std::getline(ss, item, ',');) out.push_back(item);
  return out;
}

std::vector<int> parse_int_list(const std::string& s, const char* what) {
  std::vector<int> out;
  for (const std::string& item : split_list(s)) {
    try {
      size_t used = 0;
      out.push_back(std::stoi(item, &used));
      if (used != item.size()) throw std::invalid_argument(item);
    } catch (const std::exception&) {
      throw data_error(std::string(what) + ": bad integer '" + item + "'");
    }
  }
  if (out.empty()) throw data_error(std::string(what) + ": empty list");
  return out;
}

std::string join(std::span<const std::string> items) {
  std::string out;
  for (size_t i = 0; i < items.size(); ++i) {
    if (i) out += ',';
    out += items[i];
  }
  return out;
}

int thread_cap() {
  const char* env = std::getenv("BESIM_THREADS");
  if (!env || !*env) return 1;
  try {
    size_t used = 0;
    const int n = std::stoi(env, &used);
    require(used == std::strlen(env) && n >= 1,
            "BESIM_THREADS must be a positive integer");
    return n;
  } catch (const contract_error&) {
    throw;
  } catch (const std::exception&) {
    throw contract_error("BESIM_THREADS must be a positive integer");
  }
}

// All commands echo their effective configuration before doing work, so a
// run's stdout records every default in force.
struct ConfigEcho {
  std::ostringstream lines;

  template <typename T>
  void add(const std::string& key, const T& value) {
    lines << key << '=' << value << '\n';
  }
  void print(const std::string& command) {
    const int threads = thread_cap();
    std::cout << "[" << command << "]\n"
              << lines.str() << "threads=" << threads << "\n\n";
  }
};

// A data directory is either a single trial (holds labels.csv) or a
// directory of trial subdirectories, loaded in sorted order.
std::vector<TrialData> load_data_dir(const fs::path& dir,
                                     std::span<const std::string> classes) {
  if (!fs::is_directory(dir))
    throw data_error("data directory not found: " + dir.string());
  if (fs::exists(dir / "labels.csv")) return {load_trial(dir, classes)};
  std::vector<fs::path> subdirs;
  for (const auto& entry : fs::directory_iterator(dir))
    if (entry.is_directory()) subdirs.push_back(entry.path());
  std::sort(subdirs.begin(), subdirs.end());
  if (subdirs.empty()) throw data_error("no trials under " + dir.string());
  std::vector<TrialData> out;
  for (const fs::path& sub : subdirs) out.push_back(load_trial(sub, classes));
  return out;
}

void write_kv_file(const fs::path& path,
                   const std::vector<std::pair<std::string, std::string>>& kv) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw data_error("cannot write " + path.string());
  for (const auto& [k, v] : kv) f << k << '=' << v << '\n';
}

std::map<std::string, std::string> read_kv_file(const fs::path& path) {
  std::ifstream f(path);
  if (!f) throw data_error("cannot read " + path.string());
  std::map<std::string, std::string> kv;
  std::string line;
  for (int no = 1; std::getline(f, line); ++no) {
    if (line.empty() || line[0] == '#') continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw data_error(path.string() + ":" + std::to_string(no) +
                       ": expected key=value");
    kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  return kv;
}

struct ModelDir {
  ModelParams model;
  BinSpec bins;
  std::vector<std::string> classes;
};

void save_model_dir(const fs::path& dir, ModelParams& model, const BinSpec& bins,
                    std::span<const std::string> classes) {
  fs::create_directories(dir);
  const ModelConfig& cfg = model.config;
  std::vector<std::string> units;
  for (int u : cfg.units) units.push_back(std::to_string(u));
  write_kv_file(dir / "model.cfg",
                {{"variant", to_string(cfg.variant)},
                 {"label_mode", to_string(cfg.label_mode)},
                 {"levels", std::to_string(cfg.levels)},
                 {"units", join(units)},
                 {"motion_dims", std::to_string(cfg.motion_dims)},
                 {"sensory_dims", std::to_string(cfg.sensory_dims)},
                 {"lambda", fmt17(cfg.lambda)},
                 {"classes", join(classes)}});
  save_binspec((dir / "bins.csv").string(), bins);
  const std::vector<Parameter*> params = model.all();
  save_checkpoint((dir / "model.ckpt").string(), params);
}

ModelDir load_model_dir(const fs::path& dir) {
  const auto kv = read_kv_file(dir / "model.cfg");
  const std::set<std::string> known = {"variant",      "label_mode", "levels",
                                       "units",        "motion_dims",
                                       "sensory_dims", "lambda",     "classes"};
  for (const auto& [k, v] : kv)
    if (!known.count(k))
      throw data_error("model.cfg: unknown key '" + k + "'");
  const auto need = [&](const std::string& k) -> const std::string& {
    const auto it = kv.find(k);
    if (it == kv.end()) throw data_error("model.cfg: missing key '" + k + "'");
    return it->second;
  };

  ModelDir out;
  out.bins = load_binspec((dir / "bins.csv").string());
  out.classes = split_list(need("classes"));

  ModelConfig cfg;
  cfg.variant = variant_from_string(need("variant"));
  cfg.label_mode = label_mode_from_string(need("label_mode"));
  cfg.levels = std::stoi(need("levels"));
  cfg.units = parse_int_list(need("units"), "model.cfg units");
  cfg.actions = static_cast<int>(out.classes.size());
  cfg.motion_dims = std::stoi(need("motion_dims"));
  cfg.sensory_dims = std::stoi(need("sensory_dims"));
  cfg.lambda = std::stod(need("lambda"));
  cfg.bins_per_dim = out.bins.bins_per_dim();
  cfg.validate();
  require(out.bins.dims() == cfg.motion_dims,
          "bins.csv dimensions do not match the model");

  Rng rng = make_rng(0, 0);
  out.model = ModelParams::build(cfg, rng);
  std::vector<Parameter*> params = out.model.all();
  load_checkpoint((dir / "model.ckpt").string(), params);
  return out;
}

std::vector<std::vector<uint8_t>> widen_labels(
    const std::vector<std::array<uint8_t, 2>>& labels) {
  std::vector<std::vector<uint8_t>> out;
  out.reserve(labels.size());
  for (const auto& l : labels) out.push_back({l[0], l[1]});
  return out;
}

std::string pad3(int k) {
  char buf[16];
  std::snprintf(buf, sizeof(buf), "%03d", k);
  return buf;
}

// ---------------------------------------------------------------------------

int cmd_gensynth(const std::string& out, int trials, int frames, uint64_t seed,
                 bool object, double width, double height) {
  ConfigEcho echo;
  echo.add("out", out);
  echo.add("trials", trials);
  echo.add("frames", frames);
  echo.add("seed", seed);
  echo.add("object", object);
  echo.add("width", width);
  echo.add("height", height);
  echo.print("gensynth");

  SynthFlyParams params;
  params.chamber = Chamber::rect(width, height);
  params.include_object = object;
  params.validate();
  const std::vector<std::string> classes = {"wing_left", "wing_right"};

  for (int k = 0; k < trials; ++k) {
    const SynthTrack t = synthfly_generate(frames, seed + k, params);
    TrialData trial;
    trial.trial_id = "trial_" + pad3(k);
    AgentTrack a;
    a.agent_id = "00";
    a.x = t.x;
    a.v = t.v;
    a.labels = widen_labels(t.labels);
    a.label_mask.assign(t.x.size(), 1);
    trial.agents.push_back(std::move(a));
    save_trial(trial, fs::path(out) / trial.trial_id, classes);
    std::cout << trial.trial_id << ": " << frames << " frames, "
              << t.stats.left_wing_events << "+" << t.stats.right_wing_events
              << " wing events\n";
  }
  return 0;
}

int cmd_train(const std::string& data, const std::string& out,
              const std::string& variant, const std::string& label_mode,
              int levels, const std::string& units, const std::string& bins,
              int twindow, int batch, int epochs, double lr, double clip,
              double lambda, double labels, uint64_t seed,
              const std::string& classes) {
  ConfigEcho echo;
  echo.add("data", data);
  echo.add("out", out);
  echo.add("variant", variant);
  echo.add("label_mode", label_mode);
  echo.add("levels", levels);
  echo.add("units", units);
  echo.add("bins", bins);
  echo.add("twindow", twindow);
  echo.add("batch", batch);
  echo.add("epochs", epochs);
  echo.add("lr", lr);
  echo.add("clip", clip);
  echo.add("lambda", lambda);
  echo.add("labels", labels);
  echo.add("seed", seed);
  echo.add("classes", classes);
  echo.print("train");

  const std::vector<std::string> class_names = split_list(classes);
  std::vector<TrialData> trials = load_data_dir(data, class_names);
  if (labels < 1.0) subsample_labels(trials, labels, seed);

  const int d_x = trials[0].agents[0].x.empty()
                      ? 0
                      : static_cast<int>(trials[0].agents[0].x[0].size());
  const int d_v = trials[0].agents[0].v.empty()
                      ? 0
                      : static_cast<int>(trials[0].agents[0].v[0].size());
  require(d_x >= 1, "train: tracks have no motion columns");

  std::vector<int> bins_list = parse_int_list(bins, "bins");
  if (bins_list.size() == 1) bins_list.assign(d_x, bins_list[0]);
  require(static_cast<int>(bins_list.size()) == d_x,
          "bins: need one count, or one per motion dimension");

  std::vector<Vec> per_dim(d_x);
  for (const TrialData& trial : trials)
    for (const AgentTrack& agent : trial.agents)
      for (const Vec& x : agent.x)
        for (int d = 0; d < d_x; ++d) per_dim[d].push_back(x[d]);
  std::vector<std::string> warnings;
  const BinSpec spec = fit_bins(per_dim, bins_list, &warnings);

  ModelConfig cfg;
  cfg.levels = levels;
  cfg.units = parse_int_list(units, "units");
  cfg.actions = static_cast<int>(class_names.size());
  cfg.motion_dims = d_x;
  cfg.sensory_dims = d_v;
  cfg.bins_per_dim = spec.bins_per_dim();
  cfg.lambda = lambda;
  cfg.variant = variant_from_string(variant);
  cfg.label_mode = label_mode_from_string(label_mode);
  cfg.validate();

  Rng rng = make_rng(seed, 100);
  ModelParams model = ModelParams::build(cfg, rng);
  const std::vector<Batch> batches =
      make_batches(trials, spec, twindow, batch, seed, &warnings);
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";

  TrainSettings settings;
  settings.adam.lr = lr;
  settings.clip_norm = clip;

  std::ostringstream curve;
  curve << "epoch,c,c_y,c_x,labeled_frames,motion_frames\n";
  for (int e = 1; e <= epochs; ++e) {
    const EpochStats stats = train_epoch(model, batches, settings);
    curve << e << ',' << fmt17(stats.c) << ',' << fmt17(stats.c_y) << ','
          << fmt17(stats.c_x) << ',' << stats.labeled_frames << ','
          << stats.motion_frames << "\n";
    std::cout << "epoch " << e << ": c=" << stats.mean_c()
              << " c_y=" << stats.c_y << " c_x=" << stats.c_x << "\n";
  }

  save_model_dir(out, model, spec, class_names);
  std::ofstream f(fs::path(out) / "loss_curve.csv", std::ios::binary);
  if (!f) throw data_error("cannot write loss curve");
  f << curve.str();
  std::cout << "saved " << out << "\n";
  return 0;
}

int cmd_eval(const std::string& model_dir, const std::string& data,
             const std::string& out, double threshold) {
  ConfigEcho echo;
  echo.add("model", model_dir);
  echo.add("data", data);
  echo.add("out", out);
  echo.add("threshold", threshold);
  echo.print("eval");

  const ModelDir md = load_model_dir(model_dir);
  const std::vector<TrialData> trials = load_data_dir(data, md.classes);
  const F1Report report = evaluate_classification(md.model, trials, threshold);

  std::ostringstream csv;
  csv << "class,f1_frame,f1_bout,f_star,truth_frames,truth_bouts\n";
  const auto row = [&](const std::string& name, const ClassF1& c) {
    csv << name << ',' << fmt17(c.f1_frame) << ',' << fmt17(c.f1_bout) << ','
        << fmt17(c.f_star) << ',' << c.truth_frames << ',' << c.truth_bouts
        << "\n";
    std::printf("%-16s f1_frame=%.4f f1_bout=%.4f f*=%.4f\n", name.c_str(),
                c.f1_frame, c.f1_bout, c.f_star);
  };
  for (size_t c = 0; c < report.per_class.size(); ++c)
    row(md.classes[c], report.per_class[c]);
  row("class_mean", report.class_mean);
  row("weighted", report.weighted);

  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw data_error("cannot write " + out);
    f << csv.str();
  }
  return 0;
}

int cmd_loglik(const std::string& model_dir, const std::string& data,
               const std::string& train, const std::string& out) {
  ConfigEcho echo;
  echo.add("model", model_dir);
  echo.add("data", data);
  echo.add("train", train);
  echo.add("out", out);
  echo.print("loglik");

  const ModelDir md = load_model_dir(model_dir);
  require(md.model.has_motion_output(), "loglik: model has no motion output");
  const std::vector<TrialData> eval_trials = load_data_dir(data, md.classes);
  const std::vector<TrialData> train_trials =
      train.empty() ? eval_trials : load_data_dir(train, md.classes);

  const auto encode_all = [&](const std::vector<TrialData>& trials) {
    std::vector<TrackBins> out_bins;
    for (const TrialData& trial : trials)
      for (const AgentTrack& agent : trial.agents)
        out_bins.push_back(encode_track(md.bins, agent.x));
    return out_bins;
  };
  const std::vector<TrackBins> train_bins = encode_all(train_trials);
  const std::vector<TrackBins> eval_bins = encode_all(eval_trials);

  long steps = 0;
  for (const TrackBins& t : eval_bins) steps += static_cast<long>(t.size()) - 1;
  require(steps > 0, "loglik: evaluation data has no transitions");

  std::ostringstream csv;
  csv << "policy,loglik_per_frame,total,frames\n";
  const auto row = [&](const std::string& name, double total) {
    csv << name << ',' << fmt17(total / steps) << ',' << fmt17(total) << ','
        << steps << "\n";
    std::printf("%-16s %12.5f per frame  (%.17g total over %ld)\n", name.c_str(),
                total / steps, total, steps);
  };

  double model_total = 0.0;
  for (const TrialData& trial : eval_trials)
    for (const AgentTrack& agent : trial.agents)
      model_total += model_track_loglik(md.model, agent, md.bins);
  row("model", model_total);

  for (const PolicyKind kind :
       {PolicyKind::UNIFORM, PolicyKind::PRIOR, PolicyKind::CONSTANT,
        PolicyKind::SMOOTH_CONSTANT}) {
    const BaselinePolicy policy =
        fit_baseline(kind, md.bins.bins_per_dim(), train_bins, train_bins);
    double total = 0.0;
    for (const TrackBins& t : eval_bins) total += policy_loglik(policy, t);
    row(to_string(kind), total);
  }

  if (!out.empty()) {
    std::ofstream f(out, std::ios::binary);
    if (!f) throw data_error("cannot write " + out);
    f << csv.str();
  }
  return 0;
}

std::vector<UnitOverride> parse_overrides(const std::vector<std::string>& specs) {
  std::vector<UnitOverride> out;
  for (const std::string& s : specs) {
    std::vector<std::string> p;
    std::stringstream ss(s);
    for (std::string item; std::getline(ss, item, ':');) p.push_back(item);
    if (p.size() != 3)
      throw data_error("override: expected level:unit:value, got '" + s + "'");
    try {
      out.push_back({std::stoi(p[0]), std::stoi(p[1]), std::stod(p[2])});
    } catch (const std::exception&) {
      throw data_error("override: bad numbers in '" + s + "'");
    }
  }
  return out;
}

int cmd_simulate(const std::string& model_dir, const std::string& out,
                 long steps, int agents, uint64_t seed, int warmup,
                 const std::string& data, bool argmax,
                 const std::vector<std::string>& override_specs,
                 const std::string& shape, double width, double height,
                 double radius, bool object, double object_radius) {
  ConfigEcho echo;
  echo.add("model", model_dir);
  echo.add("out", out);
  echo.add("steps", steps);
  echo.add("agents", agents);
  echo.add("seed", seed);
  echo.add("warmup", warmup);
  echo.add("data", data);
  echo.add("argmax", argmax);
  echo.add("overrides", override_specs.size());
  echo.add("chamber", shape);
  echo.add("object", object);
  echo.print("simulate");

  const ModelDir md = load_model_dir(model_dir);
  SimConfig sim;
  sim.steps = steps;
  sim.seed = seed;
  sim.warmup = warmup;
  sim.argmax = argmax;
  sim.unit_overrides = parse_overrides(override_specs);

  fs::create_directories(out);
  const ModelConfig& cfg = md.model.config;

  if (cfg.sensory_dims == 0) {
    require(cfg.motion_dims == 3,
            "simulate: sensory-free model is not a stroke model");
    WriterStats stats;
    if (fs::exists(fs::path(model_dir) / "writer_stats.csv"))
      stats = load_writer_stats(fs::path(model_dir) / "writer_stats.csv");
    std::vector<Vec> warm;
    if (!data.empty()) {
      const std::vector<TrialData> trials = load_data_dir(data, md.classes);
      warm = trials[0].agents[0].x;
    }
    const HandwritingSim hs =
        simulate_handwriting(md.model, md.bins, stats, sim, warm);
    std::ofstream f(fs::path(out) / "strokes.csv", std::ios::binary);
    if (!f) throw data_error("cannot write strokes.csv");
    f << "frame,dx,dy,z\n";
    for (size_t i = 0; i < hs.strokes.size(); ++i)
      f << i << ',' << fmt17(hs.strokes[i][0]) << ',' << fmt17(hs.strokes[i][1])
        << ',' << fmt17(hs.strokes[i][2]) << "\n";
    std::ofstream y(fs::path(out) / "y_hat.csv", std::ios::binary);
    y << "frame";
    for (size_t c = 0; c < md.classes.size(); ++c) y << ',' << md.classes[c];
    y << "\n";
    for (size_t i = 0; i < hs.y_hat.size(); ++i) {
      y << i;
      for (double v : hs.y_hat[i]) y << ',' << fmt17(v);
      y << "\n";
    }
    std::cout << "wrote " << hs.strokes.size() << " strokes\n";
    return 0;
  }

  require(cfg.motion_dims == kFlyMotionDims,
          "simulate: model is neither a fly nor a stroke model");
  const int sectors = cfg.sensory_dims / 2;
  RetinaConfig retina;
  retina.sectors = sectors;
  retina.sector_width_deg = 360.0 / sectors;
  retina.validate();

  Chamber chamber =
      shape == "circle" ? Chamber::circle(radius) : Chamber::rect(width, height);

  std::vector<FlySimInput> inputs(agents);
  Rng init = make_rng(seed, 1000000);
  const double ext_x = shape == "circle" ? radius : width / 2;
  const double ext_y = shape == "circle" ? radius : height / 2;
  for (int a = 0; a < agents; ++a) {
    double x, y;
    do {
      x = (2.0 * uniform01(init) - 1.0) * ext_x;
      y = (2.0 * uniform01(init) - 1.0) * ext_y;
    } while (!chamber.contains(x, y, 0.9));
    inputs[a].initial.x = x;
    inputs[a].initial.y = y;
    inputs[a].initial.heading = (2.0 * uniform01(init) - 1.0) * 3.14159265358979323846;
  }
  if (!data.empty() && warmup > 0) {
    const std::vector<TrialData> trials = load_data_dir(data, md.classes);
    std::vector<const AgentTrack*> tracks;
    for (const TrialData& t : trials)
      for (const AgentTrack& agent : t.agents) tracks.push_back(&agent);
    for (int a = 0; a < agents; ++a) {
      const AgentTrack& src = *tracks[a % tracks.size()];
      const int take = std::min<int>(warmup, src.frames());
      inputs[a].warm_x.assign(src.x.begin(), src.x.begin() + take);
      inputs[a].warm_v.assign(src.v.begin(), src.v.begin() + take);
    }
  }

  std::vector<RetinaTarget> obstacles;
  if (object) obstacles.push_back({0.0, 0.0, object_radius});

  const std::vector<AgentTrajectory> trajs = simulate_flies(
      md.model, md.bins, inputs, chamber, retina, sim, obstacles);

  TrialData trial;
  trial.trial_id = "sim";
  long inside = 0;
  for (int a = 0; a < agents; ++a) {
    AgentTrack track;
    track.agent_id = pad3(a);
    track.x = trajs[a].x;
    track.v = trajs[a].v;
    for (const Vec& yh : trajs[a].y_hat) {
      std::vector<uint8_t> l(yh.size());
      for (size_t c = 0; c < yh.size(); ++c) l[c] = yh[c] >= 0.5;
      track.labels.push_back(std::move(l));
    }
    track.label_mask.assign(trajs[a].x.size(), 1);
    trial.agents.push_back(std::move(track));
    for (const FlyPose& p : trajs[a].poses)
      inside += chamber.contains(p.x, p.y, 1.05);
  }
  save_trial(trial, out, md.classes);

  std::ofstream poses(fs::path(out) / "poses.csv", std::ios::binary);
  if (!poses) throw data_error("cannot write poses.csv");
  poses << "agent,frame,x,y,heading,wing_angle_left,wing_angle_right,"
           "wing_len_left,wing_len_right,body_len\n";
  for (int a = 0; a < agents; ++a)
    for (size_t i = 0; i < trajs[a].poses.size(); ++i) {
      const FlyPose& p = trajs[a].poses[i];
      poses << a << ',' << i << ',' << fmt17(p.x) << ',' << fmt17(p.y) << ','
            << fmt17(p.heading) << ',' << fmt17(p.wing_angle_left) << ','
            << fmt17(p.wing_angle_right) << ',' << fmt17(p.wing_len_left) << ','
            << fmt17(p.wing_len_right) << ',' << fmt17(p.body_len) << "\n";
    }

  std::cout << "contained " << inside << "/" << agents * steps
            << " agent-frames (chamber +5%)\n";
  return 0;
}

int cmd_export_states(const std::string& model_dir, const std::string& data,
                      const std::string& out) {
  ConfigEcho echo;
  echo.add("model", model_dir);
  echo.add("data", data);
  echo.add("out", out);
  echo.print("export-states");

  const ModelDir md = load_model_dir(model_dir);
  const std::vector<TrialData> trials = load_data_dir(data, md.classes);
  export_hidden_states(md.model, trials, out);
  long rows = 0;
  for (const TrialData& t : trials)
    for (const AgentTrack& a : t.agents) rows += a.frames();
  std::cout << "wrote " << rows << " rows to " << out << "\n";
  return 0;
}

int cmd_render(const std::string& in, const std::string& out,
               std::string mode, const std::string& shape, double width,
               double height, double radius) {
  ConfigEcho echo;
  echo.add("in", in);
  echo.add("out", out);
  echo.add("mode", mode);
  echo.add("chamber", shape);
  echo.print("render");

  std::ifstream f(in);
  if (!f) throw data_error("cannot read " + in);
  std::string header;
  std::getline(f, header);
  if (mode == "auto") {
    if (header.starts_with("agent,frame,x,y,heading")) mode = "fly";
    else if (header.starts_with("frame,dx,dy,z")) mode = "strokes";
    else throw data_error("render: cannot tell fly poses from strokes; pass --mode");
  }

  std::vector<std::string> warnings;
  std::string svg;
  if (mode == "fly") {
    std::map<long, std::vector<FlyPose>> by_agent;
    std::string line;
    int no = 1;
    while (std::getline(f, line)) {
      ++no;
      if (line.empty()) continue;
      const std::vector<std::string> cells = split_list(line);
      if (cells.size() < 5)
        throw data_error(in + ":" + std::to_string(no) + ": short row");
      FlyPose p;
      try {
        p.x = std::stod(cells[2]);
        p.y = std::stod(cells[3]);
        p.heading = std::stod(cells[4]);
        by_agent[std::stol(cells[0])].push_back(p);
      } catch (const std::exception&) {
        throw data_error(in + ":" + std::to_string(no) + ": bad number");
      }
    }
    std::vector<std::vector<FlyPose>> trajs;
    for (auto& [id, poses] : by_agent) trajs.push_back(std::move(poses));
    const Chamber chamber = shape == "circle" ? Chamber::circle(radius)
                                              : Chamber::rect(width, height);
    svg = render_fly_svg(trajs, chamber, &warnings);
  } else if (mode == "strokes") {
    std::vector<Vec> strokes;
    std::string line;
    int no = 1;
    while (std::getline(f, line)) {
      ++no;
      if (line.empty()) continue;
      const std::vector<std::string> cells = split_list(line);
      if (cells.size() != 4)
        throw data_error(in + ":" + std::to_string(no) + ": expected 4 columns");
      try {
        strokes.push_back(
            {std::stod(cells[1]), std::stod(cells[2]), std::stod(cells[3])});
      } catch (const std::exception&) {
        throw data_error(in + ":" + std::to_string(no) + ": bad number");
      }
    }
    svg = render_strokes_svg(strokes, &warnings);
  } else {
    throw data_error("render: unknown mode '" + mode + "'");
  }
  for (const std::string& w : warnings) std::cerr << "warning: " << w << "\n";
  save_svg(out, svg);
  std::cout << "wrote " << out << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"behavior and simulation toolkit"};
  app.require_subcommand(1);
  app.set_config("--config",
                 "", "key=value file with [command] sections; give before the command")
      ->expected(0, 1);
  app.allow_config_extras(CLI::config_extras_mode::error);

  // gensynth
  auto* gen = app.add_subcommand("gensynth", "generate synthetic fly trials");
  std::string gen_out;
  int gen_trials = 5, gen_frames = 10000;
  uint64_t gen_seed = 0;
  bool gen_object = true;
  double gen_width = 120.0, gen_height = 80.0;
  gen->add_option("--out", gen_out, "output directory")->required();
  gen->add_option("--trials", gen_trials, "number of trials");
  gen->add_option("--frames", gen_frames, "frames per trial");
  gen->add_option("--seed", gen_seed, "base seed; trial k uses seed+k");
  gen->add_flag("--object,!--no-object", gen_object, "center object");
  gen->add_option("--width", gen_width, "chamber width, mm");
  gen->add_option("--height", gen_height, "chamber height, mm");

  // train
  auto* tr = app.add_subcommand("train", "train a model on trial data");
  std::string tr_data, tr_out, tr_variant = "besnet", tr_mode = "multitask";
  std::string tr_units = "64,64", tr_bins = "21";
  std::string tr_classes = "wing_left,wing_right";
  int tr_levels = 2, tr_twindow = 50, tr_batch = 20, tr_epochs = 10;
  double tr_lr = 1e-3, tr_clip = 5.0, tr_lambda = 0.5, tr_labels = 1.0;
  uint64_t tr_seed = 0;
  tr->add_option("--data", tr_data, "training trial directory")->required();
  tr->add_option("--out", tr_out, "artifact directory")->required();
  tr->add_option("--variant", tr_variant, "besnet | benet | stacked_rnn");
  tr->add_option("--label-mode", tr_mode, "multitask | multiclass");
  tr->add_option("--levels", tr_levels, "stack levels L");
  tr->add_option("--units", tr_units, "units per level, comma list");
  tr->add_option("--bins", tr_bins, "bins per motion dim (one or per-dim list)");
  tr->add_option("--twindow", tr_twindow, "BPTT window length");
  tr->add_option("--batch", tr_batch, "batch slots");
  tr->add_option("--epochs", tr_epochs, "training epochs");
  tr->add_option("--lr", tr_lr, "Adam learning rate");
  tr->add_option("--clip", tr_clip, "global gradient norm clip");
  tr->add_option("--lambda", tr_lambda, "label loss weight");
  tr->add_option("--labels", tr_labels, "labeled fraction kept");
  tr->add_option("--seed", tr_seed, "seed");
  tr->add_option("--classes", tr_classes, "class names, comma list");

  // eval
  auto* ev = app.add_subcommand("eval", "classification metrics on a dataset");
  std::string ev_model, ev_data, ev_out;
  double ev_threshold = 0.5;
  ev->add_option("--model", ev_model, "model directory")->required();
  ev->add_option("--data", ev_data, "evaluation trials")->required();
  ev->add_option("--out", ev_out, "report CSV path");
  ev->add_option("--threshold", ev_threshold, "frame score threshold");

  // loglik
  auto* ll = app.add_subcommand("loglik", "motion loglik, model vs baselines");
  std::string ll_model, ll_data, ll_train, ll_out;
  ll->add_option("--model", ll_model, "model directory")->required();
  ll->add_option("--data", ll_data, "evaluation trials")->required();
  ll->add_option("--train", ll_train, "baseline fitting trials (default: data)");
  ll->add_option("--out", ll_out, "table CSV path");

  // simulate
  auto* sm = app.add_subcommand("simulate", "closed-loop generation");
  std::string sm_model, sm_out, sm_data, sm_shape = "rect";
  long sm_steps = 1000;
  int sm_agents = 20, sm_warmup = 50;
  uint64_t sm_seed = 0;
  bool sm_argmax = false, sm_object = true;
  double sm_width = 120.0, sm_height = 80.0, sm_radius = 40.0;
  double sm_object_radius = 5.0;
  std::vector<std::string> sm_overrides;
  sm->add_option("--model", sm_model, "model directory")->required();
  sm->add_option("--out", sm_out, "output directory")->required();
  sm->add_option("--steps", sm_steps, "simulation steps");
  sm->add_option("--agents", sm_agents, "agent count (fly mode)");
  sm->add_option("--seed", sm_seed, "seed");
  sm->add_option("--warmup", sm_warmup, "priming frames from --data");
  sm->add_option("--data", sm_data, "real trials for state priming");
  sm->add_flag("--argmax", sm_argmax, "take argmax instead of sampling");
  sm->add_option("--override", sm_overrides,
                 "unit override level:unit:value, repeatable");
  sm->add_option("--chamber", sm_shape, "rect | circle");
  sm->add_option("--width", sm_width, "chamber width, mm");
  sm->add_option("--height", sm_height, "chamber height, mm");
  sm->add_option("--radius", sm_radius, "chamber radius, mm");
  sm->add_flag("--object,!--no-object", sm_object, "center object");
  sm->add_option("--object-radius", sm_object_radius, "object radius, mm");

  // export-states
  auto* ex = app.add_subcommand("export-states", "hidden states to CSV");
  std::string ex_model, ex_data, ex_out;
  ex->add_option("--model", ex_model, "model directory")->required();
  ex->add_option("--data", ex_data, "trials to run")->required();
  ex->add_option("--out", ex_out, "CSV path")->required();

  // render
  auto* rd = app.add_subcommand("render", "trajectories or strokes to SVG");
  std::string rd_in, rd_out, rd_mode = "auto", rd_shape = "rect";
  double rd_width = 120.0, rd_height = 80.0, rd_radius = 40.0;
  rd->add_option("--in", rd_in, "poses.csv or strokes.csv")->required();
  rd->add_option("--out", rd_out, "SVG path")->required();
  rd->add_option("--mode", rd_mode, "auto | fly | strokes");
  rd->add_option("--chamber", rd_shape, "rect | circle (fly mode)");
  rd->add_option("--width", rd_width, "chamber width, mm");
  rd->add_option("--height", rd_height, "chamber height, mm");
  rd->add_option("--radius", rd_radius, "chamber radius, mm");

  try {
    app.parse(argc, argv);
    if (gen->parsed())
      return cmd_gensynth(gen_out, gen_trials, gen_frames, gen_seed, gen_object,
                          gen_width, gen_height);
    if (tr->parsed())
      return cmd_train(tr_data, tr_out, tr_variant, tr_mode, tr_levels, tr_units,
                       tr_bins, tr_twindow, tr_batch, tr_epochs, tr_lr, tr_clip,
                       tr_lambda, tr_labels, tr_seed, tr_classes);
    if (ev->parsed()) return cmd_eval(ev_model, ev_data, ev_out, ev_threshold);
    if (ll->parsed()) return cmd_loglik(ll_model, ll_data, ll_train, ll_out);
    if (sm->parsed())
      return cmd_simulate(sm_model, sm_out, sm_steps, sm_agents, sm_seed,
                          sm_warmup, sm_data, sm_argmax, sm_overrides, sm_shape,
                          sm_width, sm_height, sm_radius, sm_object,
                          sm_object_radius);
    if (ex->parsed()) return cmd_export_states(ex_model, ex_data, ex_out);
    if (rd->parsed())
      return cmd_render(rd_in, rd_out, rd_mode, rd_shape, rd_width, rd_height,
                        rd_radius);
    return 1;
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : 1;
  } catch (const numeric_error& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return 3;
  } catch (const data_error& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return 2;
  } catch (const contract_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
