#include "besim/data.hpp"

#include <algorithm>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>

#include "besim/errors.hpp"
#include "besim/rng.hpp"

namespace besim {

namespace fs = std::filesystem;

namespace {

std::vector<std::string> split(const std::string& line, char sep) {
  std::vector<std::string> out;
  size_t pos = 0;
  while (true) {
    const size_t next = line.find(sep, pos);
    if (next == std::string::npos) {
      out.push_back(line.substr(pos));
      return out;
    }
    out.push_back(line.substr(pos, next - pos));
    pos = next + 1;
  }
}

double parse_double(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const double v = std::strtod(tok.c_str(), &end);
  if (end == tok.c_str() || *end != '\0')
    throw data_error(where + ": bad number '" + tok + "'");
  return v;
}

long parse_long(const std::string& tok, const std::string& where) {
  char* end = nullptr;
  const long v = std::strtol(tok.c_str(), &end, 10);
  if (end == tok.c_str() || *end != '\0')
    throw data_error(where + ": bad integer '" + tok + "'");
  return v;
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw data_error("cannot write " + path.string());
  return out;
}

std::ifstream open_in(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw data_error("cannot read " + path.string());
  return in;
}

}  // namespace

void AgentTrack::validate() const {
  const size_t t = x.size();
  require(v.size() == t && labels.size() == t && label_mask.size() == t,
          "agent track: column row counts differ");
  for (size_t i = 0; i < t; ++i)
    if (!label_mask[i])
      for (uint8_t l : labels[i])
        require(l == 0, "agent track: label set on unmasked frame");
}

void TrialData::validate() const {
  for (const AgentTrack& a : agents) {
    a.validate();
    require(a.frames() == agents.front().frames(),
            "trial: agents must share the frame count");
  }
}

std::vector<Bout> frames_to_bouts(std::span<const uint8_t> column, int cls) {
  std::vector<Bout> out;
  long start = -1;
  for (long i = 0; i < static_cast<long>(column.size()); ++i) {
    if (column[i] && start < 0) start = i;
    if (!column[i] && start >= 0) {
      out.push_back({cls, start, i});
      start = -1;
    }
  }
  if (start >= 0) out.push_back({cls, start, static_cast<long>(column.size())});
  return out;
}

std::vector<uint8_t> bouts_to_frames(std::span<const Bout> bouts, long frames,
                                     int cls) {
  std::vector<uint8_t> out(frames, 0);
  for (const Bout& b : bouts) {
    require(b.start < b.end, "bout: start must precede end");
    require(b.start >= 0 && b.end <= frames, "bout: outside frame range");
    if (b.cls != cls) continue;
    std::fill(out.begin() + b.start, out.begin() + b.end, 1);
  }
  return out;
}

void save_trial(const TrialData& trial, const fs::path& dir,
                std::span<const std::string> class_names) {
  trial.validate();
  fs::create_directories(dir);
  for (const AgentTrack& a : trial.agents) {
    std::ofstream out = open_out(dir / ("agent_" + a.agent_id + ".csv"));
    const int dx = a.frames() ? static_cast<int>(a.x[0].size()) : 0;
    const int dv = a.frames() ? static_cast<int>(a.v[0].size()) : 0;
    out << "frame";
    for (int d = 0; d < dx; ++d) out << ",x" << d;
    for (int d = 0; d < dv; ++d) out << ",v" << d;
    out << "\n";
    for (int i = 0; i < a.frames(); ++i) {
      out << i;
      for (double val : a.x[i]) out << ',' << fmt(val);
      for (double val : a.v[i]) out << ',' << fmt(val);
      out << "\n";
    }
  }

  std::ofstream out = open_out(dir / "labels.csv");
  out << "agent_id,class_name,start,end\n";
  for (const AgentTrack& a : trial.agents) {
    const int n = a.frames() ? static_cast<int>(a.labels[0].size()) : 0;
    for (int c = 0; c < n; ++c) {
      require(c < static_cast<int>(class_names.size()),
              "save_trial: more label columns than class names");
      std::vector<uint8_t> column(a.frames());
      for (int i = 0; i < a.frames(); ++i) column[i] = a.labels[i][c];
      for (const Bout& b : frames_to_bouts(column, c))
        out << a.agent_id << ',' << class_names[c] << ',' << b.start << ','
            << b.end << "\n";
    }
  }
}

TrialData load_trial(const fs::path& dir,
                     std::span<const std::string> class_names) {
  require_data(fs::is_directory(dir), "trial dir not found: " + dir.string());
  TrialData trial;
  trial.trial_id = dir.filename().string();

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    const std::string name = entry.path().filename().string();
    if (name.starts_with("agent_") && name.ends_with(".csv"))
      files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  require_data(!files.empty(), "no agent files in " + dir.string());

  const int n_classes = static_cast<int>(class_names.size());
  for (const fs::path& file : files) {
    std::ifstream in = open_in(file);
    const std::string where = file.filename().string();
    std::string line;
    require_data(static_cast<bool>(std::getline(in, line)),
                 where + ": missing header");
    const std::vector<std::string> head = split(line, ',');
    require_data(!head.empty() && head[0] == "frame",
                 where + ": header must start with 'frame'");
    int dx = 0, dv = 0;
    for (size_t i = 1; i < head.size(); ++i) {
      if (head[i].starts_with("x")) {
        require_data(dv == 0, where + ": x column after v columns");
        ++dx;
      } else if (head[i].starts_with("v")) {
        ++dv;
      } else {
        throw data_error(where + ": unknown column '" + head[i] + "'");
      }
    }

    AgentTrack track;
    const std::string stem = file.stem().string();
    track.agent_id = stem.substr(6);
    long lineno = 1;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::vector<std::string> tok = split(line, ',');
      const std::string at = where + ":" + std::to_string(lineno);
      if (static_cast<int>(tok.size()) != 1 + dx + dv)
        throw data_error(at + ": expected " + std::to_string(1 + dx + dv) +
                         " columns, got " + std::to_string(tok.size()));
      Vec x(dx), v(dv);
      for (int d = 0; d < dx; ++d) x[d] = parse_double(tok[1 + d], at);
      for (int d = 0; d < dv; ++d) v[d] = parse_double(tok[1 + dx + d], at);
      track.x.push_back(std::move(x));
      track.v.push_back(std::move(v));
    }
    track.labels.assign(track.x.size(), std::vector<uint8_t>(n_classes, 0));
    track.label_mask.assign(track.x.size(), 0);
    trial.agents.push_back(std::move(track));
  }

  const fs::path labels_path = dir / "labels.csv";
  if (fs::exists(labels_path)) {
    std::ifstream in = open_in(labels_path);
    std::string line;
    require_data(static_cast<bool>(std::getline(in, line)),
                 "labels.csv: missing header");
    long lineno = 1;
    bool any = false;
    while (std::getline(in, line)) {
      ++lineno;
      if (line.empty()) continue;
      const std::string at = "labels.csv:" + std::to_string(lineno);
      const std::vector<std::string> tok = split(line, ',');
      if (tok.size() != 4) throw data_error(at + ": expected 4 columns");
      auto agent = std::find_if(
          trial.agents.begin(), trial.agents.end(),
          [&](const AgentTrack& a) { return a.agent_id == tok[0]; });
      if (agent == trial.agents.end())
        throw data_error(at + ": unknown agent '" + tok[0] + "'");
      const auto cls = std::find(class_names.begin(), class_names.end(), tok[1]);
      if (cls == class_names.end())
        throw data_error(at + ": unknown class '" + tok[1] + "'");
      const int c = static_cast<int>(cls - class_names.begin());
      const long start = parse_long(tok[2], at), end = parse_long(tok[3], at);
      if (start < 0 || start >= end || end > agent->frames())
        throw data_error(at + ": bout [" + tok[2] + "," + tok[3] +
                         ") outside track");
      for (long i = start; i < end; ++i) agent->labels[i][c] = 1;
      any = true;
    }
    if (any)
      for (AgentTrack& a : trial.agents)
        std::fill(a.label_mask.begin(), a.label_mask.end(), 1);
  }
  trial.validate();
  return trial;
}

WriterStats normalize_strokes(std::span<AgentTrack> tracks) {
  double sx = 0, sy = 0, sxx = 0, syy = 0;
  long n = 0;
  for (const AgentTrack& t : tracks)
    for (const Vec& x : t.x) {
      require(x.size() == 3, "strokes: rows must be (dx, dy, z)");
      if (x[2] > 0.5) {
        sx += x[0];
        sy += x[1];
        sxx += x[0] * x[0];
        syy += x[1] * x[1];
        ++n;
      }
    }
  require_data(n >= 2, "normalize_strokes: need at least 2 visible points");
  WriterStats s;
  s.mean_dx = sx / n;
  s.mean_dy = sy / n;
  const double vx = sxx / n - s.mean_dx * s.mean_dx;
  const double vy = syy / n - s.mean_dy * s.mean_dy;
  s.std_dx = vx > 1e-24 ? std::sqrt(vx) : 1.0;
  s.std_dy = vy > 1e-24 ? std::sqrt(vy) : 1.0;
  for (AgentTrack& t : tracks)
    for (Vec& x : t.x) {
      x[0] = (x[0] - s.mean_dx) / s.std_dx;
      x[1] = (x[1] - s.mean_dy) / s.std_dy;
    }
  return s;
}

void denormalize_strokes(std::span<AgentTrack> tracks, const WriterStats& s) {
  for (AgentTrack& t : tracks)
    for (Vec& x : t.x) {
      x[0] = x[0] * s.std_dx + s.mean_dx;
      x[1] = x[1] * s.std_dy + s.mean_dy;
    }
}

Vec denormalize_stroke(const Vec& x, const WriterStats& s) {
  require(x.size() == 3, "strokes: rows must be (dx, dy, z)");
  return {x[0] * s.std_dx + s.mean_dx, x[1] * s.std_dy + s.mean_dy, x[2]};
}

void save_writer_stats(const fs::path& path, const WriterStats& s) {
  std::ofstream out = open_out(path);
  out << "mean_dx,mean_dy,std_dx,std_dy\n"
      << fmt(s.mean_dx) << ',' << fmt(s.mean_dy) << ',' << fmt(s.std_dx) << ','
      << fmt(s.std_dy) << "\n";
}

WriterStats load_writer_stats(const fs::path& path) {
  std::ifstream in = open_in(path);
  std::string line;
  require_data(static_cast<bool>(std::getline(in, line)),
               "writer stats: missing header");
  require_data(static_cast<bool>(std::getline(in, line)),
               "writer stats: missing row");
  const std::vector<std::string> tok = split(line, ',');
  require_data(tok.size() == 4, "writer stats: expected 4 columns");
  WriterStats s;
  s.mean_dx = parse_double(tok[0], path.string());
  s.mean_dy = parse_double(tok[1], path.string());
  s.std_dx = parse_double(tok[2], path.string());
  s.std_dy = parse_double(tok[3], path.string());
  return s;
}

void subsample_labels(std::span<TrialData> trials, double p, uint64_t seed,
                      int chunk_frames) {
  require(p > 0.0 && p <= 1.0, "subsample: fraction must be in (0, 1]");
  require(chunk_frames > 0, "subsample: chunk size must be positive");
  if (p == 1.0) return;

  struct Chunk {
    size_t trial, agent;
    long start, end;
  };
  std::vector<Chunk> chunks;
  double total = 0;
  for (size_t ti = 0; ti < trials.size(); ++ti)
    for (size_t ai = 0; ai < trials[ti].agents.size(); ++ai) {
      const std::vector<uint8_t>& mask = trials[ti].agents[ai].label_mask;
      for (const Bout& run : frames_to_bouts(mask))
        for (long s = run.start; s < run.end; s += chunk_frames) {
          const long e = std::min(s + chunk_frames, run.end);
          chunks.push_back({ti, ai, s, e});
          total += static_cast<double>(e - s);
        }
    }

  Rng rng = make_rng(seed, 1);
  for (size_t i = chunks.size(); i > 1; --i)
    std::swap(chunks[i - 1],
              chunks[uniform_int(rng, 0, static_cast<int>(i) - 1)]);

  const double target = p * total;
  double kept = 0;
  size_t cut = 0;
  while (cut < chunks.size() && kept < target)
    kept += static_cast<double>(chunks[cut].end - chunks[cut].start), ++cut;

  for (TrialData& t : trials)
    for (AgentTrack& a : t.agents) {
      std::fill(a.label_mask.begin(), a.label_mask.end(), 0);
    }
  for (size_t i = 0; i < cut; ++i) {
    AgentTrack& a = trials[chunks[i].trial].agents[chunks[i].agent];
    std::fill(a.label_mask.begin() + chunks[i].start,
              a.label_mask.begin() + chunks[i].end, 1);
  }
  for (TrialData& t : trials)
    for (AgentTrack& a : t.agents)
      for (int i = 0; i < a.frames(); ++i)
        if (!a.label_mask[i])
          std::fill(a.labels[i].begin(), a.labels[i].end(), 0);
}

std::vector<Batch> make_batches(std::span<const TrialData> trials,
                                const BinSpec& bins, int t_window, int batch,
                                uint64_t seed,
                                std::vector<std::string>* warnings) {
  require(t_window >= 1 && batch >= 1, "make_batches: bad window/batch size");

  struct Ref {
    const AgentTrack* track;
    int global_index;
  };
  std::vector<Ref> refs;
  int index = 0;
  for (const TrialData& t : trials)
    for (const AgentTrack& a : t.agents) {
      if (a.frames() < 2) {
        if (warnings)
          warnings->push_back("skipping track " + t.trial_id + "/" +
                              a.agent_id + ": shorter than 2 frames");
        ++index;
        continue;
      }
      refs.push_back({&a, index++});
    }
  if (refs.empty()) return {};

  Rng rng = make_rng(seed, 2);
  for (size_t i = refs.size(); i > 1; --i)
    std::swap(refs[i - 1], refs[uniform_int(rng, 0, static_cast<int>(i) - 1)]);

  const int slots = std::min<int>(batch, static_cast<int>(refs.size()));
  std::vector<std::vector<Window>> slot_windows(slots);
  std::vector<long> slot_load(slots, 0);

  for (const Ref& ref : refs) {
    const AgentTrack& a = *ref.track;
    int slot = 0;
    for (int k = 1; k < slots; ++k)
      if (slot_load[k] < slot_load[slot]) slot = k;
    slot_load[slot] += a.frames();

    const int t_total = a.frames();
    const int dx = static_cast<int>(a.x[0].size());
    const int dv = static_cast<int>(a.v[0].size());
    const int n = static_cast<int>(a.labels[0].size());
    for (int w0 = 0; w0 < t_total; w0 += t_window) {
      Window w;
      w.reset = w0 == 0;
      w.track_ref = ref.global_index;
      w.x.assign(t_window, Vec(dx, 0.0));
      w.v.assign(t_window, Vec(dv, 0.0));
      w.x_target.assign(t_window, {});
      w.labels.assign(t_window, std::vector<uint8_t>(n, 0));
      w.label_mask.assign(t_window, 0);
      w.valid.assign(t_window, 0);
      for (int i = 0; i < t_window && w0 + i < t_total; ++i) {
        const int f = w0 + i;
        w.x[i] = a.x[f];
        w.v[i] = a.v[f];
        if (f + 1 < t_total) w.x_target[i] = encode_motion(bins, a.x[f + 1]);
        w.labels[i] = a.labels[f];
        w.label_mask[i] = a.label_mask[f];
        w.valid[i] = 1;
      }
      slot_windows[slot].push_back(std::move(w));
    }
  }

  size_t n_batches = 0;
  for (const auto& sw : slot_windows) n_batches = std::max(n_batches, sw.size());
  std::vector<Batch> out(n_batches);
  for (size_t b = 0; b < n_batches; ++b) {
    out[b].windows.resize(slots);
    for (int k = 0; k < slots; ++k)
      if (b < slot_windows[k].size()) out[b].windows[k] = slot_windows[k][b];
  }
  return out;
}

}  // namespace besim
