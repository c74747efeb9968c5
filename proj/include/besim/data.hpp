#pragma once

#include <cstdint>
#include <filesystem>
#include <span>
#include <string>
#include <vector>

#include "besim/codec.hpp"
#include "besim/trainer.hpp"

namespace besim {

struct Bout {
  int cls = 0;
  long start = 0;  // inclusive
  long end = 0;    // exclusive

  bool operator==(const Bout&) const = default;
};

struct AgentTrack {
  std::string agent_id;
  std::vector<Vec> x;                         // T x D_x
  std::vector<Vec> v;                         // T x D_v (D_v may be 0)
  std::vector<std::vector<uint8_t>> labels;   // T x N
  std::vector<uint8_t> label_mask;            // T

  int frames() const { return static_cast<int>(x.size()); }
  void validate() const;
};

struct TrialData {
  std::string trial_id;
  std::vector<AgentTrack> agents;

  void validate() const;  // equal frame counts across agents
};

// Maximal runs of 1 in one class column.
std::vector<Bout> frames_to_bouts(std::span<const uint8_t> column, int cls = 0);
std::vector<uint8_t> bouts_to_frames(std::span<const Bout> bouts, long frames,
                                     int cls = 0);

// On disk a trial is a directory holding one "agent_<id>.csv" per agent
// (header: frame,x0..,v0..) plus "labels.csv" (header:
// agent_id,class_name,start,end). A non-empty labels file marks every frame
// of the trial as labeled; an empty one leaves the whole mask false.
void save_trial(const TrialData& trial, const std::filesystem::path& dir,
                std::span<const std::string> class_names);
TrialData load_trial(const std::filesystem::path& dir,
                     std::span<const std::string> class_names);

struct WriterStats {
  double mean_dx = 0.0, mean_dy = 0.0;
  double std_dx = 1.0, std_dy = 1.0;
};

// z-scores the dx, dy columns of a writer's tracks in place, with moments
// taken over pen-down (z=1) frames only. Zero variance keeps scale 1.
// Track layout: x = (dx, dy, z), no sensory columns.
WriterStats normalize_strokes(std::span<AgentTrack> tracks);
void denormalize_strokes(std::span<AgentTrack> tracks, const WriterStats& stats);
Vec denormalize_stroke(const Vec& x, const WriterStats& stats);

void save_writer_stats(const std::filesystem::path& path, const WriterStats& s);
WriterStats load_writer_stats(const std::filesystem::path& path);

// Keeps whole contiguous labeled chunks (labeled runs cut to at most
// chunk_frames) in seeded shuffle order until the kept labeled-frame count
// reaches p x total; everything else is unmasked. Motion data is untouched.
void subsample_labels(std::span<TrialData> trials, double p, uint64_t seed,
                      int chunk_frames = 500);

// Streams each track through one batch slot as consecutive T_window windows
// (reset marked on the first), zero-padding the final short window with the
// valid mask off. Motion targets at step i are the encoded x of frame i+1;
// each track's last step has none. Tracks shorter than 2 frames are skipped
// with a warning.
std::vector<Batch> make_batches(std::span<const TrialData> trials,
                                const BinSpec& bins, int t_window = 50,
                                int batch = 20, uint64_t seed = 0,
                                std::vector<std::string>* warnings = nullptr);

}  // namespace besim
