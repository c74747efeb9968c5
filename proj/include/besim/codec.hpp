#pragma once

#include <string>
#include <vector>

#include "besim/matrix.hpp"
#include "besim/rng.hpp"

namespace besim {

// Per-dimension bin edges for discretizing motion vectors. Bin counts may
// differ per dimension (e.g. a binary pen-visibility dimension next to
// finely binned offsets).
struct BinSpec {
  std::vector<Vec> edges;  // per dimension, bins(d)+1 strictly increasing values

  int dims() const { return static_cast<int>(edges.size()); }
  int bins(int dim) const { return static_cast<int>(edges[dim].size()) - 1; }
  std::vector<int> bins_per_dim() const {
    std::vector<int> out(edges.size());
    for (size_t d = 0; d < edges.size(); ++d) out[d] = bins(static_cast<int>(d));
    return out;
  }
};

// Equal-frequency (quantile) edges per dimension, extended to the observed
// min/max. Dimensions with fewer distinct values than bins fall back to
// equal-width (a constant dimension spans [v-0.5, v+0.5]); a note per
// fallback is appended to *warnings when given.
BinSpec fit_bins(const std::vector<Vec>& per_dim_values,
                 const std::vector<int>& bins_per_dim,
                 std::vector<std::string>* warnings = nullptr);
BinSpec fit_bins(const std::vector<Vec>& per_dim_values, int n_bins,
                 std::vector<std::string>* warnings = nullptr);

// Values outside the fitted range clamp to the first/last bin.
int encode_dim(const BinSpec& spec, int dim, double value);
std::vector<int> encode_motion(const BinSpec& spec, const Vec& x);

// Bin centers.
double decode_dim(const BinSpec& spec, int dim, int bin);
Vec decode_motion(const BinSpec& spec, const std::vector<int>& bins);

// Per dimension: bin ~ categorical(x_hat[d]), value ~ Uniform within the bin.
// Each distribution must sum to 1 within 1e-3.
Vec sample_motion(const BinSpec& spec, const std::vector<Vec>& x_hat, Rng& rng);

// CSV with header "dimension,edge_index,edge_value"; exact round trip.
void save_binspec(const std::string& path, const BinSpec& spec);
BinSpec load_binspec(const std::string& path);

}  // namespace besim
