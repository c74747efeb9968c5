#include "besim/codec.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

#include "besim/errors.hpp"

namespace besim {

namespace {

Vec linspace(double lo, double hi, int count) {
  Vec out(count);
  for (int i = 0; i < count; ++i)
    out[i] = lo + (hi - lo) * double(i) / double(count - 1);
  out.front() = lo;
  out.back() = hi;
  return out;
}

}  // namespace

BinSpec fit_bins(const std::vector<Vec>& per_dim_values,
                 const std::vector<int>& bins_per_dim,
                 std::vector<std::string>* warnings) {
  require(!per_dim_values.empty(), "fit_bins needs at least one dimension");
  require(bins_per_dim.size() == per_dim_values.size(),
          "fit_bins: bins_per_dim length mismatch");

  BinSpec spec;
  spec.edges.reserve(per_dim_values.size());
  for (size_t d = 0; d < per_dim_values.size(); ++d) {
    const int n_bins = bins_per_dim[d];
    require(n_bins >= 1, "n_bins must be >= 1");
    Vec sorted = per_dim_values[d];
    require(!sorted.empty(), "fit_bins: empty dimension");
    require(all_finite(sorted), "fit_bins: non-finite value");
    std::sort(sorted.begin(), sorted.end());
    const double lo = sorted.front(), hi = sorted.back();

    size_t distinct = 1;
    for (size_t i = 1; i < sorted.size(); ++i)
      if (sorted[i] != sorted[i - 1]) ++distinct;

    Vec edges;
    if (lo == hi) {
      edges = linspace(lo - 0.5, hi + 0.5, n_bins + 1);
      if (warnings)
        warnings->push_back("dimension " + std::to_string(d) +
                            " is constant; using equal-width bins around it");
    } else if (distinct < static_cast<size_t>(n_bins)) {
      edges = linspace(lo, hi, n_bins + 1);
      if (warnings)
        warnings->push_back("dimension " + std::to_string(d) + " has only " +
                            std::to_string(distinct) +
                            " distinct values; using equal-width bins");
    } else {
      const size_t m = sorted.size();
      edges.resize(n_bins + 1);
      for (int k = 0; k <= n_bins; ++k) {
        double pos = double(k) * double(m - 1) / double(n_bins);
        size_t i = static_cast<size_t>(pos);
        double frac = pos - double(i);
        edges[k] = (i + 1 < m) ? sorted[i] + frac * (sorted[i + 1] - sorted[i])
                               : sorted[i];
      }
      // Ties can collapse quantiles; nudge duplicates upward so edges stay
      // strictly increasing (tied values all land in the bin below the run).
      const double eps = std::max(1e-12, (hi - lo) * 1e-9);
      for (int k = 1; k <= n_bins; ++k)
        if (edges[k] <= edges[k - 1]) edges[k] = edges[k - 1] + eps;
    }
    spec.edges.push_back(std::move(edges));
  }
  return spec;
}

BinSpec fit_bins(const std::vector<Vec>& per_dim_values, int n_bins,
                 std::vector<std::string>* warnings) {
  return fit_bins(per_dim_values,
                  std::vector<int>(per_dim_values.size(), n_bins), warnings);
}

int encode_dim(const BinSpec& spec, int dim, double value) {
  const Vec& e = spec.edges[dim];
  int idx = static_cast<int>(std::upper_bound(e.begin(), e.end(), value) -
                             e.begin()) - 1;
  return std::clamp(idx, 0, spec.bins(dim) - 1);
}

std::vector<int> encode_motion(const BinSpec& spec, const Vec& x) {
  require(static_cast<int>(x.size()) == spec.dims(),
          "encode_motion dimension mismatch");
  std::vector<int> out(x.size());
  for (size_t d = 0; d < x.size(); ++d)
    out[d] = encode_dim(spec, static_cast<int>(d), x[d]);
  return out;
}

double decode_dim(const BinSpec& spec, int dim, int bin) {
  require(bin >= 0 && bin < spec.bins(dim), "decode_dim: bin out of range");
  const Vec& e = spec.edges[dim];
  return 0.5 * (e[bin] + e[bin + 1]);
}

Vec decode_motion(const BinSpec& spec, const std::vector<int>& bins) {
  require(static_cast<int>(bins.size()) == spec.dims(),
          "decode_motion dimension mismatch");
  Vec out(bins.size());
  for (size_t d = 0; d < bins.size(); ++d)
    out[d] = decode_dim(spec, static_cast<int>(d), bins[d]);
  return out;
}

Vec sample_motion(const BinSpec& spec, const std::vector<Vec>& x_hat, Rng& rng) {
  require(static_cast<int>(x_hat.size()) == spec.dims(),
          "sample_motion dimension mismatch");
  Vec out(x_hat.size());
  for (size_t d = 0; d < x_hat.size(); ++d) {
    const int n = spec.bins(static_cast<int>(d));
    const Vec& p = x_hat[d];
    require(static_cast<int>(p.size()) == n, "sample_motion bin count mismatch");
    double sum = 0.0;
    for (double v : p) sum += v;
    require(std::abs(sum - 1.0) <= 1e-3,
            "sample_motion: distribution not normalized");
    double u = uniform01(rng) * sum;
    int bin = n - 1;
    double acc = 0.0;
    for (int k = 0; k < n; ++k) {
      acc += p[k];
      if (u < acc) {
        bin = k;
        break;
      }
    }
    const Vec& e = spec.edges[d];
    out[d] = uniform(rng, e[bin], e[bin + 1]);
  }
  return out;
}

void save_binspec(const std::string& path, const BinSpec& spec) {
  std::ofstream out(path);
  require_data(out.good(), "cannot open '" + path + "' for writing");
  out << "dimension,edge_index,edge_value\n";
  char buf[64];
  for (int d = 0; d < spec.dims(); ++d) {
    for (size_t k = 0; k < spec.edges[d].size(); ++k) {
      std::snprintf(buf, sizeof buf, "%.17g", spec.edges[d][k]);
      out << d << ',' << k << ',' << buf << '\n';
    }
  }
  require_data(out.good(), "write failed for '" + path + "'");
}

BinSpec load_binspec(const std::string& path) {
  std::ifstream in(path);
  require_data(in.good(), "cannot open '" + path + "'");
  std::string line;
  require_data(static_cast<bool>(std::getline(in, line)),
               "empty bin file '" + path + "'");
  require_data(line == "dimension,edge_index,edge_value",
               "bad bin file header in '" + path + "'");

  std::map<int, std::map<int, double>> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    int d = 0, k = 0;
    double v = 0.0;
    if (std::sscanf(line.c_str(), "%d,%d,%lf", &d, &k, &v) != 3)
      throw data_error(path + ":" + std::to_string(lineno) + ": bad bin row");
    rows[d][k] = v;
  }

  BinSpec spec;
  int next_dim = 0;
  for (auto& [d, edges] : rows) {
    require_data(d == next_dim++, "non-contiguous dimensions in '" + path + "'");
    Vec e;
    int next_k = 0;
    for (auto& [k, v] : edges) {
      require_data(k == next_k++, "non-contiguous edge indices in '" + path + "'");
      e.push_back(v);
    }
    require_data(e.size() >= 2, "dimension with fewer than two edges");
    for (size_t i = 1; i < e.size(); ++i)
      require_data(e[i] > e[i - 1], "edges not strictly increasing in '" + path + "'");
    spec.edges.push_back(std::move(e));
  }
  require_data(!spec.edges.empty(), "no bins in '" + path + "'");
  return spec;
}

}  // namespace besim
