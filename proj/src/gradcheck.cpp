#include "besim/gradcheck.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "besim/errors.hpp"
#include "besim/rng.hpp"

namespace besim {

double finite_diff_check(const std::function<double()>& loss_and_grad,
                         std::span<Parameter*> params, double h,
                         int max_entries_per_param, uint64_t seed) {
  require(h > 0.0, "finite_diff_check: h must be positive");

  const double l0 = loss_and_grad();
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  const double l1 = loss_and_grad();
  if (l0 != l1)
    throw contract_error("finite_diff_check: loss function is non-deterministic");

  // Errors are scaled by the gradient's overall magnitude: entries whose true
  // gradient sits near the roundoff floor of (loss(t+h)-loss(t-h))/2h would
  // otherwise report pure double-precision noise as disagreement.
  double scale = 1e-6;
  for (const Matrix& g : analytic)
    for (double v : g.data) scale = std::max(scale, std::abs(v));

  Rng rng = make_rng(seed, 0x6fd1);
  double max_rel = 0.0;
  for (size_t pi = 0; pi < params.size(); ++pi) {
    Parameter* p = params[pi];
    const int n = static_cast<int>(p->value.size());
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    if (n > max_entries_per_param) {
      for (int i = 0; i < max_entries_per_param; ++i) {
        const int j = i + uniform_int(rng, 0, n - 1 - i);
        std::swap(idx[i], idx[j]);
      }
      idx.resize(max_entries_per_param);
    }
    for (int k : idx) {
      const double orig = p->value.data[k];
      p->value.data[k] = orig + h;
      const double lp = loss_and_grad();
      p->value.data[k] = orig - h;
      const double lm = loss_and_grad();
      p->value.data[k] = orig;
      const double numeric = (lp - lm) / (2.0 * h);
      const double a = analytic[pi].data[k];
      const double rel =
          std::abs(a - numeric) / std::max({std::abs(a), std::abs(numeric), scale});
      max_rel = std::max(max_rel, rel);
    }
  }
  // Leave gradients in the state the caller expects from loss_and_grad.
  loss_and_grad();
  return max_rel;
}

}  // namespace besim
