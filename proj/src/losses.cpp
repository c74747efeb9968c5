#include "besim/losses.hpp"

#include <algorithm>
#include <cmath>

#include "besim/errors.hpp"

namespace besim {

void softmax_inplace(double* x, int n) {
  double mx = x[0];
  for (int i = 1; i < n; ++i) mx = std::max(mx, x[i]);
  double sum = 0.0;
  for (int i = 0; i < n; ++i) {
    x[i] = std::exp(x[i] - mx);
    sum += x[i];
  }
  const double inv = 1.0 / sum;
  for (int i = 0; i < n; ++i) x[i] *= inv;
}

Vec softmax(const Vec& logits) {
  require(!logits.empty(), "softmax: empty logits");
  Vec out = logits;
  softmax_inplace(out.data(), static_cast<int>(out.size()));
  return out;
}

CrossEntropyResult softmax_cross_entropy(const Vec& logits, int target) {
  require(!logits.empty(), "softmax_cross_entropy: empty logits");
  if (target < 0 || target >= static_cast<int>(logits.size()))
    throw contract_error("softmax_cross_entropy: target index out of range");
  CrossEntropyResult res;
  res.dlogits = softmax(logits);
  const double p = std::max(res.dlogits[target], 1e-12);
  res.loss = -std::log(p);
  res.dlogits[target] -= 1.0;
  return res;
}

double binary_cross_entropy(double p, double y, double* d_dp) {
  constexpr double lo = 1e-6;
  constexpr double hi = 1.0 - 1e-6;
  const bool clamped = p < lo || p > hi;
  const double pc = std::clamp(p, lo, hi);
  const double loss = -(y * std::log(pc) + (1.0 - y) * std::log(1.0 - pc));
  if (d_dp) *d_dp = clamped ? 0.0 : (pc - y) / (pc * (1.0 - pc));
  return loss;
}

}  // namespace besim
