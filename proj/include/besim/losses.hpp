#pragma once

#include "besim/matrix.hpp"

namespace besim {

// Max-subtraction softmax over the whole vector.
Vec softmax(const Vec& logits);

// In-place variant over a raw slice (used for per-dimension output blocks).
void softmax_inplace(double* x, int n);

struct CrossEntropyResult {
  double loss = 0.0;
  Vec dlogits;
};

// loss = -log(softmax(logits)[target]); dlogits = softmax(logits) - onehot.
// Probabilities are clamped at 1e-12 before the log.
CrossEntropyResult softmax_cross_entropy(const Vec& logits, int target);

// Binary cross-entropy on a probability already in [0,1]; p is clamped to
// [1e-6, 1-1e-6]. d_dp is the derivative w.r.t. the unclamped input (zero in
// the clamped region, matching finite differences).
double binary_cross_entropy(double p, double y, double* d_dp);

}  // namespace besim
