#pragma once

#include <span>
#include <string>
#include <vector>

#include "besim/matrix.hpp"
#include "besim/rng.hpp"

namespace besim {

// One trainable tensor with its gradient and Adam state.
struct Parameter {
  std::string name;
  Matrix value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  long step_count = 0;

  Parameter() = default;
  Parameter(std::string n, int rows, int cols)
      : name(std::move(n)), value(rows, cols), grad(rows, cols),
        adam_m(rows, cols), adam_v(rows, cols) {}

  void zero_grad() { grad.fill(0.0); }
};

struct AdamSettings {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// Standard Adam step with bias correction; zeroes the gradient afterwards.
// An all-zero gradient leaves the parameter (and its moments) untouched.
void adam_update(Parameter& p, const AdamSettings& s);

// Returns the applied scale: 1 if the global L2 norm of all gradients is
// within max_norm, otherwise max_norm/norm after scaling every gradient.
double clip_global_norm(std::span<Parameter* const> params, double max_norm);

// Uniform in [-s, s] with s = 1/sqrt(fan_in).
void init_uniform(Parameter& p, int fan_in, Rng& rng);

}  // namespace besim
