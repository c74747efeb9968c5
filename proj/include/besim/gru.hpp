#pragma once

#include <string>
#include <vector>

#include "besim/param.hpp"

namespace besim {

// Stored activations from one forward step; exactly what backward needs.
struct GruCache {
  Vec gate_in;   // [input; h_prev], length input_size + hidden_size
  Vec cand_in;   // [input; r .* h_prev]
  Vec z, r, c;   // post-activation gates and candidate
  Vec h_prev;
};

// Gated recurrent unit, original formulation: the reset gate scales h_prev
// before the candidate matmul.
//
//   z = sigmoid(W_z [x; h] + b_z)
//   r = sigmoid(W_r [x; h] + b_r)
//   c = tanh(W_c [x; r.*h] + b_c)
//   h' = (1 - z) .* h + z .* c
struct GruCell {
  int input_size = 0;
  int hidden_size = 0;
  Parameter w_z, w_r, w_c;  // hidden_size x (input_size + hidden_size)
  Parameter b_z, b_r, b_c;  // hidden_size x 1

  GruCell() = default;
  GruCell(const std::string& name_prefix, int input_size, int hidden_size);

  void init(Rng& rng);
  std::vector<Parameter*> params();
};

// Returns h_new; fills *cache when non-null.
Vec gru_forward(const GruCell& cell, const Vec& input, const Vec& h_prev,
                GruCache* cache = nullptr);

// Accumulates parameter gradients into the cell (+=) and writes the input
// and previous-state gradients. dinput/dh_prev are overwritten.
void gru_backward(GruCell& cell, const GruCache& cache, const Vec& dh_new,
                  Vec& dinput, Vec& dh_prev);

}  // namespace besim
