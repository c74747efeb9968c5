#include "besim/gru.hpp"

#include <cmath>

#include "besim/errors.hpp"
#include "besim/matrix.hpp"

namespace besim {

namespace {

inline double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

}  // namespace

GruCell::GruCell(const std::string& name_prefix, int input_size, int hidden_size)
    : input_size(input_size), hidden_size(hidden_size) {
  require(input_size > 0 && hidden_size > 0, "gru sizes must be positive");
  const int cols = input_size + hidden_size;
  w_z = Parameter(name_prefix + ".w_z", hidden_size, cols);
  w_r = Parameter(name_prefix + ".w_r", hidden_size, cols);
  w_c = Parameter(name_prefix + ".w_c", hidden_size, cols);
  b_z = Parameter(name_prefix + ".b_z", hidden_size, 1);
  b_r = Parameter(name_prefix + ".b_r", hidden_size, 1);
  b_c = Parameter(name_prefix + ".b_c", hidden_size, 1);
}

void GruCell::init(Rng& rng) {
  const int fan_in = input_size + hidden_size;
  init_uniform(w_z, fan_in, rng);
  init_uniform(w_r, fan_in, rng);
  init_uniform(w_c, fan_in, rng);
  // Biases start at zero.
}

std::vector<Parameter*> GruCell::params() {
  return {&w_z, &w_r, &w_c, &b_z, &b_r, &b_c};
}

Vec gru_forward(const GruCell& cell, const Vec& input, const Vec& h_prev,
                GruCache* cache) {
  const int in = cell.input_size;
  const int hid = cell.hidden_size;
  require(static_cast<int>(input.size()) == in, "gru input size mismatch");
  require(static_cast<int>(h_prev.size()) == hid, "gru state size mismatch");

  Vec gate_in(in + hid);
  std::copy(input.begin(), input.end(), gate_in.begin());
  std::copy(h_prev.begin(), h_prev.end(), gate_in.begin() + in);

  Vec z(hid), r(hid);
  matvec(cell.w_z.value, gate_in, z);
  matvec(cell.w_r.value, gate_in, r);
  for (int j = 0; j < hid; ++j) {
    z[j] = sigmoid(z[j] + cell.b_z.value.data[j]);
    r[j] = sigmoid(r[j] + cell.b_r.value.data[j]);
  }

  Vec cand_in = gate_in;
  for (int j = 0; j < hid; ++j) cand_in[in + j] = r[j] * h_prev[j];

  Vec c(hid);
  matvec(cell.w_c.value, cand_in, c);
  for (int j = 0; j < hid; ++j) c[j] = std::tanh(c[j] + cell.b_c.value.data[j]);

  Vec h_new(hid);
  for (int j = 0; j < hid; ++j)
    h_new[j] = (1.0 - z[j]) * h_prev[j] + z[j] * c[j];

  if (cache) {
    cache->gate_in = std::move(gate_in);
    cache->cand_in = std::move(cand_in);
    cache->z = std::move(z);
    cache->r = std::move(r);
    cache->c = std::move(c);
    cache->h_prev = h_prev;
  }
  return h_new;
}

void gru_backward(GruCell& cell, const GruCache& cache, const Vec& dh_new,
                  Vec& dinput, Vec& dh_prev) {
  const int in = cell.input_size;
  const int hid = cell.hidden_size;
  require(static_cast<int>(dh_new.size()) == hid, "gru dh_new size mismatch");

  // h' = (1-z).*h + z.*c
  Vec dz(hid), dc(hid);
  dh_prev.assign(hid, 0.0);
  for (int j = 0; j < hid; ++j) {
    dz[j] = dh_new[j] * (cache.c[j] - cache.h_prev[j]);
    dc[j] = dh_new[j] * cache.z[j];
    dh_prev[j] = dh_new[j] * (1.0 - cache.z[j]);
  }

  // Through tanh and sigmoid nonlinearities to pre-activation grads.
  for (int j = 0; j < hid; ++j) {
    dc[j] *= 1.0 - cache.c[j] * cache.c[j];
    dz[j] *= cache.z[j] * (1.0 - cache.z[j]);
  }

  // Candidate path: c_pre = W_c [x; r.*h] + b_c
  Vec dcand_in(in + hid, 0.0);
  outer_add(cell.w_c.grad, dc, cache.cand_in);
  matvec_t_add(cell.w_c.value, dc, dcand_in);
  for (int j = 0; j < hid; ++j) cell.b_c.grad.data[j] += dc[j];

  Vec dr(hid);
  for (int j = 0; j < hid; ++j) {
    dr[j] = dcand_in[in + j] * cache.h_prev[j];
    dh_prev[j] += dcand_in[in + j] * cache.r[j];
    dr[j] *= cache.r[j] * (1.0 - cache.r[j]);
  }

  // Gate paths share gate_in = [x; h].
  Vec dgate_in(in + hid, 0.0);
  outer_add(cell.w_z.grad, dz, cache.gate_in);
  matvec_t_add(cell.w_z.value, dz, dgate_in);
  outer_add(cell.w_r.grad, dr, cache.gate_in);
  matvec_t_add(cell.w_r.value, dr, dgate_in);
  for (int j = 0; j < hid; ++j) {
    cell.b_z.grad.data[j] += dz[j];
    cell.b_r.grad.data[j] += dr[j];
  }

  dinput.assign(in, 0.0);
  for (int i = 0; i < in; ++i) dinput[i] = dcand_in[i] + dgate_in[i];
  for (int j = 0; j < hid; ++j) dh_prev[j] += dgate_in[in + j];
}

}  // namespace besim
