#include "besim/param.hpp"

#include <cmath>

#include "besim/errors.hpp"

namespace besim {

void adam_update(Parameter& p, const AdamSettings& s) {
  if (!all_finite(p.grad))
    throw numeric_error("non-finite gradient in parameter '" + p.name + "'");

  bool any = false;
  for (double g : p.grad.data)
    if (g != 0.0) { any = true; break; }
  if (!any) return;

  p.step_count += 1;
  const double bc1 = 1.0 - std::pow(s.beta1, static_cast<double>(p.step_count));
  const double bc2 = 1.0 - std::pow(s.beta2, static_cast<double>(p.step_count));
  for (size_t i = 0; i < p.value.size(); ++i) {
    const double g = p.grad.data[i];
    double& m = p.adam_m.data[i];
    double& v = p.adam_v.data[i];
    m = s.beta1 * m + (1.0 - s.beta1) * g;
    v = s.beta2 * v + (1.0 - s.beta2) * g * g;
    const double mhat = m / bc1;
    const double vhat = v / bc2;
    p.value.data[i] -= s.lr * mhat / (std::sqrt(vhat) + s.eps);
  }
  p.zero_grad();
}

double clip_global_norm(std::span<Parameter* const> params, double max_norm) {
  require(max_norm > 0.0, "clip_global_norm: max_norm must be positive");
  double sq = 0.0;
  for (const Parameter* p : params)
    for (double g : p->grad.data) sq += g * g;
  const double norm = std::sqrt(sq);
  if (norm <= max_norm) return 1.0;
  const double scale = max_norm / norm;
  for (Parameter* p : params)
    for (double& g : p->grad.data) g *= scale;
  return scale;
}

void init_uniform(Parameter& p, int fan_in, Rng& rng) {
  const double s = 1.0 / std::sqrt(static_cast<double>(fan_in > 0 ? fan_in : 1));
  for (double& x : p.value.data) x = uniform(rng, -s, s);
}

}  // namespace besim
