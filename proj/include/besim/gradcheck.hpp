#pragma once

#include <functional>
#include <span>

#include "besim/param.hpp"

namespace besim {

// loss_and_grad must zero the gradients, run forward+backward, and return the
// scalar loss with analytic gradients left in each Parameter's grad.
//
// Compares analytic gradients against central differences
// (loss(t+h)-loss(t-h))/2h on a seeded sample of at most
// max_entries_per_param entries per parameter and returns the maximum
// relative error |a-n|/max(|a|,|n|,s), where s is the largest analytic
// gradient magnitude across all parameters (floored at 1e-6). Scaling by s
// keeps near-zero entries, whose differences are dominated by roundoff in
// the loss evaluations, from drowning out real disagreements.
//
// The function is evaluated twice up front; if the two losses differ the
// loss is non-deterministic and a contract_error is thrown.
double finite_diff_check(const std::function<double()>& loss_and_grad,
                         std::span<Parameter*> params, double h,
                         int max_entries_per_param = 40, uint64_t seed = 0);

}  // namespace besim
