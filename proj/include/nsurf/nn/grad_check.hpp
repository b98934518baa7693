#pragma once

#include <cstdint>
#include <functional>
#include <span>
#include <string>

#include "nsurf/nn/tensor.hpp"

namespace nsurf::nn {

struct GradCheckOptions {
  double eps = 1e-4;
  // Entries checked per parameter; 0 checks every entry. When smaller than
  // the tensor, entries are drawn without replacement from a seeded RNG.
  std::size_t max_entries_per_param = 0;
  std::uint64_t seed = 0;
  // Denominator floor of the relative error.
  double floor = 1e-8;
};

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::string worst_param;
  std::size_t worst_index = 0;
  double worst_analytic = 0.0;
  double worst_numeric = 0.0;
  std::size_t checked = 0;
};

// |a - n| / max(floor, |a| + |n|); 0 when both are exactly 0.
double relative_error(double analytic, double numeric, double floor = 1e-8);

// Compares analytic gradients against central differences.
// `loss(true)` must zero and then fill Parameter::grad for every parameter in
// `params` and return the loss; `loss(false)` only returns the loss.
GradCheckResult grad_check(const std::function<double(bool)>& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options = {});

}  // namespace nsurf::nn
