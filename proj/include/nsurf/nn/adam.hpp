#pragma once

#include <span>

#include "nsurf/nn/tensor.hpp"

namespace nsurf::nn {

struct AdamConfig {
  double lr = 1e-3;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

// One bias-corrected Adam update of every trainable parameter from its
// accumulated grad. Moments live in the Parameter; frozen ones are skipped.
void adam_step(std::span<Parameter* const> params, const AdamConfig& config);

}  // namespace nsurf::nn
