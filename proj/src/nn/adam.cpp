#include "nsurf/nn/adam.hpp"

#include <cmath>

namespace nsurf::nn {

void adam_step(std::span<Parameter* const> params, const AdamConfig& c) {
  for (Parameter* p : params) {
    if (!p->trainable) continue;
    ++p->adam_steps;
    const double t = static_cast<double>(p->adam_steps);
    const double correction1 = 1.0 - std::pow(c.beta1, t);
    const double correction2 = 1.0 - std::pow(c.beta2, t);
    p->adam_m = c.beta1 * p->adam_m + (1.0 - c.beta1) * p->grad;
    p->adam_v = c.beta2 * p->adam_v + (1.0 - c.beta2) * p->grad.cwiseAbs2();
    p->value.values.array() -=
        c.lr * (p->adam_m.array() / correction1) / ((p->adam_v.array() / correction2).sqrt() + c.eps);
  }
}

}  // namespace nsurf::nn
