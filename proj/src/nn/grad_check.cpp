#include "nsurf/nn/grad_check.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <vector>

namespace nsurf::nn {

double relative_error(double analytic, double numeric, double floor) {
  if (analytic == numeric) return 0.0;
  return std::abs(analytic - numeric) / std::max(floor, std::abs(analytic) + std::abs(numeric));
}

GradCheckResult grad_check(const std::function<double(bool)>& loss, std::span<Parameter* const> params,
                           const GradCheckOptions& options) {
  loss(true);
  std::vector<Matrix> analytic;
  analytic.reserve(params.size());
  for (const Parameter* p : params) analytic.push_back(p->grad);

  GradCheckResult result;
  std::mt19937_64 rng(options.seed);
  for (std::size_t k = 0; k < params.size(); ++k) {
    Parameter& p = *params[k];
    const std::size_t n = p.value.size();
    std::vector<std::size_t> entries(n);
    std::iota(entries.begin(), entries.end(), std::size_t{0});
    if (options.max_entries_per_param > 0 && options.max_entries_per_param < n) {
      std::shuffle(entries.begin(), entries.end(), rng);
      entries.resize(options.max_entries_per_param);
      std::sort(entries.begin(), entries.end());
    }
    for (std::size_t i : entries) {
      double& x = p.value.data()[i];
      const double saved = x;
      // Divide by the step actually taken after rounding.
      const double hi = saved + options.eps, lo = saved - options.eps;
      x = hi;
      const double up = loss(false);
      x = lo;
      const double down = loss(false);
      x = saved;
      const double numeric = (up - down) / (hi - lo);
      const double a = analytic[k].data()[i];
      const double err = relative_error(a, numeric, options.floor);
      ++result.checked;
      if (err > result.max_rel_error || result.worst_param.empty()) {
        result.max_rel_error = std::max(result.max_rel_error, err);
        if (err >= result.max_rel_error) {
          result.worst_param = p.name;
          result.worst_index = i;
          result.worst_analytic = a;
          result.worst_numeric = numeric;
        }
      }
    }
  }
  return result;
}

}  // namespace nsurf::nn
