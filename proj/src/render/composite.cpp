#include "nsurf/render/composite.hpp"

#include <cmath>
#include <stdexcept>

namespace nsurf {

void RenderConfig::validate() const {
  if (max_hits < 1) throw std::invalid_argument("render: max_hits must be >= 1");
  if (!(last_delta > 0.0)) throw std::invalid_argument("render: last_delta must be > 0");
  if (!background.allFinite()) throw std::invalid_argument("render: background must be finite");
}

std::vector<double> interval_lengths(std::span<const double> t, double last_delta) {
  std::vector<double> d(t.size());
  for (std::size_t i = 0; i < t.size(); ++i) d[i] = (i + 1 < t.size()) ? t[i + 1] - t[i] : last_delta;
  return d;
}

CompositeResult composite(std::span<const double> t, std::span<const double> sigma,
                          std::span<const Eigen::Vector3d> rgb, const RenderConfig& config) {
  if (t.size() != sigma.size() || t.size() != rgb.size()) {
    throw std::invalid_argument("composite: array lengths differ");
  }
  if (t.size() > static_cast<std::size_t>(config.max_hits)) {
    throw std::invalid_argument("composite: more hits than max_hits");
  }
  for (std::size_t i = 1; i < t.size(); ++i) {
    if (!(t[i] >= t[i - 1])) throw std::invalid_argument("composite: hits are not sorted by t");
  }
  const std::vector<double> delta = interval_lengths(t, config.last_delta);
  CompositeResult out;
  out.transmittance.resize(t.size());
  out.weights.resize(t.size());
  double tau = 1.0;
  for (std::size_t i = 0; i < t.size(); ++i) {
    out.transmittance[i] = tau;
    const double next = tau * std::exp(-sigma[i] * delta[i]);
    out.weights[i] = tau - next;
    out.color += out.weights[i] * rgb[i];
    tau = next;
  }
  out.final_transmittance = tau;
  out.color += tau * config.background;
  return out;
}

CompositeResult composite(std::span<const SurfelHit> hits, std::span<const double> sigma,
                          std::span<const Eigen::Vector3d> rgb, const RenderConfig& config) {
  std::vector<double> t(hits.size());
  for (std::size_t i = 0; i < hits.size(); ++i) t[i] = hits[i].t;
  return composite(t, sigma, rgb, config);
}

}  // namespace nsurf
