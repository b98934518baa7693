#include "nsurf/core/surfel_map.hpp"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <stdexcept>

namespace nsurf {

void validate_surfel(const SurfelGeometry& g, std::span<const float> feature, std::size_t feature_dim) {
  if (feature.size() != feature_dim) {
    throw std::invalid_argument("surfel: feature length does not match map feature dimension");
  }
  if (!g.position.allFinite() || !g.normal.allFinite() || !std::isfinite(g.radius) ||
      !std::isfinite(g.weight)) {
    throw std::invalid_argument("surfel: non-finite geometry");
  }
  if (std::abs(g.normal.cast<double>().norm() - 1.0) > 1e-6) {
    throw std::invalid_argument("surfel: normal is not unit length");
  }
  if (!(g.radius > 0.0f) || !(g.weight > 0.0f)) {
    throw std::invalid_argument("surfel: radius and weight must be positive");
  }
  for (float f : feature) {
    if (!std::isfinite(f)) {
      throw std::invalid_argument("surfel: non-finite feature");
    }
  }
}

SurfelMap::SurfelMap(std::size_t feature_dim) : feature_dim_(feature_dim) {
  if (feature_dim == 0) {
    throw std::invalid_argument("surfel map: feature dimension must be positive");
  }
}

std::uint64_t SurfelMap::add(const SurfelGeometry& g, std::span<const float> feature) {
  SurfelGeometry copy = g;
  copy.id = next_id_;
  add_with_id(copy, feature);
  return copy.id;
}

void SurfelMap::add_with_id(const SurfelGeometry& g, std::span<const float> feature) {
  validate_surfel(g, feature, feature_dim_);
  if (!index_.emplace(g.id, geometry_.size()).second) {
    throw std::invalid_argument("surfel map: duplicate surfel id");
  }
  geometry_.push_back(g);
  features_.insert(features_.end(), feature.begin(), feature.end());
  next_id_ = std::max(next_id_, g.id + 1);
}

void SurfelMap::reserve(std::size_t n) {
  geometry_.reserve(n);
  features_.reserve(n * feature_dim_);
  index_.reserve(n);
}

Surfel SurfelMap::surfel(std::size_t index) const {
  const auto f = feature(index);
  return {geometry_[index], std::vector<float>(f.begin(), f.end())};
}

std::optional<std::size_t> SurfelMap::index_of(std::uint64_t id) const {
  const auto it = index_.find(id);
  if (it == index_.end()) {
    return std::nullopt;
  }
  return it->second;
}

double SurfelMap::total_weight() const {
  double total = 0.0;
  for (const auto& g : geometry_) {
    total += g.weight;
  }
  return total;
}

std::size_t SurfelMap::memory_bytes() const {
  // Payload as serialized: 8 floats of geometry, the feature, and the id.
  return size() * (8 * sizeof(float) + feature_dim_ * sizeof(float) + sizeof(std::uint64_t));
}

bool SurfelMap::operator==(const SurfelMap& other) const {
  if (feature_dim_ != other.feature_dim_ || size() != other.size()) {
    return false;
  }
  for (std::size_t i = 0; i < size(); ++i) {
    const auto& a = geometry_[i];
    const auto& b = other.geometry_[i];
    if (a.id != b.id || std::memcmp(a.position.data(), b.position.data(), 3 * sizeof(float)) != 0 ||
        std::memcmp(a.normal.data(), b.normal.data(), 3 * sizeof(float)) != 0 ||
        std::memcmp(&a.radius, &b.radius, sizeof(float)) != 0 ||
        std::memcmp(&a.weight, &b.weight, sizeof(float)) != 0) {
      return false;
    }
  }
  return features_.size() == other.features_.size() &&
         std::memcmp(features_.data(), other.features_.data(), features_.size() * sizeof(float)) == 0;
}

}  // namespace nsurf
