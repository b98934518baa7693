#pragma once

#include <cstddef>
#include <cstdint>
#include <optional>
#include <span>
#include <unordered_map>
#include <vector>

#include <Eigen/Core>

namespace nsurf {

inline constexpr std::size_t kDefaultFeatureDim = 32;

using Vec3f = Eigen::Vector3f;
using FeatureRows = Eigen::Matrix<float, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Geometric part of a surfel. Stored in single precision, which is also the
// on-disk precision of the map format.
struct SurfelGeometry {
  std::uint64_t id = 0;
  Vec3f position = Vec3f::Zero();
  Vec3f normal = Vec3f::UnitZ();
  float radius = 0.0f;
  float weight = 0.0f;
};

// A surfel with its feature vector, as a standalone value.
struct Surfel {
  SurfelGeometry geometry;
  std::vector<float> feature;
};

// Throws std::invalid_argument when a surfel breaks the type invariants
// (unit normal, positive radius and weight, finite values, feature length).
void validate_surfel(const SurfelGeometry& g, std::span<const float> feature, std::size_t feature_dim);

// Collection of surfels with unique ids and a shared feature dimension.
// Storage is index-addressed; ids are stable across insertions.
class SurfelMap {
 public:
  explicit SurfelMap(std::size_t feature_dim = kDefaultFeatureDim);

  std::size_t size() const { return geometry_.size(); }
  bool empty() const { return geometry_.empty(); }
  std::size_t feature_dim() const { return feature_dim_; }
  std::uint64_t next_id() const { return next_id_; }

  // Assigns a fresh id (ignores g.id) and returns it.
  std::uint64_t add(const SurfelGeometry& g, std::span<const float> feature);
  // Keeps g.id; throws std::invalid_argument on duplicates.
  void add_with_id(const SurfelGeometry& g, std::span<const float> feature);
  void reserve(std::size_t n);

  const SurfelGeometry& geometry(std::size_t index) const { return geometry_[index]; }
  SurfelGeometry& geometry(std::size_t index) { return geometry_[index]; }
  const std::vector<SurfelGeometry>& geometries() const { return geometry_; }

  std::span<const float> feature(std::size_t index) const {
    return {features_.data() + index * feature_dim_, feature_dim_};
  }
  std::span<float> feature(std::size_t index) {
    return {features_.data() + index * feature_dim_, feature_dim_};
  }
  // size() x feature_dim() view of all features.
  Eigen::Map<const FeatureRows> features() const {
    return {features_.data(), static_cast<Eigen::Index>(size()),
            static_cast<Eigen::Index>(feature_dim_)};
  }
  Eigen::Map<FeatureRows> features() {
    return {features_.data(), static_cast<Eigen::Index>(size()),
            static_cast<Eigen::Index>(feature_dim_)};
  }

  Surfel surfel(std::size_t index) const;
  std::optional<std::size_t> index_of(std::uint64_t id) const;

  double total_weight() const;
  std::size_t memory_bytes() const;

  // Exact equality of every stored field, including ids and order.
  bool operator==(const SurfelMap& other) const;

 private:
  std::size_t feature_dim_;
  std::uint64_t next_id_ = 0;
  std::vector<SurfelGeometry> geometry_;
  std::vector<float> features_;
  std::unordered_map<std::uint64_t, std::size_t> index_;
};

}  // namespace nsurf
