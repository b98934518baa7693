#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "nsurf/core/camera.hpp"
#include "nsurf/core/surfel_map.hpp"
#include "nsurf/nn/bundle.hpp"

namespace nsurf {

enum class FusionScheme { gru, weighted_sum };

FusionScheme parse_fusion_scheme(const std::string& name);
std::string to_string(FusionScheme scheme);

struct FusionConfig {
  double delta_depth = 0.1;  // meters
  int k_candidates = 8;
  double normal_angle_max = 30.0;  // degrees
  FusionScheme scheme = FusionScheme::gru;
  int workers = 1;

  void validate() const;
};

struct AssociationResult {
  std::vector<std::pair<std::uint64_t, std::uint64_t>> merges;  // (local id, global id), ascending local id
  std::vector<std::uint64_t> inserts;                           // ascending local id
};

// Each local surfel is looked up at the pixel it projects to in the frame
// view. Candidates are the k nearest global disks on that pixel ray whose
// normal is within normal_angle_max of the local normal. Among candidates
// with |camera-z(local) - camera-z(hit)| < delta_depth the one with the
// smallest difference wins (ties: smaller center offset, then t, then id).
AssociationResult associate(const SurfelMap& global, const SurfelMap& local, const CameraIntrinsics& intr,
                            const Pose& pose, const FusionConfig& config);

struct GeometryMerge {
  SurfelGeometry geometry;
  bool degenerate_normal = false;  // averaged normal vanished; global normal kept
};

// Weight-averaged position, normal and radius; weights add. The id is the
// global surfel's.
GeometryMerge merge_geometry(const SurfelGeometry& global, const SurfelGeometry& local);

// GRU: local feature is the input, global feature the hidden state.
// weighted_sum: (w_l f_l + w_g f_g) / (w_l + w_g).
std::vector<float> merge_feature(FusionScheme scheme, std::span<const float> f_local,
                                 std::span<const float> f_global, double w_local, double w_global,
                                 nn::NetworkBundle& nets);

// Merges of one frame grouped so that every round touches each global row
// at most once. Replaying rounds in order reproduces sequential merging in
// ascending local order.
struct MergeRound {
  std::vector<int> global_rows;
  std::vector<int> local_rows;
  nn::Vector w_local;
  nn::Vector w_global;
};

struct FusionTrace {
  std::vector<MergeRound> rounds;
  std::vector<int> inserted_local_rows;  // appended to the global map in this order
};

// Feature side of integrate_frame as a differentiable program:
// global_features (N x F) and local_features (n x F) in, (N + inserts) x F
// out.
nn::Var replay_feature_fusion(nn::Tape& t, nn::NetworkBundle& nets, FusionScheme scheme, nn::Var global_features,
                              nn::Var local_features, const FusionTrace& trace);

struct FusionReport {
  int frame_index = 0;
  std::size_t merged = 0;
  std::size_t inserted = 0;
  std::size_t total_surfels = 0;
  std::size_t bytes = 0;
  double ms = 0.0;
  std::size_t degenerate_normals = 0;

  static std::string csv_header();
  std::string csv_row() const;
};

// Geometry-only integration: applies merges and inserts to the geometry of
// `global` (inserted surfels get fresh ids and zero features) and returns
// the trace needed to update features.
FusionTrace integrate_geometry(SurfelMap& global, const SurfelMap& local, const AssociationResult& assoc,
                               FusionReport& report);

FusionReport integrate_frame(SurfelMap& global, const SurfelMap& local, const CameraIntrinsics& intr,
                             const Pose& pose, const FusionConfig& config, nn::NetworkBundle& nets,
                             int frame_index = 0, FusionTrace* trace = nullptr);

}  // namespace nsurf
