#pragma once

#include <vector>

#include <Eigen/Core>

#include "nsurf/core/camera.hpp"
#include "nsurf/core/surfel_map.hpp"
#include "nsurf/nn/bundle.hpp"
#include "nsurf/raster/raster.hpp"
#include "nsurf/render/embedding.hpp"

namespace nsurf {

template <class S>
using RowMatrix = Eigen::Matrix<S, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
template <class S>
using ColVector = Eigen::Matrix<S, Eigen::Dynamic, 1>;

// Constant (non-learned) inputs of a batch of shading points. Row i holds
//   context: [g(d), g(w), g(n), g(d - n)] for the surfel of point i
//   point:   g(x_i)
//   interp:  (r - |x_i - p|) / r
class HitInputs {
 public:
  explicit HitInputs(const PositionalEmbedding& emb);

  void add(int feature_row, const SurfelGeometry& surfel, const Vec3& point, double center_offset,
           const Vec3& view_dir);
  void reserve(std::size_t n);

  std::size_t size() const { return rows_.size(); }
  const PositionalEmbedding& embedding() const { return emb_; }
  const std::vector<int>& feature_rows() const { return rows_; }
  int context_width() const { return context_width_; }
  int point_width() const { return point_width_; }
  Eigen::Map<const nn::Matrix> context() const;
  Eigen::Map<const nn::Matrix> point() const;
  Eigen::Map<const nn::Vector> interp() const;

 private:
  PositionalEmbedding emb_;
  int context_width_;
  int point_width_;
  std::vector<int> rows_;
  std::vector<double> context_;
  std::vector<double> point_;
  std::vector<double> interp_;
};

// Forward-only shading networks in precision S, copied out of a bundle.
template <class S>
class ShadingModel {
 public:
  explicit ShadingModel(const nn::NetworkBundle& nets);

  // Interpolated 256-wide features for gathered surfel features (n x F).
  RowMatrix<S> interpolate(const RowMatrix<S>& surfel_features, const HitInputs& in) const;
  // Density and color from interpolated features.
  void shade(const RowMatrix<S>& features, const HitInputs& in, ColVector<S>& sigma, RowMatrix<S>& rgb) const;

 private:
  struct Layer {
    RowMatrix<S> weight;
    Eigen::Matrix<S, 1, Eigen::Dynamic> bias;
  };
  static Layer load(const nn::NetworkBundle& nets, const std::string& prefix);
  static RowMatrix<S> apply(const Layer& l, const RowMatrix<S>& x);

  int feature_dim_;
  int direction_width_;
  std::vector<Layer> feature_;
  Layer sigma_;
  std::vector<Layer> rgb_;
};

extern template class ShadingModel<float>;
extern template class ShadingModel<double>;

struct ShadeSample {
  double sigma = 0.0;
  Eigen::Vector3d rgb = Eigen::Vector3d::Zero();
};

// Single-point evaluations. view_dir is the unit ray direction.
Eigen::VectorXd interpolate_feature(const SurfelHit& hit, const Surfel& surfel, const Vec3& view_dir,
                                    const nn::NetworkBundle& nets);
ShadeSample shade_point(const Vec3& x, const Eigen::VectorXd& feature, const Vec3& view_dir,
                        const nn::NetworkBundle& nets);

// Differentiable shading of a batch: surfel_features is the N x F feature
// matrix of the map the hits index into.
struct ShadeVars {
  nn::Var sigma;  // n x 1
  nn::Var rgb;    // n x 3
};
ShadeVars shade_hits(nn::Tape& t, nn::NetworkBundle& nets, nn::Var surfel_features, const HitInputs& in);

}  // namespace nsurf
