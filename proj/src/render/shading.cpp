#include "nsurf/render/shading.hpp"

#include <algorithm>
#include <array>
#include <stdexcept>

#include "nsurf/nn/ops.hpp"

namespace nsurf {

HitInputs::HitInputs(const PositionalEmbedding& emb)
    : emb_(emb), context_width_(emb.width(3) * 3 + emb.width(1)), point_width_(emb.width(3)) {}

void HitInputs::reserve(std::size_t n) {
  rows_.reserve(n);
  context_.reserve(n * static_cast<std::size_t>(context_width_));
  point_.reserve(n * static_cast<std::size_t>(point_width_));
  interp_.reserve(n);
}

void HitInputs::add(int feature_row, const SurfelGeometry& surfel, const Vec3& point, double center_offset,
                    const Vec3& view_dir) {
  const Vec3 n = surfel.normal.cast<double>();
  const Vec3 dn = view_dir - n;
  const double w = surfel.weight;
  const std::size_t c0 = context_.size();
  context_.resize(c0 + static_cast<std::size_t>(context_width_));
  double* out = context_.data() + c0;
  const int w3 = emb_.width(3);
  positional_encode_into(std::span<const double>(view_dir.data(), 3), emb_, out);
  positional_encode_into(std::span<const double>(&w, 1), emb_, out + w3);
  positional_encode_into(std::span<const double>(n.data(), 3), emb_, out + w3 + emb_.width(1));
  positional_encode_into(std::span<const double>(dn.data(), 3), emb_, out + 2 * w3 + emb_.width(1));
  const std::size_t p0 = point_.size();
  point_.resize(p0 + static_cast<std::size_t>(point_width_));
  positional_encode_into(std::span<const double>(point.data(), 3), emb_, point_.data() + p0);
  const double r = surfel.radius;
  interp_.push_back(r > 0.0 ? std::max(0.0, (r - center_offset) / r) : 0.0);
  rows_.push_back(feature_row);
}

Eigen::Map<const nn::Matrix> HitInputs::context() const {
  return {context_.data(), static_cast<Eigen::Index>(size()), context_width_};
}
Eigen::Map<const nn::Matrix> HitInputs::point() const {
  return {point_.data(), static_cast<Eigen::Index>(size()), point_width_};
}
Eigen::Map<const nn::Vector> HitInputs::interp() const {
  return {interp_.data(), static_cast<Eigen::Index>(size())};
}

template <class S>
typename ShadingModel<S>::Layer ShadingModel<S>::load(const nn::NetworkBundle& nets, const std::string& prefix) {
  const nn::Parameter& w = nets.get(prefix + ".weight");
  const nn::Parameter& b = nets.get(prefix + ".bias");
  Layer l;
  l.weight = w.value.values.template cast<S>();
  l.bias = b.value.values.row(0).template cast<S>();
  return l;
}

template <class S>
RowMatrix<S> ShadingModel<S>::apply(const Layer& l, const RowMatrix<S>& x) {
  RowMatrix<S> y(x.rows(), l.weight.cols());
  y.noalias() = x * l.weight;
  y.rowwise() += l.bias;
  return y;
}

template <class S>
ShadingModel<S>::ShadingModel(const nn::NetworkBundle& nets)
    : feature_dim_(nets.config().feature_dim),
      direction_width_(PositionalEmbedding::from_config(nets.config()).width(3)) {
  feature_.push_back(load(nets, "shade.feature.0"));
  feature_.push_back(load(nets, "shade.feature.1"));
  sigma_ = load(nets, "shade.sigma");
  for (int i = 0; i < nets.config().rgb_layers; ++i) rgb_.push_back(load(nets, "shade.rgb." + std::to_string(i)));
}

template <class S>
RowMatrix<S> ShadingModel<S>::interpolate(const RowMatrix<S>& surfel_features, const HitInputs& in) const {
  const Eigen::Index n = static_cast<Eigen::Index>(in.size());
  if (surfel_features.rows() != n || surfel_features.cols() != feature_dim_) {
    throw std::invalid_argument("shading: feature rows do not match hits");
  }
  RowMatrix<S> x(n, feature_dim_ + in.context_width());
  x.leftCols(feature_dim_) = surfel_features;
  x.rightCols(in.context_width()) = in.context().template cast<S>();
  RowMatrix<S> h = apply(feature_[0], x).cwiseMax(S(0));
  RowMatrix<S> f = apply(feature_[1], h);
  f.array().colwise() *= in.interp().template cast<S>().array();
  return f;
}

template <class S>
void ShadingModel<S>::shade(const RowMatrix<S>& features, const HitInputs& in, ColVector<S>& sigma,
                            RowMatrix<S>& rgb) const {
  const Eigen::Index n = features.rows();
  const Eigen::Index fw = features.cols();
  RowMatrix<S> xs(n, fw + in.point_width());
  xs.leftCols(fw) = features;
  xs.rightCols(in.point_width()) = in.point().template cast<S>();
  sigma = apply(sigma_, xs).col(0).cwiseMax(S(0));

  RowMatrix<S> h(n, fw + direction_width_);
  h.leftCols(fw) = features;
  h.rightCols(direction_width_) = in.context().leftCols(direction_width_).template cast<S>();
  for (std::size_t i = 0; i + 1 < rgb_.size(); ++i) h = apply(rgb_[i], h).cwiseMax(S(0));
  rgb = apply(rgb_.back(), h);
  rgb = (S(1) / (S(1) + (-rgb.array()).exp())).matrix();
}

template class ShadingModel<float>;
template class ShadingModel<double>;

Eigen::VectorXd interpolate_feature(const SurfelHit& hit, const Surfel& surfel, const Vec3& view_dir,
                                    const nn::NetworkBundle& nets) {
  HitInputs in(PositionalEmbedding::from_config(nets.config()));
  in.add(0, surfel.geometry, hit.hit_point, hit.center_offset, view_dir);
  RowMatrix<double> f(1, static_cast<Eigen::Index>(surfel.feature.size()));
  for (std::size_t i = 0; i < surfel.feature.size(); ++i) f(0, static_cast<Eigen::Index>(i)) = surfel.feature[i];
  return ShadingModel<double>(nets).interpolate(f, in).row(0).transpose();
}

ShadeSample shade_point(const Vec3& x, const Eigen::VectorXd& feature, const Vec3& view_dir,
                        const nn::NetworkBundle& nets) {
  // Only g(d) and g(x) enter this stage; the surfel part of the context is
  // a placeholder.
  HitInputs in(PositionalEmbedding::from_config(nets.config()));
  SurfelGeometry placeholder;
  placeholder.radius = 1.0f;
  placeholder.weight = 1.0f;
  in.add(0, placeholder, x, 0.0, view_dir);
  ColVector<double> sigma;
  RowMatrix<double> rgb;
  ShadingModel<double>(nets).shade(feature.transpose(), in, sigma, rgb);
  return {sigma(0), rgb.row(0).transpose()};
}

ShadeVars shade_hits(nn::Tape& t, nn::NetworkBundle& nets, nn::Var surfel_features, const HitInputs& in) {
  using namespace nn;
  const int dir_width = in.embedding().width(3);
  const Var f = gather_rows(t, surfel_features, in.feature_rows());
  const Var context = t.constant(in.context());
  Var h = relu(t, dense(t, nets, "shade.feature.0", concat_cols(t, {f, context})));
  Var feat = scale_rows(t, dense(t, nets, "shade.feature.1", h), in.interp());
  ShadeVars out;
  out.sigma = relu(t, dense(t, nets, "shade.sigma", concat_cols(t, {feat, t.constant(in.point())})));
  Var r = concat_cols(t, {feat, t.constant(in.context().leftCols(dir_width))});
  const int layers = nets.config().rgb_layers;
  for (int i = 0; i < layers; ++i) {
    r = dense(t, nets, "shade.rgb." + std::to_string(i), r);
    r = (i + 1 < layers) ? relu(t, r) : sigmoid(t, r);
  }
  out.rgb = r;
  return out;
}

}  // namespace nsurf
