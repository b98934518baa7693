#pragma once

#include <cstddef>
#include <string>
#include <vector>

#include <Eigen/Core>

namespace nsurf::nn {

using Matrix = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using Vector = Eigen::VectorXd;

// Row-major dense tensor. `values` is the 2-D view whose column count is the
// last dimension and whose row count is the product of the others, so the
// flat storage order is the row-major order of `shape`.
struct Tensor {
  std::vector<std::size_t> shape;
  Matrix values;

  static Tensor zeros(std::vector<std::size_t> shape);
  std::size_t size() const { return static_cast<std::size_t>(values.size()); }
  double* data() { return values.data(); }
  const double* data() const { return values.data(); }
};

// Rows/cols of the 2-D view for a shape.
std::pair<Eigen::Index, Eigen::Index> matrix_extent(const std::vector<std::size_t>& shape);

// Trainable tensor with its gradient accumulator and Adam moments.
struct Parameter {
  std::string name;
  Tensor value;
  Matrix grad;
  Matrix adam_m;
  Matrix adam_v;
  long adam_steps = 0;
  bool trainable = true;

  Parameter() = default;
  Parameter(std::string name, Tensor value);
  void zero_grad() { grad.setZero(); }
  void reset_optimizer();
};

}  // namespace nsurf::nn
