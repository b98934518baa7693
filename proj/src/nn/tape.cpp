#include "nsurf/nn/tape.hpp"

#include <numeric>
#include <stdexcept>

namespace nsurf::nn {

std::pair<Eigen::Index, Eigen::Index> matrix_extent(const std::vector<std::size_t>& shape) {
  if (shape.empty()) {
    return {1, 1};
  }
  const std::size_t cols = shape.back();
  const std::size_t rows =
      std::accumulate(shape.begin(), shape.end() - 1, std::size_t{1}, std::multiplies<>());
  return {static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols)};
}

Tensor Tensor::zeros(std::vector<std::size_t> shape) {
  const auto [rows, cols] = matrix_extent(shape);
  return {std::move(shape), Matrix::Zero(rows, cols)};
}

Parameter::Parameter(std::string name_, Tensor value_) : name(std::move(name_)), value(std::move(value_)) {
  grad = Matrix::Zero(value.values.rows(), value.values.cols());
  reset_optimizer();
}

void Parameter::reset_optimizer() {
  adam_m = Matrix::Zero(value.values.rows(), value.values.cols());
  adam_v = Matrix::Zero(value.values.rows(), value.values.cols());
  adam_steps = 0;
}

Var Tape::constant(Matrix value) {
  Node n;
  n.value = std::move(value);
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size()) - 1);
}

Var Tape::leaf(Matrix value) {
  Node n;
  n.value = std::move(value);
  n.requires_grad = record_;
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size()) - 1);
}

Var Tape::param(Parameter& p) {
  if (const auto it = param_nodes_.find(&p); it != param_nodes_.end()) {
    return Var(it->second);
  }
  Node n;
  n.value = p.value.values;
  n.requires_grad = record_ && p.trainable;
  n.parameter = n.requires_grad ? &p : nullptr;
  nodes_.push_back(std::move(n));
  const int id = static_cast<int>(nodes_.size()) - 1;
  param_nodes_.emplace(&p, id);
  return Var(id);
}

Var Tape::push(Matrix value, std::initializer_list<Var> inputs, Backward backward) {
  return push(std::move(value), std::vector<Var>(inputs), std::move(backward));
}

Var Tape::push(Matrix value, const std::vector<Var>& inputs, Backward backward) {
  // x - x is NaN exactly when x is NaN or infinite.
  if (!((value.array() - value.array()).sum() == 0.0)) {
    throw NumericError("tape: non-finite value produced");
  }
  Node n;
  n.value = std::move(value);
  if (record_) {
    for (const Var& in : inputs) {
      if (nodes_.at(in.id_).requires_grad) {
        n.requires_grad = true;
        break;
      }
    }
  }
  if (n.requires_grad) {
    n.backward = std::move(backward);
  }
  nodes_.push_back(std::move(n));
  return Var(static_cast<int>(nodes_.size()) - 1);
}

Matrix& Tape::grad_storage(int id) {
  Node& n = nodes_[id];
  if (!n.grad_ready) {
    n.grad = Matrix::Zero(n.value.rows(), n.value.cols());
    n.grad_ready = true;
  }
  return n.grad;
}

const Matrix& Tape::grad(Var v) { return grad_storage(v.id_); }

void Tape::backward(Var root) {
  if (!record_) {
    throw std::logic_error("tape: backward() on a non-recording tape");
  }
  Node& r = nodes_.at(root.id_);
  if (r.value.size() != 1) {
    throw std::invalid_argument("tape: backward() root must be a scalar");
  }
  for (Node& n : nodes_) {
    n.grad_ready = false;
  }
  grad_storage(root.id_)(0, 0) = 1.0;
  for (int id = root.id_; id >= 0; --id) {
    Node& n = nodes_[id];
    if (!n.requires_grad || !n.grad_ready) {
      continue;
    }
    if (n.backward) {
      n.backward(*this, id);
    }
  }
  for (Node& n : nodes_) {
    if (n.parameter != nullptr && n.grad_ready) {
      n.parameter->grad += n.grad;
    }
  }
}

}  // namespace nsurf::nn
