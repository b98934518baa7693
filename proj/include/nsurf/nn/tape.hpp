#pragma once

#include <functional>
#include <stdexcept>
#include <unordered_map>
#include <vector>

#include "nsurf/nn/tensor.hpp"

namespace nsurf::nn {

class Tape;

// A forward value became NaN or infinite.
class NumericError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Handle to a value recorded on a Tape.
class Var {
 public:
  Var() = default;
  int id() const { return id_; }
  bool valid() const { return id_ >= 0; }

 private:
  friend class Tape;
  explicit Var(int id) : id_(id) {}
  int id_ = -1;
};

// Reverse-mode autodiff tape over 2-D double matrices.
//
// A tape built with record = false still computes every value but stores no
// backward closures and treats parameters as constants; use it for
// inference through the same code path as training.
class Tape {
 public:
  using Backward = std::function<void(Tape&, int self)>;

  explicit Tape(bool record = true) : record_(record) {}
  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const { return record_; }

  Var constant(Matrix value);
  // Differentiable leaf; read its gradient with grad() after backward().
  Var leaf(Matrix value);
  // Leaf bound to a parameter. Gradients are added to p.grad by backward().
  // Registering the same parameter twice returns the same Var.
  Var param(Parameter& p);

  const Matrix& value(Var v) const { return nodes_.at(v.id_).value; }
  bool requires_grad(Var v) const { return nodes_.at(v.id_).requires_grad; }
  // Gradient of the last backward() root with respect to v (zeros if v did
  // not influence it).
  const Matrix& grad(Var v);

  // Seeds d(root)/d(root) = 1 for a 1x1 root and propagates.
  void backward(Var root);

  std::size_t size() const { return nodes_.size(); }

  // --- op implementation interface ---
  Var push(Matrix value, std::initializer_list<Var> inputs, Backward backward);
  Var push(Matrix value, const std::vector<Var>& inputs, Backward backward);
  bool needs_grad(int id) const { return nodes_[id].requires_grad; }
  const Matrix& value_of(int id) const { return nodes_[id].value; }
  const Matrix& grad_of(int id) { return grad_storage(id); }
  // Mutable gradient accumulator for an input node.
  Matrix& grad_storage(int id);

 private:
  struct Node {
    Matrix value;
    Matrix grad;
    bool requires_grad = false;
    bool grad_ready = false;
    Backward backward;
    Parameter* parameter = nullptr;
  };

  bool record_;
  std::vector<Node> nodes_;
  std::unordered_map<const Parameter*, int> param_nodes_;
};

}  // namespace nsurf::nn
