#pragma once

#include <cstddef>
#include <functional>
#include <map>
#include <memory>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "misc/error.hpp"
#include "misc/numerics/random.hpp"
#include "misc/numerics/tensor.hpp"

namespace misc::numerics {

/// A named trainable tensor with its accumulated gradient.
template <typename T>
struct Parameter {
  std::string name;
  Tensor<T> value;
  Tensor<T> grad;
  bool decay = true;  // false for biases and LayerNorm gains/shifts
};

/// Registry of trainable tensors, kept in registration order. Addresses are
/// stable for the lifetime of the set.
template <typename T>
class ParameterSet {
 public:
  ParameterSet() = default;
  ParameterSet(const ParameterSet&) = delete;
  ParameterSet& operator=(const ParameterSet&) = delete;
  ParameterSet(ParameterSet&&) noexcept = default;
  ParameterSet& operator=(ParameterSet&&) noexcept = default;

  Parameter<T>& add(std::string name, Tensor<T> init, bool decay = true) {
    if (index_.count(name)) throw ContractError("duplicate parameter name: " + name);
    auto param = std::make_unique<Parameter<T>>();
    param->name = name;
    param->grad = Tensor<T>(init.shape());
    param->value = std::move(init);
    param->decay = decay;
    index_.emplace(std::move(name), params_.size());
    params_.push_back(std::move(param));
    return *params_.back();
  }

  Parameter<T>* find(const std::string& name) {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }
  const Parameter<T>* find(const std::string& name) const {
    auto it = index_.find(name);
    return it == index_.end() ? nullptr : params_[it->second].get();
  }

  Parameter<T>& at(const std::string& name) {
    if (auto* p = find(name)) return *p;
    throw ContractError("unknown parameter: " + name);
  }

  std::size_t size() const noexcept { return params_.size(); }
  Parameter<T>& operator[](std::size_t i) { return *params_[i]; }
  const Parameter<T>& operator[](std::size_t i) const { return *params_[i]; }

  void zero_grad() {
    for (auto& p : params_) p->grad.fill(T{0});
  }

  std::size_t total_elements() const {
    std::size_t n = 0;
    for (const auto& p : params_) n += p->value.numel();
    return n;
  }

  /// Copies of all values, in registration order.
  std::vector<Tensor<T>> snapshot() const {
    std::vector<Tensor<T>> out;
    out.reserve(params_.size());
    for (const auto& p : params_) out.push_back(p->value);
    return out;
  }

  void restore(const std::vector<Tensor<T>>& values) {
    if (values.size() != params_.size()) throw ContractError("snapshot size mismatch");
    for (std::size_t i = 0; i < values.size(); ++i) {
      if (values[i].shape() != params_[i]->value.shape()) {
        throw DimensionError("snapshot shape mismatch for " + params_[i]->name);
      }
      params_[i]->value = values[i];
    }
  }

 private:
  std::vector<std::unique_ptr<Parameter<T>>> params_;
  std::map<std::string, std::size_t> index_;
};

template <typename T>
class Tape;

/// Handle to a value recorded on a tape.
template <typename T>
struct Var {
  Tape<T>* tape = nullptr;
  std::size_t id = 0;

  const Tensor<T>& value() const { return tape->value(*this); }
  const Shape& shape() const { return value().shape(); }
  std::size_t rows() const { return value().rows(); }
  std::size_t cols() const { return value().cols(); }
};

/// Append-only record of a forward computation. Reverse traversal from a
/// scalar accumulates exact gradients into the parameters that fed it.
/// Single-writer; never share a tape across concurrent steps.
template <typename T>
class Tape {
 public:
  using Backward = std::function<void(Tape&, std::size_t self)>;

  explicit Tape(bool record_gradients = true, std::uint64_t seed = 0)
      : record_(record_gradients), rng_(seed) {}

  Tape(const Tape&) = delete;
  Tape& operator=(const Tape&) = delete;

  bool recording() const noexcept { return record_; }
  bool training() const noexcept { return training_; }
  void set_training(bool on) noexcept { training_ = on; }
  Rng& rng() noexcept { return rng_; }

  Var<T> constant(Tensor<T> value) {
    nodes_.push_back(Node{std::move(value), {}, false, nullptr, {}});
    return {this, nodes_.size() - 1};
  }

  /// Leaf bound to a parameter. Repeated uses share one node.
  Var<T> parameter(Parameter<T>& p) {
    if (auto it = param_nodes_.find(&p); it != param_nodes_.end()) return {this, it->second};
    nodes_.push_back(Node{p.value, {}, record_, &p, {}});
    param_nodes_.emplace(&p, nodes_.size() - 1);
    return {this, nodes_.size() - 1};
  }

  /// Records an operation result. The closure runs during backward() only
  /// when some input needs a gradient.
  Var<T> record(Tensor<T> value, std::initializer_list<Var<T>> inputs, Backward backward) {
    return record(std::move(value), std::vector<Var<T>>(inputs), std::move(backward));
  }

  Var<T> record(Tensor<T> value, const std::vector<Var<T>>& inputs, Backward backward) {
    bool needs = false;
    if (record_) {
      for (const auto& in : inputs) {
        check_owner(in);
        needs = needs || nodes_[in.id].requires_grad;
      }
    }
    nodes_.push_back(Node{std::move(value), {}, needs, nullptr, needs ? std::move(backward) : Backward{}});
    return {this, nodes_.size() - 1};
  }

  const Tensor<T>& value(Var<T> v) const { return nodes_.at(v.id).value; }
  bool requires_grad(Var<T> v) const { return nodes_.at(v.id).requires_grad; }
  bool requires_grad(std::size_t id) const { return nodes_[id].requires_grad; }

  /// Gradient buffer of a node, allocated as zeros on first access.
  Tensor<T>& grad(std::size_t id) {
    Node& n = nodes_[id];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor<T>(n.value.shape());
    return n.grad;
  }
  Tensor<T>& grad(Var<T> v) { return grad(v.id); }
  const Tensor<T>& value(std::size_t id) const { return nodes_[id].value; }

  std::size_t size() const noexcept { return nodes_.size(); }

  /// Reverse pass from a scalar. Parameter gradients are accumulated (+=)
  /// into Parameter::grad; parameter values are not modified.
  void backward(Var<T> loss) {
    check_owner(loss);
    if (!record_) throw ContractError("backward on a tape recorded without gradients");
    if (nodes_[loss.id].value.numel() != 1) {
      throw ContractError("backward requires a scalar loss, got shape " +
                          shape_string(nodes_[loss.id].value.shape()));
    }
    grad(loss.id).fill(T{1});
    for (std::size_t i = loss.id + 1; i-- > 0;) {
      Node& n = nodes_[i];
      if (!n.requires_grad || n.grad.empty()) continue;
      if (n.backward) {
        n.backward(*this, i);
      } else if (n.param != nullptr) {
        auto& dst = n.param->grad.storage();
        const auto& src = n.grad.storage();
        for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
      }
    }
  }

 private:
  struct Node {
    Tensor<T> value;
    Tensor<T> grad;
    bool requires_grad = false;
    Parameter<T>* param = nullptr;
    Backward backward;
  };

  void check_owner(Var<T> v) const {
    if (v.tape != this || v.id >= nodes_.size()) throw ContractError("variable belongs to another tape");
  }

  std::vector<Node> nodes_;
  std::unordered_map<const Parameter<T>*, std::size_t> param_nodes_;
  bool record_ = true;
  bool training_ = false;
  Rng rng_;
};

}  // namespace misc::numerics
