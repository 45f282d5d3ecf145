#pragma once

#include <map>
#include <string>
#include <vector>

#include "zel/autodiff/tensor.hpp"
#include "zel/common/rng.hpp"

namespace zel::autodiff {

// Named trainable tensors. Ordered map so iteration, serialization and
// optimizer updates are deterministic.
template <typename T>
class ParameterStore {
 public:
  Tensor<T>& create(const std::string& name, Shape shape, std::vector<T> values = {}) {
    auto [it, inserted] =
        params_.emplace(name, Tensor<T>::from_data(std::move(shape), std::move(values), true));
    if (!inserted) throw ContractError("duplicate parameter name: " + name);
    return it->second;
  }

  Tensor<T>& create_normal(const std::string& name, Shape shape, Rng& rng, double stddev) {
    std::vector<T> values(static_cast<std::size_t>(numel(shape)));
    for (auto& v : values) v = static_cast<T>(rng.normal(0.0, stddev));
    return create(name, std::move(shape), std::move(values));
  }

  Tensor<T>& create_full(const std::string& name, Shape shape, T fill) {
    std::vector<T> values(static_cast<std::size_t>(numel(shape)), fill);
    return create(name, std::move(shape), std::move(values));
  }

  bool contains(const std::string& name) const { return params_.count(name) > 0; }

  Tensor<T>& at(const std::string& name) {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
  }
  const Tensor<T>& at(const std::string& name) const {
    auto it = params_.find(name);
    if (it == params_.end()) throw ContractError("unknown parameter: " + name);
    return it->second;
  }

  std::vector<std::string> names() const {
    std::vector<std::string> out;
    out.reserve(params_.size());
    for (const auto& [name, tensor] : params_) out.push_back(name);
    return out;
  }

  std::size_t size() const { return params_.size(); }

  void clear_grads() {
    for (auto& [name, tensor] : params_) tensor.clear_grad();
  }

  auto begin() { return params_.begin(); }
  auto end() { return params_.end(); }
  auto begin() const { return params_.begin(); }
  auto end() const { return params_.end(); }

 private:
  std::map<std::string, Tensor<T>> params_;
};

}  // namespace zel::autodiff
