#pragma once

#include <cmath>
#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "zel/autodiff/params.hpp"

namespace zel::autodiff {

struct AdamConfig {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
  std::size_t warmup_steps = 0;  // linear warmup from 0 to learning_rate
};

// Adam with bias correction over a named subset of a ParameterStore.
// step() consumes the gradients and clears them.
template <typename T>
class Adam {
 public:
  Adam(ParameterStore<T>& store, std::vector<std::string> names, AdamConfig cfg)
      : store_(store), names_(std::move(names)), cfg_(cfg) {
    for (const auto& name : names_) {
      const auto& p = store_.at(name);
      moments_[name] = State{std::vector<double>(p.size(), 0.0),
                             std::vector<double>(p.size(), 0.0)};
    }
  }

  Adam(ParameterStore<T>& store, AdamConfig cfg) : Adam(store, store.names(), cfg) {}

  std::size_t step_count() const { return step_; }

  double current_learning_rate() const {
    // warmup applies to the upcoming step (1-based)
    const auto next = static_cast<double>(step_ + 1);
    if (cfg_.warmup_steps > 0 && next < static_cast<double>(cfg_.warmup_steps)) {
      return cfg_.learning_rate * next / static_cast<double>(cfg_.warmup_steps);
    }
    return cfg_.learning_rate;
  }

  void step() {
    const double lr = current_learning_rate();
    ++step_;
    const double bc1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(step_));
    const double bc2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(step_));
    for (const auto& name : names_) {
      auto& p = store_.at(name);
      if (!p.has_grad())
        throw ContractError("adam step: parameter '" + name + "' has no gradient");
      auto& state = moments_.at(name);
      auto& values = p.mutable_values();
      const auto& grad = p.grad();
      for (std::size_t i = 0; i < values.size(); ++i) {
        const double g = static_cast<double>(grad[i]);
        state.m[i] = cfg_.beta1 * state.m[i] + (1.0 - cfg_.beta1) * g;
        state.v[i] = cfg_.beta2 * state.v[i] + (1.0 - cfg_.beta2) * g * g;
        const double m_hat = state.m[i] / bc1;
        const double v_hat = state.v[i] / bc2;
        values[i] -= static_cast<T>(lr * m_hat / (std::sqrt(v_hat) + cfg_.epsilon));
      }
      p.clear_grad();
    }
  }

 private:
  struct State {
    std::vector<double> m;
    std::vector<double> v;
  };

  ParameterStore<T>& store_;
  std::vector<std::string> names_;
  AdamConfig cfg_;
  std::map<std::string, State> moments_;
  std::size_t step_ = 0;
};

}  // namespace zel::autodiff
