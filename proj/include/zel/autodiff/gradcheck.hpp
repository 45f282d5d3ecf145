#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <string>
#include <vector>

#include "zel/autodiff/params.hpp"
#include "zel/common/rng.hpp"

namespace zel::autodiff {

struct GradCheckEntry {
  std::string parameter;
  double max_rel_error = 0.0;
  std::size_t sampled = 0;
};

struct GradCheckReport {
  std::vector<GradCheckEntry> entries;
  double max_rel_error = 0.0;
  double tolerance = 0.0;
  bool passed = false;

  std::vector<std::string> failures() const {
    std::vector<std::string> out;
    for (const auto& e : entries) {
      if (e.max_rel_error >= tolerance) out.push_back(e.parameter);
    }
    return out;
  }
};

struct GradCheckConfig {
  double tolerance = 1e-3;
  double step = 1e-5;               // central-difference h
  std::size_t samples_per_tensor = 20;
  std::uint64_t seed = 7;
};

// Compares analytic gradients of a deterministic scalar closure against
// central finite differences on sampled coordinates of each parameter.
// Relative error uses a 1e-6 scale floor so near-zero gradients do not
// amplify finite-difference noise. Meant to run on double-precision models.
template <typename T>
GradCheckReport grad_check(const std::function<Tensor<T>()>& closure, ParameterStore<T>& params,
                           const std::vector<std::string>& names, const GradCheckConfig& cfg = {}) {
  GradCheckReport report;
  report.tolerance = cfg.tolerance;

  params.clear_grads();
  Tensor<T> loss = closure();
  loss.backward();

  std::map<std::string, std::vector<T>> analytic;
  for (const auto& name : names) {
    auto& p = params.at(name);
    if (!p.has_grad())
      throw ContractError("grad_check: parameter '" + name + "' received no gradient");
    analytic[name] = p.grad();
  }

  Rng rng(cfg.seed);
  for (const auto& name : names) {
    auto& p = params.at(name);
    auto& values = p.mutable_values();
    GradCheckEntry entry;
    entry.parameter = name;

    const std::size_t n = values.size();
    const std::size_t samples = std::min(cfg.samples_per_tensor, n);
    std::vector<std::size_t> coords(n);
    for (std::size_t i = 0; i < n; ++i) coords[i] = i;
    rng.shuffle(coords);
    coords.resize(samples);

    for (auto i : coords) {
      const T original = values[i];
      values[i] = original + static_cast<T>(cfg.step);
      const double up = static_cast<double>(closure().item());
      values[i] = original - static_cast<T>(cfg.step);
      const double down = static_cast<double>(closure().item());
      values[i] = original;

      const double numeric = (up - down) / (2.0 * cfg.step);
      const double a = static_cast<double>(analytic.at(name)[i]);
      const double scale = std::max({std::abs(a), std::abs(numeric), 1e-6});
      entry.max_rel_error = std::max(entry.max_rel_error, std::abs(a - numeric) / scale);
    }
    entry.sampled = samples;
    report.max_rel_error = std::max(report.max_rel_error, entry.max_rel_error);
    report.entries.push_back(std::move(entry));
  }
  report.passed = report.max_rel_error < cfg.tolerance;
  params.clear_grads();
  return report;
}

template <typename T>
GradCheckReport grad_check(const std::function<Tensor<T>()>& closure, ParameterStore<T>& params,
                           const GradCheckConfig& cfg = {}) {
  return grad_check(closure, params, params.names(), cfg);
}

}  // namespace zel::autodiff
