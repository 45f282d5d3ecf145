#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <utility>
#include <vector>

#include "zel/autodiff/tensor.hpp"

namespace zel::autodiff {

// Forward ops over 1-D/2-D dense tensors. Each op validates shapes, computes
// values, and (when grad mode is on and an input participates in training)
// records a closure with exactly the state its backward pass needs.

namespace detail {

template <typename T>
Tensor<T> make_result(Shape shape, std::vector<T> values,
                      std::vector<Tensor<T>> parents,
                      std::function<void(Node<T>&)> backward) {
  auto node = std::make_shared<Node<T>>();
  node->shape = std::move(shape);
  node->values = std::move(values);
  bool track = grad_mode_enabled();
  if (track) {
    bool any = false;
    for (const auto& p : parents) any = any || p.needs_grad();
    track = any;
  }
  if (track) {
    node->needs_grad = true;
    node->parents.reserve(parents.size());
    for (auto& p : parents) node->parents.push_back(p.node_ptr());
    node->backward_fn = std::move(backward);
  }
  return Tensor<T>(std::move(node));
}

inline void op_check(bool ok, const std::string& msg) {
  if (!ok) throw ContractError(msg);
}

inline constexpr double kInvSqrt2 = 0.7071067811865475;
inline constexpr double kInvSqrt2Pi = 0.3989422804014327;

}  // namespace detail

template <typename T>
Tensor<T> constant(Shape shape, std::vector<T> values) {
  return Tensor<T>::from_data(std::move(shape), std::move(values), false);
}

// ---- elementwise ----

template <typename T>
Tensor<T> add(const Tensor<T>& a, const Tensor<T>& b) {
  const bool bias_broadcast =
      a.rank() == 2 && b.rank() == 1 && b.dim(0) == a.dim(1);
  detail::op_check(bias_broadcast || a.shape() == b.shape(),
                   "add: incompatible shapes " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()));
  std::vector<T> out(a.values());
  if (bias_broadcast) {
    const auto cols = static_cast<std::size_t>(a.dim(1));
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i % cols];
  } else {
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += b.values()[i];
  }
  auto* an = a.node();
  auto* bn = b.node();
  return detail::make_result<T>(
      a.shape(), std::move(out), {a, b}, [an, bn, bias_broadcast](detail::Node<T>& self) {
        if (an->needs_grad) {
          auto& ga = an->grad_buffer();
          for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += self.grad[i];
        }
        if (bn->needs_grad) {
          auto& gb = bn->grad_buffer();
          if (bias_broadcast) {
            const std::size_t cols = gb.size();
            for (std::size_t i = 0; i < self.grad.size(); ++i) gb[i % cols] += self.grad[i];
          } else {
            for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += self.grad[i];
          }
        }
      });
}

template <typename T>
Tensor<T> mul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::op_check(a.shape() == b.shape(), "mul: incompatible shapes " + shape_str(a.shape()) +
                                               " and " + shape_str(b.shape()));
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) out[i] = a.values()[i] * b.values()[i];
  auto* an = a.node();
  auto* bn = b.node();
  return detail::make_result<T>(a.shape(), std::move(out), {a, b},
                                [an, bn](detail::Node<T>& self) {
                                  if (an->needs_grad) {
                                    auto& ga = an->grad_buffer();
                                    for (std::size_t i = 0; i < ga.size(); ++i)
                                      ga[i] += self.grad[i] * bn->values[i];
                                  }
                                  if (bn->needs_grad) {
                                    auto& gb = bn->grad_buffer();
                                    for (std::size_t i = 0; i < gb.size(); ++i)
                                      gb[i] += self.grad[i] * an->values[i];
                                  }
                                });
}

template <typename T>
Tensor<T> scale(const Tensor<T>& a, T c) {
  std::vector<T> out(a.values());
  for (auto& v : out) v *= c;
  auto* an = a.node();
  return detail::make_result<T>(a.shape(), std::move(out), {a}, [an, c](detail::Node<T>& self) {
    if (an->needs_grad) {
      auto& ga = an->grad_buffer();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += c * self.grad[i];
    }
  });
}

template <typename T>
Tensor<T> gelu(const Tensor<T>& a) {
  // exact form: x/2 * (1 + erf(x / sqrt(2)))
  std::vector<T> out(a.size());
  for (std::size_t i = 0; i < out.size(); ++i) {
    const double x = static_cast<double>(a.values()[i]);
    out[i] = static_cast<T>(0.5 * x * (1.0 + std::erf(x * detail::kInvSqrt2)));
  }
  auto* an = a.node();
  return detail::make_result<T>(a.shape(), std::move(out), {a}, [an](detail::Node<T>& self) {
    if (!an->needs_grad) return;
    auto& ga = an->grad_buffer();
    for (std::size_t i = 0; i < ga.size(); ++i) {
      const double x = static_cast<double>(an->values[i]);
      const double d = 0.5 * (1.0 + std::erf(x * detail::kInvSqrt2)) +
                       x * detail::kInvSqrt2Pi * std::exp(-0.5 * x * x);
      ga[i] += static_cast<T>(d) * self.grad[i];
    }
  });
}

// ---- linear algebra ----

template <typename T>
Tensor<T> matmul(const Tensor<T>& a, const Tensor<T>& b) {
  detail::op_check(a.rank() == 2 && b.rank() == 2 && a.dim(1) == b.dim(0),
                   "matmul: incompatible shapes " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()));
  const auto m = static_cast<std::size_t>(a.dim(0));
  const auto k = static_cast<std::size_t>(a.dim(1));
  const auto n = static_cast<std::size_t>(b.dim(1));
  std::vector<T> out(m * n, T(0));
  const T* av = a.values().data();
  const T* bv = b.values().data();
  for (std::size_t i = 0; i < m; ++i) {
    for (std::size_t p = 0; p < k; ++p) {
      const T aip = av[i * k + p];
      if (aip == T(0)) continue;
      const T* brow = bv + p * n;
      T* orow = out.data() + i * n;
      for (std::size_t j = 0; j < n; ++j) orow[j] += aip * brow[j];
    }
  }
  auto* an = a.node();
  auto* bn = b.node();
  return detail::make_result<T>(
      {static_cast<std::int64_t>(m), static_cast<std::int64_t>(n)}, std::move(out), {a, b},
      [an, bn, m, k, n](detail::Node<T>& self) {
        const T* g = self.grad.data();
        if (an->needs_grad) {
          // dA = g . B^T
          auto& ga = an->grad_buffer();
          const T* bv = bn->values.data();
          for (std::size_t i = 0; i < m; ++i) {
            for (std::size_t p = 0; p < k; ++p) {
              T acc = T(0);
              const T* grow = g + i * n;
              const T* brow = bv + p * n;
              for (std::size_t j = 0; j < n; ++j) acc += grow[j] * brow[j];
              ga[i * k + p] += acc;
            }
          }
        }
        if (bn->needs_grad) {
          // dB = A^T . g
          auto& gb = bn->grad_buffer();
          const T* av = an->values.data();
          for (std::size_t i = 0; i < m; ++i) {
            const T* grow = g + i * n;
            for (std::size_t p = 0; p < k; ++p) {
              const T aip = av[i * k + p];
              if (aip == T(0)) continue;
              T* gbrow = gb.data() + p * n;
              for (std::size_t j = 0; j < n; ++j) gbrow[j] += aip * grow[j];
            }
          }
        }
      });
}

template <typename T>
Tensor<T> transpose(const Tensor<T>& a) {
  detail::op_check(a.rank() == 2, "transpose: expected rank 2, got " + shape_str(a.shape()));
  const auto m = static_cast<std::size_t>(a.dim(0));
  const auto n = static_cast<std::size_t>(a.dim(1));
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < n; ++j) out[j * m + i] = a.values()[i * n + j];
  auto* an = a.node();
  return detail::make_result<T>({static_cast<std::int64_t>(n), static_cast<std::int64_t>(m)},
                                std::move(out), {a}, [an, m, n](detail::Node<T>& self) {
                                  if (!an->needs_grad) return;
                                  auto& ga = an->grad_buffer();
                                  for (std::size_t i = 0; i < m; ++i)
                                    for (std::size_t j = 0; j < n; ++j)
                                      ga[i * n + j] += self.grad[j * m + i];
                                });
}

// A [m,n] . x [n] -> [m]
template <typename T>
Tensor<T> matvec(const Tensor<T>& a, const Tensor<T>& x) {
  detail::op_check(a.rank() == 2 && x.rank() == 1 && a.dim(1) == x.dim(0),
                   "matvec: incompatible shapes " + shape_str(a.shape()) + " and " +
                       shape_str(x.shape()));
  const auto m = static_cast<std::size_t>(a.dim(0));
  const auto n = static_cast<std::size_t>(a.dim(1));
  std::vector<T> out(m, T(0));
  for (std::size_t i = 0; i < m; ++i) {
    const T* arow = a.values().data() + i * n;
    T acc = T(0);
    for (std::size_t j = 0; j < n; ++j) acc += arow[j] * x.values()[j];
    out[i] = acc;
  }
  auto* an = a.node();
  auto* xn = x.node();
  return detail::make_result<T>(
      {a.dim(0)}, std::move(out), {a, x}, [an, xn, m, n](detail::Node<T>& self) {
        if (an->needs_grad) {
          auto& ga = an->grad_buffer();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) ga[i * n + j] += self.grad[i] * xn->values[j];
        }
        if (xn->needs_grad) {
          auto& gx = xn->grad_buffer();
          for (std::size_t i = 0; i < m; ++i)
            for (std::size_t j = 0; j < n; ++j) gx[j] += self.grad[i] * an->values[i * n + j];
        }
      });
}

template <typename T>
Tensor<T> dot(const Tensor<T>& a, const Tensor<T>& b) {
  detail::op_check(a.rank() == 1 && b.rank() == 1 && a.dim(0) == b.dim(0),
                   "dot: incompatible shapes " + shape_str(a.shape()) + " and " +
                       shape_str(b.shape()));
  T acc = T(0);
  for (std::size_t i = 0; i < a.size(); ++i) acc += a.values()[i] * b.values()[i];
  auto* an = a.node();
  auto* bn = b.node();
  return detail::make_result<T>({1}, {acc}, {a, b}, [an, bn](detail::Node<T>& self) {
    const T g = self.grad[0];
    if (an->needs_grad) {
      auto& ga = an->grad_buffer();
      for (std::size_t i = 0; i < ga.size(); ++i) ga[i] += g * bn->values[i];
    }
    if (bn->needs_grad) {
      auto& gb = bn->grad_buffer();
      for (std::size_t i = 0; i < gb.size(); ++i) gb[i] += g * an->values[i];
    }
  });
}

template <typename T>
Tensor<T> sum(const Tensor<T>& a) {
  T acc = T(0);
  for (auto v : a.values()) acc += v;
  auto* an = a.node();
  return detail::make_result<T>({1}, {acc}, {a}, [an](detail::Node<T>& self) {
    if (!an->needs_grad) return;
    auto& ga = an->grad_buffer();
    for (auto& g : ga) g += self.grad[0];
  });
}

// ---- selection / reshaping ----

template <typename T>
Tensor<T> row(const Tensor<T>& a, std::size_t index) {
  detail::op_check(a.rank() == 2 && index < static_cast<std::size_t>(a.dim(0)),
                   "row: index out of range for " + shape_str(a.shape()));
  const auto n = static_cast<std::size_t>(a.dim(1));
  std::vector<T> out(a.values().begin() + static_cast<std::int64_t>(index * n),
                     a.values().begin() + static_cast<std::int64_t>((index + 1) * n));
  auto* an = a.node();
  return detail::make_result<T>({a.dim(1)}, std::move(out), {a},
                                [an, index, n](detail::Node<T>& self) {
                                  if (!an->needs_grad) return;
                                  auto& ga = an->grad_buffer();
                                  for (std::size_t j = 0; j < n; ++j)
                                    ga[index * n + j] += self.grad[j];
                                });
}

template <typename T>
Tensor<T> gather_rows(const Tensor<T>& a, std::vector<std::size_t> indices) {
  detail::op_check(a.rank() == 2, "gather_rows: expected rank 2, got " + shape_str(a.shape()));
  const auto n = static_cast<std::size_t>(a.dim(1));
  std::vector<T> out;
  out.reserve(indices.size() * n);
  for (auto idx : indices) {
    detail::op_check(idx < static_cast<std::size_t>(a.dim(0)),
                     "gather_rows: index out of range for " + shape_str(a.shape()));
    out.insert(out.end(), a.values().begin() + static_cast<std::int64_t>(idx * n),
               a.values().begin() + static_cast<std::int64_t>((idx + 1) * n));
  }
  auto* an = a.node();
  auto rows = static_cast<std::int64_t>(indices.size());
  return detail::make_result<T>(
      {rows, a.dim(1)}, std::move(out), {a},
      [an, indices = std::move(indices), n](detail::Node<T>& self) {
        if (!an->needs_grad) return;
        auto& ga = an->grad_buffer();
        for (std::size_t r = 0; r < indices.size(); ++r)
          for (std::size_t j = 0; j < n; ++j) ga[indices[r] * n + j] += self.grad[r * n + j];
      });
}

template <typename T>
Tensor<T> col_slice(const Tensor<T>& a, std::size_t begin, std::size_t end) {
  detail::op_check(a.rank() == 2 && begin < end && end <= static_cast<std::size_t>(a.dim(1)),
                   "col_slice: bad range for " + shape_str(a.shape()));
  const auto m = static_cast<std::size_t>(a.dim(0));
  const auto n = static_cast<std::size_t>(a.dim(1));
  const auto w = end - begin;
  std::vector<T> out(m * w);
  for (std::size_t i = 0; i < m; ++i)
    for (std::size_t j = 0; j < w; ++j) out[i * w + j] = a.values()[i * n + begin + j];
  auto* an = a.node();
  return detail::make_result<T>({a.dim(0), static_cast<std::int64_t>(w)}, std::move(out), {a},
                                [an, begin, m, n, w](detail::Node<T>& self) {
                                  if (!an->needs_grad) return;
                                  auto& ga = an->grad_buffer();
                                  for (std::size_t i = 0; i < m; ++i)
                                    for (std::size_t j = 0; j < w; ++j)
                                      ga[i * n + begin + j] += self.grad[i * w + j];
                                });
}

template <typename T>
Tensor<T> concat_cols(const std::vector<Tensor<T>>& parts) {
  detail::op_check(!parts.empty(), "concat_cols: no inputs");
  const auto m = parts[0].dim(0);
  std::int64_t total = 0;
  for (const auto& p : parts) {
    detail::op_check(p.rank() == 2 && p.dim(0) == m,
                     "concat_cols: row mismatch " + shape_str(p.shape()));
    total += p.dim(1);
  }
  std::vector<T> out(static_cast<std::size_t>(m * total));
  std::size_t offset = 0;
  for (const auto& p : parts) {
    const auto w = static_cast<std::size_t>(p.dim(1));
    for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i)
      for (std::size_t j = 0; j < w; ++j)
        out[i * static_cast<std::size_t>(total) + offset + j] = p.values()[i * w + j];
    offset += w;
  }
  std::vector<detail::Node<T>*> nodes;
  std::vector<std::size_t> widths;
  for (const auto& p : parts) {
    nodes.push_back(p.node());
    widths.push_back(static_cast<std::size_t>(p.dim(1)));
  }
  return detail::make_result<T>(
      {m, total}, std::move(out), parts,
      [nodes, widths, m, total](detail::Node<T>& self) {
        std::size_t offset = 0;
        for (std::size_t part = 0; part < nodes.size(); ++part) {
          const auto w = widths[part];
          if (nodes[part]->needs_grad) {
            auto& g = nodes[part]->grad_buffer();
            for (std::size_t i = 0; i < static_cast<std::size_t>(m); ++i)
              for (std::size_t j = 0; j < w; ++j)
                g[i * w + j] += self.grad[i * static_cast<std::size_t>(total) + offset + j];
          }
          offset += w;
        }
      });
}

// 1-D concatenation; used to stack per-candidate scalar scores
template <typename T>
Tensor<T> concat_vec(const std::vector<Tensor<T>>& parts) {
  detail::op_check(!parts.empty(), "concat_vec: no inputs");
  std::vector<T> out;
  std::vector<detail::Node<T>*> nodes;
  std::vector<std::size_t> sizes;
  for (const auto& p : parts) {
    detail::op_check(p.rank() == 1, "concat_vec: expected rank 1, got " + shape_str(p.shape()));
    out.insert(out.end(), p.values().begin(), p.values().end());
    nodes.push_back(p.node());
    sizes.push_back(p.size());
  }
  const auto total = static_cast<std::int64_t>(out.size());
  return detail::make_result<T>(
      {total}, std::move(out), parts,
      [nodes, sizes](detail::Node<T>& self) {
        std::size_t offset = 0;
        for (std::size_t part = 0; part < nodes.size(); ++part) {
          if (nodes[part]->needs_grad) {
            auto& g = nodes[part]->grad_buffer();
            for (std::size_t i = 0; i < sizes[part]; ++i) g[i] += self.grad[offset + i];
          }
          offset += sizes[part];
        }
      });
}

// ---- normalization / activations over rows ----

template <typename T>
Tensor<T> layer_norm(const Tensor<T>& x, const Tensor<T>& gamma, const Tensor<T>& beta,
                     T eps = T(1e-5)) {
  detail::op_check(x.rank() == 2, "layer_norm: expected rank 2, got " + shape_str(x.shape()));
  detail::op_check(gamma.rank() == 1 && gamma.dim(0) == x.dim(1) && beta.shape() == gamma.shape(),
                   "layer_norm: affine shapes " + shape_str(gamma.shape()) + "/" +
                       shape_str(beta.shape()) + " do not match " + shape_str(x.shape()));
  const auto m = static_cast<std::size_t>(x.dim(0));
  const auto n = static_cast<std::size_t>(x.dim(1));
  std::vector<T> out(m * n);
  std::vector<T> x_hat(m * n);
  std::vector<T> inv_std(m);
  for (std::size_t i = 0; i < m; ++i) {
    const T* xr = x.values().data() + i * n;
    T mean = T(0);
    for (std::size_t j = 0; j < n; ++j) mean += xr[j];
    mean /= static_cast<T>(n);
    T var = T(0);
    for (std::size_t j = 0; j < n; ++j) var += (xr[j] - mean) * (xr[j] - mean);
    var /= static_cast<T>(n);
    const T is = T(1) / std::sqrt(var + eps);
    inv_std[i] = is;
    for (std::size_t j = 0; j < n; ++j) {
      const T xh = (xr[j] - mean) * is;
      x_hat[i * n + j] = xh;
      out[i * n + j] = xh * gamma.values()[j] + beta.values()[j];
    }
  }
  auto* xn = x.node();
  auto* gn = gamma.node();
  auto* bn = beta.node();
  return detail::make_result<T>(
      x.shape(), std::move(out), {x, gamma, beta},
      [xn, gn, bn, x_hat = std::move(x_hat), inv_std = std::move(inv_std), m,
       n](detail::Node<T>& self) {
        for (std::size_t i = 0; i < m; ++i) {
          const T* g = self.grad.data() + i * n;
          const T* xh = x_hat.data() + i * n;
          if (gn->needs_grad) {
            auto& gg = gn->grad_buffer();
            for (std::size_t j = 0; j < n; ++j) gg[j] += g[j] * xh[j];
          }
          if (bn->needs_grad) {
            auto& gb = bn->grad_buffer();
            for (std::size_t j = 0; j < n; ++j) gb[j] += g[j];
          }
          if (xn->needs_grad) {
            auto& gx = xn->grad_buffer();
            // dx = inv_std * (dxhat - mean(dxhat) - xhat * mean(dxhat * xhat))
            T mean_dxh = T(0), mean_dxh_xh = T(0);
            for (std::size_t j = 0; j < n; ++j) {
              const T dxh = g[j] * gn->values[j];
              mean_dxh += dxh;
              mean_dxh_xh += dxh * xh[j];
            }
            mean_dxh /= static_cast<T>(n);
            mean_dxh_xh /= static_cast<T>(n);
            for (std::size_t j = 0; j < n; ++j) {
              const T dxh = g[j] * gn->values[j];
              gx[i * n + j] += inv_std[i] * (dxh - mean_dxh - xh[j] * mean_dxh_xh);
            }
          }
        }
      });
}

// Row-wise softmax; rank 1 is treated as a single row.
template <typename T>
Tensor<T> softmax(const Tensor<T>& x) {
  detail::op_check(x.rank() == 1 || x.rank() == 2,
                   "softmax: expected rank 1 or 2, got " + shape_str(x.shape()));
  const auto m = x.rank() == 2 ? static_cast<std::size_t>(x.dim(0)) : 1;
  const auto n = x.rank() == 2 ? static_cast<std::size_t>(x.dim(1))
                               : static_cast<std::size_t>(x.dim(0));
  std::vector<T> out(m * n);
  for (std::size_t i = 0; i < m; ++i) {
    const T* xr = x.values().data() + i * n;
    T mx = xr[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
    T denom = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      const T e = std::exp(xr[j] - mx);
      out[i * n + j] = e;
      denom += e;
    }
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] /= denom;
  }
  auto* xn = x.node();
  auto probs = out;  // saved for backward
  return detail::make_result<T>(x.shape(), std::move(out), {x},
                                [xn, probs = std::move(probs), m, n](detail::Node<T>& self) {
                                  if (!xn->needs_grad) return;
                                  auto& gx = xn->grad_buffer();
                                  for (std::size_t i = 0; i < m; ++i) {
                                    const T* g = self.grad.data() + i * n;
                                    const T* p = probs.data() + i * n;
                                    T inner = T(0);
                                    for (std::size_t j = 0; j < n; ++j) inner += g[j] * p[j];
                                    for (std::size_t j = 0; j < n; ++j)
                                      gx[i * n + j] += p[j] * (g[j] - inner);
                                  }
                                });
}

// Mean negative log-likelihood over rows with integer targets. Rank 1 logits
// with a single target are treated as one row.
template <typename T>
Tensor<T> cross_entropy(const Tensor<T>& logits, const std::vector<std::size_t>& targets) {
  detail::op_check(logits.rank() == 1 || logits.rank() == 2,
                   "cross_entropy: expected rank 1 or 2, got " + shape_str(logits.shape()));
  const auto m = logits.rank() == 2 ? static_cast<std::size_t>(logits.dim(0)) : 1;
  const auto n = logits.rank() == 2 ? static_cast<std::size_t>(logits.dim(1))
                                    : static_cast<std::size_t>(logits.dim(0));
  detail::op_check(targets.size() == m, "cross_entropy: " + std::to_string(targets.size()) +
                                            " targets for " + std::to_string(m) + " rows");
  std::vector<T> probs(m * n);
  T loss = T(0);
  for (std::size_t i = 0; i < m; ++i) {
    detail::op_check(targets[i] < n, "cross_entropy: target " + std::to_string(targets[i]) +
                                         " out of range for " + std::to_string(n) + " classes");
    const T* xr = logits.values().data() + i * n;
    T mx = xr[0];
    for (std::size_t j = 1; j < n; ++j) mx = std::max(mx, xr[j]);
    T denom = T(0);
    for (std::size_t j = 0; j < n; ++j) {
      const T e = std::exp(xr[j] - mx);
      probs[i * n + j] = e;
      denom += e;
    }
    for (std::size_t j = 0; j < n; ++j) probs[i * n + j] /= denom;
    loss -= std::log(std::max(probs[i * n + targets[i]], std::numeric_limits<T>::min()));
  }
  loss /= static_cast<T>(m);
  auto* xn = logits.node();
  return detail::make_result<T>(
      {1}, {loss}, {logits},
      [xn, probs = std::move(probs), targets, m, n](detail::Node<T>& self) {
        if (!xn->needs_grad) return;
        const T g = self.grad[0] / static_cast<T>(m);
        auto& gx = xn->grad_buffer();
        for (std::size_t i = 0; i < m; ++i) {
          for (std::size_t j = 0; j < n; ++j) gx[i * n + j] += g * probs[i * n + j];
          gx[i * n + targets[i]] -= g;
        }
      });
}

template <typename T>
Tensor<T> embedding_lookup(const Tensor<T>& table, std::vector<std::size_t> ids) {
  detail::op_check(table.rank() == 2,
                   "embedding_lookup: expected rank 2 table, got " + shape_str(table.shape()));
  return gather_rows(table, std::move(ids));
}

// x[i,:] += flags[i] * v for flag-signaled positions; flags is a constant.
template <typename T>
Tensor<T> add_flag_embedding(const Tensor<T>& x, const std::vector<T>& flags,
                             const Tensor<T>& v) {
  detail::op_check(x.rank() == 2 && v.rank() == 1 && v.dim(0) == x.dim(1) &&
                       flags.size() == static_cast<std::size_t>(x.dim(0)),
                   "add_flag_embedding: incompatible shapes " + shape_str(x.shape()) + " and " +
                       shape_str(v.shape()));
  const auto m = static_cast<std::size_t>(x.dim(0));
  const auto n = static_cast<std::size_t>(x.dim(1));
  std::vector<T> out(x.values());
  for (std::size_t i = 0; i < m; ++i) {
    if (flags[i] == T(0)) continue;
    for (std::size_t j = 0; j < n; ++j) out[i * n + j] += flags[i] * v.values()[j];
  }
  auto* xn = x.node();
  auto* vn = v.node();
  return detail::make_result<T>(x.shape(), std::move(out), {x, v},
                                [xn, vn, flags, m, n](detail::Node<T>& self) {
                                  if (xn->needs_grad) {
                                    auto& gx = xn->grad_buffer();
                                    for (std::size_t i = 0; i < gx.size(); ++i)
                                      gx[i] += self.grad[i];
                                  }
                                  if (vn->needs_grad) {
                                    auto& gv = vn->grad_buffer();
                                    for (std::size_t i = 0; i < m; ++i) {
                                      if (flags[i] == T(0)) continue;
                                      for (std::size_t j = 0; j < n; ++j)
                                        gv[j] += flags[i] * self.grad[i * n + j];
                                    }
                                  }
                                });
}

}  // namespace zel::autodiff
