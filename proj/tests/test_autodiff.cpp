#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <functional>
#include <vector>

#include "zel/autodiff/adam.hpp"
#include "zel/autodiff/checkpoint.hpp"
#include "zel/autodiff/gradcheck.hpp"
#include "zel/autodiff/ops.hpp"
#include "zel/autodiff/params.hpp"
#include "zel/autodiff/tensor.hpp"
#include "zel/common/rng.hpp"

using namespace zel;
using namespace zel::autodiff;

namespace {

// fixed mixing weights turn any op output into a scalar with non-uniform grads
template <typename T>
Tensor<T> mix_to_scalar(const Tensor<T>& x) {
  std::vector<T> w(x.size());
  for (std::size_t i = 0; i < w.size(); ++i)
    w[i] = static_cast<T>(0.3 + 0.1 * static_cast<double>(i % 7) -
                          0.05 * static_cast<double>(i % 3));
  Shape flat{static_cast<std::int64_t>(x.size())};
  auto weights = constant<T>(flat, std::move(w));
  if (x.rank() == 1) return dot(x, weights);
  // flattening via sum(mul) needs matching shapes; reuse values row by row
  std::vector<T> w2(x.size());
  for (std::size_t i = 0; i < w2.size(); ++i) w2[i] = weights.values()[i];
  auto wt = constant<T>(x.shape(), std::move(w2));
  return sum(mul(x, wt));
}

}  // namespace

TEST_CASE("softmax of a symmetric vector is uniform") {
  auto x = TensorD::from_data({2}, {0.0, 0.0});
  auto y = softmax(x);
  CHECK(y.values()[0] == doctest::Approx(0.5));
  CHECK(y.values()[1] == doctest::Approx(0.5));

  auto rows = softmax(TensorD::from_data({2, 3}, {1.0, 1.0, 1.0, 5.0, 5.0, 5.0}));
  for (auto v : rows.values()) CHECK(v == doctest::Approx(1.0 / 3.0));

  // rows sum to one
  auto r = softmax(TensorD::from_data({2, 2}, {0.3, -1.2, 8.0, 2.5}));
  CHECK(r.values()[0] + r.values()[1] == doctest::Approx(1.0).epsilon(1e-6));
  CHECK(r.values()[2] + r.values()[3] == doctest::Approx(1.0).epsilon(1e-6));
}

TEST_CASE("layer_norm of a constant vector is zero before the affine map") {
  auto x = TensorD::from_data({1, 4}, {3.0, 3.0, 3.0, 3.0});
  auto gamma = TensorD::from_data({4}, {1.0, 1.0, 1.0, 1.0});
  auto beta = TensorD::from_data({4}, {0.0, 0.0, 0.0, 0.0});
  auto y = layer_norm(x, gamma, beta);
  for (auto v : y.values()) CHECK(std::abs(v) < 1e-9);
}

TEST_CASE("cross entropy of uniform logits is log of the class count") {
  std::vector<double> logits(64, 0.25);
  auto loss = cross_entropy(TensorD::from_data({64}, std::move(logits)), {17});
  CHECK(loss.item() == doctest::Approx(std::log(64.0)).epsilon(1e-12));
  CHECK(loss.item() == doctest::Approx(4.1588830833596715).epsilon(1e-9));

  // cross entropy is non-negative
  auto l2 = cross_entropy(TensorD::from_data({3}, {5.0, -2.0, 0.1}), {0});
  CHECK(l2.item() >= 0.0);
}

TEST_CASE("backward through sum gives unit gradients") {
  auto x = TensorD::from_data({3}, {1.0, -2.0, 5.0}, true);
  auto loss = sum(x);
  loss.backward();
  REQUIRE(x.has_grad());
  for (auto g : x.grad()) CHECK(g == doctest::Approx(1.0));
}

TEST_CASE("backward through dot is bilinear") {
  auto x = TensorD::from_data({3}, {1.0, 2.0, 3.0}, true);
  auto y = TensorD::from_data({3}, {-1.0, 0.5, 2.0}, true);
  auto loss = dot(x, y);
  loss.backward();
  for (std::size_t i = 0; i < 3; ++i) {
    CHECK(x.grad()[i] == doctest::Approx(y.values()[i]));
    CHECK(y.grad()[i] == doctest::Approx(x.values()[i]));
  }
}

TEST_CASE("backward on a non-scalar throws") {
  auto x = TensorD::from_data({3}, {1.0, 2.0, 3.0}, true);
  auto y = scale(x, 2.0);
  CHECK_THROWS_AS(y.backward(), ContractError);
}

TEST_CASE("shape mismatches name the op") {
  auto a = TensorD::zeros({2, 3});
  auto b = TensorD::zeros({2, 3});
  CHECK_THROWS_WITH_AS(matmul(a, b), doctest::Contains("matmul"), ContractError);
  auto c = TensorD::zeros({4});
  CHECK_THROWS_WITH_AS(add(a, c), doctest::Contains("add"), ContractError);
  CHECK_THROWS_WITH_AS(dot(c, TensorD::zeros({5})), doctest::Contains("dot"), ContractError);
}

TEST_CASE("every op passes a finite-difference gradient check") {
  Rng rng(42);
  ParameterStore<double> params;
  auto& a = params.create_normal("a", {4, 5}, rng, 0.8);
  auto& b = params.create_normal("b", {5, 3}, rng, 0.8);
  auto& v = params.create_normal("v", {5}, rng, 0.8);
  auto& w = params.create_normal("w", {3}, rng, 0.8);
  auto& gamma = params.create_normal("gamma", {5}, rng, 0.5);
  auto& beta = params.create_normal("beta", {5}, rng, 0.5);
  auto& table = params.create_normal("table", {6, 4}, rng, 0.8);

  GradCheckConfig cfg;
  cfg.tolerance = 1e-4;
  cfg.samples_per_tensor = 40;

  auto check_one = [&](const char* what, std::function<TensorD()> closure,
                       std::vector<std::string> names) {
    auto report = grad_check<double>(closure, params, names, cfg);
    INFO(what);
    CHECK(report.passed);
  };

  check_one("add+mul+scale", [&] { return mix_to_scalar(scale(mul(add(a, a), a), 0.7)); }, {"a"});
  check_one("bias broadcast", [&] { return mix_to_scalar(add(a, v)); }, {"a", "v"});
  check_one("matmul", [&] { return mix_to_scalar(matmul(a, b)); }, {"a", "b"});
  check_one("transpose", [&] { return mix_to_scalar(transpose(a)); }, {"a"});
  check_one("gelu", [&] { return mix_to_scalar(gelu(a)); }, {"a"});
  check_one("layer_norm", [&] { return mix_to_scalar(layer_norm(a, gamma, beta)); },
            {"a", "gamma", "beta"});
  check_one("softmax", [&] { return mix_to_scalar(softmax(a)); }, {"a"});
  check_one("row+col_slice",
            [&] { return add(mix_to_scalar(col_slice(a, 1, 4)), mix_to_scalar(row(a, 2))); },
            {"a"});
  check_one("dot", [&] { return dot(w, row(b, 1)); }, {"w", "b"});
  check_one("gather+embedding", [&] { return mix_to_scalar(embedding_lookup(table, {1, 3, 3, 0})); },
            {"table"});
  check_one("flag embedding",
            [&] {
              std::vector<double> flags{1.0, 0.0, 1.0, 0.0};
              return mix_to_scalar(add_flag_embedding(a, flags, v));
            },
            {"a", "v"});
  check_one("cross_entropy",
            [&] { return cross_entropy(matmul(a, b), {0, 2, 1, 2}); }, {"a", "b"});
  check_one("concat",
            [&] {
              std::vector<TensorD> cols{col_slice(a, 0, 2), col_slice(a, 2, 5)};
              std::vector<TensorD> vecs{row(a, 0), row(a, 3)};
              return add(mix_to_scalar(concat_cols(cols)), mix_to_scalar(concat_vec(vecs)));
            },
            {"a"});
  check_one("composite chain",
            [&] {
              auto h = gelu(layer_norm(matmul(a, b), w, w));
              return cross_entropy(h, {0, 1, 2, 0});
            },
            {"a", "b", "w"});
}

TEST_CASE("grad_check flags a deliberately corrupted gradient") {
  ParameterStore<double> params;
  auto& x = params.create("x", {3}, {0.5, -0.2, 1.0});
  auto closure = [&]() -> TensorD {
    // forward is sum(2x) but the recorded backward claims d/dx = 1
    std::vector<double> out(x.size());
    for (std::size_t i = 0; i < out.size(); ++i) out[i] = 2.0 * x.values()[i];
    auto* xn = x.node();
    auto bad = autodiff::detail::make_result<double>(
        x.shape(), std::move(out), {x}, [xn](autodiff::detail::Node<double>& self) {
          auto& g = xn->grad_buffer();
          for (std::size_t i = 0; i < g.size(); ++i) g[i] += self.grad[i];  // wrong: misses *2
        });
    return sum(bad);
  };
  auto report = grad_check<double>(closure, params, {"x"});
  CHECK_FALSE(report.passed);
  REQUIRE(report.failures().size() == 1);
  CHECK(report.failures()[0] == "x");
}

TEST_CASE("grad_check on a linear model is exact to machine precision") {
  ParameterStore<double> params;
  Rng rng(3);
  params.create_normal("w", {6}, rng, 1.0);
  auto x = constant<double>({6}, {0.1, 0.2, -0.3, 0.4, 0.5, -0.6});
  auto closure = [&]() -> TensorD { return dot(params.at("w"), x); };
  auto report = grad_check<double>(closure, params);
  CHECK(report.passed);
  CHECK(report.max_rel_error < 1e-7);
}

TEST_CASE("adam with zero gradients is a fixed point") {
  ParameterStore<float> params;
  params.create("p", {3}, {1.0f, 2.0f, 3.0f});
  Adam<float> adam(params, AdamConfig{});
  // populate zero grads by backward through a 0-weighted path
  auto loss = scale(sum(params.at("p")), 0.0f);
  loss.backward();
  adam.step();
  CHECK(params.at("p").values() == std::vector<float>{1.0f, 2.0f, 3.0f});
}

TEST_CASE("adam first step moves by roughly the learning rate") {
  ParameterStore<double> params;
  params.create("p", {1}, {5.0});
  AdamConfig cfg;
  cfg.learning_rate = 0.1;
  Adam<double> adam(params, cfg);

  auto loss = sum(params.at("p"));  // d loss / d p = 1
  loss.backward();
  adam.step();
  // hand-evaluated: m_hat = 1, v_hat = 1 -> delta = -lr / (1 + eps)
  const double expected = 5.0 - 0.1 / (1.0 + 1e-8);
  CHECK(params.at("p").values()[0] == doctest::Approx(expected).epsilon(1e-12));
}

TEST_CASE("adam raises a contract error on a missing gradient") {
  ParameterStore<double> params;
  params.create("used", {1}, {1.0});
  params.create("unused", {1}, {1.0});
  Adam<double> adam(params, AdamConfig{});
  sum(params.at("used")).backward();
  CHECK_THROWS_WITH_AS(adam.step(), doctest::Contains("unused"), ContractError);
}

TEST_CASE("training trajectories are deterministic per seed") {
  auto run = [](std::uint64_t seed) {
    Rng rng(seed);
    ParameterStore<float> params;
    params.create_normal("w", {4, 4}, rng, 0.5);
    params.create_normal("b", {4}, rng, 0.5);
    AdamConfig cfg;
    cfg.learning_rate = 1e-2;
    Adam<float> adam(params, cfg);
    for (int step = 0; step < 20; ++step) {
      auto x = constant<float>({2, 4}, {0.1f, -0.2f, 0.3f, 0.4f, 0.9f, 0.8f, -0.7f, 0.2f});
      auto h = add(matmul(x, params.at("w")), params.at("b"));
      auto loss = cross_entropy(h, {1, 2});
      params.clear_grads();
      loss.backward();
      adam.step();
    }
    std::vector<float> snapshot = params.at("w").values();
    auto b = params.at("b").values();
    snapshot.insert(snapshot.end(), b.begin(), b.end());
    return snapshot;
  };
  CHECK(run(11) == run(11));      // bit-identical
  CHECK_FALSE(run(11) == run(12));
}

TEST_CASE("warmup scales the learning rate linearly") {
  ParameterStore<double> params;
  params.create("p", {1}, {0.0});
  AdamConfig cfg;
  cfg.learning_rate = 1.0;
  cfg.warmup_steps = 10;
  Adam<double> adam(params, cfg);
  CHECK(adam.current_learning_rate() == doctest::Approx(0.1));
  sum(params.at("p")).backward();
  adam.step();
  CHECK(adam.current_learning_rate() == doctest::Approx(0.2));
}

TEST_CASE("no-grad mode skips tape recording") {
  auto x = TensorD::from_data({2}, {1.0, 2.0}, true);
  {
    NoGradGuard guard;
    auto y = scale(x, 3.0);
    CHECK_FALSE(y.needs_grad());
    CHECK(y.values()[0] == doctest::Approx(3.0));
  }
  auto z = scale(x, 3.0);
  CHECK(z.needs_grad());
}

TEST_CASE("checkpoints round-trip and validate hashes") {
  namespace fs = std::filesystem;
  Rng rng(5);
  ParameterStore<double> params;
  params.create_normal("enc.w", {3, 3}, rng, 1.0);
  params.create_normal("enc.b", {3}, rng, 1.0);

  auto dir = fs::temp_directory_path() / "zel_test_ckpt";
  fs::create_directories(dir);
  const auto path = dir / "model.ckpt";
  save_checkpoint(params, path, 0x1234);

  ParameterStore<double> other;
  other.create("enc.w", {3, 3});
  other.create("enc.b", {3});
  load_checkpoint(other, path, 0x1234);
  for (std::size_t i = 0; i < 9; ++i) {
    // float32 storage quantizes doubles
    CHECK(other.at("enc.w").values()[i] ==
          doctest::Approx(params.at("enc.w").values()[i]).epsilon(1e-6));
  }

  CHECK_THROWS_AS(load_checkpoint(other, path, 0x9999), ValidationError);

  ParameterStore<double> wrong_shape;
  wrong_shape.create("enc.w", {3, 3});
  wrong_shape.create("enc.b", {4});
  CHECK_THROWS_AS(load_checkpoint(wrong_shape, path, 0x1234), ValidationError);

  ParameterStore<double> missing;
  missing.create("enc.w", {3, 3});
  missing.create("enc.b", {3});
  missing.create("extra", {1});
  CHECK_THROWS_AS(load_checkpoint(missing, path, 0x1234), ValidationError);
  fs::remove_all(dir);
}
