#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>

#include "mdml/encoder.hpp"
#include "mdml/errors.hpp"
#include "mdml/finite_diff.hpp"
#include "mdml/rng.hpp"
#include "testutil.hpp"

using namespace mdml;

namespace {

EncoderConfig small_tanh_config() {
  EncoderConfig cfg;
  cfg.input_dim = 5;
  cfg.hidden_dims = {7, 6};
  cfg.embed_dim = 4;
  cfg.activation = Activation::Tanh;
  return cfg;
}

}  // namespace

TEST_CASE("init_params is deterministic in the seed") {
  const EncoderConfig cfg = small_tanh_config();
  CHECK(init_params(cfg, 42).values == init_params(cfg, 42).values);
  CHECK(init_params(cfg, 42).values != init_params(cfg, 43).values);
}

TEST_CASE("init_params weight scale matches He initialization") {
  EncoderConfig cfg;
  cfg.input_dim = 100;
  cfg.hidden_dims = {};
  cfg.embed_dim = 120;
  const EncoderParams params = init_params(cfg, 7);
  const std::span<const double> w = params.weight(0);
  REQUIRE(w.size() == 12000);  // >= 10^4 draws with fan_in 100
  double mean = 0.0;
  for (double x : w) mean += x;
  mean /= static_cast<double>(w.size());
  double var = 0.0;
  for (double x : w) var += (x - mean) * (x - mean);
  var /= static_cast<double>(w.size() - 1);
  const double std_dev = std::sqrt(var);
  CHECK(std_dev >= 0.10);
  CHECK(std_dev <= 0.18);
  for (double b : params.bias(0)) CHECK(b == 0.0);
}

TEST_CASE("forward produces unit-norm embeddings") {
  const EncoderConfig cfg = small_tanh_config();
  const EncoderParams params = init_params(cfg, 3);
  Rng rng(4);
  for (int trial = 0; trial < 20; ++trial) {
    const Vec e = forward(params, testutil::random_vec(rng, 5));
    CHECK(std::abs(norm(e) - 1.0) <= 1e-6);
  }
}

TEST_CASE("identity linear head reproduces normalized input") {
  EncoderConfig cfg;
  cfg.input_dim = 2;
  cfg.hidden_dims = {};
  cfg.embed_dim = 2;
  EncoderParams params = init_params(cfg, 0);
  std::fill(params.values.begin(), params.values.end(), 0.0);
  params.weight(0)[0] = 1.0;  // W = I
  params.weight(0)[3] = 1.0;
  const Vec e = forward(params, {3.0, 4.0});
  CHECK(e[0] == doctest::Approx(0.6));
  CHECK(e[1] == doctest::Approx(0.8));
}

TEST_CASE("forward matches a layer-by-layer hand oracle") {
  const EncoderConfig cfg = small_tanh_config();
  const EncoderParams params = init_params(cfg, 8);
  Rng rng(9);
  const Vec x = testutil::random_vec(rng, 5);

  // independent re-implementation of the forward pass
  Vec cur = x;
  const std::vector<int> dims = cfg.layer_dims();
  for (int l = 0; l < cfg.n_layers(); ++l) {
    const std::span<const double> w = params.weight(l);
    const std::span<const double> b = params.bias(l);
    Vec next(static_cast<std::size_t>(dims[l + 1]));
    for (std::size_t r = 0; r < next.size(); ++r) {
      double s = b[r];
      for (std::size_t c = 0; c < cur.size(); ++c) s += w[r * cur.size() + c] * cur[c];
      next[r] = l + 1 < cfg.n_layers() ? std::tanh(s) : s;
    }
    cur = next;
  }
  double n = 0.0;
  for (double v : cur) n += v * v;
  n = std::sqrt(n);

  const Vec e = forward(params, x);
  for (std::size_t i = 0; i < e.size(); ++i) {
    CHECK(e[i] == doctest::Approx(cur[i] / n).epsilon(1e-12));
  }
}

TEST_CASE("forward is deterministic bit for bit") {
  const EncoderConfig cfg = small_tanh_config();
  const EncoderParams params = init_params(cfg, 21);
  Rng rng(22);
  const Vec x = testutil::random_vec(rng, 5);
  CHECK(forward(params, x) == forward(params, x));
}

TEST_CASE("scaling the final layer does not change the embedding") {
  const EncoderConfig cfg = small_tanh_config();
  EncoderParams params = init_params(cfg, 30);
  Rng rng(31);
  const Vec x = testutil::random_vec(rng, 5);
  const Vec before = forward(params, x);
  const int last = cfg.n_layers() - 1;
  for (double& w : params.weight(last)) w *= 7.5;
  for (double& b : params.bias(last)) b *= 7.5;
  const Vec after = forward(params, x);
  for (std::size_t i = 0; i < before.size(); ++i) {
    CHECK(std::abs(after[i] - before[i]) <= 1e-9);
  }
}

TEST_CASE("zero pre-normalization output raises a degenerate-input error") {
  EncoderConfig cfg;
  cfg.input_dim = 3;
  cfg.hidden_dims = {};
  cfg.embed_dim = 2;
  EncoderParams params = init_params(cfg, 0);
  std::fill(params.values.begin(), params.values.end(), 0.0);
  CHECK_THROWS_AS(forward(params, {1.0, 2.0, 3.0}), Error);
}

TEST_CASE("backward with zero upstream gradient returns zero everywhere") {
  const EncoderConfig cfg = small_tanh_config();
  const EncoderParams params = init_params(cfg, 33);
  Rng rng(34);
  const std::vector<Vec> xs = testutil::random_batch(rng, 3, 5);
  const std::vector<Vec> upstream(3, Vec(4, 0.0));
  for (double g : backward(params, xs, upstream)) CHECK(g == 0.0);
}

TEST_CASE("backward matches a hand-derived chain rule on a toy net") {
  // 1 input -> 2 outputs, no hidden layer: z = (w0 x + b0, w1 x + b1),
  // e = z / ||z||, loss = u . e.
  EncoderConfig cfg;
  cfg.input_dim = 1;
  cfg.hidden_dims = {};
  cfg.embed_dim = 2;
  EncoderParams params = init_params(cfg, 0);
  const double w0 = 0.8, w1 = -0.3, b0 = 0.1, b1 = 0.4, x = 1.7;
  params.weight(0)[0] = w0;
  params.weight(0)[1] = w1;
  params.bias(0)[0] = b0;
  params.bias(0)[1] = b1;
  const Vec u = {0.9, -1.2};

  const double z0 = w0 * x + b0;
  const double z1 = w1 * x + b1;
  const double nz = std::sqrt(z0 * z0 + z1 * z1);
  // d(u.e)/dz = (u - (u.e) e) / nz with e = z / nz
  const double e0 = z0 / nz, e1 = z1 / nz;
  const double ue = u[0] * e0 + u[1] * e1;
  const double dz0 = (u[0] - ue * e0) / nz;
  const double dz1 = (u[1] - ue * e1) / nz;
  // dz/dw0 = x, dz/db0 = 1
  const double expected_w0 = dz0 * x;
  const double expected_w1 = dz1 * x;
  const double expected_b0 = dz0;
  const double expected_b1 = dz1;

  const std::vector<double> grads = backward(params, {{x}}, {u});
  CHECK(grads[0] == doctest::Approx(expected_w0).epsilon(1e-12));
  CHECK(grads[1] == doctest::Approx(expected_w1).epsilon(1e-12));
  CHECK(grads[2] == doctest::Approx(expected_b0).epsilon(1e-12));
  CHECK(grads[3] == doctest::Approx(expected_b1).epsilon(1e-12));
}

TEST_CASE("backward matches finite differences across configs and seeds") {
  std::vector<EncoderConfig> configs;
  configs.push_back(small_tanh_config());
  {
    EncoderConfig cfg;
    cfg.input_dim = 4;
    cfg.hidden_dims = {};
    cfg.embed_dim = 3;
    cfg.activation = Activation::Tanh;
    configs.push_back(cfg);
  }
  {
    EncoderConfig cfg;
    cfg.input_dim = 6;
    cfg.hidden_dims = {10};
    cfg.embed_dim = 5;
    cfg.activation = Activation::Relu;
    configs.push_back(cfg);
  }

  int checked = 0;
  for (const EncoderConfig& cfg : configs) {
    for (std::uint64_t seed = 1; seed <= 8; ++seed) {
      const EncoderParams params = init_params(cfg, seed);
      Rng rng(seed + 100);
      const std::vector<Vec> xs =
          testutil::random_batch(rng, 2, static_cast<std::size_t>(cfg.input_dim));
      // loss = sum of all embedding entries
      std::vector<Vec> upstream(xs.size(), Vec(static_cast<std::size_t>(cfg.embed_dim), 1.0));
      const std::vector<double> analytic = backward(params, xs, upstream);
      const auto value = [&](const std::vector<double>& flat) {
        EncoderParams p = params;
        p.values = flat;
        double total = 0.0;
        for (const Vec& x : xs) {
          for (double v : forward(p, x)) total += v;
        }
        return total;
      };
      const std::vector<double> fd = finite_diff_grad(value, params.values);
      const double err = gradient_relative_error(analytic, fd);
      CHECK(err < 1e-4);
      ++checked;
    }
  }
  CHECK(checked >= 20);
}

TEST_CASE("checkpoint round trip is bitwise exact") {
  const EncoderConfig cfg = small_tanh_config();
  Checkpoint ckpt{init_params(cfg, 55), 1234, 55};
  const std::string path =
      (std::filesystem::temp_directory_path() / "mdml_test_ckpt.bin").string();
  save_checkpoint(ckpt, path);
  const Checkpoint loaded = load_checkpoint(path);
  CHECK(loaded.params.config == ckpt.params.config);
  CHECK(loaded.params.values == ckpt.params.values);
  CHECK(loaded.step == ckpt.step);
  CHECK(loaded.seed == ckpt.seed);
  std::filesystem::remove(path);
}

TEST_CASE("checkpoint loader rejects truncated and foreign files") {
  const EncoderConfig cfg = small_tanh_config();
  Checkpoint ckpt{init_params(cfg, 56), 10, 56};
  namespace fs = std::filesystem;
  const std::string path = (fs::temp_directory_path() / "mdml_trunc_ckpt.bin").string();
  save_checkpoint(ckpt, path);
  fs::resize_file(path, fs::file_size(path) / 2);
  CHECK_THROWS_AS(load_checkpoint(path), Error);
  fs::remove(path);
  CHECK_THROWS_AS(load_checkpoint(path), Error);  // missing file -> io error
}
