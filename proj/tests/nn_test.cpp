// Copyright 2026 The PLC-Lab Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <cmath>
#include <cstdio>
#include <functional>
#include <limits>
#include <set>
#include <string>
#include <vector>

#include <doctest.h>

#include "plc/errors.hpp"
#include "plc/nn.hpp"
#include "plc/rng.hpp"
#include "plc/tensor.hpp"

namespace {

plc::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed) {
  plc::Tensor t(std::move(shape));
  plc::Rng rng(seed);
  for (std::size_t i = 0; i < t.size(); ++i) t[i] = rng.uniform(-1.0, 1.0);
  return t;
}

// Central-difference gradient of a scalar loss w.r.t. one tensor, compared
// element-wise against the analytic gradient with a relative tolerance.
void check_gradient(plc::Tensor& x, const plc::Tensor& analytic,
                    const std::function<double()>& loss, double tol = 1e-4) {
  const double eps = 1e-4;
  REQUIRE(analytic.size() == x.size());
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = loss();
    x[i] = keep - eps;
    const double down = loss();
    x[i] = keep;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom =
        std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    CHECK(std::abs(numeric - analytic[i]) / denom < tol);
  }
}

// Scalar loss used throughout: 0.5 * sum(y^2), so dL/dy = y.
double half_sum_squares(const plc::Tensor& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * y[i];
  return 0.5 * acc;
}

}  // namespace

TEST_CASE("dense forward computes x*W + b") {
  plc::Tensor x({1, 2}, {1.0, 2.0});
  plc::Tensor w({2, 3}, {1.0, 0.0, 2.0, 0.0, 1.0, -1.0});
  plc::Tensor b({3}, {0.5, -0.5, 0.0});
  const auto y = plc::dense_forward(x, w, b);
  CHECK(y[0] == doctest::Approx(1.5));
  CHECK(y[1] == doctest::Approx(1.5));
  CHECK(y[2] == doctest::Approx(0.0));
}

TEST_CASE("dense backward passes the finite-difference check") {
  auto x = random_tensor({3, 4}, 1);
  auto w = random_tensor({4, 5}, 2);
  auto b = random_tensor({5}, 3);

  const auto loss = [&]() {
    return half_sum_squares(plc::dense_forward(x, w, b));
  };

  const auto y = plc::dense_forward(x, w, b);
  plc::Tensor gx(x.shape()), gw(w.shape()), gb(b.shape());
  plc::dense_backward(x, w, y, &gx, &gw, &gb);

  check_gradient(x, gx, loss);
  check_gradient(w, gw, loss);
  check_gradient(b, gb, loss);
}

TEST_CASE("sigmoid and tanh backward pass the finite-difference check") {
  auto x = random_tensor({2, 6}, 4);

  {
    const auto loss = [&]() { return half_sum_squares(plc::sigmoid(x)); };
    const auto y = plc::sigmoid(x);
    const auto gx = plc::sigmoid_backward(y, y);  // dL/dy = y
    check_gradient(x, gx, loss);
  }
  {
    const auto loss = [&]() { return half_sum_squares(plc::tanh_op(x)); };
    const auto y = plc::tanh_op(x);
    const auto gx = plc::tanh_backward(y, y);
    check_gradient(x, gx, loss);
  }
}

TEST_CASE("conv1d preserves the time axis and applies dilation") {
  // Delta input: the kernel taps land at t-d, t, t+d.
  plc::Tensor x({1, 1, 9});
  x.at3(0, 0, 4) = 1.0;
  plc::Tensor w({1, 1, 3}, {2.0, 3.0, 5.0});
  plc::Tensor bias;  // empty = no bias

  const auto y = plc::conv1d_forward(x, w, bias, /*dilation=*/2);
  REQUIRE(y.shape() == std::vector<std::size_t>{1, 1, 9});
  std::set<std::size_t> nonzero;
  for (std::size_t t = 0; t < 9; ++t) {
    if (y.at3(0, 0, t) != 0.0) nonzero.insert(t);
  }
  // Cross-correlation of a delta at 4: w[0] lands at 4+d, w[2] at 4-d
  // for the flipped-write view; what matters is the {t-2, t, t+2} support.
  CHECK(nonzero == std::set<std::size_t>{2, 4, 6});
  CHECK(y.at3(0, 0, 4) == doctest::Approx(3.0));
}

TEST_CASE("conv1d backward passes the finite-difference check") {
  auto x = random_tensor({2, 3, 7}, 5);
  auto w = random_tensor({4, 3, 3}, 6);
  auto bias = random_tensor({4}, 7);

  for (std::size_t d : {std::size_t{1}, std::size_t{2}}) {
    const auto loss = [&]() {
      return half_sum_squares(plc::conv1d_forward(x, w, bias, d));
    };
    const auto y = plc::conv1d_forward(x, w, bias, d);
    plc::Tensor gx(x.shape()), gw(w.shape()), gb(bias.shape());
    plc::conv1d_backward(x, w, y, d, &gx, &gw, &gb);
    check_gradient(x, gx, loss);
    check_gradient(w, gw, loss);
    check_gradient(bias, gb, loss);
  }
}

TEST_CASE("Adam's first update is approximately -lr * sign(g)") {
  plc::ParamSet params;
  auto& p = params.add("p", plc::Tensor({4}, {1.0, 2.0, 3.0, 4.0}));
  p.grad = plc::Tensor({4}, {0.5, -0.25, 1.0, -2.0});

  plc::Adam opt(0.01);
  opt.step(params);
  const auto& v = params.get("p").value;
  CHECK(v[0] == doctest::Approx(1.0 - 0.01).epsilon(1e-4));
  CHECK(v[1] == doctest::Approx(2.0 + 0.01).epsilon(1e-4));
  CHECK(v[2] == doctest::Approx(3.0 - 0.01).epsilon(1e-4));
  CHECK(v[3] == doctest::Approx(4.0 + 0.01).epsilon(1e-4));
}

TEST_CASE("Adam minimizes a quadratic bowl") {
  plc::ParamSet params;
  params.add("p", plc::Tensor({2}, {5.0, -3.0}));
  plc::Adam opt(0.05);
  for (int i = 0; i < 2000; ++i) {
    auto& p = params.get("p");
    p.grad.fill(0.0);
    p.grad[0] = 2.0 * p.value[0];
    p.grad[1] = 2.0 * p.value[1];
    opt.step(params);
  }
  CHECK(std::abs(params.get("p").value[0]) < 1e-3);
  CHECK(std::abs(params.get("p").value[1]) < 1e-3);
}

TEST_CASE("Adam rejects non-positive step numbers") {
  plc::ParamSet params;
  params.add("p", plc::Tensor({1}, {1.0}));
  plc::Adam opt(0.01);
  CHECK_THROWS_AS(opt.step_at(params, 0), plc::ParamError);
  CHECK_THROWS_AS(opt.step_at(params, -3), plc::ParamError);
}

TEST_CASE("check_finite flags NaN and infinity") {
  plc::Tensor t({2}, {1.0, 2.0});
  CHECK_NOTHROW(plc::check_finite(t, "op"));
  t[1] = std::numeric_limits<double>::quiet_NaN();
  CHECK_THROWS_AS(plc::check_finite(t, "op"), plc::NumericError);
  t[1] = std::numeric_limits<double>::infinity();
  CHECK_THROWS_AS(plc::check_finite(t, "op"), plc::NumericError);
}

TEST_CASE("glorot init respects its bound") {
  plc::Rng rng(8);
  const auto t = plc::glorot_uniform({10, 20}, 10, 20, rng);
  const double bound = std::sqrt(6.0 / 30.0);
  for (std::size_t i = 0; i < t.size(); ++i) {
    CHECK(std::abs(t[i]) <= bound);
  }
}

TEST_CASE("checkpoints round-trip exactly for float32 values") {
  const std::string path = "nn_test_ckpt.bin";
  plc::ParamSet params;
  // Values chosen to be exactly representable in float32.
  params.add("a.w", plc::Tensor({2, 3}, {1.0, 0.5, -0.25, 2.0, -8.0, 0.125}));
  params.add("a.b", plc::Tensor({3}, {0.0, 1.5, -3.0}));
  plc::checkpoint_save(params, path);

  const auto loaded = plc::checkpoint_load(path);
  REQUIRE(loaded.size() == 2);
  REQUIRE(loaded.count("a.w") == 1);
  const auto& w = loaded.at("a.w");
  REQUIRE(w.shape() == std::vector<std::size_t>{2, 3});
  for (std::size_t i = 0; i < w.size(); ++i) {
    CHECK(w[i] == params.get("a.w").value[i]);
  }
  std::remove(path.c_str());
}

TEST_CASE("bind_checkpoint reports unknown names and rejects mismatches") {
  const std::string path = "nn_test_ckpt2.bin";
  plc::ParamSet on_disk;
  on_disk.add("known", plc::Tensor({2}, {1.0, 2.0}));
  on_disk.add("stray", plc::Tensor({1}, {3.0}));
  plc::checkpoint_save(on_disk, path);
  const auto loaded = plc::checkpoint_load(path);

  plc::ParamSet target;
  target.add("known", plc::Tensor({2}));
  const auto warnings = plc::bind_checkpoint(target, loaded);
  REQUIRE(warnings.size() == 1);
  CHECK(warnings[0] == "stray");
  CHECK(target.get("known").value[1] == 2.0);

  plc::ParamSet missing;
  missing.add("absent", plc::Tensor({2}));
  CHECK_THROWS_AS(plc::bind_checkpoint(missing, loaded), plc::FormatError);

  plc::ParamSet wrong_shape;
  wrong_shape.add("known", plc::Tensor({3}));
  CHECK_THROWS_AS(plc::bind_checkpoint(wrong_shape, loaded),
                  plc::FormatError);
  std::remove(path.c_str());
}

TEST_CASE("truncated checkpoints are rejected") {
  const std::string path = "nn_test_ckpt3.bin";
  plc::ParamSet params;
  params.add("w", plc::Tensor({8}, {1, 2, 3, 4, 5, 6, 7, 8}));
  plc::checkpoint_save(params, path);

  // Chop off the last 6 bytes of payload.
  FILE* f = std::fopen(path.c_str(), "rb");
  REQUIRE(f != nullptr);
  std::fseek(f, 0, SEEK_END);
  const long size = std::ftell(f);
  std::fseek(f, 0, SEEK_SET);
  std::vector<char> bytes(static_cast<std::size_t>(size));
  REQUIRE(std::fread(bytes.data(), 1, bytes.size(), f) == bytes.size());
  std::fclose(f);
  f = std::fopen(path.c_str(), "wb");
  std::fwrite(bytes.data(), 1, bytes.size() - 6, f);
  std::fclose(f);

  CHECK_THROWS_AS(plc::checkpoint_load(path), plc::FormatError);
  std::remove(path.c_str());
}

TEST_CASE("checkpoint magic is enforced") {
  const std::string path = "nn_test_ckpt4.bin";
  FILE* f = std::fopen(path.c_str(), "wb");
  std::fwrite("JUNKJUNKJUNK", 1, 12, f);
  std::fclose(f);
  CHECK_THROWS_AS(plc::checkpoint_load(path), plc::FormatError);
  std::remove(path.c_str());
}
