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

#ifndef PLC_NN_HPP_
#define PLC_NN_HPP_

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "plc/rng.hpp"
#include "plc/tensor.hpp"

namespace plc {

// A named parameter with its gradient accumulator.
struct Param {
  Tensor value;
  Tensor grad;

  explicit Param(Tensor v) : value(std::move(v)), grad(value.shape()) {}
  Param() = default;
};

class ParamSet {
 public:
  Param& add(const std::string& name, Tensor init);
  Param& get(const std::string& name);
  const Param& get(const std::string& name) const;
  bool contains(const std::string& name) const;
  void zero_grads();

  std::map<std::string, Param>& items() { return items_; }
  const std::map<std::string, Param>& items() const { return items_; }

 private:
  std::map<std::string, Param> items_;
};

// Throws NumericError naming `op` if any entry is NaN or infinite.
void check_finite(const Tensor& t, const char* op);

// -------- differentiable ops --------
// Layouts: dense [batch, features]; conv [batch, channels, time].
// Backward functions accumulate into the provided gradient tensors.

// y = x * W + b,  x: [B, in], W: [in, out], b: [out]
Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b);
void dense_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                    Tensor* gx, Tensor* gw, Tensor* gb);

Tensor sigmoid(const Tensor& x);
// Gradient from the forward output y = sigmoid(x).
Tensor sigmoid_backward(const Tensor& y, const Tensor& gy);

Tensor tanh_op(const Tensor& x);
Tensor tanh_backward(const Tensor& y, const Tensor& gy);

// Non-causal dilated conv with symmetric zero padding (k-1)*d/2 so the
// time axis is preserved. x: [B, Cin, T], w: [Cout, Cin, k] (k odd),
// bias: [Cout] (may be empty), y: [B, Cout, T].
Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                      std::size_t dilation);
void conv1d_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                     std::size_t dilation, Tensor* gx, Tensor* gw,
                     Tensor* gbias);

// -------- optimizer --------

class Adam {
 public:
  Adam(double lr, double beta1 = 0.9, double beta2 = 0.999,
       double eps = 1e-8)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps) {}

  // Applies one bias-corrected update from the accumulated gradients.
  // Step numbers count from 1; t <= 0 is a parameter error.
  void step(ParamSet& params);
  void step_at(ParamSet& params, std::int64_t t);

  std::int64_t steps_taken() const { return t_; }

 private:
  double lr_, beta1_, beta2_, eps_;
  std::int64_t t_ = 0;
  std::map<std::string, std::pair<Tensor, Tensor>> state_;  // (m, v)
};

// Per-step training loss history, written beside checkpoints as CSV.
struct TrainLog {
  std::vector<double> loss;
};

// -------- initialization --------

// Uniform(-sqrt(6/(fan_in+fan_out)), +...) init.
Tensor glorot_uniform(const std::vector<std::size_t>& shape,
                      std::size_t fan_in, std::size_t fan_out, Rng& rng);

// -------- checkpoint --------
// Format: magic "PLCM", u32 version = 1, u32 tensor count; per tensor
// u16 name length, UTF-8 name, u8 rank, u32 dims..., row-major
// little-endian float32 payload.

void checkpoint_save(const ParamSet& params, const std::string& path);
std::map<std::string, Tensor> checkpoint_load(const std::string& path);

// Copies tensors from `loaded` into matching names of `params`; throws
// FormatError on a missing or shape-mismatched expected tensor, returns
// the names present in the file but unknown to `params` (warnings).
std::vector<std::string> bind_checkpoint(
    ParamSet& params, const std::map<std::string, Tensor>& loaded);

}  // namespace plc

#endif  // PLC_NN_HPP_
