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

#include "plc/nn.hpp"

#include <cmath>

#include "plc/errors.hpp"
#include "plc/kernels.hpp"

namespace plc {

Param& ParamSet::add(const std::string& name, Tensor init) {
  auto [it, inserted] = items_.emplace(name, Param(std::move(init)));
  if (!inserted) throw ParamError("duplicate parameter name: " + name);
  return it->second;
}

Param& ParamSet::get(const std::string& name) {
  auto it = items_.find(name);
  if (it == items_.end()) throw ParamError("unknown parameter: " + name);
  return it->second;
}

const Param& ParamSet::get(const std::string& name) const {
  auto it = items_.find(name);
  if (it == items_.end()) throw ParamError("unknown parameter: " + name);
  return it->second;
}

bool ParamSet::contains(const std::string& name) const {
  return items_.count(name) != 0;
}

void ParamSet::zero_grads() {
  for (auto& [name, p] : items_) p.grad.fill(0.0);
}

void check_finite(const Tensor& t, const char* op) {
  const double* d = t.data();
  for (std::size_t i = 0; i < t.size(); ++i) {
    if (!std::isfinite(d[i])) {
      throw NumericError(std::string("non-finite value produced by op '") +
                         op + "'");
    }
  }
}

Tensor dense_forward(const Tensor& x, const Tensor& w, const Tensor& b) {
  if (x.rank() != 2 || w.rank() != 2 || b.rank() != 1 ||
      x.dim(1) != w.dim(0) || w.dim(1) != b.dim(0)) {
    throw ShapeError("dense: incompatible shapes x=" + x.shape_string() +
                     " w=" + w.shape_string() + " b=" + b.shape_string());
  }
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(1);
  Tensor y({batch, out});
  for (std::size_t bi = 0; bi < batch; ++bi) {
    double* yrow = y.data() + bi * out;
    for (std::size_t o = 0; o < out; ++o) yrow[o] = b[o];
    const double* xrow = x.data() + bi * in;
    for (std::size_t i = 0; i < in; ++i) {
      kernels::axpy(xrow[i], w.data() + i * out, yrow, out);
    }
  }
  check_finite(y, "dense");
  return y;
}

void dense_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                    Tensor* gx, Tensor* gw, Tensor* gb) {
  const std::size_t batch = x.dim(0), in = x.dim(1), out = w.dim(1);
  if (gy.rank() != 2 || gy.dim(0) != batch || gy.dim(1) != out) {
    throw ShapeError("dense backward: gy shape " + gy.shape_string() +
                     " vs expected [" + std::to_string(batch) + ", " +
                     std::to_string(out) + "]");
  }
  for (std::size_t bi = 0; bi < batch; ++bi) {
    const double* grow = gy.data() + bi * out;
    const double* xrow = x.data() + bi * in;
    if (gx != nullptr) {
      double* gxrow = gx->data() + bi * in;
      for (std::size_t i = 0; i < in; ++i) {
        gxrow[i] += kernels::dot(grow, w.data() + i * out, out);
      }
    }
    if (gw != nullptr) {
      for (std::size_t i = 0; i < in; ++i) {
        kernels::axpy(xrow[i], grow, gw->data() + i * out, out);
      }
    }
    if (gb != nullptr) kernels::add(grow, gb->data(), out);
  }
}

Tensor sigmoid(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) {
    y[i] = 1.0 / (1.0 + std::exp(-x[i]));
  }
  check_finite(y, "sigmoid");
  return y;
}

Tensor sigmoid_backward(const Tensor& y, const Tensor& gy) {
  require_same_shape(y, gy, "sigmoid backward");
  Tensor gx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    gx[i] = gy[i] * y[i] * (1.0 - y[i]);
  }
  return gx;
}

Tensor tanh_op(const Tensor& x) {
  Tensor y(x.shape());
  for (std::size_t i = 0; i < x.size(); ++i) y[i] = std::tanh(x[i]);
  check_finite(y, "tanh");
  return y;
}

Tensor tanh_backward(const Tensor& y, const Tensor& gy) {
  require_same_shape(y, gy, "tanh backward");
  Tensor gx(y.shape());
  for (std::size_t i = 0; i < y.size(); ++i) {
    gx[i] = gy[i] * (1.0 - y[i] * y[i]);
  }
  return gx;
}

Tensor conv1d_forward(const Tensor& x, const Tensor& w, const Tensor& bias,
                      std::size_t dilation) {
  if (x.rank() != 3 || w.rank() != 3 || x.dim(1) != w.dim(1)) {
    throw ShapeError("conv1d: incompatible shapes x=" + x.shape_string() +
                     " w=" + w.shape_string());
  }
  const std::size_t k = w.dim(2);
  if (k % 2 == 0) throw ShapeError("conv1d: kernel size must be odd");
  if (dilation == 0) throw ShapeError("conv1d: dilation must be >= 1");
  const std::size_t batch = x.dim(0), cin = x.dim(1), time = x.dim(2);
  const std::size_t cout = w.dim(0);
  if (bias.size() != 0 && (bias.rank() != 1 || bias.dim(0) != cout)) {
    throw ShapeError("conv1d: bias shape " + bias.shape_string());
  }
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(time);

  Tensor y({batch, cout, time});
  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      double* yrow = y.data() + (b * cout + co) * time;
      if (bias.size() != 0) {
        for (std::size_t t = 0; t < time; ++t) yrow[t] = bias[co];
      }
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xrow = x.data() + (b * cin + ci) * time;
        const double* wrow = w.data() + (co * cin + ci) * k;
        for (std::size_t j = 0; j < k; ++j) {
          const std::ptrdiff_t off =
              (static_cast<std::ptrdiff_t>(j) - half) *
              static_cast<std::ptrdiff_t>(dilation);
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
          const std::ptrdiff_t hi = std::min(t_len, t_len - off);
          if (hi > lo) {
            kernels::axpy(wrow[j], xrow + lo + off, yrow + lo,
                          static_cast<std::size_t>(hi - lo));
          }
        }
      }
    }
  }
  check_finite(y, "conv1d");
  return y;
}

void conv1d_backward(const Tensor& x, const Tensor& w, const Tensor& gy,
                     std::size_t dilation, Tensor* gx, Tensor* gw,
                     Tensor* gbias) {
  const std::size_t batch = x.dim(0), cin = x.dim(1), time = x.dim(2);
  const std::size_t cout = w.dim(0), k = w.dim(2);
  if (gy.rank() != 3 || gy.dim(0) != batch || gy.dim(1) != cout ||
      gy.dim(2) != time) {
    throw ShapeError("conv1d backward: gy shape " + gy.shape_string());
  }
  const std::ptrdiff_t half = static_cast<std::ptrdiff_t>(k / 2);
  const std::ptrdiff_t t_len = static_cast<std::ptrdiff_t>(time);

  for (std::size_t b = 0; b < batch; ++b) {
    for (std::size_t co = 0; co < cout; ++co) {
      const double* grow = gy.data() + (b * cout + co) * time;
      if (gbias != nullptr && gbias->size() != 0) {
        double acc = 0.0;
        for (std::size_t t = 0; t < time; ++t) acc += grow[t];
        (*gbias)[co] += acc;
      }
      for (std::size_t ci = 0; ci < cin; ++ci) {
        const double* xrow = x.data() + (b * cin + ci) * time;
        const double* wrow = w.data() + (co * cin + ci) * k;
        double* gxrow =
            gx != nullptr ? gx->data() + (b * cin + ci) * time : nullptr;
        double* gwrow =
            gw != nullptr ? gw->data() + (co * cin + ci) * k : nullptr;
        for (std::size_t j = 0; j < k; ++j) {
          const std::ptrdiff_t off =
              (static_cast<std::ptrdiff_t>(j) - half) *
              static_cast<std::ptrdiff_t>(dilation);
          const std::ptrdiff_t lo = std::max<std::ptrdiff_t>(0, -off);
          const std::ptrdiff_t hi = std::min(t_len, t_len - off);
          if (hi <= lo) continue;
          const std::size_t n = static_cast<std::size_t>(hi - lo);
          if (gxrow != nullptr) {
            kernels::axpy(wrow[j], grow + lo, gxrow + lo + off, n);
          }
          if (gwrow != nullptr) {
            gwrow[j] += kernels::dot(grow + lo, xrow + lo + off, n);
          }
        }
      }
    }
  }
}

void Adam::step(ParamSet& params) { step_at(params, t_ + 1); }

void Adam::step_at(ParamSet& params, std::int64_t t) {
  if (t <= 0) throw ParamError("adam step number must be positive");
  t_ = t;
  const double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(t));
  const double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(t));
  for (auto& [name, p] : params.items()) {
    auto it = state_.find(name);
    if (it == state_.end()) {
      it = state_
               .emplace(name, std::make_pair(Tensor(p.value.shape()),
                                             Tensor(p.value.shape())))
               .first;
    }
    Tensor& m = it->second.first;
    Tensor& v = it->second.second;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      const double g = p.grad[i];
      m[i] = beta1_ * m[i] + (1.0 - beta1_) * g;
      v[i] = beta2_ * v[i] + (1.0 - beta2_) * g * g;
      const double mhat = m[i] / bc1;
      const double vhat = v[i] / bc2;
      p.value[i] -= lr_ * mhat / (std::sqrt(vhat) + eps_);
    }
    check_finite(p.value, "adam");
  }
}

Tensor glorot_uniform(const std::vector<std::size_t>& shape,
                      std::size_t fan_in, std::size_t fan_out, Rng& rng) {
  Tensor t(shape);
  const double bound =
      std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = rng.uniform(-bound, bound);
  }
  return t;
}

}  // namespace plc
