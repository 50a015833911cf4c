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

#ifndef PLC_KERNELS_HPP_
#define PLC_KERNELS_HPP_

#include <cstddef>

// Arithmetic inner loops shared by the dense layers, convolutions and the
// cross-correlation search. A scalar reference implementation is always
// available; an AVX2+FMA variant is selected at runtime when the CPU
// supports it. The env var PLC_KERNELS=scalar|avx2 forces a backend.
namespace plc::kernels {

struct Backend {
  const char* name;
  double (*dot)(const double* a, const double* b, std::size_t n);
  // y[i] += a * x[i]
  void (*axpy)(double a, const double* x, double* y, std::size_t n);
  double (*sum_squares)(const double* x, std::size_t n);
  // y[i] += x[i]
  void (*add)(const double* x, double* y, std::size_t n);
  // x[i] *= a
  void (*scale)(double a, double* x, std::size_t n);
};

const Backend& scalar_backend();
#if defined(__x86_64__) || defined(_M_X64)
const Backend& avx2_backend();
bool avx2_supported();
#endif

// Backend chosen once per process (CPU probe + PLC_KERNELS override).
const Backend& active();

inline double dot(const double* a, const double* b, std::size_t n) {
  return active().dot(a, b, n);
}
inline void axpy(double a, const double* x, double* y, std::size_t n) {
  active().axpy(a, x, y, n);
}
inline double sum_squares(const double* x, std::size_t n) {
  return active().sum_squares(x, n);
}
inline void add(const double* x, double* y, std::size_t n) {
  active().add(x, y, n);
}
inline void scale(double a, double* x, std::size_t n) {
  active().scale(a, x, n);
}

}  // namespace plc::kernels

#endif  // PLC_KERNELS_HPP_
