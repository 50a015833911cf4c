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

#ifndef PLC_FFT_HPP_
#define PLC_FFT_HPP_

#include <complex>
#include <cstddef>
#include <vector>

namespace plc {

// In-place iterative radix-2 FFT. n must be a power of two.
void fft(std::vector<std::complex<double>>& x, bool inverse = false);

// Magnitude-squared spectrum of a real frame zero-padded to fft_size;
// returns fft_size/2 + 1 bins.
std::vector<double> power_spectrum(const std::vector<double>& frame,
                                   std::size_t fft_size);

}  // namespace plc

#endif  // PLC_FFT_HPP_
