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

#ifndef PLC_DSP_HPP_
#define PLC_DSP_HPP_

#include <optional>
#include <vector>

#include "plc/wav.hpp"

namespace plc {

// Framing / feature geometry. W = 2H (50% overlap) is required by the
// overlap-add path and the smoother geometry.
struct FrameConfig {
  std::size_t frame_len = 320;  // W, 20 ms at 16 kHz
  std::size_t hop = 160;        // H
  std::size_t fft_size = 512;
  std::size_t n_mels = 80;  // F
  int sample_rate = 16000;

  void validate() const;
  std::size_t n_bins() const { return fft_size / 2 + 1; }
};

// Per-band normalization statistics.
struct NormStats {
  std::vector<double> mean;
  std::vector<double> std_dev;
};

// Log floor applied as log(max(power, kPowerFloor)).
inline constexpr double kPowerFloor = 1e-10;

struct MelSpectrogram {
  // frames x n_mels, row-major.
  std::vector<std::vector<double>> data;
  FrameConfig config;
  std::optional<NormStats> norm;

  std::size_t n_frames() const { return data.size(); }
};

// Periodic Hann synthesis/analysis window of length n; satisfies exact
// constant overlap-add at 50% overlap.
std::vector<double> hann_window(std::size_t n);

// Splits audio into floor((len - W)/H) + 1 frames of length W at hop H.
std::vector<std::vector<double>> frame_signal(const AudioBuffer& audio,
                                              const FrameConfig& cfg);

// Triangular Mel filterbank, HTK scale (2595*log10(1 + f/700)); shape
// n_mels x (fft_size/2 + 1).
std::vector<std::vector<double>> mel_filterbank(const FrameConfig& cfg);

// Log-Mel of one W-length frame: Hann window, zero-pad to fft_size, power
// spectrum, filterbank, natural log with floor.
std::vector<double> mel_frame(const std::vector<double>& frame,
                              const FrameConfig& cfg,
                              const std::vector<std::vector<double>>& bank);

MelSpectrogram mel_spectrogram(const AudioBuffer& audio,
                               const FrameConfig& cfg);

// Per-band corpus statistics with a std floor of 1e-8.
NormStats compute_norm_stats(const std::vector<MelSpectrogram>& corpus);

MelSpectrogram normalize(const MelSpectrogram& mel, const NormStats& stats);
MelSpectrogram denormalize(const MelSpectrogram& mel);
std::vector<double> normalize_vec(const std::vector<double>& v,
                                  const NormStats& stats);
std::vector<double> denormalize_vec(const std::vector<double>& v,
                                    const NormStats& stats);

// Hann-windowed overlap-add at hop H, normalized by the accumulated
// window sum so frames taken from a signal reconstruct it exactly.
AudioBuffer overlap_add(const std::vector<std::vector<double>>& frames,
                        const FrameConfig& cfg);

}  // namespace plc

#endif  // PLC_DSP_HPP_
