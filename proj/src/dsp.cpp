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

#include "plc/dsp.hpp"

#include <cmath>
#include <string>

#include "plc/errors.hpp"
#include "plc/fft.hpp"

namespace plc {
namespace {

constexpr double kStdFloor = 1e-8;

double hz_to_mel(double hz) { return 2595.0 * std::log10(1.0 + hz / 700.0); }

double mel_to_hz(double mel) {
  return 700.0 * (std::pow(10.0, mel / 2595.0) - 1.0);
}

}  // namespace

void FrameConfig::validate() const {
  if (!(hop <= frame_len && frame_len <= fft_size)) {
    throw ParamError("frame config requires H <= W <= fft_size");
  }
  if (frame_len != 2 * hop) {
    throw ParamError("frame config requires W = 2H (50% overlap)");
  }
  if ((fft_size & (fft_size - 1)) != 0) {
    throw ParamError("fft_size must be a power of two");
  }
  if (n_mels == 0 || sample_rate <= 0) {
    throw ParamError("n_mels and sample_rate must be positive");
  }
}

std::vector<double> hann_window(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i) {
    w[i] = 0.5 - 0.5 * std::cos(2.0 * M_PI * static_cast<double>(i) /
                                static_cast<double>(n));
  }
  return w;
}

std::vector<std::vector<double>> frame_signal(const AudioBuffer& audio,
                                              const FrameConfig& cfg) {
  cfg.validate();
  const std::size_t len = audio.samples.size();
  if (len < cfg.frame_len) {
    throw DataError("audio shorter than one frame: " + std::to_string(len) +
                    " < " + std::to_string(cfg.frame_len));
  }
  const std::size_t n_frames = (len - cfg.frame_len) / cfg.hop + 1;
  std::vector<std::vector<double>> frames(n_frames);
  for (std::size_t i = 0; i < n_frames; ++i) {
    const std::size_t start = i * cfg.hop;
    frames[i].assign(audio.samples.begin() + start,
                     audio.samples.begin() + start + cfg.frame_len);
  }
  return frames;
}

std::vector<std::vector<double>> mel_filterbank(const FrameConfig& cfg) {
  cfg.validate();
  const std::size_t n_bins = cfg.n_bins();
  const double nyquist = cfg.sample_rate / 2.0;
  const double mel_max = hz_to_mel(nyquist);

  // n_mels + 2 edge points equally spaced on the mel scale.
  std::vector<double> edges_hz(cfg.n_mels + 2);
  for (std::size_t i = 0; i < edges_hz.size(); ++i) {
    edges_hz[i] =
        mel_to_hz(mel_max * static_cast<double>(i) /
                  static_cast<double>(cfg.n_mels + 1));
  }

  std::vector<std::vector<double>> bank(cfg.n_mels,
                                        std::vector<double>(n_bins, 0.0));
  const double bin_hz =
      static_cast<double>(cfg.sample_rate) / static_cast<double>(cfg.fft_size);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    const double lo = edges_hz[m];
    const double mid = edges_hz[m + 1];
    const double hi = edges_hz[m + 2];
    for (std::size_t k = 0; k < n_bins; ++k) {
      const double f = bin_hz * static_cast<double>(k);
      if (f > lo && f < hi) {
        bank[m][k] = (f <= mid) ? (f - lo) / (mid - lo) : (hi - f) / (hi - mid);
      }
    }
  }
  return bank;
}

std::vector<double> mel_frame(const std::vector<double>& frame,
                              const FrameConfig& cfg,
                              const std::vector<std::vector<double>>& bank) {
  static thread_local std::vector<double> windowed;
  const std::vector<double> window = hann_window(cfg.frame_len);
  windowed.resize(frame.size());
  for (std::size_t i = 0; i < frame.size(); ++i) {
    windowed[i] = frame[i] * window[i];
  }
  const std::vector<double> power = power_spectrum(windowed, cfg.fft_size);
  std::vector<double> mel(cfg.n_mels);
  for (std::size_t m = 0; m < cfg.n_mels; ++m) {
    double acc = 0.0;
    for (std::size_t k = 0; k < power.size(); ++k) {
      acc += bank[m][k] * power[k];
    }
    mel[m] = std::log(std::max(acc, kPowerFloor));
  }
  return mel;
}

MelSpectrogram mel_spectrogram(const AudioBuffer& audio,
                               const FrameConfig& cfg) {
  const auto frames = frame_signal(audio, cfg);
  const auto bank = mel_filterbank(cfg);
  MelSpectrogram mel;
  mel.config = cfg;
  mel.data.reserve(frames.size());
  for (const auto& f : frames) mel.data.push_back(mel_frame(f, cfg, bank));
  return mel;
}

NormStats compute_norm_stats(const std::vector<MelSpectrogram>& corpus) {
  if (corpus.empty()) throw DataError("empty corpus for normalization stats");
  const std::size_t n_mels = corpus.front().config.n_mels;
  NormStats stats;
  stats.mean.assign(n_mels, 0.0);
  stats.std_dev.assign(n_mels, 0.0);
  std::size_t count = 0;
  for (const auto& mel : corpus) {
    for (const auto& row : mel.data) {
      for (std::size_t m = 0; m < n_mels; ++m) stats.mean[m] += row[m];
      ++count;
    }
  }
  if (count == 0) throw DataError("corpus contains no frames");
  for (double& v : stats.mean) v /= static_cast<double>(count);
  for (const auto& mel : corpus) {
    for (const auto& row : mel.data) {
      for (std::size_t m = 0; m < n_mels; ++m) {
        const double d = row[m] - stats.mean[m];
        stats.std_dev[m] += d * d;
      }
    }
  }
  for (double& v : stats.std_dev) {
    v = std::max(std::sqrt(v / static_cast<double>(count)), kStdFloor);
  }
  return stats;
}

std::vector<double> normalize_vec(const std::vector<double>& v,
                                  const NormStats& stats) {
  if (v.size() != stats.mean.size()) {
    throw ShapeError("normalize: vector dim " + std::to_string(v.size()) +
                     " vs stats dim " + std::to_string(stats.mean.size()));
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = (v[i] - stats.mean[i]) / stats.std_dev[i];
  }
  return out;
}

std::vector<double> denormalize_vec(const std::vector<double>& v,
                                    const NormStats& stats) {
  if (v.size() != stats.mean.size()) {
    throw ShapeError("denormalize: vector dim mismatch");
  }
  std::vector<double> out(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    out[i] = v[i] * stats.std_dev[i] + stats.mean[i];
  }
  return out;
}

MelSpectrogram normalize(const MelSpectrogram& mel, const NormStats& stats) {
  MelSpectrogram out;
  out.config = mel.config;
  out.norm = stats;
  out.data.reserve(mel.data.size());
  for (const auto& row : mel.data) out.data.push_back(normalize_vec(row, stats));
  return out;
}

MelSpectrogram denormalize(const MelSpectrogram& mel) {
  if (!mel.norm.has_value()) {
    throw StateError("denormalize: no normalization stats attached");
  }
  MelSpectrogram out;
  out.config = mel.config;
  out.data.reserve(mel.data.size());
  for (const auto& row : mel.data) {
    out.data.push_back(denormalize_vec(row, *mel.norm));
  }
  return out;
}

AudioBuffer overlap_add(const std::vector<std::vector<double>>& frames,
                        const FrameConfig& cfg) {
  cfg.validate();
  if (frames.empty()) throw DataError("overlap_add: no frames");
  for (const auto& f : frames) {
    if (f.size() != cfg.frame_len) {
      throw ShapeError("overlap_add: frame length " +
                       std::to_string(f.size()) + " != W=" +
                       std::to_string(cfg.frame_len));
    }
  }
  const std::vector<double> window = hann_window(cfg.frame_len);
  const std::size_t out_len = (frames.size() - 1) * cfg.hop + cfg.frame_len;
  std::vector<double> acc(out_len, 0.0);
  std::vector<double> wsum(out_len, 0.0);
  for (std::size_t i = 0; i < frames.size(); ++i) {
    const std::size_t start = i * cfg.hop;
    for (std::size_t j = 0; j < cfg.frame_len; ++j) {
      acc[start + j] += window[j] * frames[i][j];
      wsum[start + j] += window[j];
    }
  }
  AudioBuffer out;
  out.sample_rate = cfg.sample_rate;
  out.samples.resize(out_len);
  for (std::size_t t = 0; t < out_len; ++t) {
    out.samples[t] = wsum[t] > 1e-12 ? acc[t] / wsum[t] : 0.0;
  }
  // Periodic Hann is zero at index 0, so the very first sample carries no
  // window mass; take it from the first frame directly.
  out.samples[0] = frames.front().front();
  return out;
}

}  // namespace plc
