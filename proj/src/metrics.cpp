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

#include "plc/metrics.hpp"

#include <cmath>

#include "plc/errors.hpp"
#include "plc/fft.hpp"

namespace plc {

LsdResult lsd(const AudioBuffer& reference, const AudioBuffer& test,
              const FrameConfig& cfg) {
  cfg.validate();
  if (reference.samples.empty() || test.samples.empty()) {
    throw DataError("lsd: empty input");
  }
  // Align lengths: the test signal is truncated or zero-padded.
  AudioBuffer aligned = test;
  aligned.samples.resize(reference.samples.size(), 0.0);

  const auto ref_frames = frame_signal(reference, cfg);
  const auto test_frames = frame_signal(aligned, cfg);
  const std::vector<double> window = hann_window(cfg.frame_len);

  auto frame_db = [&](const std::vector<double>& frame,
                      std::vector<double>& db) {
    std::vector<double> w(frame.size());
    for (std::size_t i = 0; i < frame.size(); ++i) w[i] = frame[i] * window[i];
    const auto power = power_spectrum(w, cfg.fft_size);
    db.resize(power.size());
    bool any_above_floor = false;
    for (std::size_t k = 0; k < power.size(); ++k) {
      const double p = std::max(power[k], kPowerFloor);
      any_above_floor = any_above_floor || power[k] > kPowerFloor;
      db[k] = 10.0 * std::log10(p);
    }
    return any_above_floor;
  };

  LsdResult result;
  double acc = 0.0;
  std::vector<double> ref_db, test_db;
  for (std::size_t i = 0; i < ref_frames.size(); ++i) {
    if (!frame_db(ref_frames[i], ref_db)) {
      ++result.frames_skipped;
      continue;
    }
    frame_db(test_frames[i], test_db);
    double sq = 0.0;
    for (std::size_t k = 0; k < ref_db.size(); ++k) {
      const double d = ref_db[k] - test_db[k];
      sq += d * d;
    }
    acc += std::sqrt(sq / static_cast<double>(ref_db.size()));
    ++result.frames_used;
  }
  if (result.frames_used == 0) {
    throw DataError("lsd: reference signal has no frames above the floor");
  }
  result.lsd_db = acc / static_cast<double>(result.frames_used);
  return result;
}

TraceStats empirical_plr(const LossTrace& trace) {
  if (trace.flags.empty()) throw DataError("empirical_plr: empty trace");
  TraceStats stats;
  std::size_t lost = 0;
  std::size_t run = 0;
  std::size_t total_burst = 0, n_bursts = 0;
  for (bool f : trace.flags) {
    if (f) {
      ++lost;
      ++run;
    } else if (run > 0) {
      ++stats.burst_histogram[run];
      total_burst += run;
      ++n_bursts;
      run = 0;
    }
  }
  if (run > 0) {
    ++stats.burst_histogram[run];
    total_burst += run;
    ++n_bursts;
  }
  stats.plr = static_cast<double>(lost) /
              static_cast<double>(trace.flags.size());
  if (n_bursts > 0) {
    stats.mean_burst_len =
        static_cast<double>(total_burst) / static_cast<double>(n_bursts);
  }
  return stats;
}

double mel_mse(const MelSpectrogram& predicted, const MelSpectrogram& truth) {
  if (predicted.n_frames() != truth.n_frames()) {
    throw ShapeError("mel_mse: frame counts differ");
  }
  double acc = 0.0;
  std::size_t count = 0;
  for (std::size_t i = 0; i < predicted.n_frames(); ++i) {
    if (predicted.data[i].size() != truth.data[i].size()) {
      throw ShapeError("mel_mse: band counts differ");
    }
    for (std::size_t m = 0; m < predicted.data[i].size(); ++m) {
      const double d = predicted.data[i][m] - truth.data[i][m];
      acc += d * d;
      ++count;
    }
  }
  if (count == 0) throw DataError("mel_mse: no entries");
  return acc / static_cast<double>(count);
}

}  // namespace plc
