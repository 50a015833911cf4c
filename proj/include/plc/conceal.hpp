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

#ifndef PLC_CONCEAL_HPP_
#define PLC_CONCEAL_HPP_

#include <cstdint>
#include <vector>

#include "plc/channel.hpp"
#include "plc/dsp.hpp"
#include "plc/predictor.hpp"
#include "plc/vocoder.hpp"
#include "plc/wav.hpp"

namespace plc {

struct ConcealReport {
  std::size_t packets = 0;
  std::size_t lost = 0;
  std::size_t concealed_neural = 0;
  std::size_t coldstart_silence = 0;
  std::size_t pattern_fallbacks = 0;
  std::vector<std::size_t> splice_offsets;  // n* per neural concealment
};

struct Substitution {
  std::vector<double> frame;  // W samples
  std::size_t offset = 0;     // n*
  bool fallback = false;      // degenerate pattern: final W samples used
};

// Slides the (W-H)-sample pattern over the last 2H+W samples of
// `generated` by normalized cross-correlation; the best start offset
// yields the W-sample substitution frame.
Substitution select_substitution(const std::vector<double>& pattern,
                                 const std::vector<double>& generated,
                                 const FrameConfig& cfg);

struct ConcealConfig {
  FrameConfig frame;
  double sigma = 0.6;
  std::uint64_t seed = 0;
};

// Streaming PLC: received packets pass through; lost packets are
// predicted (Mel), synthesized by the flow vocoder, spliced by waveform
// similarity and re-fed into the history buffer as if received. Losses
// before P frames of history fall back to silence.
AudioBuffer conceal_stream(const std::vector<std::vector<double>>& packets,
                           const LossTrace& trace,
                           const PredictorModel& predictor,
                           const FlowModel& vocoder,
                           const ConcealConfig& cfg,
                           ConcealReport* report = nullptr);

// Lost frames replaced with zeros, same overlap-add path.
AudioBuffer silence_baseline(const std::vector<std::vector<double>>& packets,
                             const LossTrace& trace, const FrameConfig& cfg,
                             ConcealReport* report = nullptr);

// Classical waveform-similarity substitution from recent history.
AudioBuffer wsola_baseline(const std::vector<std::vector<double>>& packets,
                           const LossTrace& trace, const FrameConfig& cfg,
                           ConcealReport* report = nullptr);

}  // namespace plc

#endif  // PLC_CONCEAL_HPP_
