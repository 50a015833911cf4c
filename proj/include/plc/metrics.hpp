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

#ifndef PLC_METRICS_HPP_
#define PLC_METRICS_HPP_

#include <cstddef>
#include <map>
#include <vector>

#include "plc/channel.hpp"
#include "plc/dsp.hpp"
#include "plc/wav.hpp"

namespace plc {

struct LsdResult {
  double lsd_db = 0.0;
  std::size_t frames_used = 0;
  std::size_t frames_skipped = 0;  // reference-silence frames
};

// Log-spectral distortion: per frame, the RMS difference of the dB power
// spectra (10*log10, floor 1e-10) over fft_size/2+1 bins; mean over
// frames. Frames whose reference spectrum is entirely floored are
// excluded and counted. Convention pinned here; absolute values are not
// comparable across other LSD definitions.
LsdResult lsd(const AudioBuffer& reference, const AudioBuffer& test,
              const FrameConfig& cfg);

struct TraceStats {
  double plr = 0.0;
  std::map<std::size_t, std::size_t> burst_histogram;  // run length -> count
  double mean_burst_len = 0.0;
};

TraceStats empirical_plr(const LossTrace& trace);

// Mean squared error over all entries of two equal-shape Mel matrices.
double mel_mse(const MelSpectrogram& predicted, const MelSpectrogram& truth);

}  // namespace plc

#endif  // PLC_METRICS_HPP_
