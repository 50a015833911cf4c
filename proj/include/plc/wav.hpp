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

#ifndef PLC_WAV_HPP_
#define PLC_WAV_HPP_

#include <string>
#include <vector>

namespace plc {

struct AudioBuffer {
  std::vector<double> samples;  // in [-1, 1]
  int sample_rate = 16000;
};

// RIFF PCM, 16-bit signed little-endian, mono. Other rates/layouts are
// rejected (FormatError); there is no resampler. Samples map to [-1, 1]
// by division by 32768.
AudioBuffer read_wav(const std::string& path, int expected_rate = 16000);
void write_wav(const AudioBuffer& audio, const std::string& path);

}  // namespace plc

#endif  // PLC_WAV_HPP_
