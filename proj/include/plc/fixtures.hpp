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

#ifndef PLC_FIXTURES_HPP_
#define PLC_FIXTURES_HPP_

#include <cstdint>
#include <string>
#include <vector>

#include "plc/wav.hpp"

namespace plc {

// Synthetic desk-scale corpus: harmonic stacks (strictly periodic),
// sinusoid sweeps and noise-modulated harmonics. 60 s total at 16 kHz,
// deterministic given the seed.

AudioBuffer synth_harmonic(double f0, double seconds, int sample_rate,
                           double amplitude, std::size_t n_harmonics = 4);
AudioBuffer synth_chirp(double f0, double f1, double seconds, int sample_rate,
                        double amplitude);
AudioBuffer synth_modulated_harmonic(double f0, double seconds,
                                     int sample_rate, double amplitude,
                                     double mod_hz, double noise_level,
                                     std::uint64_t seed);

struct FixtureSet {
  std::vector<std::string> all;       // every written file
  std::vector<std::string> periodic;  // the strictly periodic subset
};

// Writes the corpus as WAV files under dir (created if missing).
FixtureSet make_fixtures(const std::string& dir, std::uint64_t seed);

}  // namespace plc

#endif  // PLC_FIXTURES_HPP_
