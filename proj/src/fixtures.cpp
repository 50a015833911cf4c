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

#include "plc/fixtures.hpp"

#include <cmath>
#include <filesystem>

#include "plc/rng.hpp"

namespace plc {
namespace {

constexpr double kTwoPi = 2.0 * 3.14159265358979323846;

}  // namespace

AudioBuffer synth_harmonic(double f0, double seconds, int sample_rate,
                           double amplitude, std::size_t n_harmonics) {
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(static_cast<std::size_t>(seconds * sample_rate));
  for (std::size_t t = 0; t < out.samples.size(); ++t) {
    const double time = static_cast<double>(t) / sample_rate;
    double v = 0.0;
    for (std::size_t h = 1; h <= n_harmonics; ++h) {
      v += std::sin(kTwoPi * f0 * static_cast<double>(h) * time) /
           static_cast<double>(h);
    }
    out.samples[t] = amplitude * v / 2.0;
  }
  return out;
}

AudioBuffer synth_chirp(double f0, double f1, double seconds, int sample_rate,
                        double amplitude) {
  AudioBuffer out;
  out.sample_rate = sample_rate;
  out.samples.resize(static_cast<std::size_t>(seconds * sample_rate));
  const double rate = (f1 - f0) / seconds;
  for (std::size_t t = 0; t < out.samples.size(); ++t) {
    const double time = static_cast<double>(t) / sample_rate;
    const double phase = kTwoPi * (f0 * time + 0.5 * rate * time * time);
    out.samples[t] = amplitude * std::sin(phase);
  }
  return out;
}

AudioBuffer synth_modulated_harmonic(double f0, double seconds,
                                     int sample_rate, double amplitude,
                                     double mod_hz, double noise_level,
                                     std::uint64_t seed) {
  AudioBuffer out = synth_harmonic(f0, seconds, sample_rate, amplitude);
  Rng rng(seed);
  for (std::size_t t = 0; t < out.samples.size(); ++t) {
    const double time = static_cast<double>(t) / sample_rate;
    const double env = 0.6 + 0.4 * std::sin(kTwoPi * mod_hz * time);
    out.samples[t] = out.samples[t] * env + noise_level * rng.normal();
    if (out.samples[t] > 1.0) out.samples[t] = 1.0;
    if (out.samples[t] < -1.0) out.samples[t] = -1.0;
  }
  return out;
}

FixtureSet make_fixtures(const std::string& dir, std::uint64_t seed) {
  namespace fs = std::filesystem;
  fs::create_directories(dir);
  constexpr int kRate = 16000;
  constexpr double kSeconds = 5.0;

  FixtureSet set;
  auto write = [&](const AudioBuffer& audio, const std::string& name,
                   bool periodic) {
    const std::string path = (fs::path(dir) / name).string();
    write_wav(audio, path);
    set.all.push_back(path);
    if (periodic) set.periodic.push_back(path);
  };

  // 30 s periodic harmonic stacks. Each f0 is a multiple of 12.5 Hz and
  // the amplitude envelope repeats every 1280 or 640 samples, so the tone
  // is exactly periodic with a period of at most 1280 samples and its
  // frame-level features cycle within a short history. Harmonics extend
  // to 7.6 kHz and a low envelope-following dither gives the files a
  // realistic noise floor (an exactly floored spectrum would make every
  // comparison against silence degenerate).
  const double f0s[] = {100.0, 137.5, 162.5, 200.0, 237.5, 287.5};
  for (std::size_t i = 0; i < 6; ++i) {
    const auto n_harm = static_cast<std::size_t>(7600.0 / f0s[i]);
    auto audio = synth_harmonic(f0s[i], kSeconds, kRate, 0.4, n_harm);
    const double am_period = (i % 2 == 0) ? 1280.0 : 640.0;
    Rng dither(seed + 100 + i);
    for (std::size_t t = 0; t < audio.samples.size(); ++t) {
      const double env =
          0.65 + 0.35 * std::sin(kTwoPi * static_cast<double>(t) / am_period);
      audio.samples[t] = env * (audio.samples[t] + 1e-3 * dither.normal());
    }
    write(audio, "periodic_" + std::to_string(i) + ".wav", true);
  }
  // 20 s sinusoid sweeps, with the same style of dither floor.
  const double sweeps[][2] = {
      {100.0, 800.0}, {200.0, 1600.0}, {1000.0, 150.0}, {300.0, 3000.0}};
  for (std::size_t i = 0; i < 4; ++i) {
    auto audio = synth_chirp(sweeps[i][0], sweeps[i][1], kSeconds, kRate,
                             0.35);
    Rng dither(seed + 200 + i);
    for (auto& s : audio.samples) s += 2e-3 * dither.normal();
    write(audio, "sweep_" + std::to_string(i) + ".wav", false);
  }
  // 10 s noise-modulated harmonics.
  for (std::size_t i = 0; i < 2; ++i) {
    write(synth_modulated_harmonic(130.81 * (i + 1), kSeconds, kRate, 0.35,
                                   2.0 + i, 0.01, seed + i),
          "modulated_" + std::to_string(i) + ".wav", false);
  }
  return set;
}

}  // namespace plc
