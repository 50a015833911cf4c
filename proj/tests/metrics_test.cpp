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

#include <cmath>
#include <vector>

#include <doctest.h>

#include "plc/dsp.hpp"
#include "plc/errors.hpp"
#include "plc/fft.hpp"
#include "plc/metrics.hpp"
#include "plc/rng.hpp"

namespace {

plc::AudioBuffer noise_buffer(std::size_t n, std::uint64_t seed,
                              double amp = 0.4) {
  plc::AudioBuffer a;
  a.samples.resize(n);
  plc::Rng rng(seed);
  for (auto& s : a.samples) s = amp * rng.uniform(-1.0, 1.0);
  return a;
}

}  // namespace

TEST_CASE("identical signals have zero distortion") {
  plc::FrameConfig cfg;
  const auto a = noise_buffer(4800, 1);
  const auto r = plc::lsd(a, a, cfg);
  CHECK(r.lsd_db == doctest::Approx(0.0).epsilon(1e-12));
  CHECK(r.frames_used > 0);
  CHECK(r.frames_skipped == 0);
}

TEST_CASE("a pure gain follows the 10*log10 law") {
  plc::FrameConfig cfg;
  const auto a = noise_buffer(4800, 2);
  auto b = a;
  for (auto& s : b.samples) s *= 10.0;  // +20 dB power
  const auto r = plc::lsd(a, b, cfg);
  CHECK(r.lsd_db == doctest::Approx(20.0).epsilon(1e-9));
}

TEST_CASE("lsd matches a brute-force recomputation") {
  plc::FrameConfig cfg;
  const auto a = noise_buffer(3200, 3);
  const auto b = noise_buffer(3200, 4);
  const auto r = plc::lsd(a, b, cfg);

  const auto fa = plc::frame_signal(a, cfg);
  const auto fb = plc::frame_signal(b, cfg);
  const auto w = plc::hann_window(cfg.frame_len);
  double acc = 0.0;
  for (std::size_t i = 0; i < fa.size(); ++i) {
    std::vector<double> wa(cfg.frame_len), wb(cfg.frame_len);
    for (std::size_t t = 0; t < cfg.frame_len; ++t) {
      wa[t] = fa[i][t] * w[t];
      wb[t] = fb[i][t] * w[t];
    }
    const auto pa = plc::power_spectrum(wa, cfg.fft_size);
    const auto pb = plc::power_spectrum(wb, cfg.fft_size);
    double frame_acc = 0.0;
    for (std::size_t k = 0; k < pa.size(); ++k) {
      const double da = 10.0 * std::log10(std::max(pa[k], 1e-10));
      const double db = 10.0 * std::log10(std::max(pb[k], 1e-10));
      frame_acc += (da - db) * (da - db);
    }
    acc += std::sqrt(frame_acc / static_cast<double>(pa.size()));
  }
  CHECK(r.lsd_db ==
        doctest::Approx(acc / static_cast<double>(fa.size())).epsilon(1e-9));
}

TEST_CASE("reference-silent frames are skipped and counted") {
  plc::FrameConfig cfg;
  auto a = noise_buffer(4800, 5);
  // Silence an exact frame span in the reference (and more around it so
  // every window over it is fully floored).
  for (std::size_t i = 960; i < 2240; ++i) a.samples[i] = 0.0;
  const auto b = noise_buffer(4800, 6);
  const auto r = plc::lsd(a, b, cfg);
  CHECK(r.frames_skipped > 0);
  CHECK(r.frames_used + r.frames_skipped == 29);
  CHECK(std::isfinite(r.lsd_db));
}

TEST_CASE("an all-silent reference is a data error") {
  plc::FrameConfig cfg;
  plc::AudioBuffer silent;
  silent.samples.assign(3200, 0.0);
  const auto b = noise_buffer(3200, 7);
  CHECK_THROWS_AS(plc::lsd(silent, b, cfg), plc::DataError);
}

TEST_CASE("shorter test signals are padded, longer ones truncated") {
  plc::FrameConfig cfg;
  const auto a = noise_buffer(3200, 8);
  auto shorter = a;
  shorter.samples.resize(2900);
  auto longer = a;
  longer.samples.resize(3500, 0.1);
  CHECK(std::isfinite(plc::lsd(a, shorter, cfg).lsd_db));
  CHECK(plc::lsd(a, longer, cfg).lsd_db ==
        doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("empirical trace statistics") {
  plc::LossTrace t;
  for (char c : std::string("0110011100")) t.flags.push_back(c == '1');
  const auto s = plc::empirical_plr(t);
  CHECK(s.plr == doctest::Approx(0.5));
  CHECK(s.burst_histogram.at(2) == 1);
  CHECK(s.burst_histogram.at(3) == 1);
  CHECK(s.mean_burst_len == doctest::Approx(2.5));

  plc::LossTrace none;
  none.flags.assign(10, false);
  const auto s0 = plc::empirical_plr(none);
  CHECK(s0.plr == 0.0);
  CHECK(s0.mean_burst_len == 0.0);
  CHECK(s0.burst_histogram.empty());

  plc::LossTrace all;
  all.flags.assign(10, true);
  const auto s1 = plc::empirical_plr(all);
  CHECK(s1.plr == 1.0);
  CHECK(s1.burst_histogram.at(10) == 1);
}

TEST_CASE("mel mse matches a direct computation") {
  plc::FrameConfig cfg;
  cfg.n_mels = 4;
  plc::MelSpectrogram a, b;
  a.config = b.config = cfg;
  a.data = {{1, 2, 3, 4}, {5, 6, 7, 8}};
  b.data = {{1, 2, 3, 4}, {5, 6, 7, 10}};
  CHECK(plc::mel_mse(a, b) == doctest::Approx(4.0 / 8.0));
  b.data.pop_back();
  CHECK_THROWS_AS(plc::mel_mse(a, b), plc::ShapeError);
}
