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

#include "plc/conceal.hpp"

#include <cmath>
#include <deque>

#include "plc/errors.hpp"
#include "plc/kernels.hpp"

namespace plc {
namespace {

constexpr double kEnergyFloor = 1e-8;

void validate_packets(const std::vector<std::vector<double>>& packets,
                      const LossTrace& trace, const FrameConfig& cfg) {
  cfg.validate();
  if (packets.empty()) throw DataError("no packets to conceal");
  if (trace.flags.size() != packets.size()) {
    throw DataError("trace has " + std::to_string(trace.flags.size()) +
                    " packets but stream has " +
                    std::to_string(packets.size()));
  }
  for (const auto& p : packets) {
    if (p.size() != cfg.frame_len) {
      throw ShapeError("packet payload length " + std::to_string(p.size()) +
                       " != W=" + std::to_string(cfg.frame_len));
    }
  }
}

// Raw waveform tail spanned by the last three frames (length 2H + W).
std::vector<double> stitch_history(const std::deque<std::vector<double>>& last3,
                                   const FrameConfig& cfg) {
  std::vector<double> out;
  out.reserve(2 * cfg.hop + cfg.frame_len);
  out.insert(out.end(), last3[0].begin(), last3[0].begin() + cfg.hop);
  out.insert(out.end(), last3[1].begin(), last3[1].begin() + cfg.hop);
  out.insert(out.end(), last3[2].begin(), last3[2].end());
  return out;
}

}  // namespace

Substitution select_substitution(const std::vector<double>& pattern,
                                 const std::vector<double>& generated,
                                 const FrameConfig& cfg) {
  const std::size_t w = cfg.frame_len;
  const std::size_t search_len = 2 * cfg.hop + w;
  if (pattern.size() != w - cfg.hop) {
    throw ShapeError("pattern length " + std::to_string(pattern.size()) +
                     " != W-H=" + std::to_string(w - cfg.hop));
  }
  if (generated.size() < search_len) {
    throw DataError("generated waveform shorter than 2H+W");
  }
  const double* b = generated.data() + (generated.size() - search_len);
  const std::size_t m = pattern.size();

  double pat_mean = 0.0;
  for (double v : pattern) pat_mean += v;
  pat_mean /= static_cast<double>(m);
  std::vector<double> pat(m);
  for (std::size_t i = 0; i < m; ++i) pat[i] = pattern[i] - pat_mean;
  const double pat_energy = kernels::sum_squares(pat.data(), m);

  Substitution sub;
  auto fallback = [&]() {
    sub.offset = search_len - w;
    sub.fallback = true;
    sub.frame.assign(b + sub.offset, b + sub.offset + w);
    return sub;
  };
  if (pat_energy < kEnergyFloor) return fallback();

  double best = -2.0;
  std::size_t best_n = 0;
  bool any = false;
  std::vector<double> win(m);
  for (std::size_t n = 0; n + w <= search_len; ++n) {
    double win_mean = 0.0;
    for (std::size_t i = 0; i < m; ++i) win_mean += b[n + i];
    win_mean /= static_cast<double>(m);
    for (std::size_t i = 0; i < m; ++i) win[i] = b[n + i] - win_mean;
    const double win_energy = kernels::sum_squares(win.data(), m);
    if (win_energy < kEnergyFloor) continue;
    const double ncc =
        kernels::dot(pat.data(), win.data(), m) /
        std::sqrt(pat_energy * win_energy);
    if (!any || ncc > best) {
      best = ncc;
      best_n = n;
      any = true;
    }
  }
  if (!any) return fallback();
  sub.offset = best_n;
  sub.frame.assign(b + best_n, b + best_n + w);
  return sub;
}

namespace {

enum class Method { kNeural, kSilence, kWsola };

AudioBuffer run_stream(const std::vector<std::vector<double>>& packets,
                       const LossTrace& trace, const FrameConfig& cfg,
                       Method method, const PredictorModel* predictor,
                       const FlowModel* vocoder, double sigma,
                       std::uint64_t seed, ConcealReport* report) {
  validate_packets(packets, trace, cfg);
  if (method == Method::kNeural) {
    if (predictor == nullptr || vocoder == nullptr) {
      throw StateError("neural concealment requires both models");
    }
    if (!predictor->has_norm_stats()) {
      throw StateError("predictor checkpoint has no normalization stats");
    }
  }

  const auto bank = mel_filterbank(cfg);
  const std::size_t p_hist =
      method == Method::kNeural ? predictor->config().history : 0;
  const NormStats* stats =
      method == Method::kNeural ? &predictor->norm_stats() : nullptr;

  std::deque<std::vector<double>> mel_history;   // last P Mel vectors
  std::deque<std::vector<double>> recent_frames; // last 3 emitted payloads
  std::vector<std::vector<double>> out_frames;
  out_frames.reserve(packets.size());
  ConcealReport rep;
  rep.packets = packets.size();

  for (std::size_t k = 0; k < packets.size(); ++k) {
    std::vector<double> frame;
    if (!trace.flags[k]) {
      frame = packets[k];
    } else {
      ++rep.lost;
      switch (method) {
        case Method::kSilence:
          frame.assign(cfg.frame_len, 0.0);
          break;
        case Method::kWsola: {
          if (recent_frames.size() < 3) {
            frame.assign(cfg.frame_len, 0.0);
            ++rep.coldstart_silence;
            break;
          }
          const auto history = stitch_history(recent_frames, cfg);
          const auto& prev = recent_frames.back();
          const std::vector<double> pattern(prev.begin() + cfg.hop,
                                            prev.end());
          auto sub = select_substitution(pattern, history, cfg);
          if (sub.fallback) ++rep.pattern_fallbacks;
          frame = std::move(sub.frame);
          break;
        }
        case Method::kNeural: {
          if (mel_history.size() < p_hist || recent_frames.empty()) {
            frame.assign(cfg.frame_len, 0.0);
            ++rep.coldstart_silence;
            break;
          }
          // Predict the next two Mel frames from normalized history.
          std::vector<std::vector<double>> normalized;
          normalized.reserve(p_hist);
          for (const auto& m : mel_history) {
            normalized.push_back(normalize_vec(m, *stats));
          }
          auto [m_t, m_t1] = predictor->predict(normalized);
          // Conditioning window: P history frames + the 2 predictions.
          std::vector<std::vector<double>> cond(mel_history.begin(),
                                                mel_history.end());
          cond.push_back(denormalize_vec(m_t, *stats));
          cond.push_back(denormalize_vec(m_t1, *stats));
          const AudioBuffer generated =
              vocoder->infer_waveform(cond, sigma, seed + k);
          const auto& prev = recent_frames.back();
          const std::vector<double> pattern(prev.begin() + cfg.hop,
                                            prev.end());
          auto sub = select_substitution(pattern, generated.samples, cfg);
          if (sub.fallback) ++rep.pattern_fallbacks;
          rep.splice_offsets.push_back(sub.offset);
          frame = std::move(sub.frame);
          ++rep.concealed_neural;
          break;
        }
      }
    }

    // The emitted frame enters the buffer as if received; its Mel is
    // recomputed from the spliced audio so features track the output.
    if (method == Method::kNeural) {
      mel_history.push_back(mel_frame(frame, cfg, bank));
      while (mel_history.size() > p_hist) mel_history.pop_front();
    }
    recent_frames.push_back(frame);
    while (recent_frames.size() > 3) recent_frames.pop_front();
    out_frames.push_back(std::move(frame));
  }

  if (report != nullptr) *report = std::move(rep);
  return overlap_add(out_frames, cfg);
}

}  // namespace

AudioBuffer conceal_stream(const std::vector<std::vector<double>>& packets,
                           const LossTrace& trace,
                           const PredictorModel& predictor,
                           const FlowModel& vocoder, const ConcealConfig& cfg,
                           ConcealReport* report) {
  return run_stream(packets, trace, cfg.frame, Method::kNeural, &predictor,
                    &vocoder, cfg.sigma, cfg.seed, report);
}

AudioBuffer silence_baseline(const std::vector<std::vector<double>>& packets,
                             const LossTrace& trace, const FrameConfig& cfg,
                             ConcealReport* report) {
  return run_stream(packets, trace, cfg, Method::kSilence, nullptr, nullptr,
                    0.0, 0, report);
}

AudioBuffer wsola_baseline(const std::vector<std::vector<double>>& packets,
                           const LossTrace& trace, const FrameConfig& cfg,
                           ConcealReport* report) {
  return run_stream(packets, trace, cfg, Method::kWsola, nullptr, nullptr,
                    0.0, 0, report);
}

}  // namespace plc
