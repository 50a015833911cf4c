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

#ifndef PLC_VOCODER_HPP_
#define PLC_VOCODER_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "plc/dsp.hpp"
#include "plc/nn.hpp"
#include "plc/wav.hpp"

namespace plc {

// WaveNet-style conditioner inside each coupling layer: a stack of
// non-causal dilated convs (dilation doubling per layer) with gated
// tanh/sigmoid units and Mel conditioning injected per layer.
struct WNConfig {
  std::size_t n_layers = 4;
  std::size_t channels = 64;
  std::size_t kernel = 3;
};

struct VocoderConfig {
  std::size_t group = 8;    // samples squeezed per channel step
  std::size_t n_flows = 10;
  WNConfig wn;
  std::size_t n_mels = 80;
  std::size_t hop = 160;
  std::size_t frame_len = 320;

  std::size_t n_half() const { return group / 2; }
  void validate() const;
};

// ---- squeeze / conditioning alignment ----

// [time] -> [1, group, ceil(time/group)], zero-padding the tail;
// *pad_out receives the pad length (stripped by unsqueeze_audio).
Tensor squeeze_audio(const std::vector<double>& samples, std::size_t group,
                     std::size_t* pad_out);
// Batched variant: rows of `segments` all share one length.
Tensor squeeze_batch(const std::vector<std::vector<double>>& segments,
                     std::size_t group);
std::vector<double> unsqueeze_audio(const Tensor& grouped, std::size_t pad);

// Mel frames (rows of F values) replicated across their hop span and
// sampled on the grouped time axis: returns [1, F, t_groups]. Requires
// hop % group == 0.
Tensor upsample_cond(const std::vector<std::vector<double>>& mel_frames,
                     const VocoderConfig& cfg, std::size_t t_groups);

// ---- the flow ----

class FlowModel {
 public:
  FlowModel(const VocoderConfig& cfg, Rng& rng);

  struct WNCache {
    Tensor x0, h0;
    std::vector<Tensor> h_in;    // input to each dilated conv
    std::vector<Tensor> t_act;   // tanh activations
    std::vector<Tensor> s_act;   // sigmoid activations
    std::vector<Tensor> gated;
    Tensor skip;
    Tensor logs, shift;
  };
  struct FlowCache {
    Tensor pre_conv;   // input to the invertible 1x1 conv
    Tensor x0, x1;     // coupling input halves (post inv-conv)
    WNCache wn;
  };
  struct Cache {
    Tensor cond;
    std::vector<FlowCache> flows;
    Tensor z;
  };

  // Training direction audio -> z. audio: [B, group, T], cond: [B|1, F, T].
  // Returns z; *logdet receives the summed log-Jacobian over the batch.
  Tensor flow_forward(const Tensor& audio, const Tensor& cond,
                      double* logdet, Cache* cache = nullptr) const;

  // Synthesis direction z -> audio.
  Tensor flow_inverse(const Tensor& z, const Tensor& cond) const;

  // Negative log-likelihood per dimension under an isotropic Gaussian
  // prior of variance sigma^2.
  double nll(const Tensor& audio, const Tensor& cond, double sigma,
             Cache* cache = nullptr) const;

  // nll + parameter gradients (accumulated into params().grad).
  double nll_backward(const Tensor& audio, const Tensor& cond, double sigma);

  // Samples z ~ N(0, sigma^2) of length L = (rows-1)*hop + frame_len and
  // inverts the flow under the given conditioning window.
  AudioBuffer infer_waveform(const std::vector<std::vector<double>>& cond_mel,
                             double sigma, std::uint64_t seed) const;

  const VocoderConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  // Conditioning tensor for flow_forward/flow_inverse: Mel frames are
  // z-normalized with the stored per-band statistics (raw log-Mel values
  // sit near the log floor and would saturate the conditioner's gates),
  // then replicated/sampled onto the grouped time axis.
  Tensor make_cond(const std::vector<std::vector<double>>& mel_frames,
                   std::size_t t_groups) const;

  const NormStats& norm_stats() const;
  void set_norm_stats(NormStats stats) { norm_ = std::move(stats); }
  bool has_norm_stats() const { return norm_.has_value(); }

  // Checks every inv-conv weight is nonsingular (NumericError otherwise).
  void check_invertible() const;

  void save(const std::string& path) const;
  static FlowModel load(const std::string& path,
                        std::vector<std::string>* warnings = nullptr);

 private:
  explicit FlowModel(const VocoderConfig& cfg) : cfg_(cfg) {}
  void add_parameters(Rng* rng);

  Tensor wn_forward(std::size_t flow, const Tensor& x0, const Tensor& cond,
                    WNCache* cache) const;
  // Returns gradient w.r.t. x0; accumulates parameter gradients.
  Tensor wn_backward(std::size_t flow, const WNCache& cache,
                     const Tensor& cond, const Tensor& g_logs,
                     const Tensor& g_shift);

  VocoderConfig cfg_;
  ParamSet params_;
  std::optional<NormStats> norm_;
};

struct VocoderTrainConfig {
  std::size_t steps = 1000;
  std::size_t batch = 4;
  double lr = 1e-3;
  double sigma = 1.0;
  std::size_t segment_len = 2240;
  std::size_t checkpoint_every = 0;       // 0 = only at the end
  std::string checkpoint_path;
};

// Trains on (audio, Mel) pairs cut into fixed-length segments.
FlowModel train_vocoder(const std::vector<AudioBuffer>& corpus,
                        const FrameConfig& frame_cfg,
                        const VocoderConfig& cfg,
                        const VocoderTrainConfig& train_cfg,
                        std::uint64_t seed, TrainLog* log = nullptr);

// ---- small dense linear algebra for the 1x1 convolutions ----

// log|det| via LU with partial pivoting; NumericError if singular.
double logabsdet(const Tensor& square);
Tensor invert_matrix(const Tensor& square);
// Random orthogonal matrix (QR of a Gaussian sample).
Tensor random_orthogonal(std::size_t n, Rng& rng);

}  // namespace plc

#endif  // PLC_VOCODER_HPP_
