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

#ifndef PLC_PREDICTOR_HPP_
#define PLC_PREDICTOR_HPP_

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "plc/dsp.hpp"
#include "plc/nn.hpp"

namespace plc {

// Feed-forward Mel predictor: P*F inputs -> 3 sigmoid hidden layers ->
// linear 2*F outputs (the Mel vectors of the lost frame and the next one).
struct PredictorConfig {
  std::size_t history = 11;  // P
  std::size_t n_mels = 80;   // F
  std::size_t hidden = 2048;

  std::size_t in_dim() const { return history * n_mels; }
  std::size_t out_dim() const { return 2 * n_mels; }
};

class PredictorModel {
 public:
  PredictorModel(const PredictorConfig& cfg, Rng& rng);

  // x: [batch, P*F] normalized history, returns [batch, 2*F].
  struct Cache {
    Tensor x, h1, h2, h3, y;
  };
  Tensor forward(const Tensor& x, Cache* cache = nullptr) const;

  // Accumulates parameter gradients from gy (gradient w.r.t. the output).
  void backward(const Cache& cache, const Tensor& gy);

  // Inference from P normalized F-dim Mel vectors; returns the two
  // predicted (still normalized) Mel vectors.
  std::pair<std::vector<double>, std::vector<double>> predict(
      const std::vector<std::vector<double>>& history) const;

  const PredictorConfig& config() const { return cfg_; }
  ParamSet& params() { return params_; }
  const ParamSet& params() const { return params_; }

  const NormStats& norm_stats() const;
  void set_norm_stats(NormStats stats) { norm_ = std::move(stats); }
  bool has_norm_stats() const { return norm_.has_value(); }

  void save(const std::string& path) const;
  static PredictorModel load(const std::string& path,
                             std::vector<std::string>* warnings = nullptr);

 private:
  explicit PredictorModel(const PredictorConfig& cfg);

  PredictorConfig cfg_;
  ParamSet params_;
  std::optional<NormStats> norm_;
};

// Mean squared error over all 2*F output components.
double predictor_loss(const Tensor& pred, const Tensor& target);

struct PredictorTrainConfig {
  std::size_t steps = 2000;
  std::size_t batch = 32;
  double lr = 1e-3;
  bool shuffle = true;
  // Experimental joint-training stage: extra steps where the newest
  // history frame is replaced by the model's own prediction, matching
  // the roll-forward used on consecutive losses.
  std::size_t finetune_steps = 0;
};

// Trains on loss-free Mel sequences; normalization stats are computed
// over the corpus first and attached to the returned model.
PredictorModel train_predictor(const std::vector<MelSpectrogram>& corpus,
                               const PredictorConfig& cfg,
                               const PredictorTrainConfig& train_cfg,
                               std::uint64_t seed, TrainLog* log = nullptr);

}  // namespace plc

#endif  // PLC_PREDICTOR_HPP_
