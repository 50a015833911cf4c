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

#include "plc/predictor.hpp"

#include <algorithm>
#include <cmath>

#include "plc/errors.hpp"

namespace plc {
namespace {

struct Window {
  const MelSpectrogram* seq;
  std::size_t start;  // history = frames [start, start+P), targets the next 2
};

void fill_history_row(double* row, const MelSpectrogram& seq,
                      std::size_t start, const PredictorConfig& cfg,
                      const NormStats& stats) {
  for (std::size_t p = 0; p < cfg.history; ++p) {
    const auto& frame = seq.data[start + p];
    for (std::size_t m = 0; m < cfg.n_mels; ++m) {
      row[p * cfg.n_mels + m] =
          (frame[m] - stats.mean[m]) / stats.std_dev[m];
    }
  }
}

}  // namespace

PredictorModel::PredictorModel(const PredictorConfig& cfg) : cfg_(cfg) {}

PredictorModel::PredictorModel(const PredictorConfig& cfg, Rng& rng)
    : cfg_(cfg) {
  const std::size_t in = cfg.in_dim();
  const std::size_t h = cfg.hidden;
  const std::size_t out = cfg.out_dim();
  params_.add("predictor.l1.w", glorot_uniform({in, h}, in, h, rng));
  params_.add("predictor.l1.b", Tensor({h}));
  params_.add("predictor.l2.w", glorot_uniform({h, h}, h, h, rng));
  params_.add("predictor.l2.b", Tensor({h}));
  params_.add("predictor.l3.w", glorot_uniform({h, h}, h, h, rng));
  params_.add("predictor.l3.b", Tensor({h}));
  params_.add("predictor.l4.w", glorot_uniform({h, out}, h, out, rng));
  params_.add("predictor.l4.b", Tensor({out}));
}

Tensor PredictorModel::forward(const Tensor& x, Cache* cache) const {
  if (x.rank() != 2 || x.dim(1) != cfg_.in_dim()) {
    throw ShapeError("predictor forward: input shape " + x.shape_string() +
                     ", expected [*, " + std::to_string(cfg_.in_dim()) + "]");
  }
  const auto& p = params_;
  Tensor h1 = sigmoid(dense_forward(x, p.get("predictor.l1.w").value,
                                    p.get("predictor.l1.b").value));
  Tensor h2 = sigmoid(dense_forward(h1, p.get("predictor.l2.w").value,
                                    p.get("predictor.l2.b").value));
  Tensor h3 = sigmoid(dense_forward(h2, p.get("predictor.l3.w").value,
                                    p.get("predictor.l3.b").value));
  Tensor y = dense_forward(h3, p.get("predictor.l4.w").value,
                           p.get("predictor.l4.b").value);
  if (cache != nullptr) {
    cache->x = x;
    cache->h1 = std::move(h1);
    cache->h2 = std::move(h2);
    cache->h3 = std::move(h3);
    cache->y = y;
    return y;
  }
  return y;
}

void PredictorModel::backward(const Cache& cache, const Tensor& gy) {
  auto& p = params_;
  Tensor gh3(cache.h3.shape());
  dense_backward(cache.h3, p.get("predictor.l4.w").value, gy, &gh3,
                 &p.get("predictor.l4.w").grad, &p.get("predictor.l4.b").grad);
  Tensor g3 = sigmoid_backward(cache.h3, gh3);
  Tensor gh2(cache.h2.shape());
  dense_backward(cache.h2, p.get("predictor.l3.w").value, g3, &gh2,
                 &p.get("predictor.l3.w").grad, &p.get("predictor.l3.b").grad);
  Tensor g2 = sigmoid_backward(cache.h2, gh2);
  Tensor gh1(cache.h1.shape());
  dense_backward(cache.h1, p.get("predictor.l2.w").value, g2, &gh1,
                 &p.get("predictor.l2.w").grad, &p.get("predictor.l2.b").grad);
  Tensor g1 = sigmoid_backward(cache.h1, gh1);
  dense_backward(cache.x, p.get("predictor.l1.w").value, g1, nullptr,
                 &p.get("predictor.l1.w").grad, &p.get("predictor.l1.b").grad);
}

std::pair<std::vector<double>, std::vector<double>> PredictorModel::predict(
    const std::vector<std::vector<double>>& history) const {
  if (history.size() != cfg_.history) {
    throw ShapeError("predictor: expected " + std::to_string(cfg_.history) +
                     " history frames, got " + std::to_string(history.size()));
  }
  Tensor x({1, cfg_.in_dim()});
  for (std::size_t p = 0; p < cfg_.history; ++p) {
    if (history[p].size() != cfg_.n_mels) {
      throw ShapeError("predictor: history frame dim " +
                       std::to_string(history[p].size()) + " != F=" +
                       std::to_string(cfg_.n_mels));
    }
    for (std::size_t m = 0; m < cfg_.n_mels; ++m) {
      x[p * cfg_.n_mels + m] = history[p][m];
    }
  }
  const Tensor y = forward(x);
  std::vector<double> first(y.data(), y.data() + cfg_.n_mels);
  std::vector<double> second(y.data() + cfg_.n_mels,
                             y.data() + 2 * cfg_.n_mels);
  return {std::move(first), std::move(second)};
}

const NormStats& PredictorModel::norm_stats() const {
  if (!norm_.has_value()) {
    throw StateError("predictor has no normalization stats attached");
  }
  return *norm_;
}

void PredictorModel::save(const std::string& path) const {
  ParamSet out;
  for (const auto& [name, p] : params_.items()) out.add(name, p.value);
  const NormStats& stats = norm_stats();
  out.add("predictor.norm.mean",
          Tensor({stats.mean.size()}, stats.mean));
  out.add("predictor.norm.std",
          Tensor({stats.std_dev.size()}, stats.std_dev));
  out.add("predictor.config",
          Tensor({3}, {static_cast<double>(cfg_.history),
                       static_cast<double>(cfg_.n_mels),
                       static_cast<double>(cfg_.hidden)}));
  checkpoint_save(out, path);
}

PredictorModel PredictorModel::load(const std::string& path,
                                    std::vector<std::string>* warnings) {
  auto tensors = checkpoint_load(path);
  auto cfg_it = tensors.find("predictor.config");
  if (cfg_it == tensors.end() || cfg_it->second.size() != 3) {
    throw FormatError("checkpoint missing predictor.config");
  }
  PredictorConfig cfg;
  cfg.history = static_cast<std::size_t>(cfg_it->second[0]);
  cfg.n_mels = static_cast<std::size_t>(cfg_it->second[1]);
  cfg.hidden = static_cast<std::size_t>(cfg_it->second[2]);

  auto mean_it = tensors.find("predictor.norm.mean");
  auto std_it = tensors.find("predictor.norm.std");
  if (mean_it == tensors.end() || std_it == tensors.end()) {
    throw FormatError("checkpoint missing predictor normalization stats");
  }
  NormStats stats;
  stats.mean.assign(mean_it->second.data(),
                    mean_it->second.data() + mean_it->second.size());
  stats.std_dev.assign(std_it->second.data(),
                       std_it->second.data() + std_it->second.size());

  PredictorModel model(cfg);
  const std::size_t in = cfg.in_dim(), h = cfg.hidden, out = cfg.out_dim();
  model.params_.add("predictor.l1.w", Tensor({in, h}));
  model.params_.add("predictor.l1.b", Tensor({h}));
  model.params_.add("predictor.l2.w", Tensor({h, h}));
  model.params_.add("predictor.l2.b", Tensor({h}));
  model.params_.add("predictor.l3.w", Tensor({h, h}));
  model.params_.add("predictor.l3.b", Tensor({h}));
  model.params_.add("predictor.l4.w", Tensor({h, out}));
  model.params_.add("predictor.l4.b", Tensor({out}));

  tensors.erase("predictor.norm.mean");
  tensors.erase("predictor.norm.std");
  tensors.erase("predictor.config");
  auto unknown = bind_checkpoint(model.params_, tensors);
  if (warnings != nullptr) *warnings = std::move(unknown);
  model.set_norm_stats(std::move(stats));
  return model;
}

double predictor_loss(const Tensor& pred, const Tensor& target) {
  require_same_shape(pred, target, "predictor_loss");
  double acc = 0.0;
  for (std::size_t i = 0; i < pred.size(); ++i) {
    const double d = pred[i] - target[i];
    acc += d * d;
  }
  return acc / static_cast<double>(pred.size());
}

PredictorModel train_predictor(const std::vector<MelSpectrogram>& corpus,
                               const PredictorConfig& cfg,
                               const PredictorTrainConfig& train_cfg,
                               std::uint64_t seed, TrainLog* log) {
  if (corpus.empty()) throw DataError("predictor training corpus is empty");
  for (const auto& seq : corpus) {
    if (seq.n_frames() < cfg.history + 2) {
      throw DataError("sequence with " + std::to_string(seq.n_frames()) +
                      " frames is shorter than P+2 = " +
                      std::to_string(cfg.history + 2));
    }
    if (seq.config.n_mels != cfg.n_mels) {
      throw DataError("corpus n_mels does not match predictor config");
    }
  }

  const NormStats stats = compute_norm_stats(corpus);
  std::vector<Window> windows;
  for (const auto& seq : corpus) {
    for (std::size_t s = 0; s + cfg.history + 2 <= seq.n_frames(); ++s) {
      windows.push_back({&seq, s});
    }
  }

  Rng rng(seed);
  PredictorModel model(cfg, rng);
  model.set_norm_stats(stats);
  Adam opt(train_cfg.lr);

  const std::size_t batch = std::min(train_cfg.batch, windows.size());
  std::vector<std::size_t> order(windows.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

  std::size_t cursor = 0;
  const std::size_t total_steps = train_cfg.steps + train_cfg.finetune_steps;
  for (std::size_t step = 0; step < total_steps; ++step) {
    if (cursor + batch > order.size()) {
      cursor = 0;
      if (train_cfg.shuffle) {
        for (std::size_t i = order.size(); i > 1; --i) {
          std::swap(order[i - 1], order[rng.below(i)]);
        }
      }
    }
    const bool finetune = step >= train_cfg.steps;

    Tensor x({batch, cfg.in_dim()});
    Tensor target({batch, cfg.out_dim()});
    for (std::size_t b = 0; b < batch; ++b) {
      const Window& w = windows[order[cursor + b]];
      fill_history_row(x.data() + b * cfg.in_dim(), *w.seq, w.start, cfg,
                       stats);
      const auto& t0 = w.seq->data[w.start + cfg.history];
      const auto& t1 = w.seq->data[w.start + cfg.history + 1];
      for (std::size_t m = 0; m < cfg.n_mels; ++m) {
        target.at2(b, m) = (t0[m] - stats.mean[m]) / stats.std_dev[m];
        target.at2(b, cfg.n_mels + m) =
            (t1[m] - stats.mean[m]) / stats.std_dev[m];
      }
    }
    cursor += batch;

    if (finetune && cfg.history >= 2) {
      // Roll-forward stage: predict the newest history frame from the
      // older ones and substitute it, as happens on consecutive losses.
      Tensor x_prev({batch, cfg.in_dim()});
      for (std::size_t b = 0; b < batch; ++b) {
        const double* row = x.data() + b * cfg.in_dim();
        double* prev = x_prev.data() + b * cfg.in_dim();
        // Shift history back one frame; duplicate the oldest.
        std::copy(row, row + cfg.n_mels, prev);
        std::copy(row, row + (cfg.history - 1) * cfg.n_mels,
                  prev + cfg.n_mels);
      }
      const Tensor y_prev = model.forward(x_prev);
      for (std::size_t b = 0; b < batch; ++b) {
        for (std::size_t m = 0; m < cfg.n_mels; ++m) {
          x.at2(b, (cfg.history - 1) * cfg.n_mels + m) = y_prev.at2(b, m);
        }
      }
    }

    PredictorModel::Cache cache;
    const Tensor y = model.forward(x, &cache);
    const double loss = predictor_loss(y, target);
    if (log != nullptr) log->loss.push_back(loss);

    Tensor gy(y.shape());
    const double scale = 2.0 / static_cast<double>(y.size());
    for (std::size_t i = 0; i < y.size(); ++i) {
      gy[i] = scale * (y[i] - target[i]);
    }
    model.params().zero_grads();
    model.backward(cache, gy);
    opt.step(model.params());
  }
  return model;
}

}  // namespace plc
