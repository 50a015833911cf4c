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
//
// End-to-end acceptance suite. Each numbered check prints exactly one
// PASS/FAIL line; the process exits nonzero if any check fails. The
// desk-scale models trained in check 5 are reused by checks 7 and 8.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <sstream>
#include <string>
#include <vector>

#include "plc/channel.hpp"
#include "plc/conceal.hpp"
#include "plc/dsp.hpp"
#include "plc/fft.hpp"
#include "plc/fixtures.hpp"
#include "plc/metrics.hpp"
#include "plc/nn.hpp"
#include "plc/predictor.hpp"
#include "plc/rng.hpp"
#include "plc/vocoder.hpp"
#include "plc/wav.hpp"

namespace fs = std::filesystem;

namespace {

constexpr double kPi = 3.14159265358979323846;

struct Context {
  fs::path work;
  std::string cli;  // path to the command-line binary
  plc::FixtureSet fixtures;
  std::unique_ptr<plc::PredictorModel> predictor;  // full-corpus model
  std::unique_ptr<plc::FlowModel> vocoder;
  fs::path predictor_path, vocoder_path;
};

int g_failures = 0;

void report(int index, const std::string& name, bool pass,
            const std::string& detail) {
  std::cout << (pass ? "[PASS] " : "[FAIL] ") << index << ". " << name
            << " -- " << detail << std::endl;
  if (!pass) ++g_failures;
}

plc::Tensor random_tensor(std::vector<std::size_t> shape, std::uint64_t seed,
                          double scale = 1.0) {
  plc::Tensor t(std::move(shape));
  plc::Rng rng(seed);
  for (std::size_t i = 0; i < t.size(); ++i) {
    t[i] = scale * rng.uniform(-1.0, 1.0);
  }
  return t;
}

plc::VocoderConfig micro_voc_config() {
  plc::VocoderConfig cfg;
  cfg.group = 4;
  cfg.n_flows = 2;
  cfg.wn.n_layers = 2;
  cfg.wn.channels = 6;
  cfg.n_mels = 4;
  cfg.hop = 8;
  cfg.frame_len = 16;
  return cfg;
}

void randomize_conditioner(plc::FlowModel& model, std::uint64_t seed) {
  plc::Rng rng(seed);
  for (auto& [name, p] : model.params().items()) {
    if (name.find(".W") != std::string::npos) continue;
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      p.value[i] = 0.2 * rng.uniform(-1.0, 1.0);
    }
  }
}

// ---------------------------------------------------------------- 1
void check_channel(const Context&) {
  bool pass = true;
  std::ostringstream detail;
  for (double plr : {0.1, 0.2, 0.3, 0.5}) {
    const auto params = plc::derive_params(plr, 0.5, 0.0, 0.5);
    if (std::abs(plc::mean_plr(params) - plr) > 1e-12) pass = false;
    const auto trace = plc::generate_trace(params, 1000000, 17);
    const double emp = static_cast<double>(trace.lost_count()) / 1e6;
    detail << "plr " << plr << "->" << emp << " ";
    if (std::abs(emp - plr) > 0.01) pass = false;
  }
  report(1, "channel statistics within 0.01 of target", pass, detail.str());
}

// ---------------------------------------------------------------- 2
void check_flow(const Context&) {
  auto cfg = micro_voc_config();
  plc::Rng rng(21);
  plc::FlowModel model(cfg, rng);
  randomize_conditioner(model, 22);

  double worst_identity = 0.0;
  for (int rep = 0; rep < 50; ++rep) {
    const std::size_t t = 4 + static_cast<std::size_t>(rep % 9);
    const auto x = random_tensor({1, 4, t}, 100 + rep);
    const auto cond = random_tensor({1, 4, t}, 200 + rep);
    double logdet = 0.0;
    const auto z = model.flow_forward(x, cond, &logdet);
    const auto back = model.flow_inverse(z, cond);
    for (std::size_t i = 0; i < x.size(); ++i) {
      worst_identity = std::max(worst_identity, std::abs(back[i] - x[i]));
    }
  }

  // Numerical Jacobian log-determinant on group=4, 2 flows, time=12.
  auto x = random_tensor({1, 4, 12}, 300);
  const auto cond = random_tensor({1, 4, 12}, 301);
  double logdet = 0.0;
  (void)model.flow_forward(x, cond, &logdet);
  const std::size_t n = x.size();
  const double eps = 1e-6;
  plc::Tensor jac({n, n});
  for (std::size_t j = 0; j < n; ++j) {
    const double keep = x[j];
    double dummy = 0.0;
    x[j] = keep + eps;
    const auto up = model.flow_forward(x, cond, &dummy);
    x[j] = keep - eps;
    const auto down = model.flow_forward(x, cond, &dummy);
    x[j] = keep;
    for (std::size_t i = 0; i < n; ++i) {
      jac.at2(i, j) = (up[i] - down[i]) / (2.0 * eps);
    }
  }
  const double jac_err = std::abs(plc::logabsdet(jac) - logdet);

  std::ostringstream detail;
  detail << "identity err " << worst_identity << " (tol 1e-10), logdet err "
         << jac_err << " (tol 1e-5)";
  report(2, "flow inverse identity and Jacobian log-determinant",
         worst_identity <= 1e-10 && jac_err <= 1e-5, detail.str());
}

// ---------------------------------------------------------------- 3
// Central finite differences with relative tolerance 1e-4.
double max_rel_grad_err(plc::Tensor& x, const plc::Tensor& analytic,
                        const std::function<double()>& loss) {
  const double eps = 1e-4;
  double worst = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double keep = x[i];
    x[i] = keep + eps;
    const double up = loss();
    x[i] = keep - eps;
    const double down = loss();
    x[i] = keep;
    const double numeric = (up - down) / (2.0 * eps);
    const double denom =
        std::max({std::abs(numeric), std::abs(analytic[i]), 1e-8});
    worst = std::max(worst, std::abs(numeric - analytic[i]) / denom);
  }
  return worst;
}

double half_sum_squares(const plc::Tensor& y) {
  double acc = 0.0;
  for (std::size_t i = 0; i < y.size(); ++i) acc += y[i] * y[i];
  return 0.5 * acc;
}

void check_gradients(const Context&) {
  double worst = 0.0;

  {  // dense
    auto x = random_tensor({2, 3}, 1);
    auto w = random_tensor({3, 4}, 2);
    auto b = random_tensor({4}, 3);
    const auto loss = [&]() {
      return half_sum_squares(plc::dense_forward(x, w, b));
    };
    const auto y = plc::dense_forward(x, w, b);
    plc::Tensor gx(x.shape()), gw(w.shape()), gb(b.shape());
    plc::dense_backward(x, w, y, &gx, &gw, &gb);
    worst = std::max({worst, max_rel_grad_err(x, gx, loss),
                      max_rel_grad_err(w, gw, loss),
                      max_rel_grad_err(b, gb, loss)});
  }
  {  // sigmoid / tanh
    auto x = random_tensor({2, 5}, 4);
    const auto sloss = [&]() { return half_sum_squares(plc::sigmoid(x)); };
    auto y = plc::sigmoid(x);
    worst = std::max(worst,
                     max_rel_grad_err(x, plc::sigmoid_backward(y, y), sloss));
    const auto tloss = [&]() { return half_sum_squares(plc::tanh_op(x)); };
    y = plc::tanh_op(x);
    worst =
        std::max(worst, max_rel_grad_err(x, plc::tanh_backward(y, y), tloss));
  }
  {  // dilated conv
    auto x = random_tensor({1, 2, 6}, 5);
    auto w = random_tensor({3, 2, 3}, 6);
    auto b = random_tensor({3}, 7);
    const auto loss = [&]() {
      return half_sum_squares(plc::conv1d_forward(x, w, b, 2));
    };
    const auto y = plc::conv1d_forward(x, w, b, 2);
    plc::Tensor gx(x.shape()), gw(w.shape()), gb(b.shape());
    plc::conv1d_backward(x, w, y, 2, &gx, &gw, &gb);
    worst = std::max({worst, max_rel_grad_err(x, gx, loss),
                      max_rel_grad_err(w, gw, loss),
                      max_rel_grad_err(b, gb, loss)});
  }
  {  // micro predictor, full model
    plc::PredictorConfig cfg{3, 4, 8};
    plc::Rng rng(8);
    plc::PredictorModel model(cfg, rng);
    const auto x = random_tensor({2, cfg.in_dim()}, 9);
    const auto target = random_tensor({2, cfg.out_dim()}, 10);
    const auto loss = [&]() {
      return plc::predictor_loss(model.forward(x), target);
    };
    plc::PredictorModel::Cache cache;
    const auto y = model.forward(x, &cache);
    plc::Tensor gy(y.shape());
    for (std::size_t i = 0; i < y.size(); ++i) {
      gy[i] = 2.0 * (y[i] - target[i]) / static_cast<double>(y.size());
    }
    model.params().zero_grads();
    model.backward(cache, gy);
    for (auto& [name, p] : model.params().items()) {
      worst = std::max(worst, max_rel_grad_err(p.value, p.grad, loss));
    }
  }
  {  // micro vocoder, full model
    auto cfg = micro_voc_config();
    plc::Rng rng(11);
    plc::FlowModel model(cfg, rng);
    randomize_conditioner(model, 12);
    const auto audio = random_tensor({1, 4, 4}, 13, 0.5);
    const auto cond = random_tensor({1, 4, 4}, 14, 0.5);
    const auto loss = [&]() { return model.nll(audio, cond, 0.8); };
    model.params().zero_grads();
    (void)model.nll_backward(audio, cond, 0.8);
    for (auto& [name, p] : model.params().items()) {
      worst = std::max(worst, max_rel_grad_err(p.value, p.grad, loss));
    }
  }

  std::ostringstream detail;
  detail << "max relative error " << worst << " (tol 1e-4)";
  report(3, "finite-difference gradient fidelity", worst <= 1e-4,
         detail.str());
}

// ---------------------------------------------------------------- 4
void check_dsp(const Context&) {
  plc::FrameConfig cfg;
  plc::AudioBuffer noise;
  noise.samples.resize(8000);
  plc::Rng rng(31);
  for (auto& s : noise.samples) s = rng.uniform(-0.5, 0.5);
  const auto frames = plc::frame_signal(noise, cfg);
  const auto rebuilt = plc::overlap_add(frames, cfg);
  double ola_err = 0.0;
  for (std::size_t i = 0; i < rebuilt.samples.size(); ++i) {
    ola_err = std::max(ola_err,
                       std::abs(rebuilt.samples[i] - noise.samples[i]));
  }

  double fft_err = 0.0;
  for (std::size_t n : {8, 16, 32, 64}) {
    std::vector<std::complex<double>> x(n);
    for (auto& v : x) v = {rng.uniform(-1.0, 1.0), rng.uniform(-1.0, 1.0)};
    auto y = x;
    plc::fft(y);
    for (std::size_t k = 0; k < n; ++k) {
      std::complex<double> acc = 0.0;
      for (std::size_t t = 0; t < n; ++t) {
        const double ang = -2.0 * kPi * static_cast<double>(k * t) /
                           static_cast<double>(n);
        acc += x[t] * std::complex<double>(std::cos(ang), std::sin(ang));
      }
      fft_err = std::max(fft_err, std::abs(y[k] - acc));
    }
  }

  std::ostringstream detail;
  detail << "OLA err " << ola_err << " (tol 1e-6), FFT-vs-DFT err " << fft_err
         << " (tol 1e-9)";
  report(4, "DSP reconstruction and FFT oracle", ola_err <= 1e-6 &&
         fft_err <= 1e-9, detail.str());
}

// ---------------------------------------------------------------- 5
void check_learning(Context& ctx) {
  const plc::FrameConfig frame;

  // (a) predictor on the strictly periodic sub-corpus.
  std::vector<plc::MelSpectrogram> periodic_mels;
  for (const auto& path : ctx.fixtures.periodic) {
    periodic_mels.push_back(
        plc::mel_spectrogram(plc::read_wav(path), frame));
  }
  plc::PredictorConfig pred_cfg;
  pred_cfg.hidden = 256;
  plc::PredictorTrainConfig pred_train;
  pred_train.steps = 2000;
  pred_train.batch = 16;
  plc::TrainLog pred_log;
  (void)plc::train_predictor(periodic_mels, pred_cfg, pred_train, 41,
                             &pred_log);
  const double loss_ratio = pred_log.loss.back() / pred_log.loss.front();

  // Full-corpus models reused by checks 7 and 8.
  std::vector<plc::MelSpectrogram> all_mels;
  std::vector<plc::AudioBuffer> all_audio;
  for (const auto& path : ctx.fixtures.all) {
    all_audio.push_back(plc::read_wav(path));
    all_mels.push_back(plc::mel_spectrogram(all_audio.back(), frame));
  }
  ctx.predictor = std::make_unique<plc::PredictorModel>(
      plc::train_predictor(all_mels, pred_cfg, pred_train, 42));

  plc::VocoderConfig voc_cfg;
  voc_cfg.n_flows = 6;
  voc_cfg.wn.n_layers = 4;
  voc_cfg.wn.channels = 32;
  plc::VocoderTrainConfig voc_train;
  voc_train.steps = 800;
  voc_train.batch = 2;
  voc_train.sigma = 1.0;
  plc::TrainLog voc_log;
  ctx.vocoder = std::make_unique<plc::FlowModel>(
      plc::train_vocoder(all_audio, frame, voc_cfg, voc_train, 43, &voc_log));

  ctx.predictor_path = ctx.work / "predictor.ckpt";
  ctx.vocoder_path = ctx.work / "vocoder.ckpt";
  ctx.predictor->save(ctx.predictor_path.string());
  ctx.vocoder->save(ctx.vocoder_path.string());

  // (b) + (c): NLL vs the identity-flow baseline and z variance, averaged
  // over held segments cut from the corpus.
  double nll_model = 0.0, nll_identity = 0.0;
  double z_sq = 0.0;
  std::size_t z_count = 0, segments = 0;
  for (std::size_t f = 0; f < all_audio.size(); ++f) {
    const auto& audio = all_audio[f];
    const std::size_t seg = 2240;
    const std::size_t start = 3 * frame.hop;  // skip the leading taper
    if (audio.samples.size() < start + seg) continue;
    std::vector<double> cut(audio.samples.begin() + start,
                            audio.samples.begin() + start + seg);
    std::size_t pad = 0;
    const auto x = plc::squeeze_audio(cut, voc_cfg.group, &pad);

    plc::AudioBuffer window;
    window.samples = cut;
    const auto mel = plc::mel_spectrogram(window, frame);
    const auto cond = ctx.vocoder->make_cond(mel.data, x.dim(2));
    plc::FlowModel::Cache cache;
    nll_model += ctx.vocoder->nll(x, cond, 1.0, &cache);
    for (std::size_t i = 0; i < cache.z.size(); ++i) {
      z_sq += cache.z[i] * cache.z[i];
    }
    z_count += cache.z.size();

    // Identity flow: z = x, logdet = 0.
    double sq = 0.0;
    for (double v : cut) sq += v * v;
    nll_identity += 0.5 * sq / static_cast<double>(cut.size()) +
                    0.5 * std::log(2.0 * kPi);
    ++segments;
  }
  nll_model /= static_cast<double>(segments);
  nll_identity /= static_cast<double>(segments);
  const double z_var = z_sq / static_cast<double>(z_count);
  const double gain = nll_identity - nll_model;

  std::ostringstream detail;
  detail << "loss ratio " << loss_ratio << " (<0.05), nll gain " << gain
         << " nat/dim (>=1), z var " << z_var << " (in [0.5, 1.5])";
  report(5, "desk-scale learning",
         loss_ratio < 0.05 && gain >= 1.0 && z_var >= 0.5 && z_var <= 1.5,
         detail.str());
}

// ---------------------------------------------------------------- 6
void check_smoother(const Context&) {
  plc::FrameConfig cfg;
  cfg.frame_len = 32;
  cfg.hop = 16;
  cfg.fft_size = 32;
  cfg.n_mels = 8;
  const std::size_t m = cfg.frame_len - cfg.hop;
  const std::size_t search = 2 * cfg.hop + cfg.frame_len;

  plc::Rng rng(61);
  int exact = 0;
  bool scale_ok = true;
  for (int rep = 0; rep < 100; ++rep) {
    std::vector<double> pattern(m);
    for (auto& v : pattern) v = rng.uniform(-1.0, 1.0);
    const auto offset = static_cast<std::size_t>(rng.below(search - cfg.frame_len + 1));
    std::vector<double> generated(search);
    for (auto& v : generated) v = 0.02 * rng.uniform(-1.0, 1.0);
    for (std::size_t i = 0; i < m; ++i) generated[offset + i] += pattern[i];

    const auto sub = plc::select_substitution(pattern, generated, cfg);
    if (sub.offset == offset && !sub.fallback) ++exact;

    auto scaled = pattern;
    const double gain = rng.uniform(0.25, 4.0);
    for (auto& v : scaled) v *= gain;
    const auto sub2 = plc::select_substitution(scaled, generated, cfg);
    scale_ok = scale_ok && sub2.offset == sub.offset;
  }

  std::ostringstream detail;
  detail << exact << "/100 planted offsets recovered, scaling invariance "
         << (scale_ok ? "holds" : "violated");
  report(6, "smoother planted-pattern oracle", exact == 100 && scale_ok,
         detail.str());
}

// ---------------------------------------------------------------- 7
void check_pipeline(const Context& ctx) {
  plc::FrameConfig cfg;
  const auto audio = plc::read_wav(ctx.fixtures.periodic.front());
  const auto packets = plc::frame_signal(audio, cfg);
  plc::LossTrace clean;
  clean.flags.assign(packets.size(), false);

  plc::ConcealConfig ccfg;
  ccfg.frame = cfg;
  ccfg.seed = 71;

  const auto neural = plc::conceal_stream(packets, clean, *ctx.predictor,
                                          *ctx.vocoder, ccfg);
  const auto silence = plc::silence_baseline(packets, clean, cfg);
  const auto wsola = plc::wsola_baseline(packets, clean, cfg);

  double pass_err = 0.0;
  for (const auto* out : {&neural, &silence, &wsola}) {
    for (std::size_t i = 0; i < out->samples.size(); ++i) {
      pass_err = std::max(pass_err,
                          std::abs(out->samples[i] - audio.samples[i]));
    }
  }

  // Causality: losing a late packet must not change any earlier sample.
  plc::LossTrace late = clean;
  const std::size_t k = packets.size() - 3;
  late.flags[k] = true;
  const auto neural_late =
      plc::conceal_stream(packets, late, *ctx.predictor, *ctx.vocoder, ccfg);
  const auto wsola_late = plc::wsola_baseline(packets, late, cfg);
  double causal_err = 0.0;
  for (std::size_t i = 0; i < k * cfg.hop; ++i) {
    causal_err = std::max(causal_err,
                          std::abs(neural_late.samples[i] - neural.samples[i]));
    causal_err = std::max(causal_err,
                          std::abs(wsola_late.samples[i] - wsola.samples[i]));
  }

  std::ostringstream detail;
  detail << "pass-through err " << pass_err << " (tol 1e-9), pre-loss diff "
         << causal_err << " (must be 0)";
  report(7, "pass-through and causality", pass_err <= 1e-9 &&
         causal_err == 0.0, detail.str());
}

// ---------------------------------------------------------------- 8
void check_ordering(const Context& ctx) {
  plc::FrameConfig cfg;
  const auto params = plc::derive_params(0.2, 0.5, 0.0, 0.5);

  double lsd_neural = 0.0, lsd_silence = 0.0, lsd_wsola = 0.0;
  const int kSeeds = 20;
  for (int s = 0; s < kSeeds; ++s) {
    const auto& path =
        ctx.fixtures.all[static_cast<std::size_t>(s) % ctx.fixtures.all.size()];
    const auto audio = plc::read_wav(path);
    const auto packets = plc::frame_signal(audio, cfg);
    const auto trace =
        plc::generate_trace(params, packets.size(), 800 + s);

    plc::ConcealConfig ccfg;
    ccfg.frame = cfg;
    ccfg.sigma = 0.6;
    ccfg.seed = 900 + s;

    const auto neural = plc::conceal_stream(packets, trace, *ctx.predictor,
                                            *ctx.vocoder, ccfg);
    const auto silence = plc::silence_baseline(packets, trace, cfg);
    const auto wsola = plc::wsola_baseline(packets, trace, cfg);

    lsd_neural += plc::lsd(audio, neural, cfg).lsd_db;
    lsd_silence += plc::lsd(audio, silence, cfg).lsd_db;
    lsd_wsola += plc::lsd(audio, wsola, cfg).lsd_db;
  }
  lsd_neural /= kSeeds;
  lsd_silence /= kSeeds;
  lsd_wsola /= kSeeds;

  std::ostringstream detail;
  detail << "mean LSD over " << kSeeds << " seeds: neural " << lsd_neural
         << ", wsola " << lsd_wsola << ", silence " << lsd_silence;
  report(8, "relative ordering at PLR 0.2",
         lsd_neural < lsd_silence && lsd_wsola < lsd_silence, detail.str());
}

// ---------------------------------------------------------------- 9
bool same_bytes(const fs::path& a, const fs::path& b) {
  std::ifstream fa(a, std::ios::binary), fb(b, std::ios::binary);
  if (!fa || !fb) return false;
  std::ostringstream sa, sb;
  sa << fa.rdbuf();
  sb << fb.rdbuf();
  return sa.str() == sb.str();
}

void check_determinism(const Context& ctx) {
  const fs::path dir = ctx.work / "determinism";
  fs::create_directories(dir);
  const std::string fx = (ctx.work / "fixtures").string();
  const std::string wav = ctx.fixtures.all.front();

  auto run = [&](const std::string& args) {
    const std::string cmd = ctx.cli + " " + args + " > /dev/null 2>&1";
    return std::system(cmd.c_str()) == 0;
  };

  bool ran = true;
  for (const char* tag : {"a", "b"}) {
    const std::string d = (dir / tag).string();
    fs::create_directories(d);
    ran = ran && run("simulate --plr 0.2 --n 499 --seed 5 --out " + d +
                     "/trace.txt");
    ran = ran && run("train-predictor --data " + fx + " --out " + d +
                     "/pred.ckpt --steps 20 --hidden 32 --seed 6");
    ran = ran && run("train-vocoder --data " + fx + " --out " + d +
                     "/voc.ckpt --steps 5 --flows 2 --wn-layers 2 "
                     "--wn-channels 8 --batch 1 --seed 7");
    ran = ran && run("conceal --in " + wav + " --trace " + d +
                     "/trace.txt --method neural --predictor " +
                     ctx.predictor_path.string() + " --vocoder " +
                     ctx.vocoder_path.string() + " --seed 8 --out " + d +
                     "/out.wav");
  }

  bool pass = ran;
  std::ostringstream detail;
  if (!ran) {
    detail << "command invocation failed";
  } else {
    for (const char* f : {"trace.txt", "pred.ckpt", "voc.ckpt", "out.wav"}) {
      const bool eq = same_bytes(dir / "a" / f, dir / "b" / f);
      detail << f << (eq ? " identical " : " DIFFERS ");
      pass = pass && eq;
    }
  }
  report(9, "byte-identical determinism across reruns", pass, detail.str());
}

}  // namespace

int main(int argc, char** argv) {
  Context ctx;
  ctx.work = fs::path("acceptance_work");
  fs::create_directories(ctx.work);
  ctx.cli = argc > 1 ? argv[1] : "";
  ctx.fixtures = plc::make_fixtures((ctx.work / "fixtures").string(), 1);

  const auto t0 = std::chrono::steady_clock::now();
  check_channel(ctx);
  check_flow(ctx);
  check_gradients(ctx);
  check_dsp(ctx);
  check_learning(ctx);
  check_smoother(ctx);
  check_pipeline(ctx);
  check_ordering(ctx);
  if (ctx.cli.empty()) {
    report(9, "byte-identical determinism across reruns", false,
           "no CLI path supplied on the command line");
  } else {
    check_determinism(ctx);
  }
  const auto dt = std::chrono::duration_cast<std::chrono::seconds>(
      std::chrono::steady_clock::now() - t0);

  std::cout << (g_failures == 0 ? "ALL CHECKS PASSED" : "CHECKS FAILED")
            << " (" << dt.count() << " s)" << std::endl;
  return g_failures == 0 ? 0 : 1;
}
