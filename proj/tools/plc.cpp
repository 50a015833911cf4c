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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "plc/channel.hpp"
#include "plc/conceal.hpp"
#include "plc/dsp.hpp"
#include "plc/errors.hpp"
#include "plc/fixtures.hpp"
#include "plc/metrics.hpp"
#include "plc/predictor.hpp"
#include "plc/vocoder.hpp"
#include "plc/wav.hpp"

namespace fs = std::filesystem;
using json = nlohmann::json;

namespace {

// Exit codes: 0 ok, 2 parameter/usage, 3 data, 4 format, 5 numeric,
// 6 state, 1 anything else.
constexpr int kOk = 0;
constexpr int kParamExit = 2;
constexpr int kDataExit = 3;
constexpr int kFormatExit = 4;
constexpr int kNumericExit = 5;
constexpr int kStateExit = 6;

std::uint64_t default_seed() {
  const char* env = std::getenv("PLC_SEED");
  if (env != nullptr) return std::strtoull(env, nullptr, 10);
  return 0;
}

void add_frame_options(CLI::App* cmd, plc::FrameConfig* cfg) {
  cmd->add_option("--frame-len", cfg->frame_len, "Frame length W (samples)")
      ->capture_default_str();
  cmd->add_option("--hop", cfg->hop, "Frame shift H (samples)")
      ->capture_default_str();
  cmd->add_option("--fft", cfg->fft_size, "FFT size")->capture_default_str();
  cmd->add_option("--mels", cfg->n_mels, "Mel band count F")
      ->capture_default_str();
  cmd->add_option("--rate", cfg->sample_rate, "Sample rate (Hz)")
      ->capture_default_str();
}

// The effective configuration is echoed next to each command's output so
// runs are reproducible from the artifacts alone.
void echo_config(const CLI::App& app, const std::string& out_path) {
  const fs::path dir = fs::path(out_path).parent_path();
  std::error_code ec;
  if (!dir.empty()) fs::create_directories(dir, ec);
  const fs::path cfg_path =
      (dir.empty() ? fs::path(".") : dir) /
      (fs::path(out_path).stem().string() + ".effective.cfg");
  std::ofstream f(cfg_path);
  if (f) f << app.config_to_str(true, true);
}

std::vector<plc::AudioBuffer> load_wav_dir(const std::string& dir, int rate) {
  std::vector<std::string> paths;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.path().extension() == ".wav") {
      paths.push_back(entry.path().string());
    }
  }
  std::sort(paths.begin(), paths.end());
  if (paths.empty()) throw plc::DataError("no .wav files in " + dir);
  std::vector<plc::AudioBuffer> corpus;
  corpus.reserve(paths.size());
  for (const auto& p : paths) corpus.push_back(plc::read_wav(p, rate));
  return corpus;
}

void write_loss_csv(const plc::TrainLog& log, const std::string& ckpt_path) {
  const std::string csv_path =
      (fs::path(ckpt_path).parent_path() /
       (fs::path(ckpt_path).stem().string() + ".loss.csv"))
          .string();
  std::ofstream f(csv_path);
  f << "step,loss\n";
  for (std::size_t i = 0; i < log.loss.size(); ++i) {
    f << i + 1 << "," << log.loss[i] << "\n";
  }
}

int run(int argc, char** argv) {
  CLI::App app{"Packet-loss-concealment laboratory"};
  app.require_subcommand(1);
  app.set_config("--config", "", "Flat key/value config file; flags override");
  app.allow_config_extras(false);

  // ---- simulate ----
  auto* simulate = app.add_subcommand(
      "simulate", "Generate a Gilbert-Elliot packet loss trace");
  double plr = 0.1, lambda = 0.5, p_g = 0.0, p_b = 0.5;
  std::size_t n_packets = 1000;
  std::uint64_t sim_seed = default_seed();
  std::string sim_out = "trace.txt";
  simulate->add_option("--plr", plr, "Target packet loss rate")->required();
  simulate->add_option("--lambda", lambda, "Burstiness indicator")
      ->capture_default_str();
  simulate->add_option("--pg", p_g, "Loss probability in good state")
      ->capture_default_str();
  simulate->add_option("--pb", p_b, "Loss probability in bad state")
      ->capture_default_str();
  simulate->add_option("--n", n_packets, "Packet count")
      ->capture_default_str();
  simulate->add_option("--seed", sim_seed, "RNG seed")->capture_default_str();
  simulate->add_option("--out", sim_out, "Output trace file")
      ->capture_default_str();

  // ---- features ----
  auto* features = app.add_subcommand(
      "features", "Compute a log-Mel spectrogram from a WAV file");
  plc::FrameConfig feat_frame;
  std::string feat_in, feat_out = "features.csv";
  features->add_option("--in", feat_in, "Input WAV")->required();
  features->add_option("--out", feat_out, "Output CSV (frames x mels)")
      ->capture_default_str();
  add_frame_options(features, &feat_frame);

  // ---- train-predictor ----
  auto* train_pred = app.add_subcommand(
      "train-predictor", "Train the Mel predictor on a WAV directory");
  plc::FrameConfig pred_frame;
  plc::PredictorConfig pred_cfg;
  plc::PredictorTrainConfig pred_train;
  std::string pred_data, pred_out = "predictor.ckpt";
  std::uint64_t pred_seed = default_seed();
  train_pred->add_option("--data", pred_data, "Training WAV directory")
      ->required();
  train_pred->add_option("--out", pred_out, "Output checkpoint")
      ->capture_default_str();
  train_pred->add_option("--history", pred_cfg.history, "History frames P")
      ->capture_default_str();
  train_pred->add_option("--hidden", pred_cfg.hidden, "Hidden layer width")
      ->capture_default_str();
  train_pred->add_option("--steps", pred_train.steps, "Optimizer steps")
      ->capture_default_str();
  train_pred->add_option("--batch", pred_train.batch, "Batch size")
      ->capture_default_str();
  train_pred->add_option("--lr", pred_train.lr, "Learning rate")
      ->capture_default_str();
  train_pred
      ->add_option("--finetune-steps", pred_train.finetune_steps,
                   "Experimental roll-forward fine-tuning steps")
      ->capture_default_str();
  train_pred->add_option("--seed", pred_seed, "RNG seed")
      ->capture_default_str();
  add_frame_options(train_pred, &pred_frame);

  // ---- train-vocoder ----
  auto* train_voc = app.add_subcommand(
      "train-vocoder", "Train the flow vocoder on a WAV directory");
  plc::FrameConfig voc_frame;
  plc::VocoderConfig voc_cfg;
  plc::VocoderTrainConfig voc_train;
  std::string voc_data, voc_out = "vocoder.ckpt";
  std::uint64_t voc_seed = default_seed();
  train_voc->add_option("--data", voc_data, "Training WAV directory")
      ->required();
  train_voc->add_option("--out", voc_out, "Output checkpoint")
      ->capture_default_str();
  train_voc->add_option("--flows", voc_cfg.n_flows, "Number of flow steps")
      ->capture_default_str();
  train_voc->add_option("--group", voc_cfg.group, "Squeeze group size")
      ->capture_default_str();
  train_voc
      ->add_option("--wn-layers", voc_cfg.wn.n_layers, "Conditioner layers")
      ->capture_default_str();
  train_voc
      ->add_option("--wn-channels", voc_cfg.wn.channels,
                   "Conditioner channels")
      ->capture_default_str();
  train_voc->add_option("--steps", voc_train.steps, "Optimizer steps")
      ->capture_default_str();
  train_voc->add_option("--batch", voc_train.batch, "Batch size")
      ->capture_default_str();
  train_voc->add_option("--lr", voc_train.lr, "Learning rate")
      ->capture_default_str();
  train_voc->add_option("--sigma", voc_train.sigma, "Prior std deviation")
      ->capture_default_str();
  train_voc
      ->add_option("--segment", voc_train.segment_len,
                   "Training segment length (samples)")
      ->capture_default_str();
  train_voc->add_option("--seed", voc_seed, "RNG seed")
      ->capture_default_str();
  add_frame_options(train_voc, &voc_frame);

  // ---- conceal ----
  auto* conceal = app.add_subcommand(
      "conceal", "Conceal lost packets in a WAV stream");
  plc::FrameConfig con_frame;
  std::string con_in, con_trace, con_method = "neural";
  std::string con_pred, con_voc, con_out = "out.wav", con_report;
  double con_sigma = 0.6;
  std::uint64_t con_seed = default_seed();
  conceal->add_option("--in", con_in, "Input WAV")->required();
  conceal->add_option("--trace", con_trace, "Loss trace file")->required();
  conceal
      ->add_option("--method", con_method, "neural | silence | wsola")
      ->check(CLI::IsMember({"neural", "silence", "wsola"}))
      ->capture_default_str();
  conceal->add_option("--predictor", con_pred, "Predictor checkpoint");
  conceal->add_option("--vocoder", con_voc, "Vocoder checkpoint");
  conceal->add_option("--sigma", con_sigma, "Sampling std deviation")
      ->capture_default_str();
  conceal->add_option("--seed", con_seed, "Sampling seed")
      ->capture_default_str();
  conceal->add_option("--out", con_out, "Output WAV")->capture_default_str();
  conceal->add_option("--report", con_report, "Optional JSON side report");
  add_frame_options(conceal, &con_frame);

  // ---- eval ----
  auto* eval = app.add_subcommand(
      "eval", "Evaluate a concealed WAV against its reference");
  plc::FrameConfig eval_frame;
  std::string eval_ref, eval_test, eval_trace, eval_out;
  eval->add_option("--ref", eval_ref, "Reference WAV")->required();
  eval->add_option("--test", eval_test, "Test WAV")->required();
  eval->add_option("--trace", eval_trace, "Optional loss trace");
  eval->add_option("--out", eval_out, "Output JSON report");
  add_frame_options(eval, &eval_frame);

  // ---- make-fixtures ----
  auto* fixtures = app.add_subcommand(
      "make-fixtures", "Synthesize the 60 s desk-scale corpus");
  std::string fix_out = "fixtures";
  std::uint64_t fix_seed = default_seed();
  fixtures->add_option("--out", fix_out, "Output directory")
      ->capture_default_str();
  fixtures->add_option("--seed", fix_seed, "RNG seed")->capture_default_str();

  CLI11_PARSE(app, argc, argv);

  if (simulate->parsed()) {
    const auto params = plc::derive_params(plr, lambda, p_g, p_b);
    const auto trace = plc::generate_trace(params, n_packets, sim_seed);
    plc::write_trace_file(trace, plr, sim_out);
    echo_config(app, sim_out);
    const double empirical = static_cast<double>(trace.lost_count()) /
                             static_cast<double>(trace.flags.size());
    std::cout << "alpha=" << params.alpha << " beta=" << params.beta
              << " mean_plr=" << plc::mean_plr(params)
              << " empirical_plr=" << empirical << "\n";
    return kOk;
  }

  if (features->parsed()) {
    const auto audio = plc::read_wav(feat_in, feat_frame.sample_rate);
    const auto mel = plc::mel_spectrogram(audio, feat_frame);
    std::ofstream f(feat_out);
    if (!f) throw plc::DataError("cannot open " + feat_out);
    for (const auto& row : mel.data) {
      for (std::size_t m = 0; m < row.size(); ++m) {
        f << (m > 0 ? "," : "") << row[m];
      }
      f << "\n";
    }
    echo_config(app, feat_out);
    std::cout << "frames=" << mel.n_frames() << " mels="
              << feat_frame.n_mels << "\n";
    return kOk;
  }

  if (train_pred->parsed()) {
    pred_cfg.n_mels = pred_frame.n_mels;
    const auto corpus = load_wav_dir(pred_data, pred_frame.sample_rate);
    std::vector<plc::MelSpectrogram> mels;
    mels.reserve(corpus.size());
    for (const auto& a : corpus) {
      mels.push_back(plc::mel_spectrogram(a, pred_frame));
    }
    plc::TrainLog log;
    const auto model =
        plc::train_predictor(mels, pred_cfg, pred_train, pred_seed, &log);
    model.save(pred_out);
    write_loss_csv(log, pred_out);
    echo_config(app, pred_out);
    std::cout << "steps=" << log.loss.size()
              << " final_loss=" << (log.loss.empty() ? 0.0 : log.loss.back())
              << "\n";
    return kOk;
  }

  if (train_voc->parsed()) {
    voc_cfg.n_mels = voc_frame.n_mels;
    voc_cfg.hop = voc_frame.hop;
    voc_cfg.frame_len = voc_frame.frame_len;
    const auto corpus = load_wav_dir(voc_data, voc_frame.sample_rate);
    plc::TrainLog log;
    const auto model = plc::train_vocoder(corpus, voc_frame, voc_cfg,
                                          voc_train, voc_seed, &log);
    model.save(voc_out);
    write_loss_csv(log, voc_out);
    echo_config(app, voc_out);
    std::cout << "steps=" << log.loss.size()
              << " final_nll=" << (log.loss.empty() ? 0.0 : log.loss.back())
              << "\n";
    return kOk;
  }

  if (conceal->parsed()) {
    const auto audio = plc::read_wav(con_in, con_frame.sample_rate);
    const auto trace = plc::read_trace_file(con_trace);
    const auto packets = plc::frame_signal(audio, con_frame);
    plc::ConcealReport report;
    plc::AudioBuffer out;
    if (con_method == "silence") {
      out = plc::silence_baseline(packets, trace, con_frame, &report);
    } else if (con_method == "wsola") {
      out = plc::wsola_baseline(packets, trace, con_frame, &report);
    } else {
      if (con_pred.empty() || con_voc.empty()) {
        throw plc::StateError(
            "method 'neural' requires --predictor and --vocoder");
      }
      std::vector<std::string> warnings;
      const auto predictor = plc::PredictorModel::load(con_pred, &warnings);
      const auto vocoder = plc::FlowModel::load(con_voc, &warnings);
      for (const auto& w : warnings) {
        std::cerr << "warning: unknown checkpoint tensor: " << w << "\n";
      }
      plc::ConcealConfig cfg;
      cfg.frame = con_frame;
      cfg.sigma = con_sigma;
      cfg.seed = con_seed;
      out = plc::conceal_stream(packets, trace, predictor, vocoder, cfg,
                                &report);
    }
    out.sample_rate = con_frame.sample_rate;
    plc::write_wav(out, con_out);
    echo_config(app, con_out);
    if (!con_report.empty()) {
      json j;
      j["packets"] = report.packets;
      j["lost"] = report.lost;
      j["concealed_neural"] = report.concealed_neural;
      j["concealed_silence_coldstart"] = report.coldstart_silence;
      j["pattern_fallbacks"] = report.pattern_fallbacks;
      j["splice_offsets"] = report.splice_offsets;
      std::ofstream f(con_report);
      if (!f) throw plc::DataError("cannot open " + con_report);
      f << j.dump(2) << "\n";
    }
    std::cout << "packets=" << report.packets << " lost=" << report.lost
              << " coldstart=" << report.coldstart_silence << "\n";
    return kOk;
  }

  if (eval->parsed()) {
    const auto ref = plc::read_wav(eval_ref, eval_frame.sample_rate);
    const auto test = plc::read_wav(eval_test, eval_frame.sample_rate);
    const auto lsd_result = plc::lsd(ref, test, eval_frame);

    plc::AudioBuffer aligned = test;
    aligned.samples.resize(ref.samples.size(), 0.0);
    const double mse = plc::mel_mse(plc::mel_spectrogram(ref, eval_frame),
                                    plc::mel_spectrogram(aligned, eval_frame));

    json j;
    j["lsd_db"] = lsd_result.lsd_db;
    j["lsd_frames_used"] = lsd_result.frames_used;
    j["lsd_frames_skipped"] = lsd_result.frames_skipped;
    j["mel_mse"] = mse;
    j["n_frames"] = lsd_result.frames_used + lsd_result.frames_skipped;
    if (!eval_trace.empty()) {
      const auto stats = plc::empirical_plr(plc::read_trace_file(eval_trace));
      j["plr_empirical"] = stats.plr;
      j["mean_burst_len"] = stats.mean_burst_len;
    }
    if (!eval_out.empty()) {
      std::ofstream f(eval_out);
      if (!f) throw plc::DataError("cannot open " + eval_out);
      f << j.dump(2) << "\n";
      echo_config(app, eval_out);
    }
    std::cout << j.dump(2) << "\n";
    return kOk;
  }

  if (fixtures->parsed()) {
    const auto set = plc::make_fixtures(fix_out, fix_seed);
    std::cout << "wrote " << set.all.size() << " files ("
              << set.periodic.size() << " periodic) to " << fix_out << "\n";
    return kOk;
  }

  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  try {
    return run(argc, argv);
  } catch (const plc::ParamError& e) {
    std::cerr << "parameter error: " << e.what() << "\n";
    return kParamExit;
  } catch (const plc::ShapeError& e) {
    std::cerr << "shape error: " << e.what() << "\n";
    return kParamExit;
  } catch (const plc::DataError& e) {
    std::cerr << "data error: " << e.what() << "\n";
    return kDataExit;
  } catch (const plc::FormatError& e) {
    std::cerr << "format error: " << e.what() << "\n";
    return kFormatExit;
  } catch (const plc::NumericError& e) {
    std::cerr << "numeric error: " << e.what() << "\n";
    return kNumericExit;
  } catch (const plc::StateError& e) {
    std::cerr << "state error: " << e.what() << "\n";
    return kStateExit;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
}
