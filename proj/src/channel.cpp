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

#include "plc/channel.hpp"

#include <fstream>
#include <sstream>

#include "plc/errors.hpp"
#include "plc/rng.hpp"

namespace plc {

std::size_t LossTrace::lost_count() const {
  std::size_t n = 0;
  for (bool f : flags) n += f ? 1 : 0;
  return n;
}

ChannelParams derive_params(double plr, double lambda, double p_g,
                            double p_b) {
  if (!(plr >= 0.0 && plr <= 0.5)) {
    throw ParamError("plr must satisfy 0 <= plr <= 0.5, got " +
                     std::to_string(plr));
  }
  if (!(lambda >= 0.0 && lambda < 1.0)) {
    throw ParamError("lambda must satisfy 0 <= lambda < 1, got " +
                     std::to_string(lambda));
  }
  if (!(p_g < p_b)) {
    throw ParamError("p_g < p_b required, got p_g=" + std::to_string(p_g) +
                     " p_b=" + std::to_string(p_b));
  }
  if (!(p_g >= 0.0 && p_b <= 1.0)) {
    throw ParamError("loss probabilities must lie in [0, 1]");
  }
  if (!(p_g <= plr && plr <= p_b)) {
    throw ParamError("plr must satisfy p_g <= plr <= p_b, got plr=" +
                     std::to_string(plr));
  }
  const double ratio = (p_b - plr) / (p_b - p_g);
  ChannelParams params;
  params.lambda = lambda;
  params.p_g = p_g;
  params.p_b = p_b;
  params.alpha = (1.0 - lambda) * (1.0 - ratio);
  params.beta = (1.0 - lambda) * ratio;
  return params;
}

double mean_plr(const ChannelParams& params) {
  const double denom = params.alpha + params.beta;
  if (denom <= 0.0) {
    throw ParamError(
        "stationary distribution undefined: alpha + beta = 0 (lambda = 1)");
  }
  const double one_minus_lambda = 1.0 - params.lambda;
  return params.alpha / one_minus_lambda * params.p_b +
         params.beta / one_minus_lambda * params.p_g;
}

LossTrace generate_trace(const ChannelParams& params, std::size_t n_packets,
                         std::uint64_t seed) {
  if (n_packets == 0) throw ParamError("n_packets must be > 0");
  const double denom = params.alpha + params.beta;
  if (denom <= 0.0) {
    throw ParamError("cannot simulate frozen chain (alpha + beta = 0)");
  }

  Rng rng(seed);
  LossTrace trace;
  trace.seed = seed;
  trace.flags.resize(n_packets);

  // Start from the stationary distribution so short traces are unbiased.
  bool bad = rng.uniform() < params.alpha / denom;
  for (std::size_t i = 0; i < n_packets; ++i) {
    const double p_loss = bad ? params.p_b : params.p_g;
    trace.flags[i] = rng.uniform() < p_loss;
    const double p_switch = bad ? params.beta : params.alpha;
    if (rng.uniform() < p_switch) bad = !bad;
  }
  return trace;
}

void write_trace(const LossTrace& trace, double plr, std::ostream& out) {
  out << "#plc-trace v1 seed=" << trace.seed << " plr=" << plr << "\n";
  for (bool f : trace.flags) out.put(f ? '1' : '0');
  out.put('\n');
}

void write_trace_file(const LossTrace& trace, double plr,
                      const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw DataError("cannot open trace file for writing: " + path);
  write_trace(trace, plr, out);
}

LossTrace read_trace(std::istream& in) {
  LossTrace trace;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line[0] == '#') continue;
    for (char c : line) {
      if (c == '0') {
        trace.flags.push_back(false);
      } else if (c == '1') {
        trace.flags.push_back(true);
      } else if (c == '\r') {
        continue;
      } else {
        throw FormatError(std::string("invalid trace character '") + c + "'");
      }
    }
  }
  if (trace.flags.empty()) throw DataError("trace file contains no packets");
  return trace;
}

LossTrace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open trace file: " + path);
  return read_trace(in);
}

}  // namespace plc
