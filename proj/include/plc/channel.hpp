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

#ifndef PLC_CHANNEL_HPP_
#define PLC_CHANNEL_HPP_

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace plc {

// Two-state (Good/Bad) Markov packet-loss channel. alpha is the G->B
// transition probability, beta the B->G one; lambda = 1 - (alpha + beta)
// indicates burstiness. p_g / p_b are the per-state loss probabilities.
struct ChannelParams {
  double lambda = 0.0;
  double p_g = 0.0;
  double p_b = 0.0;
  double alpha = 0.0;
  double beta = 0.0;
};

struct LossTrace {
  std::vector<bool> flags;  // true = packet lost
  std::uint64_t seed = 0;

  std::size_t lost_count() const;
};

// Derives the transition probabilities that realize a target mean loss
// rate plr. Requires 0 <= plr <= 0.5, p_g <= plr <= p_b, p_g < p_b and
// 0 <= lambda < 1; throws ParamError naming the violated bound.
ChannelParams derive_params(double plr, double lambda, double p_g, double p_b);

// Stationary mean packet loss rate alpha/(1-lambda)*p_b + beta/(1-lambda)*p_g.
double mean_plr(const ChannelParams& params);

// Walks the chain for n_packets steps, starting from the stationary state
// distribution. Deterministic given (params, n_packets, seed).
LossTrace generate_trace(const ChannelParams& params, std::size_t n_packets,
                         std::uint64_t seed);

// Trace file: one '0'/'1' char per packet; a leading '#plc-trace ...'
// header line is written by the writer and ignored by the reader.
void write_trace(const LossTrace& trace, double plr, std::ostream& out);
void write_trace_file(const LossTrace& trace, double plr,
                      const std::string& path);
LossTrace read_trace(std::istream& in);
LossTrace read_trace_file(const std::string& path);

}  // namespace plc

#endif  // PLC_CHANNEL_HPP_
