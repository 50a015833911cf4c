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

#include "plc/vocoder.hpp"

#include <cmath>
#include <fstream>

#include "plc/errors.hpp"
#include "plc/kernels.hpp"

namespace plc {
namespace {

constexpr double kMinScaleLog = -27.631021115928547;  // log(1e-12)

std::string flow_name(std::size_t i, const std::string& suffix) {
  return "vocoder.flow" + std::to_string(i) + "." + suffix;
}

Tensor channel_slice(const Tensor& x, std::size_t from, std::size_t to) {
  const std::size_t b = x.dim(0), c = x.dim(1), t = x.dim(2);
  Tensor out({b, to - from, t});
  for (std::size_t bi = 0; bi < b; ++bi) {
    const double* src = x.data() + (bi * c + from) * t;
    double* dst = out.data() + bi * (to - from) * t;
    std::copy(src, src + (to - from) * t, dst);
  }
  return out;
}

Tensor channel_concat(const Tensor& a, const Tensor& b) {
  const std::size_t bt = a.dim(0), ca = a.dim(1), cb = b.dim(1),
                    t = a.dim(2);
  Tensor out({bt, ca + cb, t});
  for (std::size_t bi = 0; bi < bt; ++bi) {
    std::copy(a.data() + bi * ca * t, a.data() + (bi + 1) * ca * t,
              out.data() + bi * (ca + cb) * t);
    std::copy(b.data() + bi * cb * t, b.data() + (bi + 1) * cb * t,
              out.data() + (bi * (ca + cb) + ca) * t);
  }
  return out;
}

// y[b, c, t] = sum_d M[c, d] * x[b, d, t]
Tensor mix_channels(const Tensor& x, const Tensor& m) {
  const std::size_t b = x.dim(0), c = x.dim(1), t = x.dim(2);
  Tensor y({b, m.dim(0), t});
  for (std::size_t bi = 0; bi < b; ++bi) {
    for (std::size_t co = 0; co < m.dim(0); ++co) {
      double* yrow = y.data() + (bi * m.dim(0) + co) * t;
      for (std::size_t d = 0; d < c; ++d) {
        kernels::axpy(m.at2(co, d), x.data() + (bi * c + d) * t, yrow, t);
      }
    }
  }
  return y;
}

}  // namespace

void VocoderConfig::validate() const {
  if (group < 2 || group % 2 != 0) {
    throw ParamError("vocoder group must be even and >= 2");
  }
  if (n_flows == 0) throw ParamError("n_flows must be >= 1");
  if (hop % group != 0) {
    throw ParamError("hop must be divisible by group for conditioning");
  }
  if (wn.kernel % 2 == 0) throw ParamError("wn kernel must be odd");
}

Tensor squeeze_audio(const std::vector<double>& samples, std::size_t group,
                     std::size_t* pad_out) {
  const std::size_t t_groups = (samples.size() + group - 1) / group;
  const std::size_t pad = t_groups * group - samples.size();
  if (pad_out != nullptr) *pad_out = pad;
  Tensor out({1, group, t_groups});
  for (std::size_t i = 0; i < samples.size(); ++i) {
    out.at3(0, i % group, i / group) = samples[i];
  }
  return out;
}

Tensor squeeze_batch(const std::vector<std::vector<double>>& segments,
                     std::size_t group) {
  if (segments.empty()) throw DataError("squeeze_batch: no segments");
  const std::size_t len = segments.front().size();
  if (len % group != 0) {
    throw ParamError("squeeze_batch: length must be a multiple of group");
  }
  Tensor out({segments.size(), group, len / group});
  for (std::size_t b = 0; b < segments.size(); ++b) {
    if (segments[b].size() != len) {
      throw ShapeError("squeeze_batch: inconsistent segment lengths");
    }
    for (std::size_t i = 0; i < len; ++i) {
      out.at3(b, i % group, i / group) = segments[b][i];
    }
  }
  return out;
}

std::vector<double> unsqueeze_audio(const Tensor& grouped, std::size_t pad) {
  const std::size_t group = grouped.dim(1), t_groups = grouped.dim(2);
  std::vector<double> out(group * t_groups - pad);
  for (std::size_t i = 0; i < out.size(); ++i) {
    out[i] = grouped.at3(0, i % group, i / group);
  }
  return out;
}

Tensor upsample_cond(const std::vector<std::vector<double>>& mel_frames,
                     const VocoderConfig& cfg, std::size_t t_groups) {
  if (mel_frames.empty()) throw DataError("upsample_cond: no mel frames");
  const std::size_t f = cfg.n_mels;
  const std::size_t per_hop = cfg.hop / cfg.group;
  Tensor cond({1, f, t_groups});
  for (std::size_t t = 0; t < t_groups; ++t) {
    const std::size_t frame = std::min(t / per_hop, mel_frames.size() - 1);
    if (mel_frames[frame].size() != f) {
      throw ShapeError("upsample_cond: mel frame dim mismatch");
    }
    for (std::size_t m = 0; m < f; ++m) {
      cond.at3(0, m, t) = mel_frames[frame][m];
    }
  }
  return cond;
}

// ---- dense linear algebra ----

double logabsdet(const Tensor& square) {
  if (square.rank() != 2 || square.dim(0) != square.dim(1)) {
    throw ShapeError("logabsdet: matrix must be square");
  }
  const std::size_t n = square.dim(0);
  Tensor a = square;
  double acc = 0.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a.at2(r, col)) > std::fabs(a.at2(pivot, col))) pivot = r;
    }
    const double p = a.at2(pivot, col);
    if (std::fabs(p) < 1e-12) {
      throw NumericError("singular matrix in invertible 1x1 convolution");
    }
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a.at2(pivot, k), a.at2(col, k));
      }
    }
    acc += std::log(std::fabs(a.at2(col, col)));
    for (std::size_t r = col + 1; r < n; ++r) {
      const double factor = a.at2(r, col) / a.at2(col, col);
      for (std::size_t k = col; k < n; ++k) {
        a.at2(r, k) -= factor * a.at2(col, k);
      }
    }
  }
  return acc;
}

Tensor invert_matrix(const Tensor& square) {
  if (square.rank() != 2 || square.dim(0) != square.dim(1)) {
    throw ShapeError("invert_matrix: matrix must be square");
  }
  const std::size_t n = square.dim(0);
  Tensor a = square;
  Tensor inv({n, n});
  for (std::size_t i = 0; i < n; ++i) inv.at2(i, i) = 1.0;
  for (std::size_t col = 0; col < n; ++col) {
    std::size_t pivot = col;
    for (std::size_t r = col + 1; r < n; ++r) {
      if (std::fabs(a.at2(r, col)) > std::fabs(a.at2(pivot, col))) pivot = r;
    }
    if (std::fabs(a.at2(pivot, col)) < 1e-12) {
      throw NumericError("singular matrix in invertible 1x1 convolution");
    }
    if (pivot != col) {
      for (std::size_t k = 0; k < n; ++k) {
        std::swap(a.at2(pivot, k), a.at2(col, k));
        std::swap(inv.at2(pivot, k), inv.at2(col, k));
      }
    }
    const double d = a.at2(col, col);
    for (std::size_t k = 0; k < n; ++k) {
      a.at2(col, k) /= d;
      inv.at2(col, k) /= d;
    }
    for (std::size_t r = 0; r < n; ++r) {
      if (r == col) continue;
      const double factor = a.at2(r, col);
      if (factor == 0.0) continue;
      for (std::size_t k = 0; k < n; ++k) {
        a.at2(r, k) -= factor * a.at2(col, k);
        inv.at2(r, k) -= factor * inv.at2(col, k);
      }
    }
  }
  return inv;
}

Tensor random_orthogonal(std::size_t n, Rng& rng) {
  // Gram-Schmidt on Gaussian columns.
  Tensor m({n, n});
  for (std::size_t attempt = 0; attempt < 16; ++attempt) {
    for (std::size_t i = 0; i < m.size(); ++i) m[i] = rng.normal();
    bool ok = true;
    for (std::size_t c = 0; c < n && ok; ++c) {
      for (std::size_t prev = 0; prev < c; ++prev) {
        double proj = 0.0;
        for (std::size_t r = 0; r < n; ++r) {
          proj += m.at2(r, c) * m.at2(r, prev);
        }
        for (std::size_t r = 0; r < n; ++r) {
          m.at2(r, c) -= proj * m.at2(r, prev);
        }
      }
      double norm = 0.0;
      for (std::size_t r = 0; r < n; ++r) norm += m.at2(r, c) * m.at2(r, c);
      norm = std::sqrt(norm);
      if (norm < 1e-8) {
        ok = false;
        break;
      }
      for (std::size_t r = 0; r < n; ++r) m.at2(r, c) /= norm;
    }
    if (ok) return m;
  }
  throw NumericError("failed to draw an orthogonal matrix");
}

// ---- FlowModel ----

FlowModel::FlowModel(const VocoderConfig& cfg, Rng& rng) : cfg_(cfg) {
  cfg_.validate();
  add_parameters(&rng);
}

void FlowModel::add_parameters(Rng* rng) {
  const std::size_t nh = cfg_.n_half();
  const std::size_t c = cfg_.wn.channels;
  const std::size_t k = cfg_.wn.kernel;
  const std::size_t f = cfg_.n_mels;
  for (std::size_t i = 0; i < cfg_.n_flows; ++i) {
    params_.add(flow_name(i, "W"),
                rng != nullptr ? random_orthogonal(cfg_.group, *rng)
                               : Tensor({cfg_.group, cfg_.group}));
    auto init = [&](std::vector<std::size_t> shape, std::size_t fan_in,
                    std::size_t fan_out) {
      return rng != nullptr
                 ? glorot_uniform(shape, fan_in, fan_out, *rng)
                 : Tensor(std::move(shape));
    };
    params_.add(flow_name(i, "wn.start.w"), init({c, nh, 1}, nh, c));
    params_.add(flow_name(i, "wn.start.b"), Tensor({c}));
    for (std::size_t l = 0; l < cfg_.wn.n_layers; ++l) {
      const std::string lp = "wn.l" + std::to_string(l) + ".";
      params_.add(flow_name(i, lp + "conv.w"),
                  init({2 * c, c, k}, c * k, 2 * c * k));
      params_.add(flow_name(i, lp + "conv.b"), Tensor({2 * c}));
      params_.add(flow_name(i, lp + "mel.w"), init({2 * c, f, 1}, f, 2 * c));
      params_.add(flow_name(i, lp + "mel.b"), Tensor({2 * c}));
      const std::size_t rs_out = (l + 1 < cfg_.wn.n_layers) ? 2 * c : c;
      params_.add(flow_name(i, lp + "res_skip.w"),
                  init({rs_out, c, 1}, c, rs_out));
      params_.add(flow_name(i, lp + "res_skip.b"), Tensor({rs_out}));
    }
    // Zero-initialized final projection: each flow starts as an identity
    // coupling behind an orthogonal mix.
    params_.add(flow_name(i, "wn.end.w"), Tensor({2 * nh, c, 1}));
    params_.add(flow_name(i, "wn.end.b"), Tensor({2 * nh}));
  }
}

Tensor FlowModel::wn_forward(std::size_t flow, const Tensor& x0,
                             const Tensor& cond, WNCache* cache) const {
  const std::size_t c = cfg_.wn.channels;
  const auto& p = params_;
  Tensor h = conv1d_forward(x0, p.get(flow_name(flow, "wn.start.w")).value,
                            p.get(flow_name(flow, "wn.start.b")).value, 1);
  if (cache != nullptr) {
    cache->x0 = x0;
    cache->h0 = h;
    cache->h_in.clear();
    cache->t_act.clear();
    cache->s_act.clear();
    cache->gated.clear();
  }
  Tensor skip({h.dim(0), c, h.dim(2)});
  for (std::size_t l = 0; l < cfg_.wn.n_layers; ++l) {
    const std::string lp = "wn.l" + std::to_string(l) + ".";
    if (cache != nullptr) cache->h_in.push_back(h);
    Tensor a = conv1d_forward(h, p.get(flow_name(flow, lp + "conv.w")).value,
                              p.get(flow_name(flow, lp + "conv.b")).value,
                              std::size_t{1} << l);
    const Tensor a_mel =
        conv1d_forward(cond, p.get(flow_name(flow, lp + "mel.w")).value,
                       p.get(flow_name(flow, lp + "mel.b")).value, 1);
    kernels::add(a_mel.data(), a.data(), a.size());
    Tensor t_act = tanh_op(channel_slice(a, 0, c));
    Tensor s_act = sigmoid(channel_slice(a, c, 2 * c));
    Tensor gated(t_act.shape());
    for (std::size_t j = 0; j < gated.size(); ++j) {
      gated[j] = t_act[j] * s_act[j];
    }
    const Tensor rs =
        conv1d_forward(gated, p.get(flow_name(flow, lp + "res_skip.w")).value,
                       p.get(flow_name(flow, lp + "res_skip.b")).value, 1);
    if (l + 1 < cfg_.wn.n_layers) {
      const Tensor res = channel_slice(rs, 0, c);
      kernels::add(res.data(), h.data(), h.size());
      const Tensor sk = channel_slice(rs, c, 2 * c);
      kernels::add(sk.data(), skip.data(), skip.size());
    } else {
      kernels::add(rs.data(), skip.data(), skip.size());
    }
    if (cache != nullptr) {
      cache->t_act.push_back(std::move(t_act));
      cache->s_act.push_back(std::move(s_act));
      cache->gated.push_back(std::move(gated));
    }
  }
  Tensor out = conv1d_forward(skip, p.get(flow_name(flow, "wn.end.w")).value,
                              p.get(flow_name(flow, "wn.end.b")).value, 1);
  if (cache != nullptr) cache->skip = std::move(skip);
  return out;
}

Tensor FlowModel::wn_backward(std::size_t flow, const WNCache& cache,
                              const Tensor& cond, const Tensor& g_logs,
                              const Tensor& g_shift) {
  const std::size_t c = cfg_.wn.channels;
  auto& p = params_;
  const Tensor g_out = channel_concat(g_logs, g_shift);
  Tensor g_skip(cache.skip.shape());
  conv1d_backward(cache.skip, p.get(flow_name(flow, "wn.end.w")).value, g_out,
                  1, &g_skip, &p.get(flow_name(flow, "wn.end.w")).grad,
                  &p.get(flow_name(flow, "wn.end.b")).grad);

  Tensor g_h({g_skip.dim(0), c, g_skip.dim(2)});
  for (std::size_t l = cfg_.wn.n_layers; l-- > 0;) {
    const std::string lp = "wn.l" + std::to_string(l) + ".";
    const bool has_res = l + 1 < cfg_.wn.n_layers;
    const Tensor g_rs = has_res ? channel_concat(g_h, g_skip) : g_skip;
    Tensor g_gated(cache.gated[l].shape());
    conv1d_backward(cache.gated[l],
                    p.get(flow_name(flow, lp + "res_skip.w")).value, g_rs, 1,
                    &g_gated, &p.get(flow_name(flow, lp + "res_skip.w")).grad,
                    &p.get(flow_name(flow, lp + "res_skip.b")).grad);

    const Tensor& t_act = cache.t_act[l];
    const Tensor& s_act = cache.s_act[l];
    Tensor g_a({g_gated.dim(0), 2 * c, g_gated.dim(2)});
    const std::size_t bt = g_gated.dim(0), time = g_gated.dim(2);
    for (std::size_t bi = 0; bi < bt; ++bi) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        const std::size_t base = (bi * c + ch) * time;
        double* ga_t = g_a.data() + (bi * 2 * c + ch) * time;
        double* ga_s = g_a.data() + (bi * 2 * c + c + ch) * time;
        for (std::size_t t = 0; t < time; ++t) {
          const double gg = g_gated[base + t];
          const double tv = t_act[base + t];
          const double sv = s_act[base + t];
          ga_t[t] = gg * sv * (1.0 - tv * tv);
          ga_s[t] = gg * tv * sv * (1.0 - sv);
        }
      }
    }

    Tensor g_h_conv(cache.h_in[l].shape());
    conv1d_backward(cache.h_in[l],
                    p.get(flow_name(flow, lp + "conv.w")).value, g_a,
                    std::size_t{1} << l, &g_h_conv,
                    &p.get(flow_name(flow, lp + "conv.w")).grad,
                    &p.get(flow_name(flow, lp + "conv.b")).grad);
    conv1d_backward(cond, p.get(flow_name(flow, lp + "mel.w")).value, g_a, 1,
                    nullptr, &p.get(flow_name(flow, lp + "mel.w")).grad,
                    &p.get(flow_name(flow, lp + "mel.b")).grad);
    if (has_res) {
      kernels::add(g_h_conv.data(), g_h.data(), g_h.size());
    } else {
      g_h = std::move(g_h_conv);
    }
  }

  Tensor g_x0(cache.x0.shape());
  conv1d_backward(cache.x0, p.get(flow_name(flow, "wn.start.w")).value, g_h,
                  1, &g_x0, &p.get(flow_name(flow, "wn.start.w")).grad,
                  &p.get(flow_name(flow, "wn.start.b")).grad);
  return g_x0;
}

Tensor FlowModel::flow_forward(const Tensor& audio, const Tensor& cond,
                               double* logdet, Cache* cache) const {
  if (audio.rank() != 3 || audio.dim(1) != cfg_.group) {
    throw ShapeError("flow_forward: audio shape " + audio.shape_string() +
                     ", expected [B, " + std::to_string(cfg_.group) + ", T]");
  }
  if (cond.rank() != 3 || cond.dim(1) != cfg_.n_mels ||
      cond.dim(2) != audio.dim(2) || cond.dim(0) != audio.dim(0)) {
    throw ShapeError("flow_forward: cond shape " + cond.shape_string() +
                     " does not match audio " + audio.shape_string());
  }
  const std::size_t nh = cfg_.n_half();
  const double batch_time =
      static_cast<double>(audio.dim(0)) * static_cast<double>(audio.dim(2));
  double ld = 0.0;
  Tensor x = audio;
  if (cache != nullptr) {
    cache->cond = cond;
    cache->flows.resize(cfg_.n_flows);
  }
  for (std::size_t i = 0; i < cfg_.n_flows; ++i) {
    const Tensor& w = params_.get(flow_name(i, "W")).value;
    if (cache != nullptr) cache->flows[i].pre_conv = x;
    ld += batch_time * logabsdet(w);
    x = mix_channels(x, w);

    Tensor x0 = channel_slice(x, 0, nh);
    Tensor x1 = channel_slice(x, nh, cfg_.group);
    WNCache* wn_cache = cache != nullptr ? &cache->flows[i].wn : nullptr;
    const Tensor wn_out = wn_forward(i, x0, cond, wn_cache);
    const Tensor logs = channel_slice(wn_out, 0, nh);
    const Tensor shift = channel_slice(wn_out, nh, 2 * nh);
    check_finite(logs, "coupling scale");
    Tensor z1(x1.shape());
    for (std::size_t j = 0; j < x1.size(); ++j) {
      z1[j] = std::exp(logs[j]) * x1[j] + shift[j];
      ld += logs[j];
    }
    check_finite(z1, "coupling");
    if (cache != nullptr) {
      cache->flows[i].x0 = x0;
      cache->flows[i].x1 = x1;
      cache->flows[i].wn.logs = logs;
      cache->flows[i].wn.shift = shift;
    }
    x = channel_concat(x0, z1);
  }
  if (logdet != nullptr) *logdet = ld;
  if (cache != nullptr) cache->z = x;
  return x;
}

Tensor FlowModel::flow_inverse(const Tensor& z, const Tensor& cond) const {
  if (z.rank() != 3 || z.dim(1) != cfg_.group) {
    throw ShapeError("flow_inverse: z shape " + z.shape_string());
  }
  const std::size_t nh = cfg_.n_half();
  Tensor x = z;
  for (std::size_t i = cfg_.n_flows; i-- > 0;) {
    const Tensor z0 = channel_slice(x, 0, nh);
    const Tensor z1 = channel_slice(x, nh, cfg_.group);
    const Tensor wn_out = wn_forward(i, z0, cond, nullptr);
    const Tensor logs = channel_slice(wn_out, 0, nh);
    const Tensor shift = channel_slice(wn_out, nh, 2 * nh);
    Tensor x1(z1.shape());
    for (std::size_t j = 0; j < z1.size(); ++j) {
      if (logs[j] < kMinScaleLog) {
        throw NumericError("coupling scale below 1e-12 during inversion");
      }
      x1[j] = (z1[j] - shift[j]) * std::exp(-logs[j]);
    }
    check_finite(x1, "coupling inverse");
    const Tensor merged = channel_concat(z0, x1);
    const Tensor w_inv = invert_matrix(params_.get(flow_name(i, "W")).value);
    x = mix_channels(merged, w_inv);
  }
  return x;
}

double FlowModel::nll(const Tensor& audio, const Tensor& cond, double sigma,
                      Cache* cache) const {
  if (sigma <= 0.0) throw ParamError("nll: sigma must be positive");
  double logdet = 0.0;
  const Tensor z = flow_forward(audio, cond, &logdet, cache);
  const double n = static_cast<double>(z.size());
  const double quad =
      0.5 / (sigma * sigma) * kernels::sum_squares(z.data(), z.size());
  const double norm_const = 0.5 * n * std::log(2.0 * M_PI * sigma * sigma);
  return (quad + norm_const - logdet) / n;
}

double FlowModel::nll_backward(const Tensor& audio, const Tensor& cond,
                               double sigma) {
  Cache cache;
  const double loss = nll(audio, cond, sigma, &cache);
  const std::size_t nh = cfg_.n_half();
  const double n = static_cast<double>(cache.z.size());
  const double inv_n = 1.0 / n;
  const double batch_time = static_cast<double>(audio.dim(0)) *
                            static_cast<double>(audio.dim(2));

  // d loss / d z from the Gaussian prior term.
  Tensor gz(cache.z.shape());
  const double prior_scale = inv_n / (sigma * sigma);
  for (std::size_t j = 0; j < gz.size(); ++j) {
    gz[j] = prior_scale * cache.z[j];
  }

  for (std::size_t i = cfg_.n_flows; i-- > 0;) {
    FlowCache& fc = cache.flows[i];
    Tensor g0 = channel_slice(gz, 0, nh);
    const Tensor g1 = channel_slice(gz, nh, cfg_.group);
    const Tensor& logs = fc.wn.logs;
    const Tensor& x1 = fc.x1;

    Tensor g_x1(x1.shape());
    Tensor g_logs(logs.shape());
    for (std::size_t j = 0; j < x1.size(); ++j) {
      const double s = std::exp(logs[j]);
      g_x1[j] = g1[j] * s;
      g_logs[j] = g1[j] * s * x1[j] - inv_n;  // -1/N from the logdet term
    }
    const Tensor g_x0_wn = wn_backward(i, fc.wn, cond, g_logs, g1);
    kernels::add(g_x0_wn.data(), g0.data(), g0.size());

    const Tensor gy = channel_concat(g0, g_x1);

    // Invertible 1x1 conv backward.
    const Tensor& w = params_.get(flow_name(i, "W")).value;
    Tensor& gw = params_.get(flow_name(i, "W")).grad;
    const std::size_t bt = gy.dim(0), time = gy.dim(2);
    for (std::size_t c = 0; c < cfg_.group; ++c) {
      for (std::size_t d = 0; d < cfg_.group; ++d) {
        double acc = 0.0;
        for (std::size_t bi = 0; bi < bt; ++bi) {
          acc += kernels::dot(gy.data() + (bi * cfg_.group + c) * time,
                              fc.pre_conv.data() +
                                  (bi * cfg_.group + d) * time,
                              time);
        }
        gw.at2(c, d) += acc;
      }
    }
    // -(B*T/N) * W^{-T} from the logdet term.
    const Tensor w_inv = invert_matrix(w);
    for (std::size_t c = 0; c < cfg_.group; ++c) {
      for (std::size_t d = 0; d < cfg_.group; ++d) {
        gw.at2(c, d) -= batch_time * inv_n * w_inv.at2(d, c);
      }
    }
    // g_x = W^T g_y
    Tensor w_t({cfg_.group, cfg_.group});
    for (std::size_t c = 0; c < cfg_.group; ++c) {
      for (std::size_t d = 0; d < cfg_.group; ++d) {
        w_t.at2(c, d) = w.at2(d, c);
      }
    }
    gz = mix_channels(gy, w_t);
  }
  return loss;
}

AudioBuffer FlowModel::infer_waveform(
    const std::vector<std::vector<double>>& cond_mel, double sigma,
    std::uint64_t seed) const {
  if (cond_mel.empty()) throw DataError("infer_waveform: empty conditioning");
  if (sigma < 0.0) throw ParamError("infer_waveform: sigma must be >= 0");
  const std::size_t length =
      (cond_mel.size() - 1) * cfg_.hop + cfg_.frame_len;
  const std::size_t t_groups = (length + cfg_.group - 1) / cfg_.group;
  const std::size_t pad = t_groups * cfg_.group - length;

  Rng rng(seed);
  std::vector<double> z_flat(t_groups * cfg_.group);
  for (double& v : z_flat) v = sigma > 0.0 ? sigma * rng.normal() : 0.0;
  std::size_t squeeze_pad = 0;
  const Tensor z = squeeze_audio(z_flat, cfg_.group, &squeeze_pad);
  const Tensor cond = make_cond(cond_mel, t_groups);
  const Tensor x = flow_inverse(z, cond);

  AudioBuffer out;
  out.samples = unsqueeze_audio(x, pad);
  check_finite(Tensor({out.samples.size()}, out.samples), "infer_waveform");
  return out;
}

Tensor FlowModel::make_cond(const std::vector<std::vector<double>>& mel_frames,
                            std::size_t t_groups) const {
  if (!norm_.has_value()) return upsample_cond(mel_frames, cfg_, t_groups);
  std::vector<std::vector<double>> normalized;
  normalized.reserve(mel_frames.size());
  for (const auto& frame : mel_frames) {
    normalized.push_back(normalize_vec(frame, *norm_));
  }
  return upsample_cond(normalized, cfg_, t_groups);
}

const NormStats& FlowModel::norm_stats() const {
  if (!norm_.has_value()) {
    throw StateError("vocoder has no normalization statistics");
  }
  return *norm_;
}

void FlowModel::check_invertible() const {
  for (std::size_t i = 0; i < cfg_.n_flows; ++i) {
    (void)logabsdet(params_.get(flow_name(i, "W")).value);
  }
}

void FlowModel::save(const std::string& path) const {
  ParamSet out;
  for (const auto& [name, p] : params_.items()) out.add(name, p.value);
  out.add("vocoder.config",
          Tensor({8}, {static_cast<double>(cfg_.group),
                       static_cast<double>(cfg_.n_flows),
                       static_cast<double>(cfg_.wn.n_layers),
                       static_cast<double>(cfg_.wn.channels),
                       static_cast<double>(cfg_.wn.kernel),
                       static_cast<double>(cfg_.n_mels),
                       static_cast<double>(cfg_.hop),
                       static_cast<double>(cfg_.frame_len)}));
  if (norm_.has_value()) {
    out.add("vocoder.norm.mean",
            Tensor({norm_->mean.size()}, norm_->mean));
    out.add("vocoder.norm.std",
            Tensor({norm_->std_dev.size()}, norm_->std_dev));
  }
  checkpoint_save(out, path);
}

FlowModel FlowModel::load(const std::string& path,
                          std::vector<std::string>* warnings) {
  auto tensors = checkpoint_load(path);
  auto cfg_it = tensors.find("vocoder.config");
  if (cfg_it == tensors.end() || cfg_it->second.size() != 8) {
    throw FormatError("checkpoint missing vocoder.config");
  }
  VocoderConfig cfg;
  cfg.group = static_cast<std::size_t>(cfg_it->second[0]);
  cfg.n_flows = static_cast<std::size_t>(cfg_it->second[1]);
  cfg.wn.n_layers = static_cast<std::size_t>(cfg_it->second[2]);
  cfg.wn.channels = static_cast<std::size_t>(cfg_it->second[3]);
  cfg.wn.kernel = static_cast<std::size_t>(cfg_it->second[4]);
  cfg.n_mels = static_cast<std::size_t>(cfg_it->second[5]);
  cfg.hop = static_cast<std::size_t>(cfg_it->second[6]);
  cfg.frame_len = static_cast<std::size_t>(cfg_it->second[7]);
  cfg.validate();

  FlowModel model(cfg);
  model.add_parameters(nullptr);
  tensors.erase("vocoder.config");
  const auto mean_it = tensors.find("vocoder.norm.mean");
  const auto std_it = tensors.find("vocoder.norm.std");
  if (mean_it != tensors.end() && std_it != tensors.end()) {
    NormStats stats;
    const auto& m = mean_it->second;
    const auto& s = std_it->second;
    if (m.size() != cfg.n_mels || s.size() != cfg.n_mels) {
      throw FormatError("vocoder.norm tensors do not match n_mels");
    }
    stats.mean.assign(m.data(), m.data() + m.size());
    stats.std_dev.assign(s.data(), s.data() + s.size());
    model.set_norm_stats(std::move(stats));
    tensors.erase("vocoder.norm.mean");
    tensors.erase("vocoder.norm.std");
  }
  auto unknown = bind_checkpoint(model.params_, tensors);
  if (warnings != nullptr) *warnings = std::move(unknown);
  model.check_invertible();
  return model;
}

FlowModel train_vocoder(const std::vector<AudioBuffer>& corpus,
                        const FrameConfig& frame_cfg, const VocoderConfig& cfg,
                        const VocoderTrainConfig& train_cfg,
                        std::uint64_t seed, TrainLog* log) {
  cfg.validate();
  if (corpus.empty()) throw DataError("vocoder training corpus is empty");
  const std::size_t seg = train_cfg.segment_len;
  if (seg < cfg.frame_len || (seg - cfg.frame_len) % cfg.hop != 0 ||
      seg % cfg.group != 0) {
    throw ParamError("segment_len must be frame-aligned and group-divisible");
  }

  // Precompute Mel features; collect hop-aligned segment starts.
  std::vector<MelSpectrogram> mels;
  mels.reserve(corpus.size());
  std::vector<std::pair<std::size_t, std::size_t>> starts;  // (file, offset)
  for (std::size_t fi = 0; fi < corpus.size(); ++fi) {
    if (corpus[fi].samples.size() < seg) {
      throw DataError("training audio shorter than one segment");
    }
    mels.push_back(mel_spectrogram(corpus[fi], frame_cfg));
    const std::size_t max_start = corpus[fi].samples.size() - seg;
    for (std::size_t s = 0; s <= max_start; s += cfg.hop) {
      starts.emplace_back(fi, s);
    }
  }

  // Conditioning uses z-normalized Mel values; the statistics travel with
  // the model so synthesis normalizes identically.
  const NormStats stats = compute_norm_stats(mels);
  for (auto& spec : mels) spec = normalize(spec, stats);

  Rng rng(seed);
  FlowModel model(cfg, rng);
  model.set_norm_stats(stats);
  Adam opt(train_cfg.lr);
  const std::size_t batch = std::min(train_cfg.batch, starts.size());
  const std::size_t frames_per_seg = (seg - cfg.frame_len) / cfg.hop + 1;
  const std::size_t t_groups = seg / cfg.group;

  for (std::size_t step = 0; step < train_cfg.steps; ++step) {
    std::vector<std::vector<double>> segments(batch);
    Tensor cond({batch, cfg.n_mels, t_groups});
    for (std::size_t b = 0; b < batch; ++b) {
      const auto [fi, offset] = starts[rng.below(starts.size())];
      segments[b].assign(corpus[fi].samples.begin() + offset,
                         corpus[fi].samples.begin() + offset + seg);
      const std::size_t first_frame = offset / cfg.hop;
      const std::size_t per_hop = cfg.hop / cfg.group;
      for (std::size_t t = 0; t < t_groups; ++t) {
        const std::size_t frame =
            std::min(first_frame + t / per_hop,
                     first_frame + frames_per_seg - 1);
        for (std::size_t m = 0; m < cfg.n_mels; ++m) {
          cond.at3(b, m, t) = mels[fi].data[frame][m];
        }
      }
    }
    const Tensor audio = squeeze_batch(segments, cfg.group);

    model.params().zero_grads();
    const double loss = model.nll_backward(audio, cond, train_cfg.sigma);
    if (log != nullptr) log->loss.push_back(loss);
    opt.step(model.params());
    model.check_invertible();

    if (train_cfg.checkpoint_every > 0 && !train_cfg.checkpoint_path.empty() &&
        (step + 1) % train_cfg.checkpoint_every == 0) {
      model.save(train_cfg.checkpoint_path);
    }
  }
  return model;
}

}  // namespace plc
