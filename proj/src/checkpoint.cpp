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

#include <cstdint>
#include <cstring>
#include <fstream>

#include "plc/errors.hpp"
#include "plc/nn.hpp"

namespace plc {
namespace {

constexpr char kMagic[4] = {'P', 'L', 'C', 'M'};
constexpr std::uint32_t kVersion = 1;

void put_u32(std::string& s, std::uint32_t v) {
  for (int i = 0; i < 4; ++i) s.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

void put_f32(std::string& s, float v) {
  std::uint32_t bits;
  std::memcpy(&bits, &v, 4);
  put_u32(s, bits);
}

class Reader {
 public:
  Reader(const unsigned char* p, std::size_t n) : p_(p), n_(n) {}

  std::uint8_t u8() { return take(1)[0]; }
  std::uint16_t u16() {
    const unsigned char* b = take(2);
    return static_cast<std::uint16_t>(b[0] | (b[1] << 8));
  }
  std::uint32_t u32() {
    const unsigned char* b = take(4);
    return static_cast<std::uint32_t>(b[0]) | (static_cast<std::uint32_t>(b[1]) << 8) |
           (static_cast<std::uint32_t>(b[2]) << 16) |
           (static_cast<std::uint32_t>(b[3]) << 24);
  }
  float f32() {
    const std::uint32_t bits = u32();
    float v;
    std::memcpy(&v, &bits, 4);
    return v;
  }
  std::string bytes(std::size_t len) {
    const unsigned char* b = take(len);
    return std::string(reinterpret_cast<const char*>(b), len);
  }

 private:
  const unsigned char* take(std::size_t len) {
    if (pos_ + len > n_) throw FormatError("truncated checkpoint file");
    const unsigned char* out = p_ + pos_;
    pos_ += len;
    return out;
  }
  const unsigned char* p_;
  std::size_t n_;
  std::size_t pos_ = 0;
};

}  // namespace

void checkpoint_save(const ParamSet& params, const std::string& path) {
  std::string out;
  out.append(kMagic, 4);
  put_u32(out, kVersion);
  put_u32(out, static_cast<std::uint32_t>(params.items().size()));
  for (const auto& [name, p] : params.items()) {
    if (name.size() > 0xffff) throw FormatError("tensor name too long");
    put_u16(out, static_cast<std::uint16_t>(name.size()));
    out += name;
    const auto& shape = p.value.shape();
    if (shape.size() > 0xff) throw FormatError("tensor rank too large");
    out.push_back(static_cast<char>(shape.size()));
    for (std::size_t d : shape) put_u32(out, static_cast<std::uint32_t>(d));
    for (std::size_t i = 0; i < p.value.size(); ++i) {
      put_f32(out, static_cast<float>(p.value[i]));
    }
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
  if (!f) throw DataError("failed writing checkpoint: " + path);
}

std::map<std::string, Tensor> checkpoint_load(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open checkpoint: " + path);
  std::string bytes((std::istreambuf_iterator<char>(f)),
                    std::istreambuf_iterator<char>());
  Reader r(reinterpret_cast<const unsigned char*>(bytes.data()), bytes.size());
  const std::string magic = r.bytes(4);
  if (std::memcmp(magic.data(), kMagic, 4) != 0) {
    throw FormatError("bad checkpoint magic");
  }
  const std::uint32_t version = r.u32();
  if (version != kVersion) {
    throw FormatError("unsupported checkpoint version " +
                      std::to_string(version));
  }
  const std::uint32_t count = r.u32();
  std::map<std::string, Tensor> tensors;
  for (std::uint32_t i = 0; i < count; ++i) {
    const std::uint16_t name_len = r.u16();
    const std::string name = r.bytes(name_len);
    const std::uint8_t rank = r.u8();
    std::vector<std::size_t> shape(rank);
    std::size_t total = 1;
    for (std::uint8_t d = 0; d < rank; ++d) {
      shape[d] = r.u32();
      total *= shape[d];
    }
    std::vector<double> data(total);
    for (std::size_t j = 0; j < total; ++j) data[j] = r.f32();
    if (!tensors.emplace(name, Tensor(std::move(shape), std::move(data)))
             .second) {
      throw FormatError("duplicate tensor name in checkpoint: " + name);
    }
  }
  return tensors;
}

std::vector<std::string> bind_checkpoint(
    ParamSet& params, const std::map<std::string, Tensor>& loaded) {
  for (auto& [name, p] : params.items()) {
    auto it = loaded.find(name);
    if (it == loaded.end()) {
      throw FormatError("checkpoint missing tensor: " + name);
    }
    if (it->second.shape() != p.value.shape()) {
      throw FormatError("checkpoint tensor '" + name + "' has shape " +
                        it->second.shape_string() + ", expected " +
                        p.value.shape_string());
    }
    p.value = it->second;
    p.grad = Tensor(p.value.shape());
  }
  std::vector<std::string> unknown;
  for (const auto& [name, t] : loaded) {
    if (!params.contains(name)) unknown.push_back(name);
  }
  return unknown;
}

}  // namespace plc
