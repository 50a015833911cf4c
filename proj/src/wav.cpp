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

#include "plc/wav.hpp"

#include <cmath>
#include <cstdint>
#include <cstring>
#include <fstream>

#include "plc/errors.hpp"

namespace plc {
namespace {

std::uint32_t read_u32(const unsigned char* p) {
  return static_cast<std::uint32_t>(p[0]) |
         (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) |
         (static_cast<std::uint32_t>(p[3]) << 24);
}

std::uint16_t read_u16(const unsigned char* p) {
  return static_cast<std::uint16_t>(p[0] |
                                    (static_cast<std::uint16_t>(p[1]) << 8));
}

void put_u32(std::string& s, std::uint32_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
  s.push_back(static_cast<char>((v >> 16) & 0xff));
  s.push_back(static_cast<char>((v >> 24) & 0xff));
}

void put_u16(std::string& s, std::uint16_t v) {
  s.push_back(static_cast<char>(v & 0xff));
  s.push_back(static_cast<char>((v >> 8) & 0xff));
}

}  // namespace

AudioBuffer read_wav(const std::string& path, int expected_rate) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open wav file: " + path);
  std::string bytes((std::istreambuf_iterator<char>(in)),
                    std::istreambuf_iterator<char>());
  const auto* p = reinterpret_cast<const unsigned char*>(bytes.data());
  const std::size_t n = bytes.size();
  if (n < 12 || std::memcmp(p, "RIFF", 4) != 0 ||
      std::memcmp(p + 8, "WAVE", 4) != 0) {
    throw FormatError("not a RIFF/WAVE file: " + path);
  }

  std::uint16_t channels = 0;
  std::uint16_t bits = 0;
  std::uint16_t format = 0;
  std::uint32_t rate = 0;
  const unsigned char* data = nullptr;
  std::uint32_t data_len = 0;

  std::size_t pos = 12;
  while (pos + 8 <= n) {
    const std::uint32_t chunk_len = read_u32(p + pos + 4);
    if (std::memcmp(p + pos, "fmt ", 4) == 0) {
      if (pos + 8 + 16 > n) throw FormatError("truncated fmt chunk");
      format = read_u16(p + pos + 8);
      channels = read_u16(p + pos + 10);
      rate = read_u32(p + pos + 12);
      bits = read_u16(p + pos + 22);
    } else if (std::memcmp(p + pos, "data", 4) == 0) {
      if (pos + 8 + chunk_len > n) throw FormatError("truncated data chunk");
      data = p + pos + 8;
      data_len = chunk_len;
    }
    pos += 8 + chunk_len + (chunk_len & 1);
  }

  if (data == nullptr || format == 0) throw FormatError("missing wav chunks");
  if (format != 1 || bits != 16) {
    throw FormatError("only 16-bit PCM wav is supported");
  }
  if (channels != 1) throw FormatError("only mono wav is supported");
  if (expected_rate > 0 && rate != static_cast<std::uint32_t>(expected_rate)) {
    throw FormatError("sample rate " + std::to_string(rate) +
                      " Hz rejected (expected " +
                      std::to_string(expected_rate) + ")");
  }

  AudioBuffer audio;
  audio.sample_rate = static_cast<int>(rate);
  audio.samples.resize(data_len / 2);
  for (std::size_t i = 0; i < audio.samples.size(); ++i) {
    const std::int16_t v = static_cast<std::int16_t>(
        static_cast<std::uint16_t>(data[2 * i]) |
        (static_cast<std::uint16_t>(data[2 * i + 1]) << 8));
    audio.samples[i] = static_cast<double>(v) / 32768.0;
  }
  return audio;
}

void write_wav(const AudioBuffer& audio, const std::string& path) {
  if (audio.sample_rate <= 0) throw ParamError("sample rate must be positive");
  const std::uint32_t n = static_cast<std::uint32_t>(audio.samples.size());
  std::string out;
  out.reserve(44 + 2 * n);
  out += "RIFF";
  put_u32(out, 36 + 2 * n);
  out += "WAVEfmt ";
  put_u32(out, 16);
  put_u16(out, 1);  // PCM
  put_u16(out, 1);  // mono
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate));
  put_u32(out, static_cast<std::uint32_t>(audio.sample_rate) * 2);
  put_u16(out, 2);
  put_u16(out, 16);
  out += "data";
  put_u32(out, 2 * n);
  for (double s : audio.samples) {
    double scaled = std::round(s * 32768.0);
    if (scaled > 32767.0) scaled = 32767.0;
    if (scaled < -32768.0) scaled = -32768.0;
    put_u16(out, static_cast<std::uint16_t>(
                     static_cast<std::int16_t>(scaled)));
  }
  std::ofstream f(path, std::ios::binary);
  if (!f) throw DataError("cannot open wav file for writing: " + path);
  f.write(out.data(), static_cast<std::streamsize>(out.size()));
}

}  // namespace plc
