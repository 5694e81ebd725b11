// Copyright 2026 The qksvm Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qksvm/common.hpp"

namespace qksvm {

struct Waveform {
  std::vector<double> samples;  // mono, amplitude in [-1, 1]
  int sample_rate = 0;
};

namespace detail {

inline std::uint32_t read_u32le(const std::uint8_t* p) {
  return static_cast<std::uint32_t>(p[0]) | (static_cast<std::uint32_t>(p[1]) << 8) |
         (static_cast<std::uint32_t>(p[2]) << 16) | (static_cast<std::uint32_t>(p[3]) << 24);
}

inline std::uint16_t read_u16le(const std::uint8_t* p) {
  return static_cast<std::uint16_t>(p[0] | (p[1] << 8));
}

}  // namespace detail

// Length-preserving linear-interpolation resampler. Equal rates are a
// bit-exact pass-through.
inline Waveform resample_linear(const Waveform& in, int target_rate) {
  if (target_rate <= 0) throw ConfigError("target sample rate must be positive");
  if (in.sample_rate == target_rate) return in;
  const std::size_t in_len = in.samples.size();
  const double ratio = static_cast<double>(in.sample_rate) / target_rate;
  const std::size_t out_len = static_cast<std::size_t>(
      std::llround(static_cast<double>(in_len) * target_rate / in.sample_rate));
  Waveform out;
  out.sample_rate = target_rate;
  out.samples.resize(out_len);
  for (std::size_t i = 0; i < out_len; ++i) {
    double pos = static_cast<double>(i) * ratio;
    if (pos >= static_cast<double>(in_len - 1)) {
      out.samples[i] = in.samples[in_len - 1];
      continue;
    }
    std::size_t lo = static_cast<std::size_t>(pos);
    double frac = pos - static_cast<double>(lo);
    out.samples[i] = in.samples[lo] + frac * (in.samples[lo + 1] - in.samples[lo]);
  }
  return out;
}

// Reads a PCM WAV container (16-bit integer or 32-bit IEEE float), averages
// channels to mono, rescales to [-1, 1] and resamples to target_rate.
inline Waveform load_audio(const std::filesystem::path& path, int target_rate = 16000) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open audio file: " + path.string());
  std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)),
                                  std::istreambuf_iterator<char>());
  if (bytes.size() < 44 || std::memcmp(bytes.data(), "RIFF", 4) != 0 ||
      std::memcmp(bytes.data() + 8, "WAVE", 4) != 0)
    throw DataError("not a RIFF/WAVE file: " + path.string());

  std::uint16_t format = 0, channels = 0, bits = 0;
  std::uint32_t rate = 0;
  const std::uint8_t* data = nullptr;
  std::size_t data_len = 0;
  bool have_fmt = false;

  std::size_t off = 12;
  while (off + 8 <= bytes.size()) {
    const std::uint8_t* hdr = bytes.data() + off;
    std::uint32_t chunk_len = detail::read_u32le(hdr + 4);
    std::size_t body = off + 8;
    if (body + chunk_len > bytes.size())
      throw DataError("truncated WAV chunk in " + path.string());
    if (std::memcmp(hdr, "fmt ", 4) == 0) {
      if (chunk_len < 16) throw DataError("malformed fmt chunk in " + path.string());
      format = detail::read_u16le(bytes.data() + body);
      channels = detail::read_u16le(bytes.data() + body + 2);
      rate = detail::read_u32le(bytes.data() + body + 4);
      bits = detail::read_u16le(bytes.data() + body + 14);
      have_fmt = true;
    } else if (std::memcmp(hdr, "data", 4) == 0) {
      data = bytes.data() + body;
      data_len = chunk_len;
    }
    off = body + chunk_len + (chunk_len & 1);  // chunks are word-aligned
  }
  if (!have_fmt || data == nullptr)
    throw DataError("WAV missing fmt/data chunk: " + path.string());
  if (channels == 0 || rate == 0)
    throw DataError("WAV declares zero channels or rate: " + path.string());

  const bool pcm16 = (format == 1 && bits == 16);
  const bool float32 = (format == 3 && bits == 32);
  if (!pcm16 && !float32)
    throw DataError("unsupported WAV encoding (need 16-bit PCM or 32-bit float): " +
                    path.string());

  const std::size_t bytes_per_sample = bits / 8;
  const std::size_t frame_size = bytes_per_sample * channels;
  const std::size_t n_frames = data_len / frame_size;
  if (n_frames == 0) throw DataError("zero-length audio: " + path.string());

  Waveform w;
  w.sample_rate = static_cast<int>(rate);
  w.samples.resize(n_frames);
  for (std::size_t f = 0; f < n_frames; ++f) {
    double acc = 0.0;
    for (std::uint16_t c = 0; c < channels; ++c) {
      const std::uint8_t* p = data + f * frame_size + c * bytes_per_sample;
      if (pcm16) {
        std::int16_t v = static_cast<std::int16_t>(detail::read_u16le(p));
        acc += static_cast<double>(v) / 32768.0;
      } else {
        float v;
        std::memcpy(&v, p, 4);
        acc += static_cast<double>(v);
      }
    }
    double s = acc / channels;
    if (!std::isfinite(s)) throw DataError("non-finite sample in " + path.string());
    w.samples[f] = std::clamp(s, -1.0, 1.0);
  }
  return resample_linear(w, target_rate);
}

}  // namespace qksvm
