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

#include <Eigen/Dense>
#include <cmath>
#include <complex>
#include <string>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/digest.hpp"
#include "qksvm/wav.hpp"

namespace qksvm {

// Log-mel extraction parameters. params_hash() keys every cached artifact so
// differently parameterized features can never be mixed.
struct MelConfig {
  int sample_rate = 16000;
  int window = 512;  // also the FFT size; must be a power of two
  int hop = 256;
  int n_mels = 64;
  double epsilon = 1e-10;  // stability floor inside the log
  double duration_s = 4.0;  // fixed clip length (center crop / tail pad)

  int target_samples() const {
    return static_cast<int>(std::llround(duration_s * sample_rate));
  }
  int n_frames_target() const { return 1 + (target_samples() - window) / hop; }

  void validate() const {
    if (sample_rate <= 0) throw ConfigError("features: sample_rate must be positive");
    if (!is_power_of_two(window))
      throw ConfigError("features: window must be a power of two");
    if (hop <= 0) throw ConfigError("features: hop must be positive");
    if (n_mels < 1) throw ConfigError("features: n_mels must be >= 1");
    if (epsilon <= 0.0) throw ConfigError("features: epsilon must be positive");
    if (duration_s <= 0.0) throw ConfigError("features: duration must be positive");
    if (target_samples() < window)
      throw ConfigError("features: duration shorter than one analysis window");
  }

  std::string canonical() const {
    std::string s;
    s += "duration=" + format_exact(duration_s) + "\n";
    s += "epsilon=" + format_exact(epsilon) + "\n";
    s += "hop=" + std::to_string(hop) + "\n";
    s += "n_mels=" + std::to_string(n_mels) + "\n";
    s += "sample_rate=" + std::to_string(sample_rate) + "\n";
    s += "window=" + std::to_string(window) + "\n";
    return s;
  }
  Digest params_hash() const { return sha256(canonical()); }
};

struct MelSpectrogram {
  Eigen::MatrixXd values;  // [n_mels x n_frames], natural-log energies
  Digest params_hash{};
};

namespace detail {

// In-place iterative radix-2 FFT. Size must be a power of two.
inline void fft_radix2(std::vector<std::complex<double>>& a) {
  const std::size_t n = a.size();
  for (std::size_t i = 1, j = 0; i < n; ++i) {
    std::size_t bit = n >> 1;
    for (; j & bit; bit >>= 1) j ^= bit;
    j ^= bit;
    if (i < j) std::swap(a[i], a[j]);
  }
  for (std::size_t len = 2; len <= n; len <<= 1) {
    const double ang = -2.0 * M_PI / static_cast<double>(len);
    const std::complex<double> wl(std::cos(ang), std::sin(ang));
    for (std::size_t i = 0; i < n; i += len) {
      std::complex<double> w(1.0, 0.0);
      for (std::size_t k = 0; k < len / 2; ++k) {
        std::complex<double> u = a[i + k];
        std::complex<double> v = a[i + k + len / 2] * w;
        a[i + k] = u + v;
        a[i + k + len / 2] = u - v;
        w *= wl;
      }
    }
  }
}

inline double hz_to_mel(double f) { return 2595.0 * std::log10(1.0 + f / 700.0); }
inline double mel_to_hz(double m) { return 700.0 * (std::pow(10.0, m / 2595.0) - 1.0); }

}  // namespace detail

// Periodic Hann window of length n.
inline std::vector<double> hann_window(int n) {
  std::vector<double> w(n);
  for (int i = 0; i < n; ++i)
    w[i] = 0.5 * (1.0 - std::cos(2.0 * M_PI * i / n));
  return w;
}

// Triangular filterbank on the HTK mel scale, filters spanning [0, sr/2].
// Returns [n_mels x (n_fft/2 + 1)] weights applied to the power spectrum.
inline Eigen::MatrixXd mel_filterbank(int n_mels, int n_fft, int sample_rate) {
  const int n_bins = n_fft / 2 + 1;
  const double mel_lo = detail::hz_to_mel(0.0);
  const double mel_hi = detail::hz_to_mel(sample_rate / 2.0);
  std::vector<double> centers(n_mels + 2);
  for (int j = 0; j < n_mels + 2; ++j)
    centers[j] = detail::mel_to_hz(mel_lo + (mel_hi - mel_lo) * j / (n_mels + 1));
  Eigen::MatrixXd fb = Eigen::MatrixXd::Zero(n_mels, n_bins);
  for (int m = 0; m < n_mels; ++m) {
    const double left = centers[m], center = centers[m + 1], right = centers[m + 2];
    for (int k = 0; k < n_bins; ++k) {
      const double f = static_cast<double>(k) * sample_rate / n_fft;
      double w = 0.0;
      if (f >= left && f <= center && center > left)
        w = (f - left) / (center - left);
      else if (f > center && f <= right && right > center)
        w = (right - f) / (right - center);
      fb(m, k) = w;
    }
  }
  return fb;
}

// Normalizes the clip to the configured fixed duration: center crop when too
// long, tail pad with silence when too short.
inline Waveform fix_duration(const Waveform& w, const MelConfig& cfg) {
  const int target = cfg.target_samples();
  Waveform out;
  out.sample_rate = w.sample_rate;
  const std::size_t len = w.samples.size();
  if (len >= static_cast<std::size_t>(target)) {
    std::size_t start = (len - target) / 2;
    out.samples.assign(w.samples.begin() + start, w.samples.begin() + start + target);
  } else {
    out.samples = w.samples;
    out.samples.resize(target, 0.0);
  }
  return out;
}

// Log-mel spectrogram: Hann-windowed magnitude-squared STFT, triangular HTK
// mel filterbank, natural log with floor epsilon. The time axis is clipped /
// padded (with log(epsilon) columns) to exactly cfg.n_frames_target().
inline MelSpectrogram mel_spectrogram(const Waveform& w, const MelConfig& cfg) {
  cfg.validate();
  if (w.sample_rate != cfg.sample_rate)
    throw DataError("waveform sample rate does not match extraction config");
  const int win = cfg.window;
  if (w.samples.size() < static_cast<std::size_t>(win))
    throw DataError("waveform shorter than one analysis window");
  const int n_bins = win / 2 + 1;
  const int n_frames_raw =
      1 + static_cast<int>((w.samples.size() - static_cast<std::size_t>(win)) / cfg.hop);
  const int n_frames = cfg.n_frames_target();

  const std::vector<double> window = hann_window(win);
  const Eigen::MatrixXd fb = mel_filterbank(cfg.n_mels, win, cfg.sample_rate);
  const double log_floor = std::log(cfg.epsilon);

  MelSpectrogram out;
  out.params_hash = cfg.params_hash();
  out.values = Eigen::MatrixXd::Constant(cfg.n_mels, n_frames, log_floor);

  std::vector<std::complex<double>> buf(win);
  Eigen::VectorXd power(n_bins);
  const int used_frames = std::min(n_frames_raw, n_frames);
  for (int t = 0; t < used_frames; ++t) {
    const double* src = w.samples.data() + static_cast<std::size_t>(t) * cfg.hop;
    for (int i = 0; i < win; ++i) buf[i] = std::complex<double>(src[i] * window[i], 0.0);
    detail::fft_radix2(buf);
    for (int k = 0; k < n_bins; ++k) power[k] = std::norm(buf[k]);
    Eigen::VectorXd banded = fb * power;
    for (int m = 0; m < cfg.n_mels; ++m)
      out.values(m, t) = std::log(banded[m] + cfg.epsilon);
  }
  return out;
}

// Full per-file front end: fixed duration, log-mel, mel-major flattening.
// Row layout: index m * n_frames + t.
inline Eigen::RowVectorXd extract_feature_row(const Waveform& w, const MelConfig& cfg) {
  MelSpectrogram mel = mel_spectrogram(fix_duration(w, cfg), cfg);
  const int n_frames = static_cast<int>(mel.values.cols());
  Eigen::RowVectorXd row(cfg.n_mels * n_frames);
  for (int m = 0; m < cfg.n_mels; ++m)
    for (int t = 0; t < n_frames; ++t) row[m * n_frames + t] = mel.values(m, t);
  return row;
}

}  // namespace qksvm
