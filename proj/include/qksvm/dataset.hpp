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
#include <algorithm>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <string>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/config.hpp"
#include "qksvm/digest.hpp"
#include "qksvm/io.hpp"
#include "qksvm/mel.hpp"
#include "qksvm/parallel.hpp"
#include "qksvm/rng.hpp"
#include "qksvm/wav.hpp"

namespace qksvm {

constexpr int kLabelBonafide = +1;
constexpr int kLabelSpoof = -1;

struct SampleRecord {
  std::string id;  // manifest-relative path (or synthetic id)
  int label = 0;   // +1 bona fide, -1 spoof
};

struct Manifest {
  std::vector<SampleRecord> records;  // sorted by id

  // Digest over the canonicalized (sorted) records, so line order in the
  // manifest file never changes downstream identities.
  Digest canonical_digest() const {
    Sha256 h;
    for (const auto& r : records) {
      h.update(r.id);
      h.update(",");
      h.update(r.label == kLabelBonafide ? "bonafide" : "spoof");
      h.update("\n");
    }
    return h.finish();
  }
};

// One record per line: `relative/path.wav,label` with label in
// {bonafide, spoof}; `#` lines are comments. Records are sorted by path.
inline Manifest load_manifest(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw DataError("cannot open manifest: " + path.string());
  Manifest m;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::string trimmed = detail::trim(line);
    if (trimmed.empty() || trimmed[0] == '#') continue;
    const std::size_t comma = trimmed.rfind(',');
    if (comma == std::string::npos)
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": expected 'path,label'");
    SampleRecord r;
    r.id = detail::trim(trimmed.substr(0, comma));
    const std::string label = detail::trim(trimmed.substr(comma + 1));
    if (label == "bonafide") r.label = kLabelBonafide;
    else if (label == "spoof") r.label = kLabelSpoof;
    else
      throw DataError(path.string() + ":" + std::to_string(line_no) +
                      ": bad label '" + label + "' (expected bonafide or spoof)");
    if (r.id.empty())
      throw DataError(path.string() + ":" + std::to_string(line_no) + ": empty path");
    m.records.push_back(std::move(r));
  }
  std::sort(m.records.begin(), m.records.end(),
            [](const SampleRecord& a, const SampleRecord& b) { return a.id < b.id; });
  for (std::size_t i = 1; i < m.records.size(); ++i)
    if (m.records[i].id == m.records[i - 1].id)
      throw DataError(path.string() + ": duplicate manifest entry '" +
                      m.records[i].id + "'");
  return m;
}

inline void save_manifest(const std::filesystem::path& path, const Manifest& m) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError("cannot write manifest: " + path.string());
  for (const auto& r : m.records)
    out << r.id << "," << (r.label == kLabelBonafide ? "bonafide" : "spoof") << "\n";
}

// --- Feature artifact ----------------------------------------------------------
//
// Binary format "QKFT": magic (4 bytes), version u32 LE, n_rows u64 LE,
// n_cols u64 LE, params_digest (32 raw bytes), source_digest (32 raw bytes),
// then per row [id length u32 LE, id bytes, label i8], then n_rows*n_cols
// float64 LE values row-major.

struct FeatureArtifact {
  std::vector<SampleRecord> rows;  // sorted by id
  Eigen::MatrixXd values;          // [n_rows x n_cols]
  Digest params_digest{};          // digest of the feature parameterization
  Digest source_digest{};          // canonical manifest digest or synth params

  std::vector<int> labels() const {
    std::vector<int> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i].label;
    return out;
  }
  std::vector<std::string> ids() const {
    std::vector<std::string> out(rows.size());
    for (std::size_t i = 0; i < rows.size(); ++i) out[i] = rows[i].id;
    return out;
  }
};

constexpr std::uint32_t kFeatureFormatVersion = 1;

inline void save_features(const std::filesystem::path& path, const FeatureArtifact& a) {
  std::filesystem::create_directories(path.parent_path().empty()
                                          ? std::filesystem::path(".")
                                          : path.parent_path());
  const auto tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw DataError("cannot write feature artifact: " + tmp);
    out.write("QKFT", 4);
    write_u32le(out, kFeatureFormatVersion);
    write_u64le(out, static_cast<std::uint64_t>(a.values.rows()));
    write_u64le(out, static_cast<std::uint64_t>(a.values.cols()));
    out.write(reinterpret_cast<const char*>(a.params_digest.data()), 32);
    out.write(reinterpret_cast<const char*>(a.source_digest.data()), 32);
    for (const auto& r : a.rows) {
      write_u32le(out, static_cast<std::uint32_t>(r.id.size()));
      out.write(r.id.data(), static_cast<std::streamsize>(r.id.size()));
      const char label = static_cast<char>(r.label);
      out.write(&label, 1);
    }
    for (Eigen::Index i = 0; i < a.values.rows(); ++i)
      for (Eigen::Index j = 0; j < a.values.cols(); ++j) write_f64le(out, a.values(i, j));
    if (!out) throw DataError("write failed: " + tmp);
  }
  std::filesystem::rename(tmp, path);
}

// Header-only probe used for idempotence checks.
struct FeatureHeader {
  std::uint64_t n_rows = 0, n_cols = 0;
  Digest params_digest{}, source_digest{};
};

inline std::optional<FeatureHeader> read_feature_header(
    const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return std::nullopt;
  char magic[4];
  std::uint32_t version = 0;
  FeatureHeader h;
  if (!in.read(magic, 4) || std::memcmp(magic, "QKFT", 4) != 0) return std::nullopt;
  if (!read_u32le(in, version) || version != kFeatureFormatVersion) return std::nullopt;
  if (!read_u64le(in, h.n_rows) || !read_u64le(in, h.n_cols)) return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(h.params_digest.data()), 32)) return std::nullopt;
  if (!in.read(reinterpret_cast<char*>(h.source_digest.data()), 32)) return std::nullopt;
  return h;
}

inline FeatureArtifact load_features(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open feature artifact: " + path.string());
  char magic[4];
  if (!in.read(magic, 4) || std::memcmp(magic, "QKFT", 4) != 0)
    throw DataError("not a feature artifact: " + path.string());
  std::uint32_t version = 0;
  if (!read_u32le(in, version)) throw DataError("truncated artifact: " + path.string());
  if (version != kFeatureFormatVersion)
    throw DataError("unknown feature artifact version " + std::to_string(version) +
                    ": " + path.string());
  std::uint64_t n_rows = 0, n_cols = 0;
  if (!read_u64le(in, n_rows) || !read_u64le(in, n_cols))
    throw DataError("truncated artifact: " + path.string());
  FeatureArtifact a;
  if (!in.read(reinterpret_cast<char*>(a.params_digest.data()), 32) ||
      !in.read(reinterpret_cast<char*>(a.source_digest.data()), 32))
    throw DataError("truncated artifact: " + path.string());
  a.rows.resize(n_rows);
  for (auto& r : a.rows) {
    std::uint32_t len = 0;
    if (!read_u32le(in, len)) throw DataError("truncated artifact: " + path.string());
    r.id.resize(len);
    char label;
    if (!in.read(r.id.data(), len) || !in.read(&label, 1))
      throw DataError("truncated artifact: " + path.string());
    r.label = static_cast<int>(label);
    if (r.label != kLabelBonafide && r.label != kLabelSpoof)
      throw DataError("bad label byte in artifact: " + path.string());
  }
  a.values.resize(static_cast<Eigen::Index>(n_rows), static_cast<Eigen::Index>(n_cols));
  for (Eigen::Index i = 0; i < a.values.rows(); ++i)
    for (Eigen::Index j = 0; j < a.values.cols(); ++j)
      if (!read_f64le(in, a.values(i, j)))
        throw DataError("truncated artifact payload: " + path.string());
  return a;
}

// --- Extraction -----------------------------------------------------------------

// Runs the audio front end over every manifest entry (in sorted order, files
// processed in parallel) and assembles the flattened log-mel matrix.
inline FeatureArtifact extract_features(const Manifest& manifest,
                                        const std::filesystem::path& audio_root,
                                        const FeaturesSection& features, int jobs) {
  features.validate();
  if (manifest.records.empty()) throw DataError("manifest has no records");
  const int n_frames = features.mel.n_frames_target();
  const Eigen::Index dim =
      static_cast<Eigen::Index>(features.mel.n_mels) * n_frames;
  FeatureArtifact a;
  a.rows = manifest.records;
  a.params_digest = features.digest();
  a.source_digest = manifest.canonical_digest();
  a.values.resize(static_cast<Eigen::Index>(manifest.records.size()), dim);
  parallel_for(manifest.records.size(), jobs, [&](std::size_t i) {
    const auto& rec = manifest.records[i];
    Waveform w = load_audio(audio_root / rec.id, features.mel.sample_rate);
    a.values.row(static_cast<Eigen::Index>(i)) = extract_feature_row(w, features.mel);
  });
  return a;
}

// --- Synthetic generator ---------------------------------------------------------

// Two isotropic unit-variance Gaussian classes injected at the PCA-output
// stage (no audio involved): class means sit separation apart along the
// normalized all-ones direction. The artifact goes through the same run
// pipeline as audio-derived features.
inline FeatureArtifact make_synthetic_features(int n_per_class, double separation,
                                               std::uint64_t seed, int dim) {
  if (n_per_class < 1) throw ConfigError("synth: n_per_class must be >= 1");
  if (separation < 0.0) throw ConfigError("synth: separation must be >= 0");
  if (dim < 1) throw ConfigError("synth: dim must be >= 1");

  FeatureArtifact a;
  const int n = 2 * n_per_class;
  a.values.resize(n, dim);
  a.rows.resize(n);
  const double offset = 0.5 * separation / std::sqrt(static_cast<double>(dim));
  Rng rng(mix_seed(seed, 0x5EED));
  char buf[32];
  for (int i = 0; i < n_per_class; ++i) {
    std::snprintf(buf, sizeof(buf), "bona_%05d", i);
    a.rows[i] = {buf, kLabelBonafide};
    for (int j = 0; j < dim; ++j) a.values(i, j) = offset + rng.normal();
  }
  for (int i = 0; i < n_per_class; ++i) {
    std::snprintf(buf, sizeof(buf), "spoof_%05d", i);
    a.rows[n_per_class + i] = {buf, kLabelSpoof};
    for (int j = 0; j < dim; ++j)
      a.values(n_per_class + i, j) = -offset + rng.normal();
  }

  std::string params = "synth\n";
  params += "dim=" + std::to_string(dim) + "\n";
  params += "n_per_class=" + std::to_string(n_per_class) + "\n";
  params += "seed=" + std::to_string(seed) + "\n";
  params += "separation=" + format_exact(separation) + "\n";
  a.source_digest = sha256(params);
  a.params_digest = sha256("synth-direct\n" + std::string("dim=") +
                           std::to_string(dim) + "\n");
  return a;
}

inline Manifest synthetic_manifest(const FeatureArtifact& a) {
  Manifest m;
  m.records = a.rows;
  return m;
}

}  // namespace qksvm
