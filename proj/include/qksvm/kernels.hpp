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
#include <Eigen/Eigenvalues>
#include <cmath>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/digest.hpp"
#include "qksvm/io.hpp"
#include "qksvm/parallel.hpp"
#include "qksvm/quantum.hpp"

namespace qksvm {

enum class KernelKind { kLinear, kRbf, kPolynomial, kQuantum };

inline const char* to_string(KernelKind k) {
  switch (k) {
    case KernelKind::kLinear: return "linear";
    case KernelKind::kRbf: return "rbf";
    case KernelKind::kPolynomial: return "polynomial";
    case KernelKind::kQuantum: return "quantum";
  }
  return "?";
}

// A fully pinned kernel (one grid point, not a sweep). feature_context is the
// canonical encoding of the upstream feature parameterization; it feeds the
// spec digest so cached Gram matrices never mix feature configurations.
struct KernelSpec {
  KernelKind kind = KernelKind::kLinear;
  double rbf_gamma = 1.0;         // rbf only
  int poly_degree = 2;            // polynomial only
  double poly_coef0 = 1.0;        // polynomial only
  FeatureMapSpec feature_map;     // quantum only
  std::string feature_context;

  void validate() const {
    switch (kind) {
      case KernelKind::kLinear:
        break;
      case KernelKind::kRbf:
        if (!(rbf_gamma > 0.0)) throw ConfigError("kernel: rbf_gamma must be positive");
        break;
      case KernelKind::kPolynomial:
        if (poly_degree < 1) throw ConfigError("kernel: poly_degree must be >= 1");
        break;
      case KernelKind::kQuantum:
        feature_map.validate();
        break;
    }
  }

  std::string canonical() const {
    std::string s = std::string("kind=") + to_string(kind) + "\n";
    switch (kind) {
      case KernelKind::kLinear:
        break;
      case KernelKind::kRbf:
        s += "rbf_gamma=" + format_exact(rbf_gamma) + "\n";
        break;
      case KernelKind::kPolynomial:
        s += "poly_coef0=" + format_exact(poly_coef0) + "\n";
        s += "poly_degree=" + std::to_string(poly_degree) + "\n";
        break;
      case KernelKind::kQuantum:
        s += feature_map.canonical();
        break;
    }
    return s;
  }

  Digest spec_digest() const {
    Sha256 h;
    h.update(canonical());
    h.update("---\n");
    h.update(feature_context);
    return h.finish();
  }
};

inline double eval_kernel(const Eigen::RowVectorXd& z1, const Eigen::RowVectorXd& z2,
                          const KernelSpec& spec) {
  if (z1.size() != z2.size()) throw DataError("eval_kernel: dimension mismatch");
  switch (spec.kind) {
    case KernelKind::kLinear:
      return z1.dot(z2);
    case KernelKind::kRbf:
      return std::exp(-spec.rbf_gamma * (z1 - z2).squaredNorm());
    case KernelKind::kPolynomial:
      return std::pow(z1.dot(z2) + spec.poly_coef0, spec.poly_degree);
    case KernelKind::kQuantum:
      return fidelity_kernel(z1, z2, spec.feature_map);
  }
  throw InternalError("eval_kernel: unknown kernel kind");
}

struct GramMatrix {
  Eigen::MatrixXd values;            // symmetric N x N
  std::vector<std::string> row_ids;  // sample identifiers, row order
  Digest spec_digest{};
  Digest rowset_digest{};
};

// Digest over row identifiers and raw row bytes; identifies the exact sample
// set (and transformed values) a Gram matrix was built from.
inline Digest rowset_digest(const Eigen::MatrixXd& x,
                            const std::vector<std::string>& row_ids) {
  Sha256 h;
  h.update_u64(static_cast<std::uint64_t>(x.rows()));
  h.update_u64(static_cast<std::uint64_t>(x.cols()));
  for (Eigen::Index i = 0; i < x.rows(); ++i) {
    if (!row_ids.empty()) {
      h.update(row_ids[static_cast<std::size_t>(i)]);
      h.update("\n");
    }
    for (Eigen::Index j = 0; j < x.cols(); ++j) h.update_double(x(i, j));
  }
  return h.finish();
}

// --- Gram cache --------------------------------------------------------------
//
// File format (bit-exact): magic "QKGM", format version u32 LE, N u64 LE,
// spec_digest (32 raw bytes), rowset_digest (32 raw bytes), then N*N float64
// LE values row-major. Unknown versions are rejected.

class GramCache {
 public:
  static constexpr std::uint32_t kVersion = 1;

  explicit GramCache(std::filesystem::path dir) : dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  const std::filesystem::path& dir() const { return dir_; }

  std::filesystem::path path_for(const Digest& spec, const Digest& rows) const {
    return dir_ / (to_hex(spec).substr(0, 16) + "-" + to_hex(rows).substr(0, 16) +
                   ".qkgm");
  }

  // Returns the cached matrix on a clean hit. A present-but-inconsistent file
  // (bad magic/version/digests/size) is reported through warn and treated as
  // a miss; the caller recomputes and overwrites.
  std::optional<Eigen::MatrixXd> load(const Digest& spec, const Digest& rows,
                                      std::string* warn = nullptr) const {
    const auto path = path_for(spec, rows);
    std::ifstream in(path, std::ios::binary);
    if (!in) return std::nullopt;
    auto corrupt = [&](const std::string& why) -> std::optional<Eigen::MatrixXd> {
      if (warn) *warn = "gram cache " + path.string() + ": " + why + "; recomputing";
      return std::nullopt;
    };
    char magic[4];
    if (!in.read(magic, 4) || std::memcmp(magic, "QKGM", 4) != 0)
      return corrupt("bad magic");
    std::uint32_t version = 0;
    if (!read_u32le(in, version)) return corrupt("truncated header");
    if (version != kVersion)
      return corrupt("unknown format version " + std::to_string(version));
    std::uint64_t n = 0;
    if (!read_u64le(in, n)) return corrupt("truncated header");
    Digest fspec{}, frows{};
    if (!in.read(reinterpret_cast<char*>(fspec.data()), 32) ||
        !in.read(reinterpret_cast<char*>(frows.data()), 32))
      return corrupt("truncated digests");
    if (fspec != spec || frows != rows) return corrupt("digest mismatch");
    Eigen::MatrixXd m(n, n);
    for (std::uint64_t i = 0; i < n; ++i)
      for (std::uint64_t j = 0; j < n; ++j) {
        double v;
        if (!read_f64le(in, v)) return corrupt("truncated payload");
        m(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = v;
      }
    char extra;
    if (in.read(&extra, 1)) return corrupt("trailing bytes");
    return m;
  }

  // Atomic write: temp file in the cache dir, then rename.
  void store(const Digest& spec, const Digest& rows, const Eigen::MatrixXd& m) const {
    const auto path = path_for(spec, rows);
    const auto tmp = path.string() + ".tmp";
    {
      std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
      if (!out) throw DataError("gram cache: cannot write " + tmp);
      out.write("QKGM", 4);
      write_u32le(out, kVersion);
      write_u64le(out, static_cast<std::uint64_t>(m.rows()));
      out.write(reinterpret_cast<const char*>(spec.data()), 32);
      out.write(reinterpret_cast<const char*>(rows.data()), 32);
      for (Eigen::Index i = 0; i < m.rows(); ++i)
        for (Eigen::Index j = 0; j < m.cols(); ++j) write_f64le(out, m(i, j));
      if (!out) throw DataError("gram cache: write failed for " + tmp);
    }
    std::filesystem::rename(tmp, path);
  }

 private:
  std::filesystem::path dir_;
};

// --- Gram construction ---------------------------------------------------------

// Builds the full symmetric Gram matrix. Only the upper triangle is computed,
// tile by tile (tiles are independent work units), and mirrored exactly, so
// the result is bitwise identical for any tile size and worker count. With a
// cache, a clean hit returns the stored matrix byte-identically.
inline GramMatrix build_gram(const Eigen::MatrixXd& x,
                             const std::vector<std::string>& row_ids,
                             const KernelSpec& spec, int tile = 64,
                             const GramCache* cache = nullptr, int jobs = 1) {
  spec.validate();
  const Eigen::Index n = x.rows();
  if (n < 2) throw DataError("build_gram: need at least 2 rows");
  if (tile < 1) throw ConfigError("build_gram: tile must be >= 1");
  if (!row_ids.empty() && static_cast<Eigen::Index>(row_ids.size()) != n)
    throw DataError("build_gram: row_ids size mismatch");

  GramMatrix g;
  g.row_ids = row_ids;
  g.spec_digest = spec.spec_digest();
  g.rowset_digest = rowset_digest(x, row_ids);

  if (cache) {
    std::string warn;
    if (auto hit = cache->load(g.spec_digest, g.rowset_digest, &warn)) {
      g.values = std::move(*hit);
      return g;
    }
    if (!warn.empty()) std::cerr << "warning: " << warn << "\n";
  }

  // Quantum rows are encoded once; pairwise evaluation then reuses the states
  // through the same fidelity path eval_kernel takes.
  std::vector<Statevector> states;
  if (spec.kind == KernelKind::kQuantum) {
    states.resize(static_cast<std::size_t>(n));
    parallel_for(static_cast<std::size_t>(n), jobs, [&](std::size_t i) {
      states[i] = encode_state(x.row(static_cast<Eigen::Index>(i)), spec.feature_map);
    });
  }
  auto entry = [&](Eigen::Index i, Eigen::Index j) {
    return spec.kind == KernelKind::kQuantum
               ? fidelity_from_states(states[static_cast<std::size_t>(i)],
                                      states[static_cast<std::size_t>(j)])
               : eval_kernel(x.row(i), x.row(j), spec);
  };

  g.values.resize(n, n);
  const Eigen::Index n_tiles = (n + tile - 1) / tile;
  std::vector<std::pair<Eigen::Index, Eigen::Index>> blocks;
  for (Eigen::Index bi = 0; bi < n_tiles; ++bi)
    for (Eigen::Index bj = bi; bj < n_tiles; ++bj) blocks.emplace_back(bi, bj);

  parallel_for(blocks.size(), jobs, [&](std::size_t b) {
    const auto [bi, bj] = blocks[b];
    const Eigen::Index i0 = bi * tile, i1 = std::min<Eigen::Index>(i0 + tile, n);
    const Eigen::Index j0 = bj * tile, j1 = std::min<Eigen::Index>(j0 + tile, n);
    for (Eigen::Index i = i0; i < i1; ++i)
      for (Eigen::Index j = std::max(i, j0); j < j1; ++j) {
        const double v = entry(i, j);
        if (!std::isfinite(v))
          throw DataError("build_gram: non-finite kernel value at pair (" +
                          std::to_string(i) + ", " + std::to_string(j) + ")");
        g.values(i, j) = v;
      }
  });
  // Mirror the strict lower triangle; exact symmetry by construction.
  for (Eigen::Index i = 1; i < n; ++i)
    for (Eigen::Index j = 0; j < i; ++j) g.values(i, j) = g.values(j, i);

  if (cache) cache->store(g.spec_digest, g.rowset_digest, g.values);
  return g;
}

// Rectangular kernel matrix: entry (i, j) = k(x_eval_i, x_train_j).
inline Eigen::MatrixXd cross_gram(const Eigen::MatrixXd& x_eval,
                                  const Eigen::MatrixXd& x_train, const KernelSpec& spec,
                                  int jobs = 1) {
  spec.validate();
  if (x_eval.cols() != x_train.cols())
    throw DataError("cross_gram: feature dimensions differ");
  Eigen::MatrixXd out(x_eval.rows(), x_train.rows());
  std::vector<Statevector> train_states;
  if (spec.kind == KernelKind::kQuantum) {
    train_states.resize(static_cast<std::size_t>(x_train.rows()));
    parallel_for(train_states.size(), jobs, [&](std::size_t j) {
      train_states[j] =
          encode_state(x_train.row(static_cast<Eigen::Index>(j)), spec.feature_map);
    });
  }
  parallel_for(static_cast<std::size_t>(x_eval.rows()), jobs, [&](std::size_t i) {
    const Eigen::Index ei = static_cast<Eigen::Index>(i);
    if (spec.kind == KernelKind::kQuantum) {
      const Statevector si = encode_state(x_eval.row(ei), spec.feature_map);
      for (Eigen::Index j = 0; j < x_train.rows(); ++j)
        out(ei, j) = fidelity_from_states(si, train_states[static_cast<std::size_t>(j)]);
    } else {
      for (Eigen::Index j = 0; j < x_train.rows(); ++j)
        out(ei, j) = eval_kernel(x_eval.row(ei), x_train.row(j), spec);
    }
    for (Eigen::Index j = 0; j < x_train.rows(); ++j)
      if (!std::isfinite(out(ei, j)))
        throw DataError("cross_gram: non-finite kernel value");
  });
  return out;
}

// --- PSD validation ------------------------------------------------------------

struct PsdResult {
  GramMatrix gram;
  double lambda_min = 0.0;
  double shift = 0.0;  // diagonal shift applied, 0 when untouched
};

// Validates positive semidefiniteness. lambda_min < -tol is treated as a
// broken kernel implementation; small negative eigenvalues are repaired with
// a recorded diagonal shift, never silently.
inline PsdResult psd_floor(GramMatrix g, double tol = 1e-8) {
  const Eigen::Index n = g.values.rows();
  if (g.values.cols() != n) throw DataError("psd_floor: matrix not square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(g.values,
                                                    Eigen::EigenvaluesOnly);
  if (es.info() != Eigen::Success)
    throw InternalError("psd_floor: eigenvalue computation failed");
  PsdResult r;
  r.lambda_min = es.eigenvalues().minCoeff();
  if (r.lambda_min < -tol)
    throw InternalError("psd_floor: minimum eigenvalue " +
                        format_exact(r.lambda_min) + " below -" + format_exact(tol) +
                        " (broken kernel implementation)");
  if (r.lambda_min < 0.0) {
    r.shift = -r.lambda_min + 1e-12;
    g.values.diagonal().array() += r.shift;
  }
  r.gram = std::move(g);
  return r;
}

}  // namespace qksvm
