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
#include <bit>
#include <cmath>
#include <complex>
#include <cstdint>
#include <string>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/digest.hpp"

namespace qksvm {

// Exact statevector simulation of data-encoding feature maps and the fidelity
// kernel |<psi(z1)|psi(z2)>|^2. Amplitude ordering: qubit 0 is the least
// significant bit of the basis-state index. Global phase is never exposed.
//
// Circuit convention (normative for this library): each repetition applies a
// Hadamard layer followed by a phase block. The phase block multiplies basis
// state |b> by exp(i * 2 * angle_S * xor_S(b)) for every interaction set S,
// where xor_S(b) is the parity of b's bits over S, angle_{q} = z_q for
// singles, and angle_S = prod_{q in S} (pi - z_q) for |S| >= 2. X/Y characters
// in Pauli strings conjugate the same diagonal phase with per-qubit basis
// changes (H for X, S-dagger then H for Y).

enum class FeatureMapFamily { kZ, kZZ, kPauli };
enum class Entanglement { kLinear, kFull };

inline const char* to_string(FeatureMapFamily f) {
  switch (f) {
    case FeatureMapFamily::kZ: return "Z";
    case FeatureMapFamily::kZZ: return "ZZ";
    case FeatureMapFamily::kPauli: return "Pauli";
  }
  return "?";
}

inline const char* to_string(Entanglement e) {
  return e == Entanglement::kLinear ? "linear" : "full";
}

struct FeatureMapSpec {
  FeatureMapFamily family = FeatureMapFamily::kZZ;
  int n_qubits = 2;
  int reps = 2;
  Entanglement entanglement = Entanglement::kLinear;
  std::vector<std::string> pauli_strings;  // Pauli family only, e.g. {"Z","ZZ"}

  // The simulator handles up to 20 qubits; typical runs use 2-4.
  static constexpr int kMaxQubits = 20;

  void validate() const {
    if (n_qubits < 1 || n_qubits > kMaxQubits)
      throw ConfigError("feature map: n_qubits must be in [1, " +
                        std::to_string(kMaxQubits) + "]");
    if (reps < 1) throw ConfigError("feature map: reps must be >= 1");
    if (family == FeatureMapFamily::kPauli) {
      if (pauli_strings.empty())
        throw ConfigError("feature map: Pauli family requires pauli_strings");
      for (const auto& s : pauli_strings) {
        if (s.empty() || static_cast<int>(s.size()) > n_qubits)
          throw ConfigError("feature map: Pauli string length must be in [1, n_qubits]");
        for (char c : s)
          if (c != 'X' && c != 'Y' && c != 'Z')
            throw ConfigError(std::string("feature map: unsupported Pauli label '") +
                              c + "'");
      }
    } else if (!pauli_strings.empty()) {
      throw ConfigError("feature map: pauli_strings only apply to the Pauli family");
    }
  }

  std::string canonical() const {
    std::string s;
    s += std::string("entanglement=") + to_string(entanglement) + "\n";
    s += std::string("family=") + to_string(family) + "\n";
    s += "n_qubits=" + std::to_string(n_qubits) + "\n";
    if (family == FeatureMapFamily::kPauli) {
      s += "paulis=";
      for (std::size_t i = 0; i < pauli_strings.size(); ++i) {
        if (i) s += ",";
        s += pauli_strings[i];
      }
      s += "\n";
    }
    s += "reps=" + std::to_string(reps) + "\n";
    return s;
  }
};

using Statevector = std::vector<std::complex<double>>;

namespace detail {

// One interaction set of the phase block: the ordered qubit subset plus the
// Pauli character acting on each member ('Z' everywhere except Pauli-family
// strings with X/Y).
struct PhaseTerm {
  std::vector<int> qubits;
  std::string paulis;
  std::uint64_t mask = 0;
  bool diagonal() const {
    return paulis.find_first_not_of('Z') == std::string::npos;
  }
};

inline void append_subsets(int len, Entanglement ent, int n, const std::string& paulis,
                           std::vector<PhaseTerm>& out) {
  auto push = [&](std::vector<int> qs) {
    PhaseTerm t;
    t.mask = 0;
    for (int q : qs) t.mask |= (1ULL << q);
    t.qubits = std::move(qs);
    t.paulis = paulis;
    out.push_back(std::move(t));
  };
  if (len == 1) {
    for (int q = 0; q < n; ++q) push({q});
    return;
  }
  if (ent == Entanglement::kLinear) {
    for (int start = 0; start + len <= n; ++start) {
      std::vector<int> qs(len);
      for (int i = 0; i < len; ++i) qs[i] = start + i;
      push(std::move(qs));
    }
    return;
  }
  // Full entanglement: all ascending combinations.
  std::vector<int> idx(len);
  for (int i = 0; i < len; ++i) idx[i] = i;
  if (len > n) return;
  for (;;) {
    push(idx);
    int i = len - 1;
    while (i >= 0 && idx[i] == n - len + i) --i;
    if (i < 0) break;
    ++idx[i];
    for (int j = i + 1; j < len; ++j) idx[j] = idx[j - 1] + 1;
  }
}

inline std::vector<PhaseTerm> build_terms(const FeatureMapSpec& spec) {
  std::vector<PhaseTerm> terms;
  switch (spec.family) {
    case FeatureMapFamily::kZ:
      append_subsets(1, spec.entanglement, spec.n_qubits, "Z", terms);
      break;
    case FeatureMapFamily::kZZ:
      append_subsets(1, spec.entanglement, spec.n_qubits, "Z", terms);
      append_subsets(2, spec.entanglement, spec.n_qubits, "ZZ", terms);
      break;
    case FeatureMapFamily::kPauli:
      for (const auto& s : spec.pauli_strings)
        append_subsets(static_cast<int>(s.size()), spec.entanglement, spec.n_qubits, s,
                       terms);
      break;
  }
  return terms;
}

// Data map: angle_{q} = z_q for singles, prod (pi - z_q) otherwise.
inline double term_angle(const PhaseTerm& t, const Eigen::RowVectorXd& z) {
  if (t.qubits.size() == 1) return z[t.qubits[0]];
  double a = 1.0;
  for (int q : t.qubits) a *= (M_PI - z[q]);
  return a;
}

}  // namespace detail

// --- Statevector gate primitives -------------------------------------------

inline void apply_hadamard(Statevector& s, int q) {
  const std::uint64_t bit = 1ULL << q;
  const double inv_sqrt2 = 1.0 / std::sqrt(2.0);
  const std::uint64_t n = s.size();
  for (std::uint64_t b = 0; b < n; ++b) {
    if (b & bit) continue;
    std::complex<double> a0 = s[b], a1 = s[b | bit];
    s[b] = (a0 + a1) * inv_sqrt2;
    s[b | bit] = (a0 - a1) * inv_sqrt2;
  }
}

// Phase gate P(lambda) = diag(1, e^{i lambda}).
inline void apply_phase(Statevector& s, int q, double lambda) {
  const std::uint64_t bit = 1ULL << q;
  const std::complex<double> ph(std::cos(lambda), std::sin(lambda));
  for (std::uint64_t b = 0; b < s.size(); ++b)
    if (b & bit) s[b] *= ph;
}

inline void apply_s_gate(Statevector& s, int q) { apply_phase(s, q, M_PI / 2.0); }
inline void apply_sdg_gate(Statevector& s, int q) { apply_phase(s, q, -M_PI / 2.0); }

inline void apply_cx(Statevector& s, int control, int target) {
  const std::uint64_t cbit = 1ULL << control, tbit = 1ULL << target;
  for (std::uint64_t b = 0; b < s.size(); ++b)
    if ((b & cbit) && !(b & tbit)) std::swap(s[b], s[b | tbit]);
}

// --- Encoders ----------------------------------------------------------------

// Generic gate-by-gate evaluation; handles every family and serves as the
// in-library cross-check for the diagonal fast path.
inline Statevector encode_state_via_gates(const Eigen::RowVectorXd& z,
                                          const FeatureMapSpec& spec) {
  spec.validate();
  if (z.size() != spec.n_qubits)
    throw DataError("encode_state: feature dimension does not match n_qubits");
  const int n = spec.n_qubits;
  const auto terms = detail::build_terms(spec);
  Statevector s(1ULL << n, {0.0, 0.0});
  s[0] = 1.0;
  for (int rep = 0; rep < spec.reps; ++rep) {
    for (int q = 0; q < n; ++q) apply_hadamard(s, q);
    for (const auto& t : terms) {
      const double lambda = 2.0 * detail::term_angle(t, z);
      // Basis change into the computational frame.
      for (std::size_t i = 0; i < t.qubits.size(); ++i) {
        if (t.paulis[i] == 'X') {
          apply_hadamard(s, t.qubits[i]);
        } else if (t.paulis[i] == 'Y') {
          apply_sdg_gate(s, t.qubits[i]);
          apply_hadamard(s, t.qubits[i]);
        }
      }
      // Parity phase via a CX chain onto the last participating qubit.
      const auto& qs = t.qubits;
      for (std::size_t i = 0; i + 1 < qs.size(); ++i) apply_cx(s, qs[i], qs[i + 1]);
      apply_phase(s, qs.back(), lambda);
      for (std::size_t i = qs.size() - 1; i-- > 0;) apply_cx(s, qs[i], qs[i + 1]);
      // Undo the basis change.
      for (std::size_t i = t.qubits.size(); i-- > 0;) {
        if (t.paulis[i] == 'X') {
          apply_hadamard(s, t.qubits[i]);
        } else if (t.paulis[i] == 'Y') {
          apply_hadamard(s, t.qubits[i]);
          apply_s_gate(s, t.qubits[i]);
        }
      }
    }
  }
  return s;
}

// |psi(z)> = [Phi(z) H^n]^reps |0...0>. Z/ZZ phase blocks are diagonal, so
// they are applied as one per-basis-state phase instead of individual gates.
inline Statevector encode_state(const Eigen::RowVectorXd& z, const FeatureMapSpec& spec) {
  spec.validate();
  if (z.size() != spec.n_qubits)
    throw DataError("encode_state: feature dimension does not match n_qubits");
  for (Eigen::Index i = 0; i < z.size(); ++i)
    if (!std::isfinite(z[i])) throw DataError("encode_state: non-finite feature entry");

  const auto terms = detail::build_terms(spec);
  const bool all_diagonal =
      std::all_of(terms.begin(), terms.end(), [](const auto& t) { return t.diagonal(); });
  if (!all_diagonal) return encode_state_via_gates(z, spec);

  const int n = spec.n_qubits;
  const std::uint64_t dim = 1ULL << n;
  std::vector<double> angles(terms.size());
  for (std::size_t i = 0; i < terms.size(); ++i)
    angles[i] = 2.0 * detail::term_angle(terms[i], z);

  Statevector s(dim, {0.0, 0.0});
  s[0] = 1.0;
  for (int rep = 0; rep < spec.reps; ++rep) {
    for (int q = 0; q < n; ++q) apply_hadamard(s, q);
    for (std::uint64_t b = 0; b < dim; ++b) {
      double theta = 0.0;
      for (std::size_t i = 0; i < terms.size(); ++i)
        if (std::popcount(b & terms[i].mask) & 1) theta += angles[i];
      if (theta != 0.0) s[b] *= std::complex<double>(std::cos(theta), std::sin(theta));
    }
  }
  return s;
}

// --- Fidelity ----------------------------------------------------------------

inline double fidelity_from_states(const Statevector& a, const Statevector& b) {
  if (a.size() != b.size())
    throw DataError("fidelity: statevector dimensions differ");
  std::complex<double> inner(0.0, 0.0);
  for (std::size_t i = 0; i < a.size(); ++i) inner += std::conj(a[i]) * b[i];
  double k = std::norm(inner);
  return k < 0.0 ? 0.0 : (k > 1.0 ? 1.0 : k);
}

// k_q(z1, z2) = |<psi(z1)|psi(z2)>|^2, clamped to [0, 1] against round-off.
inline double fidelity_kernel(const Eigen::RowVectorXd& z1, const Eigen::RowVectorXd& z2,
                              const FeatureMapSpec& spec) {
  if (z1.size() != z2.size())
    throw DataError("fidelity_kernel: feature dimensions differ");
  return fidelity_from_states(encode_state(z1, spec), encode_state(z2, spec));
}

}  // namespace qksvm
