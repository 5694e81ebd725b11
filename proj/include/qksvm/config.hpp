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

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <optional>
#include <set>
#include <string>
#include <vector>

#include "qksvm/common.hpp"
#include "qksvm/digest.hpp"
#include "qksvm/kernels.hpp"
#include "qksvm/mel.hpp"
#include "qksvm/svm.hpp"

namespace qksvm {

// Flat key=value run configuration. Canonical encoding (sorted keys,
// normalized numbers) defines the config digest; the digest feeds caches and
// the kernel-swap contract, so two semantically identical config files hash
// identically. Execution-environment keys (cache_dir, output_dir, jobs) stay
// out of the canonical form.

namespace detail {

inline std::string trim(const std::string& s) {
  std::size_t a = s.find_first_not_of(" \t\r\n");
  if (a == std::string::npos) return "";
  std::size_t b = s.find_last_not_of(" \t\r\n");
  return s.substr(a, b - a + 1);
}

inline std::vector<std::string> split_list(const std::string& s) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (start <= s.size()) {
    std::size_t comma = s.find(',', start);
    if (comma == std::string::npos) {
      out.push_back(trim(s.substr(start)));
      break;
    }
    out.push_back(trim(s.substr(start, comma - start)));
    start = comma + 1;
  }
  return out;
}

// Numbers normalize to a canonical rendering; anything else passes through.
inline std::string normalize_scalar(const std::string& s) {
  if (s.empty()) return s;
  errno = 0;
  char* end = nullptr;
  const long long iv = std::strtoll(s.c_str(), &end, 10);
  if (errno == 0 && end && *end == '\0') return std::to_string(iv);
  errno = 0;
  end = nullptr;
  const double dv = std::strtod(s.c_str(), &end);
  if (errno == 0 && end && *end == '\0') return format_exact(dv);
  return s;
}

inline std::string normalize_value(const std::string& s) {
  const auto parts = split_list(s);
  std::string out;
  for (std::size_t i = 0; i < parts.size(); ++i) {
    if (i) out += ",";
    out += normalize_scalar(parts[i]);
  }
  return out;
}

}  // namespace detail

// Raw parsed key/value map with typed accessors.
class ConfigMap {
 public:
  ConfigMap() = default;

  static ConfigMap parse_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open config file: " + path.string());
    std::string text((std::istreambuf_iterator<char>(in)),
                     std::istreambuf_iterator<char>());
    return parse_string(text, path.string());
  }

  static ConfigMap parse_string(const std::string& text,
                                const std::string& origin = "<string>") {
    ConfigMap cfg;
    std::size_t line_no = 0, pos = 0;
    while (pos <= text.size()) {
      std::size_t eol = text.find('\n', pos);
      std::string line = text.substr(pos, eol == std::string::npos ? eol : eol - pos);
      pos = eol == std::string::npos ? text.size() + 1 : eol + 1;
      ++line_no;
      line = detail::trim(line);
      if (line.empty() || line[0] == '#') continue;
      std::size_t eq = line.find('=');
      if (eq == std::string::npos)
        throw ConfigError(origin + ":" + std::to_string(line_no) +
                          ": expected key = value");
      std::string key = detail::trim(line.substr(0, eq));
      std::string value = detail::trim(line.substr(eq + 1));
      if (key.empty())
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": empty key");
      if (cfg.values_.count(key))
        throw ConfigError(origin + ":" + std::to_string(line_no) + ": duplicate key '" +
                          key + "'");
      cfg.values_[key] = value;
    }
    return cfg;
  }

  void set(const std::string& key, const std::string& value) { values_[key] = value; }
  bool has(const std::string& key) const { return values_.count(key) > 0; }

  std::string get_string(const std::string& key, const std::string& def = "") const {
    auto it = values_.find(key);
    return it == values_.end() ? def : it->second;
  }
  std::string require_string(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty())
      throw ConfigError("config: missing required key '" + key + "'");
    return it->second;
  }

  long long get_int(const std::string& key, long long def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    errno = 0;
    char* end = nullptr;
    long long v = std::strtoll(it->second.c_str(), &end, 10);
    if (errno != 0 || !end || *end != '\0')
      throw ConfigError("config: key '" + key + "' is not an integer: " + it->second);
    return v;
  }

  double get_double(const std::string& key, double def) const {
    auto it = values_.find(key);
    if (it == values_.end()) return def;
    errno = 0;
    char* end = nullptr;
    double v = std::strtod(it->second.c_str(), &end);
    if (errno != 0 || !end || *end != '\0')
      throw ConfigError("config: key '" + key + "' is not a number: " + it->second);
    return v;
  }

  std::vector<std::string> get_list(const std::string& key) const {
    auto it = values_.find(key);
    if (it == values_.end() || it->second.empty()) return {};
    return detail::split_list(it->second);
  }

  std::vector<double> get_double_list(const std::string& key) const {
    std::vector<double> out;
    for (const auto& s : get_list(key)) {
      errno = 0;
      char* end = nullptr;
      double v = std::strtod(s.c_str(), &end);
      if (errno != 0 || !end || *end != '\0')
        throw ConfigError("config: key '" + key + "' has non-numeric element: " + s);
      out.push_back(v);
    }
    return out;
  }

  std::vector<int> get_int_list(const std::string& key) const {
    std::vector<int> out;
    for (const auto& s : get_list(key)) {
      errno = 0;
      char* end = nullptr;
      long v = std::strtol(s.c_str(), &end, 10);
      if (errno != 0 || !end || *end != '\0')
        throw ConfigError("config: key '" + key + "' has non-integer element: " + s);
      out.push_back(static_cast<int>(v));
    }
    return out;
  }

  const std::map<std::string, std::string>& entries() const { return values_; }

 private:
  std::map<std::string, std::string> values_;  // ordered: canonical by construction
};

// Feature-pipeline parameterization shared by every model: extraction params,
// PCA target dimension and the feature seed.
struct FeaturesSection {
  MelConfig mel;
  int pca_dim = 2;
  std::uint64_t seed = 0;

  void validate() const {
    mel.validate();
    if (pca_dim < 1) throw ConfigError("features: pca_dim must be >= 1");
  }

  std::string canonical_with_seed(std::uint64_t effective_seed) const {
    std::string s = mel.canonical();
    s += "pca_dim=" + std::to_string(pca_dim) + "\n";
    s += "seed=" + std::to_string(effective_seed) + "\n";
    return s;
  }
  std::string canonical() const { return canonical_with_seed(seed); }
  Digest digest() const { return sha256(canonical()); }
};

// One named model: a kernel family with its hyperparameter grid plus solver
// settings. feature_seed defaults to the global feature seed; the kernel-swap
// contract requires every model's effective value to agree.
struct ModelConfig {
  std::string name;
  KernelKind kind = KernelKind::kRbf;
  std::vector<double> c_grid{0.1, 1.0, 10.0, 100.0};
  std::vector<double> gamma_grid{0.01, 0.1, 1.0, 10.0};  // rbf
  std::vector<int> degree_grid{2, 3};                    // polynomial
  double coef0 = 1.0;                                    // polynomial
  FeatureMapSpec feature_map;                            // quantum
  double kkt_tol = 1e-3;
  long max_passes = 200000;
  std::uint64_t feature_seed = 0;

  void validate(int pca_dim) const {
    if (name.empty()) throw ConfigError("model: empty name");
    if (c_grid.empty()) throw ConfigError("model " + name + ": empty C grid");
    for (double c : c_grid)
      if (!(c > 0.0)) throw ConfigError("model " + name + ": C values must be positive");
    if (!(kkt_tol > 0.0)) throw ConfigError("model " + name + ": kkt_tol must be positive");
    if (max_passes < 1) throw ConfigError("model " + name + ": max_passes must be >= 1");
    switch (kind) {
      case KernelKind::kLinear:
        break;
      case KernelKind::kRbf:
        if (gamma_grid.empty()) throw ConfigError("model " + name + ": empty gamma grid");
        for (double g : gamma_grid)
          if (!(g > 0.0))
            throw ConfigError("model " + name + ": gamma values must be positive");
        break;
      case KernelKind::kPolynomial:
        if (degree_grid.empty())
          throw ConfigError("model " + name + ": empty degree grid");
        for (int d : degree_grid)
          if (d < 1) throw ConfigError("model " + name + ": degree must be >= 1");
        break;
      case KernelKind::kQuantum:
        feature_map.validate();
        if (feature_map.n_qubits != pca_dim)
          throw ConfigError("model " + name + ": n_qubits (" +
                            std::to_string(feature_map.n_qubits) +
                            ") must equal features.pca_dim (" + std::to_string(pca_dim) +
                            ")");
        break;
    }
  }

  // Kernel grid points in deterministic sweep order.
  std::vector<KernelSpec> kernel_grid(const std::string& feature_context) const {
    std::vector<KernelSpec> grid;
    auto base = [&] {
      KernelSpec s;
      s.kind = kind;
      s.feature_context = feature_context;
      return s;
    };
    switch (kind) {
      case KernelKind::kLinear: {
        grid.push_back(base());
        break;
      }
      case KernelKind::kRbf: {
        for (double g : gamma_grid) {
          KernelSpec s = base();
          s.rbf_gamma = g;
          grid.push_back(s);
        }
        break;
      }
      case KernelKind::kPolynomial: {
        for (int d : degree_grid) {
          KernelSpec s = base();
          s.poly_degree = d;
          s.poly_coef0 = coef0;
          grid.push_back(s);
        }
        break;
      }
      case KernelKind::kQuantum: {
        KernelSpec s = base();
        s.feature_map = feature_map;
        grid.push_back(s);
        break;
      }
    }
    return grid;
  }
};

struct FoldsSection {
  int k = 5;
  std::uint64_t seed = 0;
};

struct RunConfig {
  std::string dataset_name = "dataset";
  std::string manifest_path;   // audio pipeline input
  std::string audio_root;      // base dir for manifest-relative paths
  std::string features_path;   // prebuilt feature artifact (overrides manifest)
  FeaturesSection features;
  FoldsSection folds;
  double diagnostics_lambda = 1.0;
  std::string cache_dir = "cache";
  std::string output_dir = "out";
  int jobs = 0;  // 0 = all cores
  std::vector<ModelConfig> models;
  ConfigMap raw;

  static constexpr const char* kCacheEnvVar = "QKSVM_CACHE_DIR";

  static RunConfig from_map(ConfigMap cfg) {
    RunConfig rc;
    rc.dataset_name = cfg.get_string("dataset.name", "dataset");
    rc.manifest_path = cfg.get_string("dataset.manifest");
    rc.audio_root = cfg.get_string("dataset.audio_root");
    rc.features_path = cfg.get_string("dataset.features");

    rc.features.mel.sample_rate = static_cast<int>(cfg.get_int("features.sample_rate", 16000));
    rc.features.mel.window = static_cast<int>(cfg.get_int("features.window", 512));
    rc.features.mel.hop = static_cast<int>(cfg.get_int("features.hop", 256));
    rc.features.mel.n_mels = static_cast<int>(cfg.get_int("features.n_mels", 64));
    rc.features.mel.epsilon = cfg.get_double("features.epsilon", 1e-10);
    rc.features.mel.duration_s = cfg.get_double("features.duration", 4.0);
    rc.features.pca_dim = static_cast<int>(cfg.get_int("features.pca_dim", 2));
    rc.features.seed = static_cast<std::uint64_t>(cfg.get_int("features.seed", 0));

    rc.folds.k = static_cast<int>(cfg.get_int("folds.k", 5));
    rc.folds.seed = static_cast<std::uint64_t>(cfg.get_int("folds.seed", 0));
    rc.diagnostics_lambda = cfg.get_double("diagnostics.lambda", 1.0);
    rc.cache_dir = cfg.get_string("cache_dir", "cache");
    rc.output_dir = cfg.get_string("output_dir", "out");
    rc.jobs = static_cast<int>(cfg.get_int("jobs", 0));
    if (const char* env = std::getenv(kCacheEnvVar); env && *env) rc.cache_dir = env;

    std::set<std::string> known = {
        "dataset.name",     "dataset.manifest", "dataset.audio_root",
        "dataset.features", "features.sample_rate", "features.window",
        "features.hop",     "features.n_mels",  "features.epsilon",
        "features.duration", "features.pca_dim", "features.seed",
        "folds.k",          "folds.seed",       "diagnostics.lambda",
        "cache_dir",        "output_dir",       "jobs",
        "models"};
    std::set<std::string> model_names;
    for (const auto& name : cfg.get_list("models")) {
      if (name.empty()) throw ConfigError("config: empty model name in 'models'");
      if (!model_names.insert(name).second)
        throw ConfigError("config: duplicate model name '" + name + "'");
      rc.models.push_back(parse_model(cfg, name, rc.features.seed));
    }
    static const std::set<std::string> kModelKeys = {
        "kernel", "C", "gamma", "degree", "coef0", "kkt_tol", "max_passes",
        "feature_seed", "feature_map", "n_qubits", "reps", "entanglement", "paulis"};
    for (const auto& [key, value] : cfg.entries()) {
      (void)value;
      if (known.count(key)) continue;
      if (key.rfind("model.", 0) == 0) {
        std::size_t dot = key.find('.', 6);
        std::string name = dot == std::string::npos ? "" : key.substr(6, dot - 6);
        if (!model_names.count(name))
          throw ConfigError("config: key '" + key + "' refers to unknown model");
        if (!kModelKeys.count(key.substr(dot + 1)))
          throw ConfigError("config: unknown model key '" + key + "'");
        continue;
      }
      throw ConfigError("config: unknown key '" + key + "'");
    }

    rc.raw = std::move(cfg);
    rc.validate();
    return rc;
  }

  static RunConfig load(const std::filesystem::path& path) {
    return from_map(ConfigMap::parse_file(path));
  }

  void validate() const {
    features.validate();
    if (folds.k < 2) throw ConfigError("folds.k must be >= 2");
    if (!(diagnostics_lambda > 0.0))
      throw ConfigError("diagnostics.lambda must be positive");
    if (jobs < 0) throw ConfigError("jobs must be >= 0");
    for (const auto& m : models) m.validate(features.pca_dim);
  }

  // Restricts the active model list; unknown names are config errors.
  void select_models(const std::vector<std::string>& names) {
    if (names.empty()) return;
    std::vector<ModelConfig> selected;
    for (const auto& n : names) {
      bool found = false;
      for (const auto& m : models)
        if (m.name == n) {
          selected.push_back(m);
          found = true;
        }
      if (!found) throw ConfigError("unknown model '" + n + "' in --models");
    }
    models = std::move(selected);
    std::string joined;
    for (std::size_t i = 0; i < models.size(); ++i) {
      if (i) joined += ",";
      joined += models[i].name;
    }
    raw.set("models", joined);
  }

  // Canonical encoding of the semantic configuration: sorted keys, normalized
  // numbers, execution-environment keys excluded.
  std::string canonical_encoding() const {
    static const std::set<std::string> kExcluded = {"cache_dir", "output_dir", "jobs"};
    std::string out;
    for (const auto& [key, value] : raw.entries()) {
      if (kExcluded.count(key)) continue;
      out += key + "=" + detail::normalize_value(value) + "\n";
    }
    return out;
  }
  Digest digest() const { return sha256(canonical_encoding()); }

 private:
  static ModelConfig parse_model(const ConfigMap& cfg, const std::string& name,
                                 std::uint64_t global_seed) {
    const std::string p = "model." + name + ".";
    ModelConfig m;
    m.name = name;
    const std::string kind = cfg.require_string(p + "kernel");
    if (kind == "linear") m.kind = KernelKind::kLinear;
    else if (kind == "rbf") m.kind = KernelKind::kRbf;
    else if (kind == "polynomial") m.kind = KernelKind::kPolynomial;
    else if (kind == "quantum") m.kind = KernelKind::kQuantum;
    else throw ConfigError("model " + name + ": unknown kernel '" + kind + "'");

    if (cfg.has(p + "C")) m.c_grid = cfg.get_double_list(p + "C");
    if (cfg.has(p + "gamma")) m.gamma_grid = cfg.get_double_list(p + "gamma");
    if (cfg.has(p + "degree")) m.degree_grid = cfg.get_int_list(p + "degree");
    m.coef0 = cfg.get_double(p + "coef0", 1.0);
    m.kkt_tol = cfg.get_double(p + "kkt_tol", 1e-3);
    m.max_passes = cfg.get_int(p + "max_passes", 200000);
    m.feature_seed =
        static_cast<std::uint64_t>(cfg.get_int(p + "feature_seed",
                                               static_cast<long long>(global_seed)));

    if (m.kind == KernelKind::kQuantum) {
      const std::string fam = cfg.get_string(p + "feature_map", "ZZ");
      if (fam == "Z") m.feature_map.family = FeatureMapFamily::kZ;
      else if (fam == "ZZ") m.feature_map.family = FeatureMapFamily::kZZ;
      else if (fam == "Pauli") m.feature_map.family = FeatureMapFamily::kPauli;
      else throw ConfigError("model " + name + ": unknown feature_map '" + fam + "'");
      m.feature_map.n_qubits = static_cast<int>(cfg.get_int(p + "n_qubits", 2));
      m.feature_map.reps = static_cast<int>(cfg.get_int(p + "reps", 2));
      const std::string ent = cfg.get_string(p + "entanglement", "linear");
      if (ent == "linear") m.feature_map.entanglement = Entanglement::kLinear;
      else if (ent == "full") m.feature_map.entanglement = Entanglement::kFull;
      else throw ConfigError("model " + name + ": unknown entanglement '" + ent + "'");
      if (m.feature_map.family == FeatureMapFamily::kPauli) {
        auto paulis = cfg.get_list(p + "paulis");
        if (paulis.empty()) paulis = {"Z", "ZZ"};
        m.feature_map.pauli_strings = paulis;
      }
    }
    return m;
  }
};

}  // namespace qksvm
