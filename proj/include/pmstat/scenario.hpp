// Copyright 2026 The pm-statkit Authors
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

// Scenario files: one JSON document describing a space on the real line, a
// summability matrix, a sequence x_k = sum of terms, the diagnostics to run
// and the verdict each is expected to produce. See README.md for the schema.

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <map>
#include <memory>
#include <optional>
#include <random>
#include <set>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "pmstat/io.hpp"
#include "pmstat/statconv.hpp"
#include "pmstat/summable.hpp"

namespace pmstat::scenario {

using nlohmann::json;

inline constexpr int kSchemaVersion = 1;

/// Every problem found while reading a scenario, one "path: message" each.
struct SchemaError : std::runtime_error {
  explicit SchemaError(std::vector<std::string> list)
      : std::runtime_error(join(list)), issues(std::move(list)) {}
  std::vector<std::string> issues;

 private:
  static std::string join(const std::vector<std::string>& v) {
    std::string s;
    for (const auto& i : v) s += (s.empty() ? "" : "\n") + i;
    return s;
  }
};

// ---------------------------------------------------------------------------
// Builtins

inline const std::vector<std::string>& diagnostic_names() {
  static const std::vector<std::string> names = {"boundedness", "cauchy",   "clusters", "convergence",
                                                 "extraction",  "pairwise", "summability", "uniqueness"};
  return names;
}

inline std::vector<std::string> builtin_index_sets() {
  return {"cubes", "evens", "lacunary-blocks", "odds", "progression:<step>:<offset>", "squares"};
}

inline std::vector<std::string> builtin_spaces() { return {"abs/ramp", "abs/unit-step"}; }

inline std::vector<std::string> builtin_taus() { return {"lukasiewicz", "min", "product"}; }

/// "squares", "cubes", "evens", "odds", "lacunary-blocks" or
/// "progression:<step>:<offset>".
inline IndexSet parse_index_set(const std::string& id) {
  if (id == "squares") return sets::squares();
  if (id == "cubes") return sets::cubes();
  if (id == "evens") return sets::evens();
  if (id == "odds") return sets::odds();
  if (id == "lacunary-blocks") return sets::lacunary_blocks();
  if (id.rfind("progression:", 0) == 0) {
    std::size_t step = 0, offset = 0;
    char tail = 0;
    if (std::sscanf(id.c_str() + 12, "%zu:%zu%c", &step, &offset, &tail) == 2) {
      return sets::progression(step, offset);
    }
  }
  throw std::invalid_argument("unknown index set '" + id + "'");
}

// ---------------------------------------------------------------------------
// Schema

struct SpaceDesc {
  std::string ddf = "unit-step";  // or "ramp"
  double ramp_width = 1.0;
  std::string tau = "min";
  std::size_t grid_resolution = 64;

  std::string describe() const {
    return ddf == "ramp" ? "simple space on R, G = ramp(" + format_width() + ")" : "metric-induced space on R";
  }

 private:
  std::string format_width() const {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%g", ramp_width);
    return buf;
  }
};

struct Term {
  std::string kind;  // constant | decay | cycle | noise
  double value = 0.0;
  double power = 1.0;
  std::vector<double> values;
  std::optional<std::string> on;                 // restrict to an index set
  std::optional<std::vector<std::size_t>> on_list;  // ... or to explicit indices
};

struct SequenceDesc {
  std::string label;
  double limit = 0.0;
  std::vector<Term> terms;
};

struct Candidates {
  double lo = -1.0;
  double hi = 1.0;
  std::size_t steps = 20;
  std::vector<double> extra;
};

struct Tolerances {
  DensityOptions density;
  double summable_tol = 5e-3;
  std::vector<double> t_grid = default_t_grid();
};

struct Scenario {
  std::string name;
  std::string description;
  SpaceDesc space;
  std::string matrix = "cesaro";
  SequenceDesc sequence;
  std::optional<SequenceDesc> second_sequence;
  std::vector<std::string> diagnostics;
  std::size_t N = 100000;
  std::size_t J = 0;  // 0: last row supported inside [1, N]
  std::uint64_t seed = 0;
  Tolerances tol;
  Candidates candidates;
  std::map<std::string, Verdict> expect;  // diagnostic or sub-verdict -> expected
  std::filesystem::path source;
};

struct Overrides {
  std::optional<std::uint64_t> seed;
  std::optional<std::size_t> truncation;
};

namespace detail {

class Reader {
 public:
  std::vector<std::string> issues;

  void error(const std::string& path, const std::string& msg) { issues.push_back(path + ": " + msg); }

  void only(const json& obj, const std::string& path, std::initializer_list<const char*> keys) {
    for (auto it = obj.begin(); it != obj.end(); ++it) {
      if (std::none_of(keys.begin(), keys.end(), [&](const char* k) { return it.key() == k; })) {
        error(join(path, it.key()), "unknown field");
      }
    }
  }

  bool object(const json& j, const std::string& path) {
    if (j.is_object()) return true;
    error(path, "expected an object");
    return false;
  }

  std::optional<double> number(const json& obj, const std::string& path, const char* key, bool required = false) {
    if (!obj.contains(key)) {
      if (required) error(join(path, key), "required field missing");
      return std::nullopt;
    }
    const auto& v = obj.at(key);
    if (!v.is_number() || !std::isfinite(v.get<double>())) {
      error(join(path, key), "expected a finite number");
      return std::nullopt;
    }
    return v.get<double>();
  }

  std::optional<std::size_t> count(const json& obj, const std::string& path, const char* key) {
    if (!obj.contains(key)) return std::nullopt;
    const auto& v = obj.at(key);
    if (!v.is_number_unsigned()) {
      error(join(path, key), "expected a nonnegative integer");
      return std::nullopt;
    }
    return v.get<std::size_t>();
  }

  std::optional<std::string> string(const json& obj, const std::string& path, const char* key,
                                    bool required = false) {
    if (!obj.contains(key)) {
      if (required) error(join(path, key), "required field missing");
      return std::nullopt;
    }
    if (!obj.at(key).is_string()) {
      error(join(path, key), "expected a string");
      return std::nullopt;
    }
    return obj.at(key).get<std::string>();
  }

  std::vector<double> numbers(const json& v, const std::string& path) {
    std::vector<double> out;
    if (!v.is_array()) {
      error(path, "expected an array of numbers");
      return out;
    }
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (!v[i].is_number()) {
        error(path + "[" + std::to_string(i) + "]", "expected a number");
      } else {
        out.push_back(v[i].get<double>());
      }
    }
    return out;
  }

  static std::string join(const std::string& path, const std::string& key) {
    return path.empty() ? key : path + "." + key;
  }
};

inline void read_sequence(Reader& r, const json& j, const std::string& path, SequenceDesc& seq) {
  if (!r.object(j, path)) return;
  r.only(j, path, {"label", "limit", "terms"});
  seq.label = r.string(j, path, "label").value_or(path);
  if (auto L = r.number(j, path, "limit", true)) seq.limit = *L;
  if (!j.contains("terms")) {
    r.error(path + ".terms", "required field missing");
    return;
  }
  const auto& terms = j.at("terms");
  if (!terms.is_array() || terms.empty()) {
    r.error(path + ".terms", "expected a nonempty array");
    return;
  }
  for (std::size_t i = 0; i < terms.size(); ++i) {
    const std::string tp = path + ".terms[" + std::to_string(i) + "]";
    const auto& t = terms[i];
    if (!r.object(t, tp)) continue;
    r.only(t, tp, {"kind", "value", "power", "values", "amplitude", "on"});
    Term term;
    term.kind = r.string(t, tp, "kind", true).value_or("");
    if (term.kind == "constant" || term.kind == "decay") {
      if (auto v = r.number(t, tp, "value", true)) term.value = *v;
      if (term.kind == "decay") {
        if (auto p = r.number(t, tp, "power")) {
          if (*p <= 0.0) r.error(tp + ".power", "must be positive");
          term.power = *p;
        }
      }
    } else if (term.kind == "cycle") {
      if (!t.contains("values")) {
        r.error(tp + ".values", "required field missing");
      } else {
        term.values = r.numbers(t.at("values"), tp + ".values");
        if (term.values.empty()) r.error(tp + ".values", "must not be empty");
      }
    } else if (term.kind == "noise") {
      if (auto a = r.number(t, tp, "amplitude", true)) {
        if (*a < 0.0) r.error(tp + ".amplitude", "must be nonnegative");
        term.value = *a;
      }
    } else if (!term.kind.empty()) {
      r.error(tp + ".kind", "unknown kind '" + term.kind + "' (expected constant | decay | cycle | noise)");
    }
    if (t.contains("on")) {
      const auto& on = t.at("on");
      if (on.is_string()) {
        try {
          parse_index_set(on.get<std::string>());
          term.on = on.get<std::string>();
        } catch (const std::exception& e) {
          r.error(tp + ".on", e.what());
        }
      } else if (on.is_array()) {
        std::vector<std::size_t> list;
        for (const auto& k : on) {
          if (!k.is_number_unsigned() || k.get<std::size_t>() == 0) {
            r.error(tp + ".on", "explicit indices must be positive integers");
            break;
          }
          list.push_back(k.get<std::size_t>());
        }
        term.on_list = std::move(list);
      } else {
        r.error(tp + ".on", "expected an index-set name or an array of indices");
      }
    }
    seq.terms.push_back(std::move(term));
  }
}

inline std::string locate(const std::string& text, std::size_t byte) {
  std::size_t line = 1, col = 1;
  for (std::size_t i = 0; i < byte && i < text.size(); ++i) {
    if (text[i] == '\n') {
      ++line;
      col = 1;
    } else {
      ++col;
    }
  }
  return "line " + std::to_string(line) + ", column " + std::to_string(col);
}

}  // namespace detail

/// Parses and validates a scenario document. Throws SchemaError listing
/// every problem found.
inline Scenario parse_scenario(const std::string& text, const std::string& fallback_name = "scenario",
                               const Overrides& over = {}) {
  json j;
  try {
    j = json::parse(text);
  } catch (const json::parse_error& e) {
    throw SchemaError({detail::locate(text, e.byte == 0 ? 0 : e.byte - 1) + ": malformed JSON (" +
                       std::string(e.what()) + ")"});
  }
  detail::Reader r;
  Scenario s;
  if (!r.object(j, "<root>")) throw SchemaError(r.issues);
  r.only(j, "", {"schema_version", "name", "description", "space", "matrix", "sequence", "second_sequence",
                 "diagnostics", "truncation", "seed", "tolerances", "candidates", "expect"});

  if (!j.contains("schema_version")) {
    r.error("schema_version", "required field missing");
  } else if (!j.at("schema_version").is_number_integer() || j.at("schema_version").get<int>() != kSchemaVersion) {
    r.error("schema_version", "unsupported version (expected " + std::to_string(kSchemaVersion) + ")");
  }
  s.name = r.string(j, "", "name").value_or(fallback_name);
  s.description = r.string(j, "", "description").value_or("");

  if (j.contains("space") && r.object(j.at("space"), "space")) {
    const auto& sp = j.at("space");
    r.only(sp, "space", {"metric", "ddf", "ramp_width", "tau", "grid_resolution"});
    if (auto m = r.string(sp, "space", "metric"); m && *m != "abs") {
      r.error("space.metric", "unknown metric '" + *m + "' (expected abs)");
    }
    if (auto d = r.string(sp, "space", "ddf")) {
      if (*d != "unit-step" && *d != "ramp") r.error("space.ddf", "expected unit-step | ramp");
      s.space.ddf = *d;
    }
    if (auto w = r.number(sp, "space", "ramp_width")) {
      if (*w <= 0.0) r.error("space.ramp_width", "must be positive");
      s.space.ramp_width = *w;
    }
    if (auto t = r.string(sp, "space", "tau")) {
      try {
        parse_tnorm(*t);
        s.space.tau = *t;
      } catch (const std::exception& e) {
        r.error("space.tau", e.what());
      }
    }
    if (auto g = r.count(sp, "space", "grid_resolution")) {
      if (*g < 2) r.error("space.grid_resolution", "must be at least 2");
      s.space.grid_resolution = *g;
    }
  }

  if (auto m = r.string(j, "", "matrix")) {
    try {
      parse_matrix(*m);
      s.matrix = *m;
    } catch (const std::exception& e) {
      r.error("matrix", e.what());
    }
  }

  if (!j.contains("sequence")) {
    r.error("sequence", "required field missing");
  } else {
    detail::read_sequence(r, j.at("sequence"), "sequence", s.sequence);
  }
  if (j.contains("second_sequence")) {
    SequenceDesc second;
    detail::read_sequence(r, j.at("second_sequence"), "second_sequence", second);
    s.second_sequence = std::move(second);
  }

  if (j.contains("diagnostics")) {
    const auto& d = j.at("diagnostics");
    if (!d.is_array()) {
      r.error("diagnostics", "expected an array of names");
    } else {
      for (std::size_t i = 0; i < d.size(); ++i) {
        const auto& names = diagnostic_names();
        if (!d[i].is_string() || std::find(names.begin(), names.end(), d[i].get<std::string>()) == names.end()) {
          r.error("diagnostics[" + std::to_string(i) + "]", "unknown diagnostic " + d[i].dump());
        } else {
          s.diagnostics.push_back(d[i].get<std::string>());
        }
      }
    }
  } else {
    for (const auto& n : diagnostic_names()) {
      if (n != "pairwise" || s.second_sequence) s.diagnostics.push_back(n);
    }
  }
  std::sort(s.diagnostics.begin(), s.diagnostics.end());
  s.diagnostics.erase(std::unique(s.diagnostics.begin(), s.diagnostics.end()), s.diagnostics.end());
  if (std::binary_search(s.diagnostics.begin(), s.diagnostics.end(), "pairwise") && !s.second_sequence) {
    r.error("diagnostics", "pairwise needs second_sequence");
  }

  if (j.contains("truncation") && r.object(j.at("truncation"), "truncation")) {
    const auto& t = j.at("truncation");
    r.only(t, "truncation", {"N", "J"});
    if (auto N = r.count(t, "truncation", "N")) s.N = *N;
    if (auto J = r.count(t, "truncation", "J")) s.J = *J;
  }
  if (j.contains("seed")) {
    if (!j.at("seed").is_number_unsigned()) {
      r.error("seed", "expected a nonnegative integer");
    } else {
      s.seed = j.at("seed").get<std::uint64_t>();
    }
  }

  if (j.contains("tolerances") && r.object(j.at("tolerances"), "tolerances")) {
    const auto& t = j.at("tolerances");
    r.only(t, "tolerances", {"osc_tol", "zero_tol", "nonthin_floor", "window", "summable_tol", "t_grid"});
    auto positive = [&](const char* key, double& slot) {
      if (auto v = r.number(t, "tolerances", key)) {
        if (*v <= 0.0) r.error(std::string("tolerances.") + key, "must be positive");
        slot = *v;
      }
    };
    positive("osc_tol", s.tol.density.osc_tol);
    positive("zero_tol", s.tol.density.zero_tol);
    positive("nonthin_floor", s.tol.density.nonthin_floor);
    positive("summable_tol", s.tol.summable_tol);
    if (auto w = r.count(t, "tolerances", "window")) {
      if (*w < 10) r.error("tolerances.window", "must be at least 10");
      s.tol.density.window = *w;
    }
    if (t.contains("t_grid")) {
      s.tol.t_grid = r.numbers(t.at("t_grid"), "tolerances.t_grid");
      const bool in_range = std::all_of(s.tol.t_grid.begin(), s.tol.t_grid.end(),
                                        [](double t) { return t > 0.0 && t <= 1.0; });
      if (s.tol.t_grid.empty() || !in_range) r.error("tolerances.t_grid", "radii must lie in (0, 1]");
    }
  }

  if (j.contains("candidates") && r.object(j.at("candidates"), "candidates")) {
    const auto& c = j.at("candidates");
    r.only(c, "candidates", {"lo", "hi", "steps", "extra"});
    if (auto v = r.number(c, "candidates", "lo")) s.candidates.lo = *v;
    if (auto v = r.number(c, "candidates", "hi")) s.candidates.hi = *v;
    if (auto v = r.count(c, "candidates", "steps")) s.candidates.steps = *v;
    if (c.contains("extra")) s.candidates.extra = r.numbers(c.at("extra"), "candidates.extra");
    if (!(s.candidates.hi > s.candidates.lo)) r.error("candidates", "need lo < hi");
    if (s.candidates.steps == 0 || s.candidates.steps > 1000) r.error("candidates.steps", "must be in [1, 1000]");
  }

  if (j.contains("expect") && r.object(j.at("expect"), "expect")) {
    static const std::set<std::string> extra = {"strongly_convergent", "strongly_summable", "stat_summable"};
    for (auto it = j.at("expect").begin(); it != j.at("expect").end(); ++it) {
      const auto& names = diagnostic_names();
      const bool known =
          extra.count(it.key()) || std::find(names.begin(), names.end(), it.key()) != names.end();
      if (!known) {
        r.error("expect." + it.key(), "unknown verdict name");
        continue;
      }
      try {
        if (!it.value().is_string()) throw std::invalid_argument("expected pass | fail | indeterminate");
        s.expect[it.key()] = parse_verdict(it.value().get<std::string>());
      } catch (const std::exception& e) {
        r.error("expect." + it.key(), e.what());
      }
    }
  }

  if (over.seed) s.seed = *over.seed;
  if (over.truncation) {
    s.N = *over.truncation;
    s.J = 0;
  }
  if (s.N < 100 || s.N > 50000000) r.error("truncation.N", "must be in [100, 5e7]");
  if (r.issues.empty()) {
    const auto A = parse_matrix(s.matrix);
    const std::size_t last = A.max_row_within(s.N);
    if (s.J > last) {
      r.error("truncation.J", "row " + std::to_string(s.J) + " of " + s.matrix + " reaches beyond N=" +
                                  std::to_string(s.N) + " (last supported row " + std::to_string(last) + ")");
    }
    if (last < s.tol.density.window) r.error("truncation.N", "too small for the probe window of " + s.matrix);
  }
  if (!r.issues.empty()) throw SchemaError(r.issues);
  return s;
}

inline Scenario load_scenario(const std::filesystem::path& path, const Overrides& over = {}) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw SchemaError({path.string() + ": cannot read file"});
  std::stringstream buf;
  buf << in.rdbuf();
  try {
    auto s = parse_scenario(buf.str(), path.stem().string(), over);
    s.source = path;
    return s;
  } catch (SchemaError& e) {
    for (auto& i : e.issues) i = path.filename().string() + ": " + i;
    throw SchemaError(e.issues);
  }
}

// ---------------------------------------------------------------------------
// Construction

inline ProbabilisticMetricSpace<double> build_space(const SpaceDesc& d) {
  const TriangleFunction tau(parse_tnorm(d.tau), d.grid_resolution);
  auto metric = [](double a, double b) { return std::abs(a - b); };
  if (d.ddf == "ramp") return simple_space<double>(metric, Ddf::ramp(d.ramp_width), tau, "R/ramp");
  return metric_induced_space<double>(metric, tau, "R/unit-step");
}

/// Uniform on [0, 1) from the top 53 bits; the same on every platform.
inline double unit_uniform(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

inline SequenceSpec<double> build_sequence(const SequenceDesc& d, const SpaceDesc& space, std::size_t N,
                                           std::uint64_t seed) {
  struct Compiled {
    Term term;
    std::optional<IndexSet> on;
    std::shared_ptr<const std::vector<double>> noise;
  };
  std::vector<Compiled> parts;
  std::uint64_t stream = 0;
  for (const auto& t : d.terms) {
    Compiled c{t, std::nullopt, nullptr};
    if (t.on) c.on = parse_index_set(*t.on);
    if (t.on_list) c.on = IndexSet::from_list(*t.on_list);
    if (t.kind == "noise") {
      std::mt19937_64 rng(seed + 0x9E3779B97F4A7C15ULL * ++stream);
      auto v = std::make_shared<std::vector<double>>(N + 1, 0.0);
      for (std::size_t k = 1; k <= N; ++k) (*v)[k] = t.value * (2.0 * unit_uniform(rng) - 1.0);
      c.noise = std::move(v);
    }
    parts.push_back(std::move(c));
  }
  auto gen = [parts = std::move(parts)](std::size_t k) {
    double x = 0.0;
    for (const auto& p : parts) {
      if (p.on && !p.on->contains(k)) continue;
      const auto& t = p.term;
      if (t.kind == "constant") {
        x += t.value;
      } else if (t.kind == "decay") {
        x += t.value / std::pow(static_cast<double>(k), t.power);
      } else if (t.kind == "cycle") {
        x += t.values[(k - 1) % t.values.size()];
      } else if (t.kind == "noise") {
        x += k < p.noise->size() ? (*p.noise)[k] : 0.0;
      }
    }
    return x;
  };
  return SequenceSpec<double>{build_space(space), std::move(gen), N, d.label};
}

// ---------------------------------------------------------------------------
// Running

enum class Status { ok, fail, indeterminate };

inline std::string to_string(Status s) {
  switch (s) {
    case Status::ok: return "ok";
    case Status::fail: return "FAIL";
    case Status::indeterminate: return "INDETERMINATE";
  }
  return "?";
}

struct Outcome {
  std::string name;
  Verdict verdict = Verdict::indeterminate;
  Verdict expected = Verdict::pass;
  std::string detail;

  Status status() const {
    if (verdict == expected) return Status::ok;
    return verdict == Verdict::indeterminate ? Status::indeterminate : Status::fail;
  }
};

struct ScenarioResult {
  Scenario scenario;
  std::size_t J = 0;
  std::string tau;
  std::vector<Outcome> outcomes;

  ConvergenceReport<double> convergence;
  std::vector<double> candidates;
  std::vector<double> passing;  // candidates passing stat_converges_to
  std::optional<CauchyReport> cauchy;
  std::optional<ExtractionResult> extraction;
  std::optional<SpliceReport> splice;
  std::optional<Verdict> rediagnosis;
  std::optional<ClusterReport<double>> clusters;
  std::optional<ClusterReport<double>> clusters_modified;  // after a null-set change
  std::optional<bool> gamma_limit_ok;
  std::optional<bool> null_set_invariant;
  std::optional<SuiteReport> suite;
  std::optional<BoundednessReport> bounded;
  std::optional<PairwiseReport> pairwise;

  const Outcome* find(const std::string& name) const {
    for (const auto& o : outcomes) {
      if (o.name == name) return &o;
    }
    return nullptr;
  }

  /// 0 when every verdict matches its expectation, 2 on any definite
  /// mismatch, otherwise 3.
  int exit_code() const {
    bool indeterminate = false;
    for (const auto& o : outcomes) {
      if (o.status() == Status::fail) return 2;
      indeterminate = indeterminate || o.status() == Status::indeterminate;
    }
    return indeterminate ? 3 : 0;
  }
};

namespace detail {

inline std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.10g", v);
  return buf;
}

inline std::string list(const std::vector<double>& v) {
  std::string s = "{";
  for (std::size_t i = 0; i < v.size(); ++i) s += (i ? ", " : "") + fmt(v[i]);
  return s + "}";
}

inline std::vector<double> as_values(const std::vector<std::size_t>& idx, const std::vector<double>& pts) {
  std::vector<double> out;
  for (auto i : idx) out.push_back(pts[i]);
  return out;
}

}  // namespace detail

inline ScenarioResult run(const Scenario& s) {
  using detail::fmt;
  ScenarioResult res;
  res.scenario = s;
  const auto A = parse_matrix(s.matrix);
  res.J = s.J ? s.J : A.max_row_within(s.N);
  const auto& opt = s.tol.density;
  const auto& grid = s.tol.t_grid;
  const double L = s.sequence.limit;
  const auto x = build_sequence(s.sequence, s.space, s.N, s.seed);
  res.tau = x.space.tau().name();
  const SequenceDiagnostics<double> diag(x, A, opt);
  auto selected = [&](const char* n) { return std::binary_search(s.diagnostics.begin(), s.diagnostics.end(), n); };
  auto expected = [&](const std::string& n) {
    auto it = s.expect.find(n);
    return it == s.expect.end() ? Verdict::pass : it->second;
  };
  auto add = [&](const std::string& n, Verdict v, std::string detail) {
    res.outcomes.push_back({n, v, expected(n), std::move(detail)});
  };

  res.convergence = diag.converges_to(L, grid);
  const Verdict conv = res.convergence.verdict;
  if (selected("convergence")) add("convergence", conv, "candidate L = " + fmt(L));

  res.candidates = scalar_candidate_grid(diag.values(), s.candidates.lo, s.candidates.hi, s.candidates.steps);
  for (double c : s.candidates.extra) res.candidates.push_back(c);
  res.candidates.push_back(L);
  std::sort(res.candidates.begin(), res.candidates.end());
  res.candidates.erase(std::unique(res.candidates.begin(), res.candidates.end()), res.candidates.end());

  if (selected("uniqueness")) {
    std::size_t indeterminate = 0;
    for (double c : res.candidates) {
      const Verdict v = c == L ? conv : diag.converges_to(c, grid).verdict;
      if (v == Verdict::pass) res.passing.push_back(c);
      indeterminate += v == Verdict::indeterminate;
    }
    Verdict v = Verdict::pass;
    if (res.passing.size() > 1 || (conv == Verdict::fail && !res.passing.empty())) {
      v = Verdict::fail;
    } else if ((conv == Verdict::pass) != (res.passing.size() == 1) || indeterminate > 0) {
      v = Verdict::indeterminate;
    }
    add("uniqueness", v,
        std::to_string(res.passing.size()) + " of " + std::to_string(res.candidates.size()) +
            " grid candidates pass: " + detail::list(res.passing));
  }

  if (selected("cauchy")) {
    res.cauchy = diag.cauchy(grid);
    std::string d;
    for (const auto& g : res.cauchy->per_gamma) {
      d += (d.empty() ? "" : "; ") + ("gamma=" + fmt(g.gamma) + ": " + to_string(g.verdict) +
                                      (g.anchor ? " (anchor " + std::to_string(g.anchor) + ")" : ""));
    }
    add("cauchy", res.cauchy->verdict, d);
  }

  if (selected("extraction")) {
    try {
      res.extraction = diag.extract(L, grid);
      const auto G = res.extraction->set();
      const auto g = splice_on_null_set(x, L, G);
      res.splice = verify_splice(x, g, L, A, grid, opt);
      res.rediagnosis = stat_converges_to(g, L, A, grid, opt).verdict;
      const Verdict v = combine({res.extraction->verdict, res.splice->verdict, *res.rediagnosis});
      add("extraction", v,
          "delta(G) ~ " + fmt(res.extraction->density.limit_estimate()) + ", depth " +
              std::to_string(res.extraction->deepest_t()) + "/" + std::to_string(res.extraction->required_t) +
              ", splice " + to_string(res.splice->verdict) + ", re-diagnosis " + to_string(*res.rediagnosis));
    } catch (const TruncationError& e) {
      add("extraction", conv == Verdict::fail ? Verdict::fail : Verdict::indeterminate, e.what());
    }
  }

  if (selected("clusters")) {
    res.clusters = diag.clusters(res.candidates, grid);
    const auto& cr = *res.clusters;
    Verdict v = cr.containment_ok && gamma_closed_on_grid(cr, x.space) ? Verdict::pass : Verdict::fail;
    std::string d = "Gamma " + detail::list(cr.points(cr.gamma)) + ", Lambda " + detail::list(cr.points(cr.lambda)) +
                    ", ordinary " + detail::list(cr.points(cr.ordinary));
    if (conv == Verdict::pass) {
      res.gamma_limit_ok = gamma_matches_limit(cr, x.space, L);
      if (!*res.gamma_limit_ok) v = Verdict::fail;
    }
    // Move x far away on the squares; when they are A-null, Gamma and
    // Lambda must not change.
    const auto null_set = sets::squares();
    const auto null_density = diag.density_of(null_set.mask(s.N));
    if (null_density.cls == DensityClass::estimated_zero) {
      const double far = s.candidates.hi + 10.0 * (s.candidates.hi - s.candidates.lo) + 1.0;
      auto gen = x.generator;
      const SequenceSpec<double> y{x.space, [gen, far](std::size_t k) {
                                     return sets::is_perfect_power(k, 2) ? far : gen(k);
                                   },
                                   x.length, x.label + " modified on squares"};
      res.clusters_modified = SequenceDiagnostics<double>(y, A, opt).clusters(res.candidates, grid);
      res.null_set_invariant =
          res.clusters_modified->gamma == cr.gamma && res.clusters_modified->lambda == cr.lambda;
      if (!*res.null_set_invariant) v = Verdict::fail;
      d += *res.null_set_invariant ? "; unchanged by a null-set modification" : "; CHANGED by a null-set modification";
    } else {
      d += "; null-set check skipped (squares not estimated A-null)";
    }
    add("clusters", v, d);
  }

  if (selected("summability")) {
    const auto dist = diag.distances(L);
    const auto tail = strong_tail_check(dist, grid);
    res.suite = implication_suite_from(tail.passed ? Verdict::pass : Verdict::fail, conv,
                                       a_transform(dist, A, res.J), grid, s.tol.summable_tol, opt);
    const auto& su = *res.suite;
    std::string d;
    for (const auto& c : su.checks) d += (d.empty() ? "" : "; ") + c.name + ": " + to_string(c.status);
    add("summability", su.no_violation() ? Verdict::pass : Verdict::fail, d);
    for (const auto& [name, v] : {std::pair{"strongly_convergent", su.strongly_convergent},
                                  std::pair{"strongly_summable", su.strongly_summable},
                                  std::pair{"stat_summable", su.stat_summable}}) {
      if (s.expect.count(name)) add(name, v, "");
    }
  }

  if (selected("boundedness")) {
    std::vector<double> C;
    for (std::size_t i = 0; i <= s.candidates.steps; ++i) {
      C.push_back(s.candidates.lo + (s.candidates.hi - s.candidates.lo) * static_cast<double>(i) /
                                        static_cast<double>(s.candidates.steps));
    }
    const double radius = (s.candidates.hi - s.candidates.lo) / static_cast<double>(s.candidates.steps);
    const auto& space = x.space;
    res.bounded =
        diag.bounded(C, [&space, radius](double a, double b) { return space.strong_distance(a, b) < radius; });
    add("boundedness", res.bounded->verdict,
        "escape set from the grid cover of [" + fmt(s.candidates.lo) + ", " + fmt(s.candidates.hi) + "] ~ " +
            fmt(res.bounded->escape.limit_estimate()));
  }

  if (selected("pairwise")) {
    const auto y = build_sequence(*s.second_sequence, s.space, s.N, s.seed + 1);
    res.pairwise = pairwise_distance_convergence(x, y, L, s.second_sequence->limit, A, grid, opt);
    add("pairwise", res.pairwise->verdict, "F(x_k, y_k) -> F(" + fmt(L) + ", " + fmt(s.second_sequence->limit) + ")");
  }
  return res;
}

// ---------------------------------------------------------------------------
// Artifacts

inline std::string report_text(const ScenarioResult& r) {
  using detail::fmt;
  const auto& s = r.scenario;
  std::ostringstream o;
  o << "scenario: " << s.name << "\n";
  if (!s.description.empty()) o << "description: " << s.description << "\n";
  o << "space: " << s.space.describe() << "\n";
  o << "tau: " << r.tau << " (grid resolution " << s.space.grid_resolution << ")\n";
  o << "matrix: " << s.matrix << "\n";
  o << "sequence: " << s.sequence.label << ", limit candidate " << fmt(s.sequence.limit) << "\n";
  o << "truncation: N = " << s.N << ", J = " << r.J << "\n";
  o << "seed: " << s.seed << "\n";
  o << "tolerances: osc_tol = " << fmt(s.tol.density.osc_tol) << ", zero_tol = " << fmt(s.tol.density.zero_tol)
    << ", nonthin_floor = " << fmt(s.tol.density.nonthin_floor) << ", window = " << s.tol.density.window
    << ", probe ratio = " << fmt(s.tol.density.ratio) << ", summable_tol = " << fmt(s.tol.summable_tol) << "\n";
  o << "t grid: " << detail::list(s.tol.t_grid) << "\n\n";
  for (const auto& c : r.outcomes) {
    o << "[" << to_string(c.status()) << "] " << c.name << ": " << to_string(c.verdict) << " (expected "
      << to_string(c.expected) << ")";
    if (!c.detail.empty()) o << "\n    " << c.detail;
    o << "\n";
  }
  o << "\nexit code: " << r.exit_code() << "\n";
  return o.str();
}

inline json summary_json(const ScenarioResult& r) {
  const auto& s = r.scenario;
  json j;
  j["scenario"] = s.name;
  j["schema_version"] = kSchemaVersion;
  j["space"] = s.space.describe();
  j["tau"] = r.tau;
  j["matrix"] = s.matrix;
  j["truncation"] = {{"N", s.N}, {"J", r.J}};
  j["seed"] = s.seed;
  j["tolerances"] = {{"osc_tol", s.tol.density.osc_tol},
                     {"zero_tol", s.tol.density.zero_tol},
                     {"nonthin_floor", s.tol.density.nonthin_floor},
                     {"window", s.tol.density.window},
                     {"probe_ratio", s.tol.density.ratio},
                     {"summable_tol", s.tol.summable_tol},
                     {"t_grid", s.tol.t_grid}};
  json out = json::object();
  for (const auto& c : r.outcomes) {
    out[c.name] = {{"verdict", to_string(c.verdict)},
                   {"expected", to_string(c.expected)},
                   {"status", to_string(c.status())},
                   {"detail", c.detail}};
  }
  j["diagnostics"] = out;
  if (r.clusters) {
    j["gamma"] = detail::as_values(r.clusters->gamma, r.clusters->candidates);
    j["lambda"] = detail::as_values(r.clusters->lambda, r.clusters->candidates);
    j["ordinary"] = detail::as_values(r.clusters->ordinary, r.clusters->candidates);
  }
  j["exit_code"] = r.exit_code();
  return j;
}

/// (t, n, s_n) for the exception sets {k : d(x_k, L) >= t}.
inline std::string density_csv(const ScenarioResult& r) {
  std::string out = "t,n,s_n\n";
  const auto& c = r.convergence;
  for (std::size_t i = 0; i < c.t_grid.size(); ++i) {
    const auto& e = c.exceptions[i];
    for (std::size_t p = 0; p < e.probes.size(); ++p) {
      out += detail::fmt(c.t_grid[i]) + "," + std::to_string(e.probes[p]) + "," + detail::fmt(e.partial_sums[p]) + "\n";
    }
  }
  return out;
}

/// (j, y_j) for the strong A-transform; empty without the summability suite.
inline std::string transform_csv(const ScenarioResult& r) {
  std::string out = "j,y_j\n";
  if (!r.suite) return out;
  const auto& tr = r.suite->trace;
  for (std::size_t j = 1; j <= tr.J; ++j) out += std::to_string(j) + "," + detail::fmt(tr[j]) + "\n";
  return out;
}

/// Writes report.txt, summary.json, density.csv and transform.csv into dir.
inline void write_artifacts(const ScenarioResult& r, const std::filesystem::path& dir) {
  std::filesystem::create_directories(dir);
  auto put = [&dir](const char* file, const std::string& text) {
    std::ofstream f(dir / file, std::ios::binary);
    if (!f) throw std::runtime_error("cannot write " + (dir / file).string());
    f << text;
  };
  put("report.txt", report_text(r));
  put("summary.json", summary_json(r).dump(2) + "\n");
  put("density.csv", density_csv(r));
  put("transform.csv", transform_csv(r));
}

/// Scenario files in dir, sorted by name.
inline std::vector<std::filesystem::path> scenario_files(const std::filesystem::path& dir) {
  std::vector<std::filesystem::path> out;
  for (const auto& e : std::filesystem::directory_iterator(dir)) {
    if (e.is_regular_file() && e.path().extension() == ".json") out.push_back(e.path());
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace pmstat::scenario
