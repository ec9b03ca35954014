// Run configuration: TOML text -> RunConfig.
#pragma once

#include <cmath>
#include <optional>
#include <set>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

#include "coexist/geometry.hpp"
#include "coexist/reaction.hpp"
#include "coexist/solver.hpp"
#include "coexist/toml_lite.hpp"

namespace coexist {

enum class Mode { Solve, Continuation, Sweep, Check };

inline const char* to_string(Mode m) noexcept {
  switch (m) {
    case Mode::Solve: return "solve";
    case Mode::Continuation: return "continuation";
    case Mode::Sweep: return "sweep";
    case Mode::Check: return "check";
  }
  return "?";
}

inline std::optional<Mode> parse_mode(std::string_view s) {
  if (s == "solve") return Mode::Solve;
  if (s == "continuation") return Mode::Continuation;
  if (s == "sweep") return Mode::Sweep;
  if (s == "check") return Mode::Check;
  return std::nullopt;
}

struct SpeciesParams {
  double lambda = 2.0;
  double p = 2.0;
};

struct RunConfig {
  Mode mode = Mode::Solve;
  DomainSpec domain;
  std::vector<SpeciesParams> species;
  SolveOptions solver;
  std::vector<double> kappa_schedule{1000.0};
  std::vector<double> sweep_widths;
  std::string output_dir = "coexist_out";
  int workers = 1;
  std::uint64_t seed = 12345;  // random states of the check mode

  [[nodiscard]] std::vector<ReactionModel> models() const {
    std::vector<ReactionModel> out;
    out.reserve(species.size());
    for (const auto& s : species) out.push_back(make_logistic(s.lambda, s.p));
    return out;
  }
};

enum class ConfigErrc {
  Syntax = 1,
  MissingSection = 2,
  TypeMismatch = 3,
  Invariant = 4,
  UnknownKey = 5,
};

inline const char* to_string(ConfigErrc c) noexcept {
  switch (c) {
    case ConfigErrc::Syntax: return "syntax error";
    case ConfigErrc::MissingSection: return "missing section";
    case ConfigErrc::TypeMismatch: return "type mismatch";
    case ConfigErrc::Invariant: return "invariant violation";
    case ConfigErrc::UnknownKey: return "unknown key";
  }
  return "?";
}

class ConfigError : public std::runtime_error {
 public:
  ConfigError(ConfigErrc code, const std::string& msg, toml::Position pos = {})
      : std::runtime_error(std::string(to_string(code)) + " (line " + std::to_string(pos.line) + ", column " +
                           std::to_string(pos.column) + "): " + msg),
        code_(code),
        pos_(pos) {}
  [[nodiscard]] ConfigErrc code() const noexcept { return code_; }
  [[nodiscard]] toml::Position position() const noexcept { return pos_; }

 private:
  ConfigErrc code_;
  toml::Position pos_;
};

namespace detail {

class ConfigReader {
 public:
  explicit ConfigReader(const toml::Document& doc) : doc_(doc) {}

  RunConfig read() {
    const auto& root = doc_.root;
    allow(root, "", {"mode", "output_dir", "kappa_schedule", "workers", "seed", "domain", "species", "solver", "sweep"});
    RunConfig cfg;
    if (root.contains("mode")) {
      const auto s = string_at(root, "", "mode");
      const auto m = parse_mode(s);
      if (!m) throw ConfigError(ConfigErrc::Invariant, "unknown mode '" + s + "'", pos("mode"));
      cfg.mode = *m;
    }
    if (root.contains("output_dir")) cfg.output_dir = string_at(root, "", "output_dir");
    if (root.contains("workers")) {
      cfg.workers = static_cast<int>(integer_at(root, "", "workers"));
      if (cfg.workers < 1) throw ConfigError(ConfigErrc::Invariant, "workers must be >= 1", pos("workers"));
    }
    if (root.contains("seed")) {
      const auto s = integer_at(root, "", "seed");
      if (s < 0) throw ConfigError(ConfigErrc::Invariant, "seed must be >= 0", pos("seed"));
      cfg.seed = static_cast<std::uint64_t>(s);
    }
    if (root.contains("kappa_schedule")) cfg.kappa_schedule = numbers_at(root, "", "kappa_schedule");

    if (!root.contains("domain")) throw ConfigError(ConfigErrc::MissingSection, "[domain] is required");
    read_domain(table_at(root, "", "domain"), cfg.domain);

    if (!root.contains("species")) throw ConfigError(ConfigErrc::MissingSection, "[[species]] is required");
    const auto& species = tables_at(root, "", "species");
    for (std::size_t i = 0; i < species.size(); ++i) {
      const std::string path = "species[" + std::to_string(i) + "]";
      allow(species[i], path, {"lambda", "p"});
      SpeciesParams sp;
      if (!species[i].contains("lambda") || !species[i].contains("p")) {
        throw ConfigError(ConfigErrc::MissingSection, path + " needs lambda and p", pos(path));
      }
      sp.lambda = number_at(species[i], path, "lambda");
      sp.p = number_at(species[i], path, "p");
      if (!(sp.lambda > 1.0) || !(sp.p > 1.0) || !std::isfinite(sp.lambda) || !std::isfinite(sp.p)) {
        throw ConfigError(ConfigErrc::Invariant, path + ": logistic growth needs lambda > 1 and p > 1",
                          pos(path + ".lambda"));
      }
      cfg.species.push_back(sp);
    }

    if (root.contains("solver")) read_solver(table_at(root, "", "solver"), cfg.solver);
    if (root.contains("sweep")) {
      const auto& sw = table_at(root, "", "sweep");
      allow(sw, "sweep", {"widths"});
      if (sw.contains("widths")) cfg.sweep_widths = numbers_at(sw, "sweep", "widths");
    }

    // Invariants across sections.
    if (cfg.species.size() != cfg.domain.cores.size()) {
      throw ConfigError(ConfigErrc::Invariant,
                        "species/core mismatch: " + std::to_string(cfg.species.size()) + " species, " +
                            std::to_string(cfg.domain.cores.size()) + " cores",
                        pos("species"));
    }
    for (std::size_t j = 0; j < cfg.kappa_schedule.size(); ++j) {
      const double k = cfg.kappa_schedule[j];
      if (!(k >= 0.0) || !std::isfinite(k)) {
        throw ConfigError(ConfigErrc::Invariant, "kappa must be finite and >= 0", pos("kappa_schedule"));
      }
      if (j > 0 && !(k > cfg.kappa_schedule[j - 1])) {
        throw ConfigError(ConfigErrc::Invariant, "schedule not increasing", pos("kappa_schedule"));
      }
    }
    if (cfg.kappa_schedule.empty()) throw ConfigError(ConfigErrc::Invariant, "kappa_schedule is empty", pos("kappa_schedule"));
    for (double w : cfg.sweep_widths) {
      if (!(w > 0.0)) throw ConfigError(ConfigErrc::Invariant, "sweep widths must be > 0", pos("sweep.widths"));
    }
    if (cfg.mode == Mode::Sweep && cfg.sweep_widths.empty()) {
      throw ConfigError(ConfigErrc::MissingSection, "sweep mode needs [sweep] widths", pos("mode"));
    }
    const auto violations = validate_spec(cfg.domain);
    if (!violations.empty()) {
      std::string msg = "domain:";
      for (const auto& v : violations) msg += " [" + std::string(to_string(v.kind)) + ": " + v.message + "]";
      throw ConfigError(ConfigErrc::Invariant, msg, pos("domain"));
    }
    for (double w : cfg.sweep_widths) {
      const auto vs = validate_spec(with_channel_width(cfg.domain, w));
      if (!vs.empty()) {
        throw ConfigError(ConfigErrc::Invariant,
                          "sweep width " + std::to_string(w) + ": " + std::string(to_string(vs.front().kind)) + ": " +
                              vs.front().message,
                          pos("sweep.widths"));
      }
    }
    return cfg;
  }

 private:
  using Json = toml::Json;

  [[nodiscard]] toml::Position pos(const std::string& path) const { return doc_.position_of(path); }
  static std::string join(const std::string& base, const std::string& key) {
    return base.empty() ? key : base + "." + key;
  }

  void allow(const Json& table, const std::string& path, std::initializer_list<const char*> keys) const {
    std::set<std::string> ok(keys.begin(), keys.end());
    for (const auto& [key, _] : table.items()) {
      if (!ok.count(key)) {
        throw ConfigError(ConfigErrc::UnknownKey, "'" + join(path, key) + "'", pos(join(path, key)));
      }
    }
  }

  [[noreturn]] void mismatch(const std::string& path, const char* expected) const {
    throw ConfigError(ConfigErrc::TypeMismatch, "'" + path + "' must be " + expected, pos(path));
  }

  double number_at(const Json& t, const std::string& path, const char* key) const {
    const auto& v = t.at(key);
    if (!v.is_number()) mismatch(join(path, key), "a number");
    return v.get<double>();
  }
  long long integer_at(const Json& t, const std::string& path, const char* key) const {
    const auto& v = t.at(key);
    if (!v.is_number_integer()) mismatch(join(path, key), "an integer");
    return v.get<long long>();
  }
  bool bool_at(const Json& t, const std::string& path, const char* key) const {
    const auto& v = t.at(key);
    if (!v.is_boolean()) mismatch(join(path, key), "a boolean");
    return v.get<bool>();
  }
  std::string string_at(const Json& t, const std::string& path, const char* key) const {
    const auto& v = t.at(key);
    if (!v.is_string()) mismatch(join(path, key), "a string");
    return v.get<std::string>();
  }
  std::vector<double> numbers_at(const Json& t, const std::string& path, const char* key) const {
    const auto& v = t.at(key);
    if (!v.is_array()) mismatch(join(path, key), "an array of numbers");
    std::vector<double> out;
    for (const auto& e : v) {
      if (!e.is_number()) mismatch(join(path, key), "an array of numbers");
      out.push_back(e.get<double>());
    }
    return out;
  }
  const Json& table_at(const Json& t, const std::string& path, const char* key) const {
    const auto& v = t.at(key);
    if (!v.is_object()) mismatch(join(path, key), "a table");
    return v;
  }
  const Json& tables_at(const Json& t, const std::string& path, const char* key) const {
    const auto& v = t.at(key);
    if (!v.is_array() || std::any_of(v.begin(), v.end(), [](const Json& e) { return !e.is_object(); })) {
      mismatch(join(path, key), "an array of tables");
    }
    return v;
  }

  Rect read_rect(const Json& t, const std::string& path) const {
    allow(t, path, {"x", "y", "width", "height"});
    for (const char* k : {"x", "y", "width", "height"}) {
      if (!t.contains(k)) throw ConfigError(ConfigErrc::MissingSection, path + " needs " + k, pos(path));
    }
    return {number_at(t, path, "x"), number_at(t, path, "y"), number_at(t, path, "width"),
            number_at(t, path, "height")};
  }

  void read_domain(const Json& d, DomainSpec& spec) const {
    allow(d, "domain", {"h", "cores", "channels"});
    spec.h = d.contains("h") ? number_at(d, "domain", "h") : 0.025;
    if (!d.contains("cores")) throw ConfigError(ConfigErrc::MissingSection, "[[domain.cores]] is required", pos("domain"));
    const auto& cores = tables_at(d, "domain", "cores");
    for (std::size_t i = 0; i < cores.size(); ++i) {
      spec.cores.push_back(read_rect(cores[i], "domain.cores[" + std::to_string(i) + "]"));
    }
    if (d.contains("channels")) {
      const auto& ch = tables_at(d, "domain", "channels");
      for (std::size_t i = 0; i < ch.size(); ++i) {
        spec.channels.push_back(read_rect(ch[i], "domain.channels[" + std::to_string(i) + "]"));
      }
    }
  }

  void read_solver(const Json& s, SolveOptions& o) const {
    allow(s, "solver", {"tol", "max_iter", "initial_step", "armijo", "backtrack", "clamp"});
    if (s.contains("tol")) o.tol = number_at(s, "solver", "tol");
    if (s.contains("max_iter")) o.max_iter = static_cast<long>(integer_at(s, "solver", "max_iter"));
    if (s.contains("initial_step")) o.initial_step = number_at(s, "solver", "initial_step");
    if (s.contains("armijo")) o.armijo = number_at(s, "solver", "armijo");
    if (s.contains("backtrack")) o.backtrack = number_at(s, "solver", "backtrack");
    if (s.contains("clamp")) o.clamp = bool_at(s, "solver", "clamp");
    try {
      o.validate();
    } catch (const std::invalid_argument& e) {
      throw ConfigError(ConfigErrc::Invariant, e.what(), pos("solver"));
    }
  }

  const toml::Document& doc_;
};

}  // namespace detail

inline RunConfig parse_config(std::string_view text) {
  toml::Document doc;
  try {
    doc = toml::parse(text);
  } catch (const toml::SyntaxError& e) {
    throw ConfigError(ConfigErrc::Syntax, e.what(), e.position());
  }
  return detail::ConfigReader(doc).read();
}

}  // namespace coexist
