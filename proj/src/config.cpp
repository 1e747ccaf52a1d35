#include <charconv>
#include <cstdlib>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include "decm/io.hpp"

namespace decm {

namespace {

struct Entry {
  std::string value;
  int line = 0;
};

std::string_view trim(std::string_view s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string_view::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

const std::set<std::string, std::less<>>& known_keys() {
  static const std::set<std::string, std::less<>> keys = {
      "grid.n",          "physics.b",          "physics.eps",       "physics.model",
      "time.scale",      "time.boosted",       "time.dt",           "time.cfl",
      "time.t_end",      "init.kind",          "init.amplitude",    "init.seed",
      "init.band",       "eos.method",         "eos.tol",           "eos.max_iter",
      "output.dir",      "output.sample_count", "experiment.kind",  "experiment.b_list",
      "experiment.eps_list", "experiment.dt_list", "experiment.workers",
  };
  return keys;
}

constexpr std::string_view kThresholdPrefix = "experiment.threshold.";

class Reader {
public:
  Reader(std::map<std::string, Entry, std::less<>> entries, std::string source)
      : e_(std::move(entries)), source_(std::move(source)) {}

  bool has(std::string_view key) const { return e_.find(key) != e_.end(); }
  int line(std::string_view key) const {
    auto it = e_.find(key);
    return it == e_.end() ? 0 : it->second.line;
  }

  [[noreturn]] void fail(std::string_view key, const std::string& msg) const {
    const int ln = line(key);
    std::string where = source_;
    if (ln > 0) where += ":" + std::to_string(ln);
    throw ConfigValueError(where + ": key '" + std::string(key) + "': " + msg, ln, std::string(key));
  }

  std::optional<std::string> text(std::string_view key) const {
    auto it = e_.find(key);
    if (it == e_.end()) return std::nullopt;
    return it->second.value;
  }

  double to_double(std::string_view key, std::string_view s) const {
    double v = 0.0;
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end || !std::isfinite(v))
      fail(key, "expected a finite number, got '" + std::string(s) + "'");
    return v;
  }

  template <class Int>
  Int to_int(std::string_view key, std::string_view s) const {
    Int v{};
    const auto* end = s.data() + s.size();
    const auto r = std::from_chars(s.data(), end, v);
    if (s.empty() || r.ec != std::errc() || r.ptr != end)
      fail(key, "expected an integer, got '" + std::string(s) + "'");
    return v;
  }

  std::optional<double> number(std::string_view key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    return to_double(key, *t);
  }

  template <class Int = int>
  std::optional<Int> integer(std::string_view key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    return to_int<Int>(key, *t);
  }

  std::optional<bool> boolean(std::string_view key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    if (*t == "true") return true;
    if (*t == "false") return false;
    fail(key, "expected true or false, got '" + *t + "'");
  }

  std::optional<std::vector<double>> list(std::string_view key) const {
    auto t = text(key);
    if (!t) return std::nullopt;
    std::vector<double> out;
    std::string_view rest = *t;
    while (true) {
      const auto comma = rest.find(',');
      out.push_back(to_double(key, trim(rest.substr(0, comma))));
      if (comma == std::string_view::npos) break;
      rest = rest.substr(comma + 1);
    }
    return out;
  }

  template <class F>
  auto parse_with(std::string_view key, F&& f) const -> std::optional<decltype(f(std::string_view{}))> {
    auto t = text(key);
    if (!t) return std::nullopt;
    try {
      return f(std::string_view(*t));
    } catch (const DomainError& e) {
      fail(key, e.what());
    }
  }

  const std::map<std::string, Entry, std::less<>>& entries() const { return e_; }

private:
  std::map<std::string, Entry, std::less<>> e_;
  std::string source_;
};

}  // namespace

RunConfig parse_config(std::string_view text, std::string_view source) {
  std::map<std::string, Entry, std::less<>> entries;
  const std::string src(source);
  std::istringstream in{std::string(text)};
  std::string raw;
  int ln = 0;
  while (std::getline(in, raw)) {
    ++ln;
    std::string_view line = raw;
    if (auto hash = line.find('#'); hash != std::string_view::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto eq = line.find('=');
    const std::string where = src + ":" + std::to_string(ln);
    if (eq == std::string_view::npos)
      throw ConfigSyntaxError(where + ": expected 'key = value', got '" + std::string(line) + "'", ln, "");
    const std::string key(trim(line.substr(0, eq)));
    const std::string value(trim(line.substr(eq + 1)));
    if (key.empty()) throw ConfigSyntaxError(where + ": missing key before '='", ln, "");
    if (value.empty()) throw ConfigSyntaxError(where + ": missing value for key '" + key + "'", ln, key);
    const bool threshold = key.rfind(kThresholdPrefix, 0) == 0 && key.size() > kThresholdPrefix.size();
    if (!threshold && !known_keys().count(key))
      throw UnknownKeyError(where + ": unknown key '" + key + "'", ln, key);
    if (entries.count(key))
      throw ConfigValueError(where + ": duplicate key '" + key + "' (first set on line " +
                                 std::to_string(entries[key].line) + ")",
                             ln, key);
    entries[key] = Entry{value, ln};
  }

  const Reader r(std::move(entries), src);
  RunConfig rc;
  SimConfig& c = rc.sim;

  if (auto n = r.integer("grid.n")) {
    try {
      c.grid = Grid(*n);
    } catch (const DomainError& e) {
      r.fail("grid.n", e.what());
    }
  }
  if (auto b = r.number("physics.b")) c.b = *b;
  if (auto e = r.number("physics.eps")) c.eps = *e;
  if (auto m = r.parse_with("physics.model", parse_model)) c.model = *m;
  if (auto s = r.parse_with("time.scale", parse_time_scale)) c.time_scale = *s;
  if (auto b = r.boolean("time.boosted")) c.boosted = *b;
  if (r.has("time.dt") && r.has("time.cfl"))
    r.fail("time.cfl", "time.dt and time.cfl are mutually exclusive");
  c.dt_policy = DtPolicy::cfl(0.5);
  if (auto dt = r.number("time.dt")) c.dt_policy = DtPolicy::fixed_dt(*dt);
  if (auto cfl = r.number("time.cfl")) c.dt_policy = DtPolicy::cfl(*cfl);
  if (auto t = r.number("time.t_end")) c.t_end = *t;
  c.sample_count = 11;
  if (auto k = r.integer("output.sample_count")) c.sample_count = *k;
  if (auto d = r.text("output.dir")) rc.output_dir = *d;

  if (auto k = r.parse_with("init.kind", parse_init_kind)) rc.init.kind = *k;
  if (auto a = r.number("init.amplitude")) {
    if (!(*a > 0.0)) r.fail("init.amplitude", "must be > 0");
    rc.init.amplitude = *a;
  }
  if (auto s = r.integer<std::uint64_t>("init.seed")) rc.init.seed = *s;
  if (auto b = r.integer("init.band")) {
    if (*b < 1) r.fail("init.band", "must be >= 1");
    rc.init.band = *b;
  }

  if (auto m = r.parse_with("eos.method", parse_eos_method)) c.eos.method = *m;
  if (auto t = r.number("eos.tol")) c.eos.tol = *t;
  if (auto m = r.integer("eos.max_iter")) c.eos.max_iter = *m;
  c.eos.b = c.b;
  try {
    c.eos.validate();
  } catch (const DomainError& e) {
    r.fail(r.has("eos.tol") ? "eos.tol" : "eos.max_iter", e.what());
  }

  const bool has_experiment = r.has("experiment.kind");
  for (const auto& [key, entry] : r.entries()) {
    if (!has_experiment && key.rfind("experiment.", 0) == 0)
      r.fail(key, "experiment keys require experiment.kind");
  }

  if (has_experiment) {
    const ExperimentKind kind = *r.parse_with("experiment.kind", parse_experiment_kind);
    ExperimentSpec s = default_spec(kind);
    if (r.has("grid.n")) s.n = c.grid.n();
    if (r.has("init.kind") || r.has("init.amplitude") || r.has("init.seed") || r.has("init.band")) {
      if (r.has("init.kind")) s.init.kind = rc.init.kind;
      if (rc.init.amplitude) s.init.amplitude = rc.init.amplitude;
      if (r.has("init.seed")) s.init.seed = rc.init.seed;
      if (r.has("init.band")) s.init.band = rc.init.band;
    }
    if (auto l = r.list("experiment.b_list")) s.b_list = *l;
    if (auto l = r.list("experiment.eps_list")) s.eps_list = *l;
    if (auto l = r.list("experiment.dt_list")) s.dt_list = *l;
    if (auto w = r.integer("experiment.workers")) s.workers = *w;
    if (r.has("time.t_end")) s.t_end = c.t_end;
    if (r.has("time.dt")) s.dt = c.dt_policy.value;
    if (r.has("time.cfl")) r.fail("time.cfl", "experiments run with a fixed time.dt");
    if (r.has("output.sample_count")) s.sample_count = c.sample_count;
    if (r.has("physics.b") && s.b_list.size() <= 1) s.b_list = {c.b};
    s.eos.method = c.eos.method;
    s.eos.tol = c.eos.tol;
    s.eos.max_iter = c.eos.max_iter;
    for (const auto& [key, entry] : r.entries()) {
      if (key.rfind(kThresholdPrefix, 0) != 0) continue;
      const std::string name = key.substr(kThresholdPrefix.size());
      const auto req = required_thresholds(kind);
      if (std::find(req.begin(), req.end(), name) == req.end())
        throw UnknownKeyError(src + ":" + std::to_string(entry.line) + ": unknown threshold '" + name +
                                  "' for experiment " + std::string(to_string(kind)),
                              entry.line, key);
      s.thresholds[name] = *r.number(key);
    }
    try {
      s.validate();
    } catch (const DomainError& e) {
      throw ConfigValueError(src + ": " + e.what(), r.line("experiment.kind"), "experiment.kind");
    }
    rc.experiment = std::move(s);
  } else {
    try {
      c.validate();
    } catch (const DomainError& e) {
      throw ConfigValueError(src + ": " + e.what(), 0, "");
    }
  }
  return rc;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open config file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("cannot read config file '" + path.string() + "'");
  RunConfig rc = parse_config(buf.str(), path.string());
  if (const char* dir = std::getenv("DECM_OUTPUT_DIR"); dir && *dir) rc.output_dir = dir;
  return rc;
}

}  // namespace decm
