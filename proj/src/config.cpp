#include "vstretch/config.hpp"

#include <charconv>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "vstretch/error.hpp"

namespace vstretch {

std::string to_string(Command c) {
  switch (c) {
    case Command::SolveProfile:
      return "solve-profile";
    case Command::Evolve:
      return "evolve";
    case Command::VerifySelfSimilar:
      return "verify-self-similar";
    case Command::Diagnostics:
      return "diagnostics";
  }
  return "unknown";
}

namespace {

std::string_view trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return s.substr(first, last - first + 1);
}

struct Entry {
  std::string value;
  int line;
};

class Reader {
 public:
  Reader(std::map<std::string, Entry> entries, std::string origin)
      : entries_(std::move(entries)), origin_(std::move(origin)) {}

  bool has(const std::string& key) const { return entries_.count(key) != 0; }

  [[noreturn]] void fail(const std::string& key, const std::string& what) const {
    auto it = entries_.find(key);
    std::ostringstream os;
    os << origin_;
    if (it != entries_.end()) os << ':' << it->second.line;
    os << ": " << key << ": " << what;
    throw ConfigError(os.str());
  }

  const std::string& raw(const std::string& key) {
    auto it = entries_.find(key);
    if (it == entries_.end()) throw ConfigError(origin_ + ": missing required key '" + key + "'");
    used_.insert(key);
    return it->second.value;
  }

  double real(const std::string& key) {
    const std::string& s = raw(key);
    double v = 0.0;
    const char* first = s.data();
    if (!s.empty() && s[0] == '+') ++first;
    auto [ptr, ec] = std::from_chars(first, s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected a number, got '" + s + "'");
    return v;
  }

  long long integer(const std::string& key) {
    const std::string& s = raw(key);
    long long v = 0;
    auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
    if (ec != std::errc() || ptr != s.data() + s.size()) fail(key, "expected an integer, got '" + s + "'");
    return v;
  }

  bool boolean(const std::string& key) {
    const std::string& s = raw(key);
    if (s == "true" || s == "yes" || s == "on" || s == "1") return true;
    if (s == "false" || s == "no" || s == "off" || s == "0") return false;
    fail(key, "expected true/false, got '" + s + "'");
  }

  std::vector<double> list(const std::string& key) {
    std::vector<double> out;
    std::string s = raw(key);
    std::stringstream ss(s);
    std::string item;
    while (std::getline(ss, item, ',')) {
      const std::string_view t = trim(item);
      if (t.empty()) continue;
      double v = 0.0;
      auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
      if (ec != std::errc() || ptr != t.data() + t.size()) fail(key, "expected a comma-separated list of numbers");
      out.push_back(v);
    }
    return out;
  }

  template <class T, class F>
  void optional(const std::string& key, T& target, F&& convert) {
    if (has(key)) target = static_cast<T>(convert(key));
  }

  void reject_unused() const {
    for (const auto& [key, entry] : entries_)
      if (!used_.count(key))
        throw ConfigError(origin_ + ":" + std::to_string(entry.line) + ": unknown key '" + key + "'");
  }

 private:
  std::map<std::string, Entry> entries_;
  std::set<std::string> used_;
  std::string origin_;
};

}  // namespace

RunConfig parse_config(std::string_view text, const std::string& origin) {
  std::map<std::string, Entry> entries;
  std::string section;
  int line_no = 0;
  std::size_t pos = 0;
  while (pos <= text.size()) {
    const std::size_t eol = std::min(text.find('\n', pos), text.size());
    std::string_view line = text.substr(pos, eol - pos);
    pos = eol + 1;
    ++line_no;
    if (const auto c = line.find_first_of("#;"); c != std::string_view::npos) line = line.substr(0, c);
    line = trim(line);
    if (line.empty()) continue;
    const auto at = [&](const std::string& what) {
      return ConfigError(origin + ":" + std::to_string(line_no) + ": " + what);
    };
    if (line.front() == '[') {
      if (line.back() != ']') throw at("unterminated section header");
      section = std::string(trim(line.substr(1, line.size() - 2)));
      if (section.empty()) throw at("empty section name");
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string_view::npos) throw at("expected 'key = value'");
    const std::string_view key = trim(line.substr(0, eq));
    const std::string_view value = trim(line.substr(eq + 1));
    if (key.empty()) throw at("empty key");
    if (value.empty()) throw at("empty value for '" + std::string(key) + "'");
    const std::string full = section.empty() ? std::string(key) : section + "." + std::string(key);
    if (entries.count(full)) throw at("duplicate key '" + full + "'");
    entries.emplace(full, Entry{std::string(value), line_no});
    if (eol == text.size()) break;
  }

  Reader r(std::move(entries), origin);
  RunConfig cfg;

  const std::string& command = r.raw("command");
  if (command == "solve-profile")
    cfg.command = Command::SolveProfile;
  else if (command == "evolve")
    cfg.command = Command::Evolve;
  else if (command == "verify-self-similar")
    cfg.command = Command::VerifySelfSimilar;
  else if (command == "diagnostics")
    cfg.command = Command::Diagnostics;
  else
    r.fail("command", "unknown command '" + command + "'");

  cfg.output_dir = r.raw("output_dir");
  if (r.has("seed")) {
    const long long seed = r.integer("seed");
    if (seed < 0) r.fail("seed", "must be nonnegative");
    cfg.seed = static_cast<std::uint64_t>(seed);
  }

  cfg.grid.n = static_cast<int>(r.integer("grid.n"));
  cfg.grid.box_length = r.real("grid.box_length");

  const bool needs_shape = cfg.command != Command::Evolve;
  if (needs_shape || r.has("shape.spec")) {
    const std::string& text = r.raw("shape.spec");
    try {
      cfg.shape = parse_shape(text);
    } catch (const GeometryError& e) {
      r.fail("shape.spec", e.what());
    }
  }

  auto real = [&](const std::string& k) { return r.real(k); };
  auto integer = [&](const std::string& k) { return r.integer(k); };
  auto boolean = [&](const std::string& k) { return r.boolean(k); };

  r.optional("solver.tol", cfg.solver.tol, real);
  r.optional("solver.max_iter", cfg.solver.max_iter, integer);
  r.optional("solver.coercivity_tol", cfg.solver.coercivity_tol, real);

  EvolveConfig& e = cfg.evolve;
  r.optional("evolve.dt_initial", e.dt_initial, real);
  r.optional("evolve.dt_min", e.dt_min, real);
  r.optional("evolve.dt_max", e.dt_max, real);
  r.optional("evolve.safety", e.safety, real);
  r.optional("evolve.rtol", e.rtol, real);
  r.optional("evolve.atol", e.atol, real);
  r.optional("evolve.t_max", e.t_max, real);
  r.optional("evolve.blowup_factor", e.blowup_factor, real);
  r.optional("evolve.dealias", e.dealias, boolean);
  r.optional("evolve.record_every", e.record_every, integer);
  r.optional("evolve.nonlinearity_sign", e.nonlinearity_sign, integer);
  r.optional("evolve.fit_window", cfg.fit_window, real);
  if (r.has("evolve.snapshot_times")) cfg.snapshot_times = r.list("evolve.snapshot_times");

  InitialCondition& ic = cfg.initial;
  if (r.has("initial.kind")) {
    const std::string& kind = r.raw("initial.kind");
    if (kind == "bump")
      ic.kind = InitialKind::Bump;
    else if (kind == "profile")
      ic.kind = InitialKind::Profile;
    else if (kind == "field")
      ic.kind = InitialKind::Field;
    else
      r.fail("initial.kind", "expected bump, profile or field");
  }
  r.optional("initial.amplitude", ic.amplitude, real);
  r.optional("initial.sigma", ic.sigma, real);
  r.optional("initial.radius", ic.radius, real);
  r.optional("initial.center_x", ic.center_x, real);
  r.optional("initial.center_y", ic.center_y, real);
  r.optional("initial.blowup_time", ic.blowup_time, real);
  if (r.has("initial.file")) ic.file = r.raw("initial.file");
  if (cfg.command == Command::Evolve && ic.kind != InitialKind::Bump && ic.file.empty())
    throw ConfigError(origin + ": missing required key 'initial.file'");

  r.optional("diagnostics.cone_k", cfg.diagnostics.cone_k, real);
  r.optional("diagnostics.bump_count", cfg.diagnostics.bump_count, integer);

  r.reject_unused();

  // Value checks that do not need a grid.
  try {
    cfg.evolve.validate();
  } catch (const InvalidArgument& ex) {
    throw ConfigError(origin + ": [evolve] " + ex.what());
  }
  if (!(cfg.solver.tol > 0.0 && cfg.solver.tol < 1e-2)) r.fail("solver.tol", "must lie in (0, 1e-2)");
  if (cfg.solver.max_iter < 1) r.fail("solver.max_iter", "must be positive");
  if (!(cfg.initial.sigma > 0.0) || !(cfg.initial.radius > 0.0)) r.fail("initial.sigma", "sigma and radius must be positive");
  if (!(cfg.initial.blowup_time > 0.0)) r.fail("initial.blowup_time", "must be positive");
  if (!(cfg.diagnostics.cone_k > 1.0)) r.fail("diagnostics.cone_k", "must exceed 1");
  if (cfg.diagnostics.bump_count < 1) r.fail("diagnostics.bump_count", "must be positive");
  if (!(cfg.fit_window > 0.0 && cfg.fit_window <= 1.0)) r.fail("evolve.fit_window", "must lie in (0, 1]");
  return cfg;
}

RunConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file " + path.string());
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str(), path.string());
}

}  // namespace vstretch
