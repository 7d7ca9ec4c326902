#include "nsasym/config.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <functional>
#include <set>
#include <sstream>

#include "nsasym/errors.hpp"

namespace nsasym {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

double parse_double(const std::string& v) {
  double x = 0.0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw InvalidArgument("expected a number, got '" + v + "'");
  if (std::isnan(x)) throw InvalidArgument("NaN is not an accepted value");
  return x;
}

long long parse_integer(const std::string& v) {
  long long x = 0;
  const auto r = std::from_chars(v.data(), v.data() + v.size(), x);
  if (r.ec != std::errc() || r.ptr != v.data() + v.size()) throw InvalidArgument("expected an integer, got '" + v + "'");
  return x;
}

int parse_int(const std::string& v) {
  const long long x = parse_integer(v);
  if (x < std::numeric_limits<int>::min() || x > std::numeric_limits<int>::max())
    throw InvalidArgument("integer out of range: '" + v + "'");
  return static_cast<int>(x);
}

bool parse_bool(const std::string& v) {
  if (v == "true" || v == "yes" || v == "on" || v == "1") return true;
  if (v == "false" || v == "no" || v == "off" || v == "0") return false;
  throw InvalidArgument("expected true or false, got '" + v + "'");
}

std::vector<std::string> split_list(const std::string& v) {
  std::vector<std::string> out;
  std::stringstream ss(v);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (item.empty()) throw InvalidArgument("empty entry in list '" + v + "'");
    out.push_back(item);
  }
  return out;
}

std::string format_double(double x) {
  if (std::isinf(x)) return x > 0 ? "inf" : "-inf";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", x);
  return buf;
}

template <class T>
std::string join(const std::vector<T>& v, const std::function<std::string(const T&)>& f) {
  std::string out;
  for (std::size_t i = 0; i < v.size(); ++i) out += (i ? ", " : "") + f(v[i]);
  return out;
}

struct Key {
  const char* section;
  const char* name;
  std::function<void(RunConfig&, const std::string&)> set;
  std::function<std::string(const RunConfig&)> get;
};

#define NSASYM_DOUBLE(sec, key, field)                                                           \
  Key{sec, key, [](RunConfig& c, const std::string& v) { c.field = parse_double(v); },          \
      [](const RunConfig& c) { return format_double(c.field); }}
#define NSASYM_INT(sec, key, field)                                                              \
  Key{sec, key, [](RunConfig& c, const std::string& v) { c.field = parse_int(v); },             \
      [](const RunConfig& c) { return std::to_string(c.field); }}
#define NSASYM_BOOL(sec, key, field)                                                             \
  Key{sec, key, [](RunConfig& c, const std::string& v) { c.field = parse_bool(v); },            \
      [](const RunConfig& c) { return std::string(c.field ? "true" : "false"); }}

const std::vector<Key>& keys() {
  static const std::vector<Key> table{
      NSASYM_INT("grid", "dim", grid.dim),
      NSASYM_INT("grid", "N", grid.N),
      NSASYM_DOUBLE("grid", "L", grid.L),

      NSASYM_DOUBLE("solver", "dt", solver.dt),
      NSASYM_DOUBLE("solver", "t_end", solver.t_end),
      NSASYM_DOUBLE("solver", "t0", solver.t0),
      NSASYM_DOUBLE("solver", "ratio", solver.ratio),
      NSASYM_DOUBLE("solver", "cfl", solver.cfl),
      NSASYM_DOUBLE("solver", "dt_growth", solver.dt_growth),
      NSASYM_BOOL("solver", "dealias", solver.dealias),
      NSASYM_BOOL("solver", "nonlinear", solver.nonlinear),
      NSASYM_DOUBLE("solver", "blowup_factor", solver.blowup_factor),

      Key{"ic", "recipe", [](RunConfig& c, const std::string& v) { c.ic.recipe = parse_recipe(v); },
          [](const RunConfig& c) { return std::string(to_string(c.ic.recipe)); }},
      NSASYM_DOUBLE("ic", "amplitude", ic.amplitude),
      Key{"ic", "seed",
          [](RunConfig& c, const std::string& v) {
            const long long s = parse_integer(v);
            if (s < 0) throw InvalidArgument("seed must be non-negative");
            c.ic.seed = static_cast<std::uint64_t>(s);
          },
          [](const RunConfig& c) { return std::to_string(c.ic.seed); }},
      NSASYM_DOUBLE("ic", "width", ic.width),

      NSASYM_INT("expansion", "max_order", expansion.max_order),
      NSASYM_DOUBLE("expansion", "t_eval", expansion.t_eval),
      NSASYM_DOUBLE("expansion", "tail_tol", expansion.tail_tol),
      NSASYM_INT("expansion", "profile_N", expansion.profile_N),
      NSASYM_DOUBLE("expansion", "profile_L", expansion.profile_L),
      NSASYM_DOUBLE("expansion", "parity_tol", expansion.parity_tol),
      NSASYM_DOUBLE("expansion", "k_vanishing", expansion.k_vanishing),
      NSASYM_DOUBLE("expansion", "k_significance", expansion.k_significance),
      Key{"expansion", "j_orders",
          [](RunConfig& c, const std::string& v) {
            c.expansion.j_orders.clear();
            if (v == "none") return;
            for (const auto& s : split_list(v)) c.expansion.j_orders.push_back(parse_int(s));
          },
          [](const RunConfig& c) {
            if (c.expansion.j_orders.empty()) return std::string("none");
            return join<int>(c.expansion.j_orders, [](const int& m) { return std::to_string(m); });
          }},
      NSASYM_INT("expansion", "j_N", expansion.j_N),
      NSASYM_DOUBLE("expansion", "j_L", expansion.j_L),
      NSASYM_DOUBLE("expansion", "j_s_head", expansion.j_rule.s_head),
      NSASYM_INT("expansion", "j_panels", expansion.j_rule.panels),
      NSASYM_INT("expansion", "j_points", expansion.j_rule.points),
      NSASYM_INT("expansion", "j_head_orders", expansion.j_rule.head_orders),
      NSASYM_DOUBLE("expansion", "j_tol", expansion.j_rule.tol),
      NSASYM_INT("expansion", "j_scaling_lambda", expansion.j_scaling_lambda),
      NSASYM_DOUBLE("expansion", "j_scaling_tol", expansion.j_scaling_tol),

      Key{"verify", "q_list",
          [](RunConfig& c, const std::string& v) {
            c.verify.q_list.clear();
            for (const auto& s : split_list(v)) c.verify.q_list.push_back(parse_double(s));
          },
          [](const RunConfig& c) { return join<double>(c.verify.q_list, format_double); }},
      NSASYM_DOUBLE("verify", "window_start", verify.window_start),
      NSASYM_DOUBLE("verify", "window_end", verify.window_end),
      NSASYM_DOUBLE("verify", "slope_tol", verify.slope_tol),
      NSASYM_DOUBLE("verify", "residual_slack", verify.residual_slack),
      NSASYM_DOUBLE("verify", "residual_gap", verify.residual_gap),
      NSASYM_DOUBLE("verify", "burgers_window_start", verify.burgers_window_start),
      NSASYM_DOUBLE("verify", "control_b", verify.control_b),
  };
  return table;
}

#undef NSASYM_DOUBLE
#undef NSASYM_INT
#undef NSASYM_BOOL

const Key* find_key(const std::string& section, const std::string& name) {
  for (const auto& k : keys())
    if (section == k.section && name == k.name) return &k;
  return nullptr;
}

bool known_section(const std::string& s) {
  return s == "grid" || s == "solver" || s == "ic" || s == "expansion" || s == "verify";
}

void assign(RunConfig& c, const std::string& section, const std::string& name, const std::string& value, int line,
            const std::string& where) {
  const Key* key = find_key(section, name);
  if (!key) throw ConfigError(where + "unknown key '" + name + "' in section [" + section + "]", line);
  try {
    key->set(c, value);
  } catch (const InvalidArgument& e) {
    throw ConfigError(where + section + "." + name + ": " + e.what(), line);
  }
}

} // namespace

Grid RunConfig::make_grid() const {
  return Grid(grid.dim, grid.N, grid.L > 0.0 ? grid.L : default_half_length(solver.t_end));
}

Grid RunConfig::make_profile_grid() const {
  const Grid g = make_grid();
  return Grid(grid.dim, expansion.profile_N > 0 ? expansion.profile_N : g.n(),
              expansion.profile_L > 0.0 ? expansion.profile_L : g.half_length());
}

Grid RunConfig::make_j_grid() const {
  const Grid g = make_profile_grid();
  return Grid(grid.dim, expansion.j_N > 0 ? expansion.j_N : g.n(),
              expansion.j_L > 0.0 ? expansion.j_L : g.half_length());
}

int RunConfig::max_order() const { return expansion.max_order < 0 ? grid.dim : expansion.max_order; }

InitialDataSpec RunConfig::initial_data() const { return {ic.recipe, ic.amplitude, ic.seed, ic.width}; }

void RunConfig::validate() const {
  if (grid.dim < 1 || grid.dim > 3) throw ConfigError("grid.dim must be 1, 2 or 3, got " + std::to_string(grid.dim));
  if (grid.N < 8 || grid.N % 2 != 0) throw ConfigError("grid.N must be even and at least 8");
  if (grid.L < 0.0) throw ConfigError("grid.L must be positive (or 0 for the default)");
  try {
    solver.validate();
  } catch (const InvalidArgument& e) {
    throw ConfigError(std::string("solver: ") + e.what());
  }
  if (!(ic.amplitude >= 0.0)) throw ConfigError("ic.amplitude must be non-negative");
  if (!(ic.width > 0.0)) throw ConfigError("ic.width must be positive");
  if (expansion.max_order > grid.dim) throw ConfigError("expansion.max_order cannot exceed the dimension");
  if (!(expansion.t_eval > 0.0) || expansion.t_eval > solver.t_end)
    throw ConfigError("expansion.t_eval must lie in (0, solver.t_end]");
  if (!(expansion.tail_tol > 0.0)) throw ConfigError("expansion.tail_tol must be positive");
  if (expansion.profile_N != 0 && (expansion.profile_N < 8 || expansion.profile_N % 2 != 0))
    throw ConfigError("expansion.profile_N must be even and at least 8");
  if (expansion.j_N != 0 && (expansion.j_N < 8 || expansion.j_N % 2 != 0))
    throw ConfigError("expansion.j_N must be even and at least 8");
  if (expansion.profile_L < 0.0 || expansion.j_L < 0.0) throw ConfigError("profile half-lengths must be positive");
  if (!(expansion.parity_tol > 0.0 && expansion.k_vanishing > 0.0 && expansion.k_significance > 0.0))
    throw ConfigError("expansion tolerances must be positive");
  if (!expansion.j_orders.empty() && grid.dim != 2) throw ConfigError("expansion.j_orders needs grid.dim = 2");
  for (int m : expansion.j_orders)
    if (m < 3 || m > 4) throw ConfigError("expansion.j_orders entries must be 3 or 4");
  const auto& r = expansion.j_rule;
  if (!(r.s_head > 0.0 && r.s_head < 1.0) || r.panels < 1 || r.points < 2 || r.head_orders < 1 || !(r.tol > 0.0))
    throw ConfigError("J quadrature settings out of range");
  if (expansion.j_scaling_lambda != 0 && (expansion.j_scaling_lambda < 3 || expansion.j_scaling_lambda % 2 == 0))
    throw ConfigError("expansion.j_scaling_lambda must be an odd integer >= 3 (or 0)");
  if (verify.q_list.empty()) throw ConfigError("verify.q_list must not be empty");
  for (double q : verify.q_list)
    if (!(q >= 1.0)) throw ConfigError("verify.q_list entries must be >= 1 (inf allowed)");
  if (!(verify.window_start >= 0.0) || !(verify.window_end > verify.window_start))
    throw ConfigError("verify window must satisfy 0 <= window_start < window_end");
  if (!(verify.slope_tol > 0.0)) throw ConfigError("verify.slope_tol must be positive");
}

RunConfig parse_config(const std::string& text) {
  RunConfig c;
  std::istringstream in(text);
  std::string raw, section;
  std::set<std::pair<std::string, std::string>> seen;
  int line = 0;
  while (std::getline(in, raw)) {
    ++line;
    const auto cut = raw.find_first_of("#;");
    const std::string s = trim(cut == std::string::npos ? raw : raw.substr(0, cut));
    if (s.empty()) continue;
    if (s.front() == '[') {
      if (s.back() != ']') throw ConfigError("malformed section header '" + s + "'", line);
      section = trim(s.substr(1, s.size() - 2));
      if (!known_section(section)) throw ConfigError("unknown section [" + section + "]", line);
      continue;
    }
    const auto eq = s.find('=');
    if (eq == std::string::npos) throw ConfigError("expected 'key = value', got '" + s + "'", line);
    if (section.empty()) throw ConfigError("entry outside of any section", line);
    const std::string name = trim(s.substr(0, eq)), value = trim(s.substr(eq + 1));
    if (name.empty()) throw ConfigError("missing key before '='", line);
    if (value.empty()) throw ConfigError("missing value for '" + name + "'", line);
    if (!seen.insert({section, name}).second) throw ConfigError("duplicate key " + section + "." + name, line);
    assign(c, section, name, value, line, "");
  }
  return c;
}

RunConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw IoError("cannot open config file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  try {
    return parse_config(ss.str());
  } catch (const ConfigError& e) {
    throw ConfigError(path + ": " + e.what(), e.line());
  }
}

void apply_override(RunConfig& config, const std::string& assignment) {
  const auto eq = assignment.find('=');
  const auto dot = assignment.find('.');
  if (eq == std::string::npos || dot == std::string::npos || dot > eq)
    throw ConfigError("override '" + assignment + "' must look like section.key=value");
  const std::string section = trim(assignment.substr(0, dot)), name = trim(assignment.substr(dot + 1, eq - dot - 1));
  const std::string value = trim(assignment.substr(eq + 1));
  if (!known_section(section)) throw ConfigError("override '" + assignment + "': unknown section [" + section + "]");
  if (value.empty()) throw ConfigError("override '" + assignment + "': missing value");
  assign(config, section, name, value, 0, "override '" + assignment + "': ");
}

std::string to_ini(const RunConfig& config) {
  std::string out, section;
  for (const auto& k : keys()) {
    if (section != k.section) {
      section = k.section;
      out += (out.empty() ? "[" : "\n[") + section + "]\n";
    }
    out += std::string(k.name) + " = " + k.get(config) + "\n";
  }
  return out;
}

} // namespace nsasym
