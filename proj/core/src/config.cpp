#include "rayleigh/config.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/json_parser.hpp>
#include <boost/property_tree/ptree.hpp>

#include "rayleigh/errors.hpp"

namespace rayleigh {

namespace {

namespace pt = boost::property_tree;

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

/// Line of `key` inside `[section]` of an INI text; 0 when not found (or JSON).
int ini_line(const std::string& text, const std::string& section, const std::string& key) {
  std::istringstream in(text);
  std::string line, current;
  int no = 0;
  while (std::getline(in, line)) {
    ++no;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[' && t.back() == ']') {
      current = trim(t.substr(1, t.size() - 2));
      continue;
    }
    const auto eq = t.find('=');
    if (eq != std::string::npos && current == section && trim(t.substr(0, eq)) == key) return no;
    if (section.empty() && current.empty() && trim(t.substr(0, eq)) == key) return no;
  }
  return 0;
}

double to_double(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const double d = std::stod(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected a number, got '" + v + "'", line);
}

long long to_integer(const std::string& key, const std::string& v, int line) {
  try {
    std::size_t pos = 0;
    const long long d = std::stoll(v, &pos);
    if (trim(v.substr(pos)).empty()) return d;
  } catch (const std::exception&) {
  }
  throw ConfigError("key '" + key + "': expected an integer, got '" + v + "'", line);
}

bool to_bool(const std::string& key, const std::string& v, int line) {
  std::string s = v;
  std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
  if (s == "true" || s == "1" || s == "yes" || s == "on") return true;
  if (s == "false" || s == "0" || s == "no" || s == "off") return false;
  throw ConfigError("key '" + key + "': expected a boolean, got '" + v + "'", line);
}

std::vector<double> to_list(const std::string& key, const std::string& v, int line) {
  std::vector<double> out;
  std::string item;
  std::istringstream in(v);
  while (std::getline(in, item, ',')) {
    item = trim(item);
    if (item.empty()) continue;
    out.push_back(to_double(key, item, line));
  }
  return out;
}

using Setter = std::function<void(RunConfig&, const pt::ptree&, const std::string&, int)>;

std::map<std::string, Setter> setters() {
  auto str = [](const pt::ptree& n) { return trim(n.get_value<std::string>()); };
  std::map<std::string, Setter> m;
#define RL_DOUBLE(name, member) \
  m[name] = [str](RunConfig& c, const pt::ptree& n, const std::string& k, int line) { c.member = to_double(k, str(n), line); }
#define RL_INT(name, member)                                                                          \
  m[name] = [str](RunConfig& c, const pt::ptree& n, const std::string& k, int line) {                 \
    c.member = static_cast<decltype(c.member)>(to_integer(k, str(n), line));                          \
  }
#define RL_BOOL(name, member) \
  m[name] = [str](RunConfig& c, const pt::ptree& n, const std::string& k, int line) { c.member = to_bool(k, str(n), line); }
#define RL_STRING(name, member) \
  m[name] = [str](RunConfig& c, const pt::ptree& n, const std::string&, int) { c.member = str(n); }
  RL_INT("grid.n_v", grid.n_v);
  RL_DOUBLE("grid.v_max", grid.v_max);
  RL_STRING("collision.backend", collision.backend);
  RL_DOUBLE("collision.nu0", collision.nu0);
  RL_INT("collision.angular_order", collision.angular_order);
  RL_INT("collision.gamma_angular_order", collision.gamma_angular_order);
  RL_INT("collision.matrix_byte_budget", collision.matrix_byte_budget);
  RL_STRING("collision.cache_dir", collision.cache_dir);
  RL_DOUBLE("profile.u_b", profile.u_b);
  RL_DOUBLE("profile.delta", profile.delta);
  RL_STRING("profile.kappa_mode", profile.kappa_mode);
  RL_DOUBLE("profile.kappa", profile.kappa);
  RL_INT("slab.n_x", slab.n_x);
  RL_DOUBLE("slab.x_max", slab.x_max);
  RL_DOUBLE("slab.t_final", slab.t_final);
  RL_DOUBLE("slab.cfl", slab.cfl);
  RL_STRING("slab.mode", slab.mode);
  RL_BOOL("slab.include_Ltilde", slab.include_Ltilde);
  RL_BOOL("slab.include_GammaRR", slab.include_GammaRR);
  RL_INT("slab.transport_order", slab.transport_order);
  RL_DOUBLE("slab.output_cadence", slab.output_cadence);
  RL_DOUBLE("slab.epsilon", slab.epsilon);
  RL_DOUBLE("slab.beta", slab.beta);
  RL_STRING("output.directory", output.directory);
#undef RL_DOUBLE
#undef RL_INT
#undef RL_BOOL
#undef RL_STRING
  m["sweep.epsilons"] = [str](RunConfig& c, const pt::ptree& n, const std::string& k, int line) {
    if (n.empty()) {
      c.sweep.epsilons = to_list(k, str(n), line);
      return;
    }
    c.sweep.epsilons.clear();
    for (const auto& child : n) c.sweep.epsilons.push_back(to_double(k, trim(child.second.get_value<std::string>()), line));
  };
  return m;
}

RunConfig from_tree(const pt::ptree& tree, const std::string& text, bool json) {
  RunConfig cfg;
  const auto table = setters();
  for (const auto& [section, node] : tree) {
    if (node.empty()) {
      if (node.data().empty()) continue;  // empty section
      if (json) throw ConfigError("top-level entry '" + section + "' must be a section object");
      throw ConfigError("key '" + section + "' outside any [section]", ini_line(text, "", section));
    }
    for (const auto& [key, value] : node) {
      const std::string full = section + "." + key;
      const int line = json ? 0 : ini_line(text, section, key);
      const auto it = table.find(full);
      if (it == table.end()) throw ConfigError("unknown key '" + full + "'", line);
      try {
        it->second(cfg, value, full, line);
      } catch (const pt::ptree_error& e) {
        throw ConfigError("key '" + full + "': " + e.what(), line);
      }
    }
  }
  return cfg;
}

void require(bool ok, const std::string& key, const std::string& why) {
  if (!ok) throw ConfigError("invalid value for '" + key + "': " + why);
}

}  // namespace

RunConfig parse_config_string(const std::string& text, bool json) {
  pt::ptree tree;
  std::istringstream in(text);
  try {
    if (json)
      pt::read_json(in, tree);
    else
      pt::read_ini(in, tree);
  } catch (const pt::file_parser_error& e) {
    throw ConfigError(e.message(), static_cast<int>(e.line()));
  }
  RunConfig cfg = from_tree(tree, text, json);
  validate(cfg);
  return cfg;
}

RunConfig parse_config(const std::string& path) {
  std::ifstream f(path, std::ios::binary);
  if (!f) throw ConfigError("cannot open configuration file '" + path + "'");
  std::stringstream ss;
  ss << f.rdbuf();
  const bool json = path.size() >= 5 && path.substr(path.size() - 5) == ".json";
  return parse_config_string(ss.str(), json);
}

void validate(RunConfig& c) {
  c.warnings.clear();
  require(c.grid.n_v >= 2, "grid.n_v", "need at least 2 nodes per axis");
  require(c.grid.v_max > 0.0, "grid.v_max", "must be positive");
  try {
    (void)backend_from_string(c.collision.backend);
  } catch (const ConfigError& e) {
    require(false, "collision.backend", e.what());
  }
  require(c.collision.nu0 > 0.0, "collision.nu0", "must be positive");
  require(c.collision.angular_order >= 8, "collision.angular_order", "must be at least 8");
  require(c.collision.gamma_angular_order >= 0, "collision.gamma_angular_order", "must be non-negative");
  require(c.collision.matrix_byte_budget > 0, "collision.matrix_byte_budget", "must be positive");
  require(c.profile.u_b >= 0.0 && std::isfinite(c.profile.u_b), "profile.u_b", "must be non-negative");
  require(c.profile.delta > 0.0, "profile.delta", "must be positive");
  require(c.profile.kappa_mode == "computed" || c.profile.kappa_mode == "fixed", "profile.kappa_mode",
          "expected computed or fixed");
  require(c.profile.kappa > 0.0, "profile.kappa", "must be positive");
  require(c.slab.n_x >= 4, "slab.n_x", "need at least 4 cells");
  require(c.slab.x_max >= 0.0, "slab.x_max", "must be non-negative (0 selects the far-field bound)");
  require(c.slab.t_final > 0.0, "slab.t_final", "must be positive");
  require(c.slab.cfl > 0.0 && c.slab.cfl <= 1.0, "slab.cfl", "must lie in (0, 1]");
  try {
    (void)slab_mode_from_string(c.slab.mode);
  } catch (const ConfigError& e) {
    require(false, "slab.mode", e.what());
  }
  require(c.slab.transport_order == 1 || c.slab.transport_order == 2, "slab.transport_order", "must be 1 or 2");
  require(c.slab.output_cadence > 0.0 && std::llround(c.slab.t_final / c.slab.output_cadence) >= 2,
          "slab.output_cadence", "must be positive and at most t_final / 2");
  require(c.slab.epsilon > 0.0 && c.slab.epsilon < 1.0, "slab.epsilon", "need 0 < eps << 1");
  require(c.slab.beta > 0.0 && c.slab.beta <= 0.125, "slab.beta", "must lie in (0, 1/8]");
  require(!c.sweep.epsilons.empty(), "sweep.epsilons", "list is empty");
  for (std::size_t i = 0; i < c.sweep.epsilons.size(); ++i) {
    const double e = c.sweep.epsilons[i];
    require(e > 0.0 && e < 1.0, "sweep.epsilons", "need 0 < eps << 1, got " + std::to_string(e));
    if (i > 0) require(e < c.sweep.epsilons[i - 1], "sweep.epsilons", "must be strictly decreasing");
  }
  require(!c.output.directory.empty(), "output.directory", "must not be empty");
  if (c.profile.u_b * std::sqrt(c.slab.t_final) >= 0.2) {
    std::ostringstream os;
    os << "u_b * sqrt(t_final) = " << c.profile.u_b * std::sqrt(c.slab.t_final)
       << " is not small; the small-data regime needs it well below 0.2";
    c.warnings.push_back(os.str());
  }
}

std::vector<std::pair<std::string, std::string>> config_entries(const RunConfig& c) {
  auto d = [](double x) {
    std::ostringstream os;
    os.precision(17);
    os << x;
    return os.str();
  };
  std::string eps;
  for (std::size_t i = 0; i < c.sweep.epsilons.size(); ++i) eps += (i ? "," : "") + d(c.sweep.epsilons[i]);
  return {
      {"grid.n_v", std::to_string(c.grid.n_v)},
      {"grid.v_max", d(c.grid.v_max)},
      {"collision.backend", c.collision.backend},
      {"collision.nu0", d(c.collision.nu0)},
      {"collision.angular_order", std::to_string(c.collision.angular_order)},
      {"collision.gamma_angular_order", std::to_string(c.collision.gamma_angular_order)},
      {"collision.matrix_byte_budget", std::to_string(c.collision.matrix_byte_budget)},
      {"collision.cache_dir", c.collision.cache_dir},
      {"profile.u_b", d(c.profile.u_b)},
      {"profile.delta", d(c.profile.delta)},
      {"profile.kappa_mode", c.profile.kappa_mode},
      {"profile.kappa", d(c.profile.kappa)},
      {"slab.n_x", std::to_string(c.slab.n_x)},
      {"slab.x_max", d(c.slab.x_max)},
      {"slab.t_final", d(c.slab.t_final)},
      {"slab.cfl", d(c.slab.cfl)},
      {"slab.mode", c.slab.mode},
      {"slab.include_Ltilde", c.slab.include_Ltilde ? "true" : "false"},
      {"slab.include_GammaRR", c.slab.include_GammaRR ? "true" : "false"},
      {"slab.transport_order", std::to_string(c.slab.transport_order)},
      {"slab.output_cadence", d(c.slab.output_cadence)},
      {"slab.epsilon", d(c.slab.epsilon)},
      {"slab.beta", d(c.slab.beta)},
      {"sweep.epsilons", eps},
      {"output.directory", c.output.directory},
  };
}

CollisionSettings collision_settings(const RunConfig& c) {
  CollisionSettings s;
  s.backend = backend_from_string(c.collision.backend);
  s.nu0 = c.collision.nu0;
  s.angular_order = c.collision.angular_order;
  s.gamma_angular_order = c.collision.gamma_angular_order;
  s.matrix_byte_budget = c.collision.matrix_byte_budget;
  s.cache_dir = c.collision.cache_dir;
  return s;
}

SlabConfig slab_config(const RunConfig& c, double eps) {
  SlabConfig s;
  s.eps = eps;
  s.n_x = c.slab.n_x;
  s.x_max = c.slab.x_max;
  s.t_final = c.slab.t_final;
  s.cfl = c.slab.cfl;
  s.mode = slab_mode_from_string(c.slab.mode);
  s.include_Ltilde = c.slab.include_Ltilde;
  s.include_GammaRR = c.slab.include_GammaRR;
  s.transport_order = c.slab.transport_order;
  s.output_interval = c.slab.output_cadence;
  s.beta = c.slab.beta;
  return s;
}

}  // namespace rayleigh
