#include "lpwan/config.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cstdio>
#include <fstream>
#include <functional>
#include <map>
#include <set>
#include <sstream>

namespace lpwan {

ConfigError::ConfigError(const std::string& what, int line)
    : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line) {}

SimConfig base_config() {
  SimConfig cfg;
  cfg.n_devices = 1000;
  cfg.cell_radius_m = 2000.0;
  cfg.phy = PhyParams{};
  cfg.phy.bandwidth_hz = 125e3;
  cfg.phy.code_rate = 0.8;
  cfg.phy.snr_thresholds_db = {-6.0, -9.0, -12.0, -15.0, -17.5, -20.0};
  cfg.phy.sir_threshold_db = 6.0;
  cfg.phy.power_set_dbm = {8.0, 14.0};
  cfg.phy.circuit_power_dbm = 10.0;
  cfg.phy.pa_inverse_efficiency = 2.0;
  cfg.fixed_power_dbm = 14.0;
  cfg.learning.alpha = 0.1;
  cfg.learning.beta = 0.5;
  cfg.learning.rho = 0.4;
  return cfg;
}

std::vector<std::string> preset_names() { return {"sc1", "sc2", "sc3", "fig3"}; }

ExternalInterference spread_erasures(const SimConfig& cfg, double worst, double best) {
  ExternalInterference ext;
  const std::size_t pairs = cfg.sf_set.size() * static_cast<std::size_t>(cfg.phy.num_channels);
  std::size_t i = 0;
  for (int sf : cfg.sf_set) {
    for (int ch = 0; ch < cfg.phy.num_channels; ++ch, ++i) {
      const double t = pairs > 1 ? static_cast<double>(i) / static_cast<double>(pairs - 1) : 1.0;
      ext.erasure_prob[{sf, ch}] = worst + t * (best - worst);
    }
  }
  return ext;
}

SimConfig load_preset(const std::string& name) {
  SimConfig cfg = base_config();
  if (name == "sc1") {
    // aggregate arrival rate N_d / T_rep = 12.5 per second
    cfg.t_rep_s = 80.0;
    cfg.payload_bytes = 100;
    cfg.phy.num_channels = 1;
    cfg.packets_per_device = 200;
  } else if (name == "sc2") {
    // 2.5 per second
    cfg.t_rep_s = 400.0;
    cfg.payload_bytes = 20;
    cfg.phy.num_channels = 1;
    cfg.packets_per_device = 200;
    cfg.external = spread_erasures(cfg);
  } else if (name == "sc3") {
    cfg.t_rep_s = 400.0;
    cfg.payload_bytes = 20;
    cfg.phy.num_channels = 3;
    cfg.sf_set = {9};
    cfg.packets_per_device = 200;
    cfg.external = spread_erasures(cfg);
  } else if (name == "fig3") {
    cfg.t_rep_s = 200.0;
    cfg.payload_bytes = 100;
    cfg.phy.num_channels = 1;
    cfg.sf_set = {7, 10};
    cfg.packets_per_device = 100;
  } else {
    std::string valid;
    for (const auto& n : preset_names()) valid += (valid.empty() ? "" : ", ") + n;
    throw std::invalid_argument("unknown preset '" + name + "' (valid: " + valid + ")");
  }
  return cfg;
}

namespace {

std::string trim(std::string_view s) {
  const auto first = s.find_first_not_of(" \t\r");
  if (first == std::string_view::npos) return {};
  const auto last = s.find_last_not_of(" \t\r");
  return std::string(s.substr(first, last - first + 1));
}

std::string format_double(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

double to_double(const std::string& text, const std::string& key, int line) {
  double v = 0.0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("key '" + key + "' expects a number, got '" + text + "'", line);
  }
  return v;
}

std::uint64_t to_uint(const std::string& text, const std::string& key, int line) {
  std::uint64_t v = 0;
  const auto* end = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(text.data(), end, v);
  if (ec != std::errc{} || ptr != end) {
    throw ConfigError("key '" + key + "' expects a non-negative integer, got '" + text + "'", line);
  }
  return v;
}

bool to_bool(const std::string& text, const std::string& key, int line) {
  if (text == "true" || text == "1") return true;
  if (text == "false" || text == "0") return false;
  throw ConfigError("key '" + key + "' expects true or false, got '" + text + "'", line);
}

std::vector<std::string> split_list(const std::string& text) {
  std::vector<std::string> items;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

template <class T>
std::string join(const std::vector<T>& values, const std::function<std::string(const T&)>& fmt) {
  std::string out;
  for (const auto& v : values) out += (out.empty() ? "" : ", ") + fmt(v);
  return out;
}

// One configuration key: how to print it, how to store it, and its JSON shape.
struct Field {
  std::string section;
  std::string key;
  std::function<std::string(const SimConfig&)> get;
  std::function<void(SimConfig&, const std::string&, int)> set;
  std::function<nlohmann::json(const SimConfig&)> json;
};

template <class Getter>
Field scalar(const std::string& section, const std::string& key, Getter ref) {
  return Field{
      section, key, [ref](const SimConfig& c) { return format_double(ref(const_cast<SimConfig&>(c))); },
      [ref, key](SimConfig& c, const std::string& v, int line) { ref(c) = to_double(v, key, line); },
      [ref](const SimConfig& c) { return nlohmann::json(ref(const_cast<SimConfig&>(c))); }};
}

template <class Getter>
Field integer(const std::string& section, const std::string& key, Getter ref) {
  return Field{section, key,
               [ref](const SimConfig& c) { return std::to_string(ref(const_cast<SimConfig&>(c))); },
               [ref, key](SimConfig& c, const std::string& v, int line) {
                 using T = std::remove_reference_t<decltype(ref(c))>;
                 ref(c) = static_cast<T>(to_uint(v, key, line));
               },
               [ref](const SimConfig& c) { return nlohmann::json(ref(const_cast<SimConfig&>(c))); }};
}

template <class Getter>
Field boolean(const std::string& section, const std::string& key, Getter ref) {
  return Field{section, key,
               [ref](const SimConfig& c) {
                 return std::string(ref(const_cast<SimConfig&>(c)) ? "true" : "false");
               },
               [ref, key](SimConfig& c, const std::string& v, int line) { ref(c) = to_bool(v, key, line); },
               [ref](const SimConfig& c) { return nlohmann::json(ref(const_cast<SimConfig&>(c))); }};
}

const std::vector<Field>& fields() {
  static const std::vector<Field> table = [] {
    std::vector<Field> f;
    // [phy]
    f.push_back(scalar("phy", "bandwidth_hz", [](SimConfig& c) -> double& { return c.phy.bandwidth_hz; }));
    f.push_back(scalar("phy", "code_rate", [](SimConfig& c) -> double& { return c.phy.code_rate; }));
    f.push_back(Field{
        "phy", "snr_thresholds_db",
        [](const SimConfig& c) {
          return join<double>({c.phy.snr_thresholds_db.begin(), c.phy.snr_thresholds_db.end()}, format_double);
        },
        [](SimConfig& c, const std::string& v, int line) {
          const auto items = split_list(v);
          if (items.size() != c.phy.snr_thresholds_db.size()) {
            throw ConfigError("key 'snr_thresholds_db' expects 6 values (SF 7..12)", line);
          }
          for (std::size_t i = 0; i < items.size(); ++i) {
            c.phy.snr_thresholds_db[i] = to_double(items[i], "snr_thresholds_db", line);
          }
        },
        [](const SimConfig& c) { return nlohmann::json(c.phy.snr_thresholds_db); }});
    f.push_back(scalar("phy", "sir_threshold_db", [](SimConfig& c) -> double& { return c.phy.sir_threshold_db; }));
    f.push_back(Field{
        "phy", "power_set_dbm",
        [](const SimConfig& c) { return join<double>(c.phy.power_set_dbm, format_double); },
        [](SimConfig& c, const std::string& v, int line) {
          c.phy.power_set_dbm.clear();
          for (const auto& item : split_list(v)) c.phy.power_set_dbm.push_back(to_double(item, "power_set_dbm", line));
        },
        [](const SimConfig& c) { return nlohmann::json(c.phy.power_set_dbm); }});
    f.push_back(integer("phy", "num_channels", [](SimConfig& c) -> int& { return c.phy.num_channels; }));
    f.push_back(scalar("phy", "noise_psd_dbm_hz", [](SimConfig& c) -> double& { return c.phy.noise_psd_dbm_hz; }));
    f.push_back(scalar("phy", "noise_figure_db", [](SimConfig& c) -> double& { return c.phy.noise_figure_db; }));
    f.push_back(scalar("phy", "pa_inverse_efficiency",
                       [](SimConfig& c) -> double& { return c.phy.pa_inverse_efficiency; }));
    f.push_back(scalar("phy", "circuit_power_dbm", [](SimConfig& c) -> double& { return c.phy.circuit_power_dbm; }));
    f.push_back(scalar("phy", "pathloss_gain", [](SimConfig& c) -> double& { return c.pathloss.gain; }));
    f.push_back(scalar("phy", "pathloss_exponent", [](SimConfig& c) -> double& { return c.pathloss.exponent; }));
    // [sim]
    f.push_back(integer("sim", "n_devices", [](SimConfig& c) -> std::size_t& { return c.n_devices; }));
    f.push_back(scalar("sim", "density_per_m2", [](SimConfig& c) -> double& { return c.density_per_m2; }));
    f.push_back(scalar("sim", "cell_radius_m", [](SimConfig& c) -> double& { return c.cell_radius_m; }));
    f.push_back(scalar("sim", "t_rep_s", [](SimConfig& c) -> double& { return c.t_rep_s; }));
    f.push_back(integer("sim", "payload_bytes", [](SimConfig& c) -> std::size_t& { return c.payload_bytes; }));
    f.push_back(Field{
        "sim", "sf_set",
        [](const SimConfig& c) { return join<int>(c.sf_set, [](const int& v) { return std::to_string(v); }); },
        [](SimConfig& c, const std::string& v, int line) {
          c.sf_set.clear();
          for (const auto& item : split_list(v)) {
            c.sf_set.push_back(static_cast<int>(to_uint(item, "sf_set", line)));
          }
        },
        [](const SimConfig& c) { return nlohmann::json(c.sf_set); }});
    f.push_back(boolean("sim", "power_control", [](SimConfig& c) -> bool& { return c.power_control; }));
    f.push_back(scalar("sim", "fixed_power_dbm", [](SimConfig& c) -> double& { return c.fixed_power_dbm; }));
    f.push_back(Field{
        "sim", "algorithm", [](const SimConfig& c) { return to_string(c.algorithm); },
        [](SimConfig& c, const std::string& v, int line) {
          try {
            c.algorithm = parse_algorithm(v);
          } catch (const std::invalid_argument& e) {
            throw ConfigError(e.what(), line);
          }
        },
        [](const SimConfig& c) { return nlohmann::json(to_string(c.algorithm)); }});
    f.push_back(integer("sim", "packets_per_device",
                        [](SimConfig& c) -> std::size_t& { return c.packets_per_device; }));
    f.push_back(integer("sim", "seed", [](SimConfig& c) -> std::uint64_t& { return c.seed; }));
    f.push_back(boolean("sim", "independent_fading", [](SimConfig& c) -> bool& { return c.independent_fading; }));
    // [learning]
    f.push_back(scalar("learning", "beta", [](SimConfig& c) -> double& { return c.learning.beta; }));
    f.push_back(scalar("learning", "alpha", [](SimConfig& c) -> double& { return c.learning.alpha; }));
    f.push_back(scalar("learning", "rho", [](SimConfig& c) -> double& { return c.learning.rho; }));
    f.push_back(Field{
        "learning", "ucb_index",
        [](const SimConfig& c) {
          return std::string(c.learning.ucb_index == UcbIndex::Mean ? "mean" : "accumulated");
        },
        [](SimConfig& c, const std::string& v, int line) {
          if (v == "mean") c.learning.ucb_index = UcbIndex::Mean;
          else if (v == "accumulated") c.learning.ucb_index = UcbIndex::Accumulated;
          else throw ConfigError("key 'ucb_index' expects mean or accumulated, got '" + v + "'", line);
        },
        [](const SimConfig& c) {
          return nlohmann::json(c.learning.ucb_index == UcbIndex::Mean ? "mean" : "accumulated");
        }});
    f.push_back(Field{
        "learning", "reward_mode",
        [](const SimConfig& c) {
          return std::string(c.learning.reward_mode == RewardMode::Frugal ? "frugal" : "literal");
        },
        [](SimConfig& c, const std::string& v, int line) {
          if (v == "frugal") c.learning.reward_mode = RewardMode::Frugal;
          else if (v == "literal") c.learning.reward_mode = RewardMode::Literal;
          else throw ConfigError("key 'reward_mode' expects frugal or literal, got '" + v + "'", line);
        },
        [](const SimConfig& c) {
          return nlohmann::json(c.learning.reward_mode == RewardMode::Frugal ? "frugal" : "literal");
        }});
    // [external]: "sf:channel = p" pairs
    f.push_back(Field{
        "external", "erasure_prob",
        [](const SimConfig& c) {
          std::string out;
          for (const auto& [key, p] : c.external.erasure_prob) {
            out += (out.empty() ? "" : ", ") + std::to_string(key.first) + ":" + std::to_string(key.second) +
                   "=" + format_double(p);
          }
          return out;
        },
        [](SimConfig& c, const std::string& v, int line) {
          c.external.erasure_prob.clear();
          for (const auto& item : split_list(v)) {
            const auto colon = item.find(':');
            const auto eq = item.find('=');
            if (colon == std::string::npos || eq == std::string::npos || eq < colon) {
              throw ConfigError("erasure_prob entries look like <sf>:<channel>=<prob>, got '" + item + "'",
                                line);
            }
            const int sf = static_cast<int>(to_uint(trim(item.substr(0, colon)), "erasure_prob", line));
            const int ch = static_cast<int>(to_uint(trim(item.substr(colon + 1, eq - colon - 1)), "erasure_prob", line));
            c.external.erasure_prob[{sf, ch}] = to_double(trim(item.substr(eq + 1)), "erasure_prob", line);
          }
        },
        [](const SimConfig& c) {
          nlohmann::json arr = nlohmann::json::array();
          for (const auto& [key, p] : c.external.erasure_prob) {
            arr.push_back({{"sf", key.first}, {"channel", key.second}, {"prob", p}});
          }
          return arr;
        }});
    // [adversary]
    f.push_back(scalar("adversary", "flip_prob", [](SimConfig& c) -> double& { return c.adversary.flip_prob; }));
    return f;
  }();
  return table;
}

const std::set<std::string> kSections{"phy", "sim", "learning", "external", "adversary"};
const std::vector<ConfigKey> kRequired{{"sim", "n_devices"}, {"sim", "t_rep_s"}, {"sim", "payload_bytes"}};

}  // namespace

std::vector<ConfigKey> config_keys() {
  std::vector<ConfigKey> keys;
  for (const Field& f : fields()) keys.push_back({f.section, f.key});
  return keys;
}

SimConfig parse_config(std::string_view text) {
  SimConfig cfg = base_config();
  std::string section;
  std::set<std::pair<std::string, std::string>> seen;
  std::istringstream in{std::string(text)};
  std::string raw;
  int line_no = 0;
  while (std::getline(in, raw)) {
    ++line_no;
    const auto hash = raw.find('#');
    const std::string line = trim(hash == std::string::npos ? raw : raw.substr(0, hash));
    if (line.empty()) continue;
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError("malformed section header '" + line + "'", line_no);
      section = trim(line.substr(1, line.size() - 2));
      if (!kSections.contains(section)) throw ConfigError("unknown section [" + section + "]", line_no);
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError("expected key = value, got '" + line + "'", line_no);
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (section.empty()) throw ConfigError("key '" + key + "' appears before any section", line_no);

    const auto& table = fields();
    const auto it = std::find_if(table.begin(), table.end(),
                                 [&](const Field& f) { return f.section == section && f.key == key; });
    if (it == table.end()) throw ConfigError("unknown key '" + key + "' in [" + section + "]", line_no);
    if (!seen.insert({section, key}).second) throw ConfigError("duplicate key '" + key + "'", line_no);
    it->set(cfg, value, line_no);
  }
  for (const auto& req : kRequired) {
    if (!seen.contains({req.section, req.key})) {
      throw ConfigError("missing required key [" + req.section + "] " + req.key);
    }
  }
  try {
    validate(cfg);
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("invalid configuration: ") + e.what());
  }
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config file '" + path + "'");
  std::stringstream buf;
  buf << in.rdbuf();
  return parse_config(buf.str());
}

std::string dump_config(const SimConfig& cfg) {
  std::string out;
  std::string section;
  for (const Field& f : fields()) {
    if (f.section != section) {
      section = f.section;
      out += "[" + section + "]\n";
    }
    out += f.key + " = " + f.get(cfg) + "\n";
  }
  return out;
}

nlohmann::json config_to_json(const SimConfig& cfg) {
  nlohmann::json j = nlohmann::json::object();
  for (const Field& f : fields()) j[f.section][f.key] = f.json(cfg);
  return j;
}

}  // namespace lpwan
