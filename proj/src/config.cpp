#include "adrx/config.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>

#include "adrx/errors.hpp"

namespace adrx::hx {

namespace {

std::string trim(const std::string& s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return s.substr(b, e - b);
}

// Strips a trailing comment, respecting double quotes.
std::string strip_comment(const std::string& line) {
  bool quoted = false;
  for (std::size_t i = 0; i < line.size(); ++i) {
    if (line[i] == '"') quoted = !quoted;
    if (line[i] == '#' && !quoted) return line.substr(0, i);
  }
  return line;
}

bool valid_identifier(const std::string& s) {
  if (s.empty()) return false;
  for (char c : s)
    if (!std::isalnum(static_cast<unsigned char>(c)) && c != '_') return false;
  return true;
}

// Splits an array body on top-level commas (no nested arrays supported).
std::vector<std::string> split_array(const std::string& body, const std::string& where) {
  std::vector<std::string> parts;
  std::string cur;
  bool quoted = false;
  for (char c : body) {
    if (c == '"') quoted = !quoted;
    if (c == '[' && !quoted) throw ParseError(where + ": nested arrays are not supported");
    if (c == ',' && !quoted) {
      parts.push_back(cur);
      cur.clear();
    } else {
      cur += c;
    }
  }
  if (!trim(cur).empty() || !parts.empty()) parts.push_back(cur);
  return parts;
}

}  // namespace

ConfigText::Value ConfigText::parse_value(const std::string& raw, const std::string& where) {
  const std::string text = trim(raw);
  if (text.empty()) throw ParseError(where + ": missing value");
  Value v;
  if (text.front() == '"') {
    if (text.size() < 2 || text.back() != '"' ||
        std::count(text.begin(), text.end(), '"') != 2)
      throw ParseError(where + ": malformed string literal");
    v.kind = Value::Kind::string;
    v.str = text.substr(1, text.size() - 2);
    return v;
  }
  if (text == "true" || text == "false") {
    v.kind = Value::Kind::boolean;
    v.flag = text == "true";
    return v;
  }
  if (text.front() == '[') {
    if (text.back() != ']') throw ParseError(where + ": unterminated array");
    v.kind = Value::Kind::array;
    for (const std::string& part : split_array(text.substr(1, text.size() - 2), where)) {
      if (trim(part).empty()) throw ParseError(where + ": empty array element");
      v.items.push_back(parse_value(part, where));
    }
    return v;
  }
  char* end = nullptr;
  v.num = std::strtod(text.c_str(), &end);
  if (end != text.c_str() + text.size())
    throw ParseError(where + ": cannot parse value '" + text + "'");
  v.kind = Value::Kind::number;
  return v;
}

ConfigText ConfigText::parse_string(const std::string& text, const std::string& origin) {
  ConfigText out;
  std::istringstream in(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const std::string where = origin + ":" + std::to_string(lineno);
    const std::string body = trim(strip_comment(line));
    if (body.empty()) continue;
    if (body.front() == '[') {
      if (body.back() != ']') throw ParseError(where + ": unterminated section header");
      section = trim(body.substr(1, body.size() - 2));
      if (!valid_identifier(section)) throw ParseError(where + ": bad section name");
      continue;
    }
    const std::size_t eq = body.find('=');
    if (eq == std::string::npos) throw ParseError(where + ": expected 'key = value'");
    const std::string key = trim(body.substr(0, eq));
    if (!valid_identifier(key)) throw ParseError(where + ": bad key name '" + key + "'");
    const std::string full = section.empty() ? key : section + "." + key;
    if (out.values_.count(full)) throw ParseError(where + ": duplicate key '" + full + "'");
    out.values_.emplace(full, parse_value(body.substr(eq + 1), where + " (" + full + ")"));
  }
  return out;
}

ConfigText ConfigText::parse_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open config file: " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_string(buf.str(), path.string());
}

const ConfigText::Value* ConfigText::find(const std::string& key) const {
  const auto it = values_.find(key);
  return it == values_.end() ? nullptr : &it->second;
}

bool ConfigText::has(const std::string& key) const { return find(key) != nullptr; }

double ConfigText::get_double(const std::string& key, double fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::number) throw ConfigError(key + ": expected a number");
  return v->num;
}

long ConfigText::get_int(const std::string& key, long fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::number || v->num != std::floor(v->num) ||
      std::abs(v->num) > 9.0e15)
    throw ConfigError(key + ": expected an integer");
  return static_cast<long>(v->num);
}

bool ConfigText::get_bool(const std::string& key, bool fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::boolean) throw ConfigError(key + ": expected true or false");
  return v->flag;
}

std::string ConfigText::get_string(const std::string& key, const std::string& fallback) const {
  const Value* v = find(key);
  if (!v) return fallback;
  if (v->kind != Value::Kind::string) throw ConfigError(key + ": expected a string");
  return v->str;
}

std::vector<double> ConfigText::get_double_list(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return {};
  if (v->kind == Value::Kind::number) return {v->num};
  if (v->kind != Value::Kind::array) throw ConfigError(key + ": expected a number or array");
  std::vector<double> out;
  for (const Value& item : v->items) {
    if (item.kind != Value::Kind::number) throw ConfigError(key + ": expected numeric elements");
    out.push_back(item.num);
  }
  return out;
}

std::vector<std::uint64_t> ConfigText::get_u64_list(const std::string& key) const {
  std::vector<std::uint64_t> out;
  for (double v : get_double_list(key)) {
    if (v < 0.0 || v != std::floor(v) || v > 9.0e15)
      throw ConfigError(key + ": expected non-negative integers");
    out.push_back(static_cast<std::uint64_t>(v));
  }
  return out;
}

std::vector<std::string> ConfigText::get_string_list(const std::string& key) const {
  const Value* v = find(key);
  if (!v) return {};
  if (v->kind == Value::Kind::string) return {v->str};
  if (v->kind != Value::Kind::array) throw ConfigError(key + ": expected a string or array");
  std::vector<std::string> out;
  for (const Value& item : v->items) {
    if (item.kind != Value::Kind::string) throw ConfigError(key + ": expected string elements");
    out.push_back(item.str);
  }
  return out;
}

std::vector<std::string> ConfigText::keys() const {
  std::vector<std::string> out;
  for (const auto& [k, v] : values_) out.push_back(k);
  return out;
}

namespace {

[[noreturn]] void bad_enum(const std::string& what, const std::string& got,
                           const std::string& allowed) {
  throw ConfigError(what + ": unknown value '" + got + "' (allowed: " + allowed + ")");
}

}  // namespace

Scenario scenario_from_string(const std::string& s) {
  if (s == "siso_linear") return Scenario::siso_linear;
  if (s == "siso_tanh") return Scenario::siso_tanh;
  if (s == "siso_trace") return Scenario::siso_trace;
  if (s == "mimo_linear") return Scenario::mimo_linear;
  if (s == "mimo_tanh") return Scenario::mimo_tanh;
  if (s == "mimo_trace") return Scenario::mimo_trace;
  if (s == "mimo_modular") return Scenario::mimo_modular;
  bad_enum("experiment.scenario", s,
           "siso_linear siso_tanh siso_trace mimo_linear mimo_tanh mimo_trace mimo_modular");
}

Receiver receiver_from_string(const std::string& s) {
  if (s == "viterbinet") return Receiver::viterbinet;
  if (s == "viterbi_csi") return Receiver::viterbi_csi;
  if (s == "deepsic") return Receiver::deepsic;
  bad_enum("experiment.receiver", s, "viterbinet viterbi_csi deepsic");
}

Regime regime_from_string(const std::string& s) {
  if (s == "joint") return Regime::joint;
  if (s == "online") return Regime::online;
  if (s == "meta") return Regime::meta;
  if (s == "modular_meta") return Regime::modular_meta;
  bad_enum("experiment.regime", s, "joint online meta modular_meta");
}

train::MetaMode meta_mode_from_string(const std::string& s) {
  if (s == "first_order") return train::MetaMode::first_order;
  if (s == "exact_hvp") return train::MetaMode::exact_hvp;
  bad_enum("train.meta_mode", s, "first_order exact_hvp");
}

train::Optimizer optimizer_from_string(const std::string& s) {
  if (s == "adam") return train::Optimizer::adam;
  if (s == "sgd") return train::Optimizer::sgd;
  bad_enum("train.optimizer", s, "adam sgd");
}

ThetaFallback theta_fallback_from_string(const std::string& s) {
  if (s == "hold") return ThetaFallback::hold;
  if (s == "chain") return ThetaFallback::chain;
  bad_enum("train.theta_fallback", s, "hold chain");
}

InitialHyper initial_hyper_from_string(const std::string& s) {
  if (s == "auto") return InitialHyper::auto_pick;
  if (s == "meta") return InitialHyper::meta;
  if (s == "copy") return InitialHyper::copy;
  bad_enum("train.initial_hyper", s, "auto meta copy");
}

namespace {

const char* const kKnownKeys[] = {
    "experiment.scenario", "experiment.receiver",  "experiment.regime",
    "experiment.regimes",  "experiment.t_pilot",   "experiment.t_data",
    "experiment.snr_db",   "experiment.seeds",     "experiment.out",
    "code.n",              "code.k",               "channel.memory",
    "channel.users",       "channel.antennas",     "channel.variation",
    "channel.trace",       "channel.mobile_user",  "receiver.sic_iterations",
    "train.eta",           "train.kappa",          "train.i_sgd",
    "train.i_meta",        "train.meta_frequency", "train.gate_threshold",
    "train.batch_size",    "train.buffer_capacity", "train.meta_pair_draws",
    "train.init_sweeps",   "train.hvp_step",       "train.meta_mode",
    "train.optimizer",     "train.theta_fallback", "train.initial_hyper",
};

}  // namespace

ExperimentConfig config_from_text(const ConfigText& text, const CliOverrides& ov) {
  for (const std::string& key : text.keys()) {
    const bool known = std::any_of(std::begin(kKnownKeys), std::end(kKnownKeys),
                                   [&](const char* k) { return key == k; });
    if (!known) throw ConfigError("unknown config key: " + key);
  }

  ExperimentConfig cfg;
  cfg.scenario = scenario_from_string(text.get_string("experiment.scenario", "siso_linear"));
  const bool siso = cfg.scenario == Scenario::siso_linear ||
                    cfg.scenario == Scenario::siso_tanh || cfg.scenario == Scenario::siso_trace;
  cfg.receiver =
      receiver_from_string(text.get_string("experiment.receiver", siso ? "viterbinet" : "deepsic"));
  cfg.regime = regime_from_string(
      ov.regime ? *ov.regime : text.get_string("experiment.regime", "online"));
  for (const std::string& r : text.get_string_list("experiment.regimes"))
    cfg.sweep_regimes.push_back(regime_from_string(r));

  cfg.t_pilot = static_cast<int>(text.get_int("experiment.t_pilot", cfg.t_pilot));
  cfg.t_data = static_cast<int>(text.get_int("experiment.t_data", cfg.t_data));
  if (ov.snr) {
    cfg.snr_db = {*ov.snr};
  } else if (text.has("experiment.snr_db")) {
    cfg.snr_db = text.get_double_list("experiment.snr_db");
  }
  if (ov.seed) {
    cfg.seeds = {*ov.seed};
  } else if (text.has("experiment.seeds")) {
    cfg.seeds = text.get_u64_list("experiment.seeds");
  }
  cfg.out = ov.out ? *ov.out : text.get_string("experiment.out", cfg.out);

  cfg.rs.n = static_cast<int>(text.get_int("code.n", cfg.rs.n));
  cfg.rs.k = static_cast<int>(text.get_int("code.k", cfg.rs.k));

  cfg.memory = static_cast<int>(text.get_int("channel.memory", cfg.memory));
  cfg.users = static_cast<int>(text.get_int("channel.users", cfg.users));
  cfg.antennas = static_cast<int>(text.get_int("channel.antennas", cfg.antennas));
  const std::string variation = text.get_string("channel.variation", "structured");
  if (variation != "structured" && variation != "iid")
    bad_enum("channel.variation", variation, "structured iid");
  cfg.iid_variation = variation == "iid";
  cfg.trace_path = text.get_string("channel.trace", "");
  cfg.mobile_user = static_cast<int>(text.get_int("channel.mobile_user", cfg.mobile_user));
  cfg.sic_iterations =
      static_cast<int>(text.get_int("receiver.sic_iterations", cfg.sic_iterations));

  train::TrainConfig& t = cfg.train;
  t.eta = text.get_double("train.eta", t.eta);
  t.kappa = text.get_double("train.kappa", t.kappa);
  t.i_sgd = static_cast<int>(text.get_int("train.i_sgd", t.i_sgd));
  t.i_meta = static_cast<int>(text.get_int("train.i_meta", t.i_meta));
  t.meta_frequency = static_cast<int>(text.get_int("train.meta_frequency", t.meta_frequency));
  t.gate_threshold = text.get_double("train.gate_threshold", t.gate_threshold);
  t.batch_size = static_cast<int>(text.get_int("train.batch_size", t.batch_size));
  const long cap =
      text.get_int("train.buffer_capacity", static_cast<long>(t.buffer_capacity));
  if (cap < 0) throw ConfigError("train.buffer_capacity: must be non-negative");
  t.buffer_capacity = static_cast<std::size_t>(cap);
  t.meta_pair_draws = static_cast<int>(text.get_int("train.meta_pair_draws", t.meta_pair_draws));
  t.init_sweeps = static_cast<int>(text.get_int("train.init_sweeps", t.init_sweeps));
  t.hvp_step = text.get_double("train.hvp_step", t.hvp_step);
  t.meta_mode = meta_mode_from_string(text.get_string("train.meta_mode", "first_order"));
  t.optimizer = optimizer_from_string(text.get_string("train.optimizer", "adam"));
  cfg.theta_fallback =
      theta_fallback_from_string(text.get_string("train.theta_fallback", "hold"));
  cfg.initial_hyper = initial_hyper_from_string(text.get_string("train.initial_hyper", "auto"));

  if (ov.trace) {
    cfg.trace_path = *ov.trace;
    if (cfg.scenario == Scenario::siso_linear || cfg.scenario == Scenario::siso_tanh)
      cfg.scenario = Scenario::siso_trace;
    else if (cfg.scenario == Scenario::mimo_linear || cfg.scenario == Scenario::mimo_tanh)
      cfg.scenario = Scenario::mimo_trace;
  }

  cfg.validate();
  return cfg;
}

ExperimentConfig load_config(const std::filesystem::path& path, const CliOverrides& ov) {
  return config_from_text(ConfigText::parse_file(path), ov);
}

}  // namespace adrx::hx
