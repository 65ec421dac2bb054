#pragma once

#include <cstdint>
#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "adrx/experiment.hpp"

namespace adrx::hx {

// Minimal structured-text configuration: `[section]` headers group
// `key = value` lines; values are numbers, "strings", true/false, or
// [comma, separated, arrays] of those; '#' starts a comment.  Keys are
// addressed as "section.key".
class ConfigText {
 public:
  static ConfigText parse_file(const std::filesystem::path& path);
  static ConfigText parse_string(const std::string& text,
                                 const std::string& origin = "<config>");

  bool has(const std::string& key) const;
  double get_double(const std::string& key, double fallback) const;
  long get_int(const std::string& key, long fallback) const;
  bool get_bool(const std::string& key, bool fallback) const;
  std::string get_string(const std::string& key, const std::string& fallback) const;
  std::vector<double> get_double_list(const std::string& key) const;       // scalar promotes
  std::vector<std::uint64_t> get_u64_list(const std::string& key) const;   // scalar promotes
  std::vector<std::string> get_string_list(const std::string& key) const;  // scalar promotes

  std::vector<std::string> keys() const;

 private:
  struct Value {
    enum class Kind { number, string, boolean, array } kind = Kind::number;
    double num = 0.0;
    std::string str;
    bool flag = false;
    std::vector<Value> items;
  };

  const Value* find(const std::string& key) const;
  static Value parse_value(const std::string& text, const std::string& where);

  std::map<std::string, Value> values_;
};

Scenario scenario_from_string(const std::string& s);
Receiver receiver_from_string(const std::string& s);
Regime regime_from_string(const std::string& s);
train::MetaMode meta_mode_from_string(const std::string& s);
train::Optimizer optimizer_from_string(const std::string& s);
ThetaFallback theta_fallback_from_string(const std::string& s);
InitialHyper initial_hyper_from_string(const std::string& s);

struct CliOverrides {
  std::optional<std::uint64_t> seed;
  std::optional<double> snr;
  std::optional<std::string> regime;
  std::optional<std::string> out;
  std::optional<std::string> trace;  // also switches the scenario to its trace variant
};

// Typed config from parsed text; unknown keys and malformed fields raise
// ConfigError naming the offending key.  The result is validated.
ExperimentConfig config_from_text(const ConfigText& text, const CliOverrides& ov = {});
ExperimentConfig load_config(const std::filesystem::path& path, const CliOverrides& ov = {});

}  // namespace adrx::hx
