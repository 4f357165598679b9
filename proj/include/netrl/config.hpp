#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <map>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "netrl/eval.hpp"
#include "netrl/loop.hpp"
#include "netrl/mode3.hpp"

namespace netrl {

struct ConfigKey {
  const char* section;
  const char* key;
  const char* default_value;  // empty: unset
  const char* help;
};

// Every recognised key. The CLI mirrors each as --section.key.
const std::vector<ConfigKey>& config_schema();

// Sectioned key-value settings:
//   [section]
//   key = value   # comment
// Unknown sections or keys throw ConfigError.
class Config {
 public:
  Config();  // schema defaults
  static Config parse(std::istream& in, const std::string& origin = "<config>");
  static Config load(const std::filesystem::path& path);

  // Throws ConfigError for keys outside the schema.
  void set(const std::string& dotted_key, const std::string& value);
  bool has(const std::string& dotted_key) const;
  std::string get(const std::string& dotted_key) const;
  std::string get_or(const std::string& dotted_key, const std::string& fallback) const;
  int get_int(const std::string& dotted_key) const;
  std::uint64_t get_u64(const std::string& dotted_key) const;
  double get_double(const std::string& dotted_key) const;
  std::vector<std::string> get_list(const std::string& dotted_key) const;

 private:
  std::map<std::string, std::string> values_;
};

// Settings resolved from a config.
ExperimentConfig experiment_from(const Config& config);
std::filesystem::path out_dir_from(const Config& config);
// Evaluation conditions named by run.modes: profile names, or "simnet" for
// the [shim] model.
std::vector<std::pair<std::string, std::optional<NetworkModel>>> conditions_from(const Config& config);
// The [shim] model, if one is configured.
std::optional<NetworkModel> shim_model_from(const Config& config);
ServiceConfig service_from(const Config& config);
EvalOptions eval_options_from(const Config& config);

}  // namespace netrl
