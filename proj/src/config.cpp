#include "netrl/config.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

#include "netrl/tracer.hpp"

namespace netrl {

const std::vector<ConfigKey>& config_schema() {
  static const std::vector<ConfigKey> schema{
      {"run", "env", "cartpole", "cartpole or doorkey"},
      {"run", "regimes", "baseline", "comma list of training regimes"},
      {"run", "modes", "sim-clean,wifi-degraded", "evaluation conditions: profile names or simnet"},
      {"run", "seeds", "10", "policies per regime"},
      {"run", "episodes", "50", "evaluation episodes per (regime, mode, seed)"},
      {"run", "out_dir", "runs", "output directory"},
      {"run", "control_period_ms", "20", "control period"},
      {"run", "placement", "split", "split, both, act or obs"},
      {"run", "history", "0", "action-history length fed to the policy"},
      {"run", "eval_seed", "0", "base seed for evaluation episodes"},
      {"run", "fixed_layout_seed", "", "doorkey: reuse one layout for every reset"},
      {"run", "trace_dir", "", "write realized shim traces here during eval"},
      {"train", "total_steps", "150000", "environment steps per policy"},
      {"train", "rollout", "2048", "steps per rollout"},
      {"train", "epochs", "10", "optimisation epochs per rollout"},
      {"train", "minibatch", "64", "minibatch size"},
      {"train", "clip", "0.2", "clip ratio"},
      {"train", "gamma", "0.99", "discount"},
      {"train", "lambda", "0.95", "advantage-estimation lambda"},
      {"train", "learning_rate", "3e-4", "Adam step size"},
      {"train", "entropy_coef", "0.01", "entropy bonus"},
      {"train", "value_coef", "0.5", "value loss weight"},
      {"train", "max_grad_norm", "0.5", "gradient clipping norm"},
      {"train", "hidden", "64", "hidden layer width"},
      {"train", "seed", "0", "base training seed"},
      {"shim", "mu_ms", "", "synthetic model: mean delay"},
      {"shim", "sigma_ms", "", "synthetic model: jitter"},
      {"shim", "p_loss", "", "loss probability"},
      {"shim", "seed", "0", "mixed into the network seeds of the simnet condition"},
      {"shim", "trace", "", "trace file to replay instead of a synthetic model"},
      {"serve", "address", "127.0.0.1", "env host bind address / agent host target"},
      {"serve", "port", "47000", "env host port"},
      {"serve", "action_window_ms", "15", "how long the env host waits for a reply"},
      {"serve", "handshake_timeout_ms", "5000", "handshake timeout"},
      {"serve", "idle_timeout_ms", "10000", "agent host gives up after this much silence"},
      {"serve", "regime", "baseline", "agent host: regime of the served policy"},
      {"serve", "policy_seed", "0", "agent host: seed index of the served policy"},
      {"serve", "trace", "", "write the session latency trace here"},
      {"stats", "clean_mode", "sim-clean", "reference mode for gap%"},
      {"stats", "vs_regime", "baseline", "regime every other regime is tested against"},
      {"stats", "tail", "two-sided", "two-sided, greater or less"},
  };
  return schema;
}

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

bool known(const std::string& dotted) {
  const auto& schema = config_schema();
  return std::any_of(schema.begin(), schema.end(), [&](const ConfigKey& k) {
    return dotted == std::string(k.section) + "." + k.key;
  });
}

template <typename T, typename F>
T convert(const std::string& key, const std::string& text, F f) {
  try {
    std::size_t used = 0;
    T v = f(text, &used);
    if (used != text.size()) throw std::invalid_argument("trailing characters");
    return v;
  } catch (const std::exception&) {
    throw ConfigError("bad value for " + key + ": '" + text + "'");
  }
}

}  // namespace

Config::Config() {
  for (const auto& k : config_schema()) {
    if (*k.default_value != '\0') values_[std::string(k.section) + "." + k.key] = k.default_value;
  }
}

Config Config::parse(std::istream& in, const std::string& origin) {
  Config cfg;
  std::string line, section;
  int lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    const auto hash = line.find_first_of("#;");
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    const auto where = origin + ":" + std::to_string(lineno);
    if (line.front() == '[') {
      if (line.back() != ']') throw ConfigError(where + ": unterminated section header");
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) throw ConfigError(where + ": expected key = value");
    if (section.empty()) throw ConfigError(where + ": key outside any section");
    const auto key = section + "." + trim(line.substr(0, eq));
    if (!known(key)) throw ConfigError(where + ": unknown key " + key);
    cfg.values_[key] = trim(line.substr(eq + 1));
  }
  return cfg;
}

Config Config::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read config " + path.string());
  return parse(in, path.string());
}

void Config::set(const std::string& dotted_key, const std::string& value) {
  if (!known(dotted_key)) throw ConfigError("unknown key " + dotted_key);
  values_[dotted_key] = value;
}

bool Config::has(const std::string& k) const {
  const auto it = values_.find(k);
  return it != values_.end() && !it->second.empty();
}

std::string Config::get(const std::string& k) const {
  if (!has(k)) throw ConfigError("missing value for " + k);
  return values_.at(k);
}

std::string Config::get_or(const std::string& k, const std::string& fallback) const {
  return has(k) ? values_.at(k) : fallback;
}

int Config::get_int(const std::string& k) const {
  return convert<int>(k, get(k), [](const std::string& s, std::size_t* n) { return std::stoi(s, n); });
}

std::uint64_t Config::get_u64(const std::string& k) const {
  return convert<std::uint64_t>(
      k, get(k), [](const std::string& s, std::size_t* n) { return std::stoull(s, n); });
}

double Config::get_double(const std::string& k) const {
  return convert<double>(k, get(k), [](const std::string& s, std::size_t* n) { return std::stod(s, n); });
}

std::vector<std::string> Config::get_list(const std::string& k) const {
  std::vector<std::string> out;
  std::istringstream ss(get_or(k, ""));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) out.push_back(item);
  }
  return out;
}

ExperimentConfig experiment_from(const Config& c) {
  ExperimentConfig x;
  try {
    x.env = parse_env_kind(c.get("run.env"));
  } catch (const std::invalid_argument& e) {
    throw ConfigError(e.what());
  }
  for (const auto& r : c.get_list("run.regimes")) x.regimes.push_back(parse_regime(r));
  if (x.regimes.empty()) throw ConfigError("run.regimes is empty");
  x.seeds = c.get_int("run.seeds");
  x.episodes = c.get_int("run.episodes");
  if (x.seeds <= 0 || x.episodes <= 0) throw ConfigError("seeds and episodes must be positive");
  x.control_period_ms = c.get_double("run.control_period_ms");
  x.placement = parse_placement(c.get("run.placement"));
  x.history = static_cast<std::size_t>(c.get_int("run.history"));
  x.eval_seed = c.get_u64("run.eval_seed");
  if (c.has("run.fixed_layout_seed")) x.fixed_layout_seed = c.get_u64("run.fixed_layout_seed");
  for (const auto& m : c.get_list("run.modes")) {
    if (m != "simnet") x.profiles.push_back(parse_profile(m));
  }

  TrainerConfig& t = x.trainer;
  t.total_steps = c.get_int("train.total_steps");
  t.rollout = c.get_int("train.rollout");
  t.epochs = c.get_int("train.epochs");
  t.minibatch = c.get_int("train.minibatch");
  t.clip = c.get_double("train.clip");
  t.gamma = c.get_double("train.gamma");
  t.lambda = c.get_double("train.lambda");
  t.learning_rate = c.get_double("train.learning_rate");
  t.entropy_coef = c.get_double("train.entropy_coef");
  t.value_coef = c.get_double("train.value_coef");
  t.max_grad_norm = c.get_double("train.max_grad_norm");
  t.hidden = static_cast<std::size_t>(c.get_int("train.hidden"));
  t.seed = c.get_u64("train.seed");
  try {
    t.validate();
  } catch (const std::invalid_argument& e) {
    throw ConfigError(std::string("train: ") + e.what());
  }
  return x;
}

std::filesystem::path out_dir_from(const Config& c) { return c.get("run.out_dir"); }

std::optional<NetworkModel> shim_model_from(const Config& c) {
  const double p = c.has("shim.p_loss") ? c.get_double("shim.p_loss") : 0.0;
  std::optional<NetworkModel> model;
  if (c.has("shim.trace")) {
    if (c.has("shim.mu_ms") || c.has("shim.sigma_ms")) {
      throw ConfigError("shim: give either a trace or mu_ms/sigma_ms, not both");
    }
    try {
      TraceModel tm = load_trace(c.get("shim.trace"));
      if (c.has("shim.p_loss")) tm.p_loss = p;
      model = tm;
    } catch (const std::exception& e) {
      throw ConfigError(std::string("shim.trace: ") + e.what());
    }
  } else if (c.has("shim.mu_ms") || c.has("shim.sigma_ms") || c.has("shim.p_loss")) {
    model = SyntheticModel{c.has("shim.mu_ms") ? c.get_double("shim.mu_ms") : 0.0,
                           c.has("shim.sigma_ms") ? c.get_double("shim.sigma_ms") : 0.0, p};
  }
  if (model) {
    try {
      validate(*model);
    } catch (const ModelError& e) {
      throw ConfigError(std::string("shim: ") + e.what());
    }
  }
  return model;
}

std::vector<std::pair<std::string, std::optional<NetworkModel>>> conditions_from(const Config& c) {
  std::vector<std::pair<std::string, std::optional<NetworkModel>>> out;
  for (const auto& m : c.get_list("run.modes")) {
    if (m == "simnet") {
      auto model = shim_model_from(c);
      if (!model) throw ConfigError("mode simnet needs a [shim] model");
      out.emplace_back(m, std::move(model));
    } else {
      std::optional<NetworkModel> model;
      if (const auto pm = profile_model(parse_profile(m))) model = *pm;
      out.emplace_back(m, std::move(model));
    }
  }
  if (out.empty()) throw ConfigError("run.modes is empty");
  return out;
}

ServiceConfig service_from(const Config& c) {
  ServiceConfig s;
  s.address = c.get("serve.address");
  const int port = c.get_int("serve.port");
  if (port < 0 || port > 65535) throw ConfigError("serve.port out of range");
  s.port = static_cast<std::uint16_t>(port);
  s.control_period_ms = c.get_double("run.control_period_ms");
  s.action_window_ms = c.get_double("serve.action_window_ms");
  s.episodes = c.get_int("run.episodes");
  s.seed = c.get_u64("run.eval_seed");
  s.handshake_timeout_ms = c.get_int("serve.handshake_timeout_ms");
  s.idle_timeout_ms = c.get_int("serve.idle_timeout_ms");
  s.validate();
  return s;
}

EvalOptions eval_options_from(const Config& c) {
  const auto x = experiment_from(c);
  EvalOptions o;
  o.env = x.env;
  o.episodes = x.episodes;
  o.control_period_ms = x.control_period_ms;
  o.placement = x.placement;
  o.eval_seed = x.eval_seed;
  o.fixed_layout_seed = x.fixed_layout_seed;
  o.net_seed = c.get_u64("shim.seed");
  return o;
}

}  // namespace netrl
