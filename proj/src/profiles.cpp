#include "netrl/profiles.hpp"

#include <algorithm>
#include <cmath>

namespace netrl {

Profile parse_profile(std::string_view name) {
  if (name == "sim-clean") return Profile::kSimClean;
  if (name == "ethernet-clean") return Profile::kEthernetClean;
  if (name == "wifi-normal") return Profile::kWifiNormal;
  if (name == "wifi-degraded") return Profile::kWifiDegraded;
  throw ConfigError("unknown profile '" + std::string(name) + "'");
}

std::string_view to_string(Profile profile) {
  switch (profile) {
    case Profile::kSimClean: return "sim-clean";
    case Profile::kEthernetClean: return "ethernet-clean";
    case Profile::kWifiNormal: return "wifi-normal";
    case Profile::kWifiDegraded: return "wifi-degraded";
  }
  return "?";
}

std::optional<SyntheticModel> profile_model(Profile profile) {
  switch (profile) {
    case Profile::kSimClean: return std::nullopt;
    case Profile::kEthernetClean: return SyntheticModel{2.0, 0.5, 0.0};
    case Profile::kWifiNormal: return SyntheticModel{30.0, 10.0, 0.02};
    case Profile::kWifiDegraded: return SyntheticModel{80.0, 40.0, 0.10};
  }
  return std::nullopt;
}

Placement parse_placement(std::string_view name) {
  if (name == "split") return Placement::kSplit;
  if (name == "both") return Placement::kBoth;
  if (name == "act") return Placement::kActOnly;
  if (name == "obs") return Placement::kObsOnly;
  throw ConfigError("unknown placement '" + std::string(name) + "'");
}

std::string_view to_string(Placement placement) {
  switch (placement) {
    case Placement::kSplit: return "split";
    case Placement::kBoth: return "both";
    case Placement::kActOnly: return "act";
    case Placement::kObsOnly: return "obs";
  }
  return "?";
}

ChannelModels place(const NetworkModel& rt, Placement placement) {
  const NetworkModel none = SyntheticModel{};
  switch (placement) {
    case Placement::kSplit: {
      if (const auto* m = std::get_if<SyntheticModel>(&rt)) {
        const SyntheticModel half{m->mu_ms / 2.0, m->sigma_ms / std::sqrt(2.0),
                                  1.0 - std::sqrt(1.0 - m->p_loss)};
        return {half, half};
      }
      TraceModel half = std::get<TraceModel>(rt);
      half.p_loss = 1.0 - std::sqrt(1.0 - half.p_loss);
      return {half, half};
    }
    case Placement::kBoth: return {rt, rt};
    case Placement::kActOnly: return {none, rt};
    case Placement::kObsOnly: return {rt, none};
  }
  return {none, none};
}

LoopConfig make_loop_config(const std::optional<NetworkModel>& model, Placement placement,
                            double control_period_ms, std::uint64_t net_seed) {
  LoopConfig config;
  config.control_period_ms = control_period_ms;
  config.net_seed = net_seed;
  if (model) {
    const auto ch = place(*model, placement);
    config.mode = DeploymentMode::kSimNet;
    config.obs_model = ch.obs;
    config.act_model = ch.act;
  }
  return config;
}

Regime parse_regime(std::string_view name) {
  if (name == "baseline") return Regime::kBaseline;
  if (name == "delay-only") return Regime::kDelayOnly;
  if (name == "full-net-aware") return Regime::kFullNetAware;
  if (name == "latency-only") return Regime::kLatencyOnly;
  if (name == "stochastic-delay") return Regime::kStochasticDelay;
  if (name == "loss-only") return Regime::kLossOnly;
  if (name == "combined") return Regime::kCombined;
  throw ConfigError("unknown regime '" + std::string(name) + "'");
}

std::string_view to_string(Regime regime) {
  switch (regime) {
    case Regime::kBaseline: return "baseline";
    case Regime::kDelayOnly: return "delay-only";
    case Regime::kFullNetAware: return "full-net-aware";
    case Regime::kLatencyOnly: return "latency-only";
    case Regime::kStochasticDelay: return "stochastic-delay";
    case Regime::kLossOnly: return "loss-only";
    case Regime::kCombined: return "combined";
  }
  return "?";
}

const std::vector<Regime>& ablation_regimes() {
  static const std::vector<Regime> rows{Regime::kBaseline, Regime::kLatencyOnly,
                                        Regime::kStochasticDelay, Regime::kLossOnly,
                                        Regime::kCombined};
  return rows;
}

RegimeSpec regime_spec(Regime regime) {
  switch (regime) {
    case Regime::kBaseline: return {regime, std::nullopt};
    case Regime::kDelayOnly:
    case Regime::kLatencyOnly: return {regime, SyntheticModel{50.0, 0.0, 0.0}};
    case Regime::kFullNetAware:
    case Regime::kCombined: return {regime, SyntheticModel{30.0, 10.0, 0.02}};
    case Regime::kStochasticDelay: return {regime, SyntheticModel{0.0, 40.0, 0.0}};
    case Regime::kLossOnly: return {regime, SyntheticModel{0.0, 0.0, 0.10}};
  }
  return {regime, std::nullopt};
}

std::size_t delay_steps(const std::optional<SyntheticModel>& model, double control_period_ms) {
  if (!model) return 0;
  const double mean = mean_delay_ms(*model);
  // Guard against 30/20-style ratios landing a hair above an integer.
  const double ratio = mean / control_period_ms;
  return static_cast<std::size_t>(std::ceil(ratio - 1e-9));
}

ContextSpec context_for(EnvKind env, const std::optional<SyntheticModel>& model,
                        double control_period_ms, std::size_t history, std::size_t min_stack) {
  ContextSpec spec;
  spec.obs_dim = observation_dim(env);
  spec.action_count = env == EnvKind::kCartPole ? 2 : 5;
  spec.stack = std::max(stack_depth_for_delay(delay_steps(model, control_period_ms)), min_stack);
  spec.history = history;
  return spec;
}

}  // namespace netrl
