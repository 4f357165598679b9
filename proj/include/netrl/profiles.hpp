#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "netrl/agent.hpp"
#include "netrl/env.hpp"
#include "netrl/loop.hpp"
#include "netrl/netshim.hpp"

namespace netrl {

// Named evaluation conditions.
enum class Profile { kSimClean, kEthernetClean, kWifiNormal, kWifiDegraded };

Profile parse_profile(std::string_view name);
std::string_view to_string(Profile profile);
// Round-trip impairment of the profile; nullopt for SimClean (local mode).
std::optional<SyntheticModel> profile_model(Profile profile);

// How a round-trip model is laid over the two shim directions.
//   split: each direction gets mu/2, sigma/sqrt(2) and 1 - sqrt(1 - p), so
//          the round trip has the configured mean, variance and loss;
//   both:  each direction gets the full model;
//   act / obs: one direction gets the full model, the other passes through.
enum class Placement { kSplit, kBoth, kActOnly, kObsOnly };

Placement parse_placement(std::string_view name);
std::string_view to_string(Placement placement);

struct ChannelModels {
  NetworkModel obs;
  NetworkModel act;
};
// Trace models hold one-way delays already, so split gives each direction
// the trace with the loss shared out as for synthetic models.
ChannelModels place(const NetworkModel& round_trip, Placement placement);

// Loop configuration for evaluating or training under `model`; a missing
// model means local mode.
LoopConfig make_loop_config(const std::optional<NetworkModel>& model, Placement placement,
                            double control_period_ms, std::uint64_t net_seed);

enum class Regime {
  kBaseline,
  kDelayOnly,
  kFullNetAware,
  kLatencyOnly,
  kStochasticDelay,
  kLossOnly,
  kCombined,
};

Regime parse_regime(std::string_view name);
std::string_view to_string(Regime regime);
// The five ablation rows in table order.
const std::vector<Regime>& ablation_regimes();

struct RegimeSpec {
  Regime regime;
  std::optional<SyntheticModel> training_model;  // nullopt: trained locally
};
RegimeSpec regime_spec(Regime regime);

// d = ceil(mean delay / period) control periods of staleness.
std::size_t delay_steps(const std::optional<SyntheticModel>& model, double control_period_ms);

// Frame stack k = d + 1 (at least `min_stack`) plus `history` actions.
ContextSpec context_for(EnvKind env, const std::optional<SyntheticModel>& model,
                        double control_period_ms, std::size_t history = 0,
                        std::size_t min_stack = 1);

}  // namespace netrl
