#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "netrl/agent.hpp"
#include "netrl/env.hpp"
#include "netrl/profiles.hpp"
#include "netrl/ppo.hpp"

namespace netrl {

class UndefinedGapError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

class DegenerateTestError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

// Percentage drop from clean to degraded. Throws UndefinedGapError when
// clean_mean <= 0.
double sim_to_real_gap(double clean_mean, double degraded_mean);

double mean_of(std::span<const double> xs);
// Sample standard deviation (n - 1 divisor); 0 for fewer than two values.
double sample_std(std::span<const double> xs);

enum class Tail { kTwoSided, kGreater, kLess };

struct TTestResult {
  double t = 0.0;
  double p = 1.0;
  int dof = 0;
};

// Paired t-test on a - b. Throws std::invalid_argument on mismatched or
// too-short inputs and DegenerateTestError when the differences have zero
// variance.
TTestResult paired_t_test(std::span<const double> a, std::span<const double> b,
                          Tail tail = Tail::kTwoSided);

// (mean(a) - mean(b)) / pooled sample std.
double cohens_d(std::span<const double> a, std::span<const double> b);

// ---- Reports -------------------------------------------------------------

// One (regime, mode, seed) cell of an evaluation.
struct ReportRow {
  std::string regime;
  std::string mode;
  int seed = 0;
  double mean_return = 0.0;
  double std_return = 0.0;
  double success_rate = 0.0;
  int episodes = 0;
  friend bool operator==(const ReportRow&, const ReportRow&) = default;
};

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows);
// Throws std::runtime_error on a malformed report.
std::vector<ReportRow> read_report_csv(std::istream& in);

// Aggregate per (regime, mode) with gap and, when `vs_regime` is set and
// present, a paired comparison against it.
struct StatsRow {
  std::string regime;
  std::string mode;
  int seeds = 0;
  double mean = 0.0;  // mean across seeds of per-seed mean return
  double std = 0.0;   // sample std across seeds
  std::optional<double> clean_mean;  // the regime's own sim-clean mean
  std::optional<double> gap_pct;
  std::string vs_regime;
  std::optional<TTestResult> test;
  std::optional<double> effect;  // Cohen's d
};

std::vector<StatsRow> compute_stats(const std::vector<ReportRow>& rows,
                                    const std::string& clean_mode,
                                    const std::string& vs_regime, Tail tail = Tail::kTwoSided);
void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& stats);
// Plain-text gap table for the terminal.
void write_gap_table(std::ostream& out, const std::vector<StatsRow>& stats);
// Grouped bars (one group per mode, one bar per regime), mean +/- 1 std.
void write_svg_chart(std::ostream& out, const std::vector<StatsRow>& stats);

// ---- Evaluation and experiments -------------------------------------------

struct EvalOptions {
  EnvKind env = EnvKind::kCartPole;
  int episodes = 50;
  double control_period_ms = 20.0;
  Placement placement = Placement::kSplit;
  std::uint64_t eval_seed = 0;  // shared episode seeds across regimes and modes
  ActionSelection selection = ActionSelection::kGreedy;
  std::optional<std::uint64_t> fixed_layout_seed;
  std::uint64_t net_seed = 0;  // mixed into every network seed
};

struct EvalCell {
  ReportRow row;
  std::vector<EpisodeResult> episodes;
};

// Evaluates one policy under one named condition; a missing model means
// local mode. Environment seeds depend only on (eval_seed, episode);
// network seeds on (mode name, policy seed, episode).
EvalCell evaluate_policy(const PolicyFile& policy, const std::string& mode,
                         const std::optional<NetworkModel>& model, const EvalOptions& options);
EvalCell evaluate_policy(const PolicyFile& policy, Profile profile, const EvalOptions& options);

struct ExperimentConfig {
  EnvKind env = EnvKind::kCartPole;
  std::vector<Regime> regimes;
  std::vector<Profile> profiles;
  int seeds = 10;
  int episodes = 50;
  double control_period_ms = 20.0;
  Placement placement = Placement::kSplit;
  std::size_t history = 0;
  TrainerConfig trainer;  // trainer.seed is the base seed
  std::uint64_t eval_seed = 0;
  std::optional<std::uint64_t> fixed_layout_seed;
};

// Trains the policy for (regime, seed index) under the regime's channel.
PolicyFile train_regime(const ExperimentConfig& config, Regime regime, int seed);

std::filesystem::path policy_path(const std::filesystem::path& dir, Regime regime, int seed);

// Loads the policy for (regime, seed) from `dir`, else copies it from a
// regime with the same training channel, else trains it; saves what it
// did not find.
PolicyFile ensure_policy(const ExperimentConfig& config, const std::filesystem::path& dir,
                         Regime regime, int seed, bool verbose = false);

// Trains (or reuses, when a policy file already exists) every
// (regime, seed) policy under `dir`/policies and evaluates it under every
// profile. Regimes that share a training channel share policies.
std::vector<ReportRow> run_experiment(const ExperimentConfig& config,
                                      const std::filesystem::path& dir, bool verbose = false);

}  // namespace netrl
