#include "netrl/eval.hpp"

#include <algorithm>
#include <boost/math/distributions/students_t.hpp>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <iomanip>
#include <iostream>
#include <map>
#include <sstream>

#include "netrl/loop.hpp"
#include "netrl/random.hpp"

namespace netrl {

double sim_to_real_gap(double clean_mean, double degraded_mean) {
  if (!(clean_mean > 0.0)) throw UndefinedGapError("gap undefined for non-positive clean mean");
  return 100.0 * (clean_mean - degraded_mean) / clean_mean;
}

double mean_of(std::span<const double> xs) {
  if (xs.empty()) return 0.0;
  double s = 0.0;
  for (double x : xs) s += x;
  return s / static_cast<double>(xs.size());
}

double sample_std(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

TTestResult paired_t_test(std::span<const double> a, std::span<const double> b, Tail tail) {
  if (a.size() != b.size()) throw std::invalid_argument("paired samples differ in length");
  if (a.size() < 2) throw std::invalid_argument("paired t-test needs at least two pairs");
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const double sd = sample_std(d);
  if (!(sd > 0.0)) throw DegenerateTestError("paired differences have zero variance");
  const double n = static_cast<double>(d.size());
  TTestResult r;
  r.dof = static_cast<int>(d.size()) - 1;
  r.t = mean_of(d) / (sd / std::sqrt(n));
  const boost::math::students_t dist(r.dof);
  switch (tail) {
    case Tail::kTwoSided: r.p = 2.0 * boost::math::cdf(boost::math::complement(dist, std::abs(r.t))); break;
    case Tail::kGreater: r.p = boost::math::cdf(boost::math::complement(dist, r.t)); break;
    case Tail::kLess: r.p = boost::math::cdf(dist, r.t); break;
  }
  return r;
}

double cohens_d(std::span<const double> a, std::span<const double> b) {
  if (a.size() < 2 || b.size() < 2) throw std::invalid_argument("Cohen's d needs two values per group");
  const double na = static_cast<double>(a.size());
  const double nb = static_cast<double>(b.size());
  const double va = sample_std(a) * sample_std(a);
  const double vb = sample_std(b) * sample_std(b);
  const double pooled = std::sqrt(((na - 1.0) * va + (nb - 1.0) * vb) / (na + nb - 2.0));
  if (!(pooled > 0.0)) throw DegenerateTestError("pooled standard deviation is zero");
  return (mean_of(a) - mean_of(b)) / pooled;
}

// ---- CSV -----------------------------------------------------------------

namespace {

constexpr const char* kReportHeader = "regime,mode,seed,mean_return,std_return,success_rate,episodes";

std::string num(double v) {
  char buf[40];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::string> split_csv(const std::string& line) {
  std::vector<std::string> out;
  std::string field;
  std::istringstream ss(line);
  while (std::getline(ss, field, ',')) out.push_back(field);
  if (!line.empty() && line.back() == ',') out.emplace_back();
  return out;
}

}  // namespace

void write_report_csv(std::ostream& out, const std::vector<ReportRow>& rows) {
  out << kReportHeader << '\n';
  for (const auto& r : rows) {
    out << r.regime << ',' << r.mode << ',' << r.seed << ',' << num(r.mean_return) << ','
        << num(r.std_return) << ',' << num(r.success_rate) << ',' << r.episodes << '\n';
  }
}

std::vector<ReportRow> read_report_csv(std::istream& in) {
  std::string line;
  if (!std::getline(in, line) || line != kReportHeader) {
    throw std::runtime_error("report: missing or unexpected header");
  }
  std::vector<ReportRow> rows;
  int lineno = 1;
  while (std::getline(in, line)) {
    ++lineno;
    if (line.empty()) continue;
    const auto f = split_csv(line);
    if (f.size() != 7) throw std::runtime_error("report line " + std::to_string(lineno) + ": expected 7 fields");
    try {
      rows.push_back(ReportRow{f[0], f[1], std::stoi(f[2]), std::stod(f[3]), std::stod(f[4]),
                               std::stod(f[5]), std::stoi(f[6])});
    } catch (const std::logic_error&) {
      throw std::runtime_error("report line " + std::to_string(lineno) + ": bad number");
    }
  }
  return rows;
}

std::vector<StatsRow> compute_stats(const std::vector<ReportRow>& rows, const std::string& clean_mode,
                                    const std::string& vs_regime, Tail tail) {
  // Ordered by first appearance so tables follow the report's order.
  std::vector<std::pair<std::string, std::string>> keys;
  std::map<std::pair<std::string, std::string>, std::map<int, double>> cells;
  for (const auto& r : rows) {
    const auto key = std::make_pair(r.regime, r.mode);
    if (!cells.count(key)) keys.push_back(key);
    cells[key][r.seed] = r.mean_return;
  }
  auto values = [&](const std::pair<std::string, std::string>& key) {
    std::vector<double> v;
    for (const auto& [seed, x] : cells.at(key)) v.push_back(x);
    return v;
  };

  std::vector<StatsRow> out;
  for (const auto& key : keys) {
    StatsRow s;
    s.regime = key.first;
    s.mode = key.second;
    const auto v = values(key);
    s.seeds = static_cast<int>(v.size());
    s.mean = mean_of(v);
    s.std = sample_std(v);
    const auto clean_key = std::make_pair(key.first, clean_mode);
    if (cells.count(clean_key)) {
      s.clean_mean = mean_of(values(clean_key));
      if (*s.clean_mean > 0.0) s.gap_pct = sim_to_real_gap(*s.clean_mean, s.mean);
    }
    const auto vs_key = std::make_pair(vs_regime, key.second);
    if (!vs_regime.empty() && key.first != vs_regime && cells.count(vs_key)) {
      s.vs_regime = vs_regime;
      // Pair by seed over the seeds both regimes have.
      std::vector<double> a, b;
      for (const auto& [seed, x] : cells.at(key)) {
        const auto it = cells.at(vs_key).find(seed);
        if (it == cells.at(vs_key).end()) continue;
        a.push_back(x);
        b.push_back(it->second);
      }
      try {
        s.test = paired_t_test(a, b, tail);
      } catch (const std::exception&) {
        s.test.reset();
      }
      try {
        s.effect = cohens_d(a, b);
      } catch (const std::exception&) {
        s.effect.reset();
      }
    }
    out.push_back(std::move(s));
  }
  return out;
}

void write_stats_csv(std::ostream& out, const std::vector<StatsRow>& stats) {
  out << "regime,mode,seeds,mean_across_seeds,std_across_seeds,clean_mean,gap_pct,vs_regime,t,dof,"
         "p_value,cohens_d\n";
  auto opt = [](const std::optional<double>& v) { return v ? num(*v) : std::string(); };
  for (const auto& s : stats) {
    out << s.regime << ',' << s.mode << ',' << s.seeds << ',' << num(s.mean) << ',' << num(s.std)
        << ',' << opt(s.clean_mean) << ',' << opt(s.gap_pct) << ',' << s.vs_regime << ',';
    if (s.test) {
      out << num(s.test->t) << ',' << s.test->dof << ',' << num(s.test->p);
    } else {
      out << ",,";
    }
    out << ',' << opt(s.effect) << '\n';
  }
}

void write_gap_table(std::ostream& out, const std::vector<StatsRow>& stats) {
  out << std::left << std::setw(18) << "regime" << std::setw(16) << "mode" << std::right
      << std::setw(18) << "return" << std::setw(10) << "gap%" << std::setw(10) << "p" << '\n';
  for (const auto& s : stats) {
    char ret[48], gap[24], p[24];
    std::snprintf(ret, sizeof ret, "%.1f +/- %.1f", s.mean, s.std);
    if (s.gap_pct) std::snprintf(gap, sizeof gap, "%.1f", *s.gap_pct);
    else std::snprintf(gap, sizeof gap, "-");
    if (s.test) std::snprintf(p, sizeof p, "%.3g", s.test->p);
    else std::snprintf(p, sizeof p, "-");
    out << std::left << std::setw(18) << s.regime << std::setw(16) << s.mode << std::right
        << std::setw(18) << ret << std::setw(10) << gap << std::setw(10) << p << '\n';
  }
}

void write_svg_chart(std::ostream& out, const std::vector<StatsRow>& stats) {
  std::vector<std::string> modes, regimes;
  for (const auto& s : stats) {
    if (std::find(modes.begin(), modes.end(), s.mode) == modes.end()) modes.push_back(s.mode);
    if (std::find(regimes.begin(), regimes.end(), s.regime) == regimes.end()) regimes.push_back(s.regime);
  }
  double top = 1.0;
  for (const auto& s : stats) top = std::max(top, s.mean + s.std);
  const double bar = 18.0, gap = 30.0, left = 50.0, height = 300.0, base = 330.0;
  const double group = bar * static_cast<double>(regimes.size()) + gap;
  const double width = left + group * static_cast<double>(modes.size()) + 160.0;
  static const char* colors[] = {"#4c72b0", "#dd8452", "#55a868", "#c44e52", "#8172b3", "#937860", "#da8bc3"};

  out << "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"" << width << "\" height=\"380\" "
      << "font-family=\"sans-serif\" font-size=\"11\">\n";
  out << "<line x1=\"" << left << "\" y1=\"" << base << "\" x2=\"" << width - 150 << "\" y2=\""
      << base << "\" stroke=\"black\"/>\n";
  for (std::size_t m = 0; m < modes.size(); ++m) {
    const double gx = left + group * static_cast<double>(m);
    for (std::size_t r = 0; r < regimes.size(); ++r) {
      const auto it = std::find_if(stats.begin(), stats.end(), [&](const StatsRow& s) {
        return s.mode == modes[m] && s.regime == regimes[r];
      });
      if (it == stats.end()) continue;
      const double x = gx + bar * static_cast<double>(r);
      const double h = height * it->mean / top;
      out << "<rect x=\"" << x << "\" y=\"" << base - h << "\" width=\"" << bar - 2 << "\" height=\""
          << h << "\" fill=\"" << colors[r % 7] << "\"/>\n";
      const double lo = base - height * std::max(0.0, it->mean - it->std) / top;
      const double hi = base - height * (it->mean + it->std) / top;
      const double cx = x + (bar - 2) / 2;
      out << "<line x1=\"" << cx << "\" y1=\"" << lo << "\" x2=\"" << cx << "\" y2=\"" << hi
          << "\" stroke=\"black\"/>\n";
    }
    out << "<text x=\"" << gx << "\" y=\"" << base + 16 << "\">" << modes[m] << "</text>\n";
  }
  for (std::size_t r = 0; r < regimes.size(); ++r) {
    const double y = 20.0 + 16.0 * static_cast<double>(r);
    out << "<rect x=\"" << width - 140 << "\" y=\"" << y - 10 << "\" width=\"10\" height=\"10\" fill=\""
        << colors[r % 7] << "\"/><text x=\"" << width - 125 << "\" y=\"" << y << "\">" << regimes[r]
        << "</text>\n";
  }
  out << "</svg>\n";
}

// ---- Evaluation ----------------------------------------------------------

EvalCell evaluate_policy(const PolicyFile& policy, Profile profile, const EvalOptions& options) {
  std::optional<NetworkModel> model;
  if (const auto m = profile_model(profile)) model = *m;
  return evaluate_policy(policy, std::string(to_string(profile)), model, options);
}

EvalCell evaluate_policy(const PolicyFile& policy, const std::string& mode,
                         const std::optional<NetworkModel>& model, const EvalOptions& options) {
  EvalCell cell;
  cell.row.regime = policy.regime;
  cell.row.mode = mode;
  cell.row.seed = static_cast<int>(policy.seed);
  cell.row.episodes = options.episodes;

  const auto net_seed = derive_seed({hash_name(mode), policy.seed, options.net_seed});
  const LoopConfig loop =
      make_loop_config(model, options.placement, options.control_period_ms, net_seed);
  auto env = make_environment(options.env, options.fixed_layout_seed);
  MlpAgent agent(policy.policy, policy.context, options.selection);
  std::vector<double> returns;
  int successes = 0;
  for (int e = 0; e < options.episodes; ++e) {
    auto result = run_episode(loop, *env, agent, evaluation_env_seed(options.eval_seed, e));
    returns.push_back(result.episode_return);
    successes += result.success ? 1 : 0;
    cell.episodes.push_back(std::move(result));
  }
  cell.row.mean_return = mean_of(returns);
  cell.row.std_return = sample_std(returns);
  cell.row.success_rate = static_cast<double>(successes) / static_cast<double>(options.episodes);
  return cell;
}

PolicyFile train_regime(const ExperimentConfig& config, Regime regime, int seed) {
  const auto spec = regime_spec(regime);
  const std::size_t min_stack = config.env == EnvKind::kDoorKey ? 4 : 1;
  const ContextSpec context = context_for(config.env, spec.training_model, config.control_period_ms,
                                          config.history, min_stack);
  const auto index = static_cast<std::uint64_t>(seed);
  std::optional<NetworkModel> training;
  if (spec.training_model) training = *spec.training_model;
  LoopConfig loop_config =
      make_loop_config(training, config.placement, config.control_period_ms,
                       derive_seed({config.trainer.seed, hash_name("train-net"), index}));
  auto env = make_environment(config.env, config.fixed_layout_seed);
  ImpairedLoop loop(loop_config, *env);
  TrainerConfig trainer = config.trainer;
  trainer.seed = derive_seed({config.trainer.seed, index});
  auto result = train_policy(loop, context, trainer);
  return PolicyFile{std::move(result.policy), context, std::string(to_string(config.env)),
                    std::string(to_string(regime)), index};
}

std::filesystem::path policy_path(const std::filesystem::path& dir, Regime regime, int seed) {
  return dir / "policies" / std::string(to_string(regime)) / ("seed" + std::to_string(seed) + ".policy");
}

namespace {

// Regimes whose training channel is identical train identical policies.
std::optional<Regime> training_twin(Regime r) {
  switch (r) {
    case Regime::kDelayOnly: return Regime::kLatencyOnly;
    case Regime::kLatencyOnly: return Regime::kDelayOnly;
    case Regime::kFullNetAware: return Regime::kCombined;
    case Regime::kCombined: return Regime::kFullNetAware;
    default: return std::nullopt;
  }
}

}  // namespace

PolicyFile ensure_policy(const ExperimentConfig& config, const std::filesystem::path& dir,
                         Regime regime, int seed, bool verbose) {
  const auto path = policy_path(dir, regime, seed);
  if (std::filesystem::exists(path)) return load_policy(path);
  PolicyFile policy;
  if (const auto twin = training_twin(regime);
      twin && std::filesystem::exists(policy_path(dir, *twin, seed))) {
    policy = load_policy(policy_path(dir, *twin, seed));
    policy.regime = std::string(to_string(regime));
  } else {
    if (verbose) std::cerr << "training " << to_string(regime) << " seed " << seed << '\n';
    const auto t0 = std::chrono::steady_clock::now();
    policy = train_regime(config, regime, seed);
    if (verbose) {
      const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
      std::cerr << "  " << config.trainer.total_steps << " steps in " << secs << " s ("
                << static_cast<long long>(static_cast<double>(config.trainer.total_steps) * 3600.0 / secs)
                << " steps/hour)\n";
    }
  }
  save_policy(policy, path);
  return policy;
}

std::vector<ReportRow> run_experiment(const ExperimentConfig& config, const std::filesystem::path& dir,
                                      bool verbose) {
  EvalOptions eval;
  eval.env = config.env;
  eval.episodes = config.episodes;
  eval.control_period_ms = config.control_period_ms;
  eval.placement = config.placement;
  eval.eval_seed = config.eval_seed;
  eval.fixed_layout_seed = config.fixed_layout_seed;

  std::vector<ReportRow> rows;
  for (const Regime regime : config.regimes) {
    for (int seed = 0; seed < config.seeds; ++seed) {
      const PolicyFile policy = ensure_policy(config, dir, regime, seed, verbose);
      for (const Profile profile : config.profiles) {
        rows.push_back(evaluate_policy(policy, profile, eval).row);
        if (verbose) {
          std::cerr << "  " << to_string(profile) << ": " << rows.back().mean_return << '\n';
        }
      }
    }
  }
  return rows;
}

}  // namespace netrl
