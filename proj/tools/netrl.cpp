// Command-line front end: train, eval, ablate, trace, serve, report.
#include <CLI11.hpp>

#include <cstdio>
#include <fstream>
#include <iostream>
#include <functional>
#include <map>

#include "netrl/config.hpp"
#include "netrl/eval.hpp"
#include "netrl/mode3.hpp"
#include "netrl/tracer.hpp"

namespace fs = std::filesystem;
using namespace netrl;

namespace {

constexpr int kUsageError = 2;

// Every schema key becomes --section.key on the subcommands that read a
// config; values given on the command line win over the file.
struct Overrides {
  std::map<std::string, std::string> values;

  void attach(CLI::App* app) {
    for (const auto& k : config_schema()) {
      const std::string name = std::string(k.section) + "." + k.key;
      app->add_option("--" + name, values[name], k.help);
    }
  }
  Config apply(const std::string& path) const {
    Config cfg = Config::load(path);
    for (const auto& [key, value] : values) {
      if (!value.empty()) cfg.set(key, value);
    }
    return cfg;
  }
};

Tail parse_tail(const std::string& s) {
  if (s == "two-sided") return Tail::kTwoSided;
  if (s == "greater") return Tail::kGreater;
  if (s == "less") return Tail::kLess;
  throw ConfigError("unknown tail '" + s + "'");
}

void write_file(const fs::path& path, const std::function<void(std::ostream&)>& body) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  body(out);
}

void emit_reports(const fs::path& dir, const std::vector<ReportRow>& rows, const Config& cfg,
                  bool plot) {
  write_file(dir / "report.csv", [&](std::ostream& o) { write_report_csv(o, rows); });
  const auto stats = compute_stats(rows, cfg.get("stats.clean_mode"), cfg.get_or("stats.vs_regime", ""),
                                   parse_tail(cfg.get("stats.tail")));
  write_file(dir / "stats.csv", [&](std::ostream& o) { write_stats_csv(o, stats); });
  if (plot) write_file(dir / "chart.svg", [&](std::ostream& o) { write_svg_chart(o, stats); });
  write_gap_table(std::cout, stats);
}

// Realized network conditions per evaluated cell.
void write_conditions(std::ostream& out, const EvalCell& cell, bool header) {
  if (header) {
    out << "regime,mode,seed,obs_p50_ms,obs_p95_ms,act_p50_ms,act_p95_ms,e2e_p50_ms,e2e_p95_ms,"
           "obs_dropped,act_dropped\n";
  }
  std::vector<double> obs, act, e2e;
  int obs_drop = 0, act_drop = 0;
  for (const auto& e : cell.episodes) {
    obs.insert(obs.end(), e.obs_latencies_ms.begin(), e.obs_latencies_ms.end());
    act.insert(act.end(), e.act_latencies_ms.begin(), e.act_latencies_ms.end());
    e2e.insert(e2e.end(), e.e2e_latencies_ms.begin(), e.e2e_latencies_ms.end());
    obs_drop += e.obs_dropped;
    act_drop += e.act_dropped;
  }
  auto pct = [](const std::vector<double>& v, double q) {
    return v.empty() ? std::string() : std::to_string(percentile(v, q));
  };
  out << cell.row.regime << ',' << cell.row.mode << ',' << cell.row.seed << ',' << pct(obs, 50) << ','
      << pct(obs, 95) << ',' << pct(act, 50) << ',' << pct(act, 95) << ',' << pct(e2e, 50) << ','
      << pct(e2e, 95) << ',' << obs_drop << ',' << act_drop << '\n';
}

PolicyFile load_or_fail(const fs::path& path) {
  if (!fs::exists(path)) throw ConfigError("missing policy file " + path.string());
  return load_policy(path);
}

int cmd_train(const Config& cfg) {
  const auto x = experiment_from(cfg);
  const auto dir = out_dir_from(cfg);
  for (const Regime r : x.regimes) {
    for (int seed = 0; seed < x.seeds; ++seed) ensure_policy(x, dir, r, seed, true);
  }
  return 0;
}

int evaluate_into(const Config& cfg, const std::vector<Regime>& regimes, bool train_missing) {
  auto x = experiment_from(cfg);
  const auto dir = out_dir_from(cfg);
  const auto conditions = conditions_from(cfg);
  const auto options = eval_options_from(cfg);
  const fs::path trace_dir = cfg.get_or("run.trace_dir", "");

  std::vector<ReportRow> rows;
  std::ofstream cond;
  fs::create_directories(dir);
  cond.open(dir / "conditions.csv");
  bool header = true;
  for (const Regime r : regimes) {
    for (int seed = 0; seed < x.seeds; ++seed) {
      const auto policy =
          train_missing ? ensure_policy(x, dir, r, seed, true) : load_or_fail(policy_path(dir, r, seed));
      for (const auto& [mode, model] : conditions) {
        const auto cell = evaluate_policy(policy, mode, model, options);
        rows.push_back(cell.row);
        write_conditions(cond, cell, header);
        header = false;
        if (!trace_dir.empty() && model) {
          fs::create_directories(trace_dir);
          LatencyTrace trace;
          for (const auto& e : cell.episodes) {
            trace.append_realized(e.obs_realized);
            trace.append_realized(e.act_realized);
          }
          if (!trace.empty()) {
            export_trace(trace, trace_dir / (std::string(to_string(r)) + "-" + mode + "-seed" +
                                             std::to_string(seed) + ".trace"));
          }
        }
      }
    }
  }
  emit_reports(dir, rows, cfg, true);
  return 0;
}

int cmd_trace_summarize(const fs::path& file) {
  const auto trace = read_trace(file);
  const auto s = trace.summary();
  std::printf("count=%zu\ndropped=%zu\nmean_ms=%.3f\nstd_ms=%.3f\np50_ms=%.3f\np95_ms=%.3f\nloss_rate=%.4f\n",
              s.count, s.dropped, s.mean_ms, s.std_ms, s.p50_ms, s.p95_ms, s.loss_rate);
  return 0;
}

int cmd_trace_replay(const fs::path& file, int draws, std::uint64_t seed) {
  const NetworkModel model = load_trace(file);
  Rng rng(seed);
  std::vector<double> samples;
  std::size_t dropped = 0;
  for (int i = 0; i < draws; ++i) {
    if (sample_loss(model, rng)) {
      ++dropped;
      sample_delay(model, rng);
    } else {
      samples.push_back(sample_delay(model, rng));
    }
  }
  if (samples.empty()) throw EmptyTraceError();
  const auto s = summarize(samples, dropped);
  std::printf("draws=%d\ncount=%zu\ndropped=%zu\nmean_ms=%.3f\np50_ms=%.3f\np95_ms=%.3f\n", draws,
              s.count, s.dropped, s.mean_ms, s.p50_ms, s.p95_ms);
  return 0;
}

int cmd_serve_env(const Config& cfg) {
  const auto x = experiment_from(cfg);
  const auto service = service_from(cfg);
  auto env = make_environment(x.env, x.fixed_layout_seed);
  const auto report = run_env_host(service, *env, [&] {
    std::cerr << "env host listening on " << service.address << ':' << service.port << '\n';
  });
  double total = 0.0;
  for (const auto& e : report.episodes) total += e.episode_return;
  const double mean = report.episodes.empty() ? 0.0 : total / static_cast<double>(report.episodes.size());
  std::printf("episodes=%zu\naborted=%zu\nmean_return=%.17g\nlate_actions=%d\ndecode_failures=%d\n",
              report.episodes.size(), report.aborted.size(), mean, report.late_actions,
              report.decode_failures);
  if (!report.trace.samples().empty()) {
    const auto s = report.trace.summary();
    std::printf("e2e_p50_ms=%.3f\ne2e_p95_ms=%.3f\n", s.p50_ms, s.p95_ms);
  }
  if (cfg.has("serve.trace") && !report.trace.empty()) export_trace(report.trace, cfg.get("serve.trace"));
  return report.aborted.empty() ? 0 : 1;
}

int cmd_serve_agent(const Config& cfg) {
  const auto service = service_from(cfg);
  const auto dir = out_dir_from(cfg);
  const auto policy = load_or_fail(policy_path(dir, parse_regime(cfg.get("serve.regime")),
                                               cfg.get_int("serve.policy_seed")));
  MlpAgent agent(policy.policy, policy.context);
  const auto report = run_agent_host(service, agent);
  std::printf("episodes=%zu\ndecode_failures=%d\n", report.episodes.size(), report.decode_failures);
  if (cfg.has("serve.trace") && !report.trace.empty()) export_trace(report.trace, cfg.get("serve.trace"));
  return 0;
}

int cmd_report(const fs::path& dir, const Config& cfg, bool plot) {
  std::ifstream in(dir / "report.csv");
  if (!in) throw ConfigError("no report.csv in " + dir.string());
  const auto rows = read_report_csv(in);
  const auto stats = compute_stats(rows, cfg.get("stats.clean_mode"), cfg.get_or("stats.vs_regime", ""),
                                   parse_tail(cfg.get("stats.tail")));
  write_file(dir / "stats.csv", [&](std::ostream& o) { write_stats_csv(o, stats); });
  if (plot) write_file(dir / "chart.svg", [&](std::ostream& o) { write_svg_chart(o, stats); });
  write_gap_table(std::cout, stats);
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Train and evaluate RL policies across impaired network channels"};
  app.require_subcommand(1);

  std::string config_path;
  Overrides overrides;
  auto with_config = [&](CLI::App* sub) {
    sub->add_option("config", config_path, "experiment config file")->required()->check(CLI::ExistingFile);
    overrides.attach(sub);
  };

  auto* train = app.add_subcommand("train", "train policies for run.regimes x run.seeds");
  with_config(train);
  auto* eval = app.add_subcommand("eval", "evaluate trained policies under run.modes");
  with_config(eval);
  auto* ablate = app.add_subcommand("ablate", "train and evaluate the five ablation regimes");
  with_config(ablate);

  auto* trace = app.add_subcommand("trace", "inspect latency traces");
  trace->require_subcommand(1);
  std::string trace_file;
  int draws = 100000;
  std::uint64_t replay_seed = 0;
  auto* summarize_cmd = trace->add_subcommand("summarize", "print trace statistics");
  summarize_cmd->add_option("file", trace_file)->required()->check(CLI::ExistingFile);
  auto* replay_cmd = trace->add_subcommand("replay", "resample delays from a trace");
  replay_cmd->add_option("file", trace_file)->required()->check(CLI::ExistingFile);
  replay_cmd->add_option("--draws", draws)->check(CLI::PositiveNumber);
  replay_cmd->add_option("--seed", replay_seed);

  auto* serve = app.add_subcommand("serve", "run one side of a networked session");
  serve->require_subcommand(1);
  auto* serve_env = serve->add_subcommand("env", "environment host");
  with_config(serve_env);
  auto* serve_agent = serve->add_subcommand("agent", "agent host");
  with_config(serve_agent);

  auto* report = app.add_subcommand("report", "recompute statistics for a report directory");
  std::string report_dir;
  std::string report_config;
  bool no_plot = false;
  report->add_option("dir", report_dir)->required()->check(CLI::ExistingDirectory);
  report->add_option("--config", report_config, "config supplying [stats] settings")
      ->check(CLI::ExistingFile);
  report->add_flag("--no-plot", no_plot, "skip chart.svg");
  Overrides report_overrides;
  report_overrides.attach(report);

  try {
    app.parse(argc, argv);
  } catch (const CLI::CallForHelp& e) {
    return app.exit(e);
  } catch (const CLI::CallForAllHelp& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return kUsageError;
  }

  try {
    if (*train) return cmd_train(overrides.apply(config_path));
    if (*eval) {
      const auto cfg = overrides.apply(config_path);
      const auto x = experiment_from(cfg);
      return evaluate_into(cfg, x.regimes, false);
    }
    if (*ablate) return evaluate_into(overrides.apply(config_path), ablation_regimes(), true);
    if (*summarize_cmd) return cmd_trace_summarize(trace_file);
    if (*replay_cmd) return cmd_trace_replay(trace_file, draws, replay_seed);
    if (*serve_env) return cmd_serve_env(overrides.apply(config_path));
    if (*serve_agent) return cmd_serve_agent(overrides.apply(config_path));
    if (*report) {
      Config cfg = report_config.empty() ? Config() : Config::load(report_config);
      for (const auto& [key, value] : report_overrides.values) {
        if (!value.empty()) cfg.set(key, value);
      }
      return cmd_report(report_dir, cfg, !no_plot);
    }
  } catch (const ConfigError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsageError;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return kUsageError;
}
