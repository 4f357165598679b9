// Acceptance checks 1-12. Prints one PASS/FAIL line per criterion and exits
// non-zero if any fails. Oracles are computed here, independently of the
// library code under test.
#include <CLI11.hpp>

#include <fcntl.h>
#include <spawn.h>
#include <sys/wait.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <deque>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <sstream>

#include "netrl/config.hpp"
#include "netrl/doorkey.hpp"
#include "netrl/eval.hpp"
#include "netrl/graph.hpp"
#include "netrl/tracer.hpp"

extern char** environ;

using namespace netrl;
namespace fs = std::filesystem;
using Clock = std::chrono::steady_clock;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), {}};
}

double mean(const std::vector<double>& v) {
  double s = 0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

double stdev(const std::vector<double>& v) {
  const double m = mean(v);
  double ss = 0;
  for (double x : v) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(v.size() - 1));
}

// ---- 1. shim statistical fidelity -----------------------------------------

double norm_pdf(double z) { return std::exp(-0.5 * z * z) / std::sqrt(2.0 * M_PI); }
double norm_cdf(double z) { return 0.5 * std::erfc(-z / std::sqrt(2.0)); }

Outcome shim_fidelity() {
  const auto t0 = Clock::now();
  const int n = 100000;
  std::string detail;
  bool ok = true;
  for (Profile p : {Profile::kEthernetClean, Profile::kWifiNormal, Profile::kWifiDegraded}) {
    const SyntheticModel m = *profile_model(p);
    NetworkShim shim(m, derive_seed({hash_name("fidelity"), static_cast<std::uint64_t>(p)}));
    for (int i = 0; i < n; ++i) {
      shim.submit({SeqNum{static_cast<std::uint32_t>(i)}, Timestamp{}, ActionBody{0}}, Timestamp{});
    }
    std::vector<double> d;
    int dropped = 0;
    for (const auto& r : shim.realized_log()) {
      if (r.dropped()) {
        ++dropped;
      } else {
        d.push_back(*r.delay_ms);
      }
    }
    // E[max(0,X)] = mu Phi(mu/s) + s phi(mu/s);
    // E[max(0,X)^2] = (mu^2 + s^2) Phi(mu/s) + mu s phi(mu/s).
    const double z = m.mu_ms / m.sigma_ms;
    const double em = m.mu_ms * norm_cdf(z) + m.sigma_ms * norm_pdf(z);
    const double e2 = (m.mu_ms * m.mu_ms + m.sigma_ms * m.sigma_ms) * norm_cdf(z) +
                      m.mu_ms * m.sigma_ms * norm_pdf(z);
    const double es = std::sqrt(e2 - em * em);

    const double sm = mean(d), ss = stdev(d);
    double m4 = 0;
    for (double x : d) m4 += std::pow(x - sm, 4);
    m4 /= static_cast<double>(d.size());
    const double k = static_cast<double>(d.size());
    const double se_mean = ss / std::sqrt(k);
    const double se_std = std::sqrt(std::max(m4 - std::pow(ss, 4), 0.0) / k) / (2 * ss);
    const double rate = static_cast<double>(dropped) / n;
    const double se_rate = std::sqrt(m.p_loss * (1 - m.p_loss) / n);
    const bool mean_ok = std::abs(sm - em) < 3 * se_mean;
    const bool std_ok = std::abs(ss - es) < 3 * se_std;
    const bool drop_ok = m.p_loss == 0 ? dropped == 0 : std::abs(rate - m.p_loss) < 3 * se_rate;
    ok = ok && mean_ok && std_ok && drop_ok;
    detail += fmt("%s mean %.3f/%.3f std %.3f/%.3f drop %.4f/%.2f; ", std::string(to_string(p)).c_str(),
                  sm, em, ss, es, rate, m.p_loss);
  }
  const double secs = seconds_since(t0);
  detail += fmt("%.2fs", secs);
  return {ok && secs < 5.0, detail};
}

// ---- 2. determinism ---------------------------------------------------------

ExperimentConfig small_experiment() {
  ExperimentConfig x;
  x.regimes = {Regime::kCombined};
  x.profiles = {Profile::kSimClean, Profile::kWifiDegraded};
  x.seeds = 2;
  x.episodes = 10;
  x.trainer.total_steps = 8192;
  return x;
}

void produce_run(const fs::path& dir) {
  fs::remove_all(dir);
  const auto x = small_experiment();
  const auto rows = run_experiment(x, dir);
  {
    std::ofstream out(dir / "report.csv");
    write_report_csv(out, rows);
  }
  EvalOptions o;
  o.episodes = x.episodes;
  for (int seed = 0; seed < x.seeds; ++seed) {
    const auto policy = load_policy(policy_path(dir, Regime::kCombined, seed));
    const auto cell = evaluate_policy(policy, Profile::kWifiDegraded, o);
    LatencyTrace trace;
    for (const auto& e : cell.episodes) {
      trace.append_realized(e.obs_realized);
      trace.append_realized(e.act_realized);
    }
    export_trace(trace, dir / fmt("seed%d.trace", seed));
  }
}

Outcome determinism(const fs::path& work) {
  const auto t0 = Clock::now();
  const auto a = work / "determinism-a", b = work / "determinism-b";
  produce_run(a);
  produce_run(b);
  int files = 0, differing = 0;
  for (const auto& entry : fs::recursive_directory_iterator(a)) {
    if (!entry.is_regular_file()) continue;
    ++files;
    const auto other = b / fs::relative(entry.path(), a);
    if (!fs::exists(other) || slurp(entry.path()) != slurp(other)) ++differing;
  }
  const double secs = seconds_since(t0);
  return {files >= 5 && differing == 0 && secs < 60.0,
          fmt("%d files compared, %d differ; %.1fs", files, differing, secs)};
}

// ---- 3. passthrough equivalence ---------------------------------------------

Outcome passthrough(int episodes) {
  const auto t0 = Clock::now();
  int mismatched = 0;
  long ticks = 0;
  for (EnvKind kind : {EnvKind::kCartPole, EnvKind::kDoorKey}) {
    auto env = make_environment(kind);
    // An untrained network: observation-dependent and deterministic.
    const ContextSpec spec{observation_dim(kind), static_cast<std::size_t>(env->action_count()), 1, 0};
    PolicyMLP net({spec.input_dim(), 32, spec.action_count});
    Rng rng(7);
    net.init_orthogonal(rng);
    for (double& p : net.params()) p += rng.normal(0.0, 0.3);
    MlpAgent agent(net, spec);

    LoopConfig local;
    local.record_ticks = true;
    LoopConfig sim = make_loop_config(NetworkModel{SyntheticModel{0, 0, 0}}, Placement::kBoth, 20.0, 3);
    sim.record_ticks = true;
    for (int e = 0; e < episodes; ++e) {
      const auto seed = evaluation_env_seed(11, e);
      const auto a = run_episode(local, *env, agent, seed);
      const auto b = run_episode(sim, *env, agent, seed);
      bool same = a.ticks.size() == b.ticks.size() && a.episode_return == b.episode_return;
      for (std::size_t i = 0; same && i < a.ticks.size(); ++i) {
        same = a.ticks[i].applied_action == b.ticks[i].applied_action &&
               a.ticks[i].reward == b.ticks[i].reward && a.ticks[i].done == b.ticks[i].done;
      }
      ticks += static_cast<long>(a.ticks.size());
      mismatched += same ? 0 : 1;
    }
  }
  const double secs = seconds_since(t0);
  return {mismatched == 0 && secs < 60.0,
          fmt("%d episodes x 2 envs, %ld ticks, %d mismatched; %.1fs", episodes, ticks, mismatched, secs)};
}

// ---- 4. delay semantics -----------------------------------------------------

Outcome delay_semantics() {
  const auto t0 = Clock::now();
  const std::uint64_t period_us = 20000, delay_us = 50000;
  LoopConfig cfg = make_loop_config(NetworkModel{SyntheticModel{50, 0, 0}}, Placement::kActOnly, 20.0, 1);
  cfg.record_ticks = true;
  DoorKeyEnv env;
  RandomAgent agent(kDoorKeyActionCount);
  int steps = 0, checked = 0, wrong = 0;
  std::map<int, int> offsets;
  for (std::uint64_t seed = 0; steps < 1000; ++seed) {
    const auto r = run_episode(cfg, env, agent, seed);
    std::map<std::uint32_t, int> sent_at;
    for (const auto& t : r.ticks) {
      if (t.action_sent) sent_at[*t.action_sent] = t.tick;
      if (!t.action_applied) continue;
      const int sent = sent_at.at(*t.action_applied);
      // Tick schedule: the action leaves at sent * period and is applied on
      // the first tick whose time is at or after its arrival.
      const std::uint64_t arrival = sent * period_us + delay_us;
      int expected = sent;
      while (expected * period_us < arrival) ++expected;
      ++offsets[t.tick - sent];
      wrong += (t.tick != expected) ? 1 : 0;
      ++checked;
    }
    steps += r.steps;
  }
  std::string hist;
  for (auto [off, count] : offsets) hist += fmt("%d:%d ", off, count);
  const double secs = seconds_since(t0);
  const bool ok = wrong == 0 && offsets.size() == 1 && offsets.begin()->first == 3 && steps >= 1000 &&
                  secs < 10.0;
  return {ok, fmt("%d steps, %d actions checked, offsets {%s}, %d off-schedule; %.2fs", steps, checked,
                  hist.c_str(), wrong, secs)};
}

// ---- 5-7. degradation, network-aware recovery, ablation -----------------------

struct Experiment {
  std::map<std::string, std::vector<double>> clean, degraded;  // per regime, by seed
};

Experiment run_main_experiment(const fs::path& dir, int seeds, int episodes) {
  ExperimentConfig x;
  x.regimes = ablation_regimes();
  x.regimes.push_back(Regime::kFullNetAware);
  x.profiles = {Profile::kSimClean, Profile::kWifiDegraded};
  x.seeds = seeds;
  x.episodes = episodes;
  const auto rows = run_experiment(x, dir, true);
  {
    std::ofstream out(dir / "report.csv");
    write_report_csv(out, rows);
    const auto stats = compute_stats(rows, "sim-clean", "baseline");
    std::ofstream s(dir / "stats.csv");
    write_stats_csv(s, stats);
    write_gap_table(std::cout, stats);
  }
  Experiment e;
  for (const auto& r : rows) {
    auto& m = r.mode == "sim-clean" ? e.clean : e.degraded;
    m[r.regime].push_back(r.mean_return);
  }
  return e;
}

Outcome degradation(const Experiment& e) {
  const double c = mean(e.clean.at("baseline")), d = mean(e.degraded.at("baseline"));
  const double gap = 100.0 * (c - d) / c;
  return {gap >= 40.0, fmt("baseline sim-clean %.1f, wifi-degraded %.1f, drop %.1f%% (need >= 40%%)", c, d, gap)};
}

Outcome recovery(const Experiment& e) {
  auto gaps = [&](const std::string& regime) {
    std::vector<double> g;
    const auto& c = e.clean.at(regime);
    const auto& d = e.degraded.at(regime);
    for (std::size_t i = 0; i < c.size(); ++i) g.push_back(100.0 * (c[i] - d[i]) / c[i]);
    return g;
  };
  const auto fna = gaps("full-net-aware"), base = gaps("baseline");
  const double gf = mean(fna), gb = mean(base);
  std::string test = "t-test undefined";
  bool significant = false;
  try {
    const auto t = paired_t_test(fna, base);
    significant = t.p < 0.05;
    test = fmt("t=%.3f p=%.4g", t.t, t.p);
  } catch (const std::exception& ex) {
    test = ex.what();
  }
  return {gf < 0.5 * gb && significant,
          fmt("gap full-net-aware %.1f%% vs baseline %.1f%% (need < %.1f%%), paired on per-seed gaps: %s", gf,
              gb, 0.5 * gb, test.c_str())};
}

Outcome ablation(const Experiment& e) {
  auto m = [&](const char* r) { return mean(e.degraded.at(r)); };
  const double comb = m("combined"), stoch = m("stochastic-delay"), loss = m("loss-only"),
               lat = m("latency-only"), base = m("baseline");
  const bool order = comb > stoch && comb > loss && stoch > lat && loss > lat && lat > base;
  bool significant = false;
  std::string test;
  try {
    const auto t = paired_t_test(e.degraded.at("combined"), e.degraded.at("latency-only"));
    significant = t.p < 0.05 && t.t > 0;
    test = fmt("combined vs latency-only t=%.3f p=%.4g", t.t, t.p);
  } catch (const std::exception& ex) {
    test = ex.what();
  }
  return {order && significant,
          fmt("wifi-degraded means: combined %.1f, stochastic %.1f, loss-only %.1f, latency-only %.1f, "
              "baseline %.1f; %s",
              comb, stoch, loss, lat, base, test.c_str())};
}

// ---- 8. statistics oracles --------------------------------------------------

Outcome statistics_oracles() {
  const std::vector<double> a{2, 3, 4}, b{1, 1, 1};
  const auto t = paired_t_test(a, b);
  // differences 1,2,3: mean 2, sd 1, t = 2 / (1 / sqrt 3)
  const double t_oracle = 2.0 * std::sqrt(3.0);
  const double d = cohens_d(std::vector<double>{2, 4}, std::vector<double>{1, 3});
  const double d_oracle = 1.0 / std::sqrt(2.0);  // mean diff 1, pooled sd sqrt(2)
  const bool t_ok = std::abs(t.t - t_oracle) < 1e-6 && t.dof == 2;
  const bool d_ok = std::abs(d - d_oracle) < 1e-6;

  Rng rng(2024);
  int bad = 0;
  const int cases = 10000;
  for (int c = 0; c < cases; ++c) {
    const auto n = 1 + rng.below(60);
    std::vector<double> v(n);
    for (double& x : v) x = std::round(rng.normal(50, 30));  // ties on purpose
    const double q = c % 10 == 0 ? static_cast<double>(rng.below(101)) : rng.uniform(0, 100);
    auto sorted = v;
    std::sort(sorted.begin(), sorted.end());
    // Nearest rank: smallest value with at least q% of samples at or below it.
    double oracle = sorted.back();
    for (std::size_t i = 0; i < n; ++i) {
      if (100.0 * static_cast<double>(i + 1) >= q * static_cast<double>(n) - 1e-9) {
        oracle = sorted[i];
        break;
      }
    }
    bad += percentile(v, q) == oracle ? 0 : 1;
  }
  return {t_ok && d_ok && bad == 0, fmt("t=%.7f dof=%d (oracle %.7f), d=%.7f (oracle %.7f), "
                                        "percentile mismatches %d/%d",
                                        t.t, t.dof, t_oracle, d, d_oracle, bad, cases)};
}

// ---- 9. trace replay fidelity -------------------------------------------------

Outcome trace_replay(const fs::path& work) {
  const auto cfg = make_loop_config(NetworkModel{*profile_model(Profile::kWifiNormal)}, Placement::kSplit,
                                    20.0, 77);
  DoorKeyEnv env;
  RandomAgent agent(kDoorKeyActionCount);
  LatencyTrace recorded;
  for (std::uint64_t seed = 0; seed < 5; ++seed) {
    const auto r = run_episode(cfg, env, agent, seed);
    recorded.append_realized(r.obs_realized);
    recorded.append_realized(r.act_realized);
  }
  const auto path = work / "replay.trace";
  export_trace(recorded, path);
  const NetworkModel model = load_trace(path);

  std::vector<double> emp = recorded.latencies_ms(), draws;
  Rng rng(123);
  const int n = 100000;
  while (static_cast<int>(draws.size()) < n) {
    const bool lost = sample_loss(model, rng);
    const double d = sample_delay(model, rng);
    if (!lost) draws.push_back(d);
  }
  std::sort(emp.begin(), emp.end());
  std::sort(draws.begin(), draws.end());
  // Two-sample KS: largest CDF gap, evaluated after each distinct value.
  double ks = 0;
  std::size_t i = 0, j = 0;
  while (i < emp.size() || j < draws.size()) {
    const double x = j == draws.size() || (i < emp.size() && emp[i] <= draws[j]) ? emp[i] : draws[j];
    while (i < emp.size() && emp[i] <= x) ++i;
    while (j < draws.size() && draws[j] <= x) ++j;
    ks = std::max(ks, std::abs(static_cast<double>(i) / emp.size() - static_cast<double>(j) / draws.size()));
  }
  return {ks < 0.01, fmt("%zu recorded latencies, %d replayed draws, KS %.5f (need < 0.01)", emp.size(), n, ks)};
}

// ---- 10. DoorKey solvability -------------------------------------------------

Outcome doorkey_solvable() {
  int solved = 0, oracle_ok = 0;
  const int layouts = 1000;
  for (int i = 0; i < layouts; ++i) {
    const auto seed = evaluation_env_seed(0, i);
    DoorKeyEnv env;
    env.reset(seed);
    const DoorKeyState s = env.state();
    auto flood = [&](bool through_door) {
      std::vector<std::vector<bool>> seen(kDoorKeySize, std::vector<bool>(kDoorKeySize));
      std::deque<GridPos> q{s.agent};
      seen[s.agent.y][s.agent.x] = true;
      while (!q.empty()) {
        const auto p = q.front();
        q.pop_front();
        for (auto [dx, dy] : {std::pair{1, 0}, {-1, 0}, {0, 1}, {0, -1}}) {
          const GridPos n{p.x + dx, p.y + dy};
          const Cell c = s.grid[n.y][n.x];  // the border is wall, so n stays inside
          if (seen[n.y][n.x] || c == Cell::kWall) continue;
          if (c == Cell::kDoorLocked && !through_door) continue;
          seen[n.y][n.x] = true;
          q.push_back(n);
        }
      }
      return seen;
    };
    GridPos key{-1, -1}, goal{-1, -1};
    int doors = 0;
    for (int y = 0; y < kDoorKeySize; ++y) {
      for (int x = 0; x < kDoorKeySize; ++x) {
        if (s.grid[y][x] == Cell::kKey) key = {x, y};
        if (s.grid[y][x] == Cell::kGoal) goal = {x, y};
        if (s.grid[y][x] == Cell::kDoorLocked) ++doors;
      }
    }
    const auto closed = flood(false), open = flood(true);
    if (key.x >= 0 && goal.x >= 0 && doors == 1 && closed[key.y][key.x] && !closed[goal.y][goal.x] &&
        open[goal.y][goal.x]) {
      ++oracle_ok;
    }

    ScriptedDoorKeyAgent agent(env);
    solved += run_episode(LoopConfig{}, env, agent, seed).success ? 1 : 0;
  }
  return {solved == layouts && oracle_ok == layouts,
          fmt("scripted solver %d/%d, flood-fill oracle %d/%d", solved, layouts, oracle_ok, layouts)};
}

// ---- 11. policy graph --------------------------------------------------------

Outcome policy_graph(const fs::path& dir, int episodes) {
  ExperimentConfig x;
  const PolicyFile stabiliser = ensure_policy(x, dir, Regime::kBaseline, 0, true);

  const SyntheticModel normal = *profile_model(Profile::kWifiNormal);
  const auto recentring_path = dir / "policies" / "graph-recentring" / "seed0.policy";
  PolicyFile recentring;
  if (fs::exists(recentring_path)) {
    recentring = load_policy(recentring_path);
  } else {
    std::cerr << "training recentring unit\n";
    const ContextSpec ctx = context_for(EnvKind::kCartPole, normal, 20.0);
    RecenteringCartPole env;
    ImpairedLoop loop(make_loop_config(NetworkModel{normal}, Placement::kSplit, 20.0,
                                       derive_seed({hash_name("graph-train"), 0})),
                      env);
    TrainerConfig t;
    t.seed = derive_seed({hash_name("graph-recentring"), 0});
    auto result = train_policy(loop, ctx, t);
    recentring = PolicyFile{std::move(result.policy), ctx, "cartpole", "graph-recentring", 0};
    save_policy(recentring, recentring_path);
  }

  EvalOptions o;
  o.episodes = episodes;
  const auto flat_stab = evaluate_policy(stabiliser, "sim-clean", std::nullopt, o);
  const auto flat_rec = evaluate_policy(recentring, "wifi-normal", NetworkModel{normal}, o);

  GraphConfig g;
  g.channels[1] = place(normal, Placement::kSplit);
  g.net_seed = hash_name("graph-eval");
  CartPoleEnv env;
  MlpAgent u0(stabiliser.policy, stabiliser.context), u1(recentring.policy, recentring.context);
  std::vector<double> returns;
  std::array<std::vector<double>, 2> lat;
  int switches = 0;
  for (int e = 0; e < episodes; ++e) {
    const auto r = run_graph_episode(g, env, {&u0, &u1}, evaluation_env_seed(0, e));
    returns.push_back(r.episode_return);
    switches += static_cast<int>(r.switches.size()) - 1;
    for (int u = 0; u < 2; ++u) lat[u].insert(lat[u].end(), r.e2e_latencies_ms[u].begin(), r.e2e_latencies_ms[u].end());
  }
  const double m0 = flat_stab.row.mean_return, m1 = flat_rec.row.mean_return;
  const double s0 = flat_stab.row.std_return, s1 = flat_rec.row.std_return;
  const double pooled = std::sqrt((s0 * s0 + s1 * s1) / 2.0);
  const double lo = std::min(m0, m1) - pooled, hi = std::max(m0, m1) + pooled;
  const double gm = mean(returns);
  auto pct = [&](int u, double q) { return lat[u].empty() ? 0.0 : percentile(lat[u], q); };
  return {static_cast<int>(returns.size()) == episodes && gm >= lo && gm <= hi,
          fmt("graph %.1f over %d episodes (%d switches); flat stabiliser %.1f+/-%.1f, flat recentring %.1f+/-%.1f, "
              "band [%.1f, %.1f]; e2e unit0 p50/p95 %.1f/%.1f ms, unit1 p50/p95 %.1f/%.1f ms",
              gm, episodes, switches, m0, s0, m1, s1, lo, hi, pct(0, 50), pct(0, 95), pct(1, 50), pct(1, 95))};
}

// ---- 12. Mode 3 loopback parity ------------------------------------------------

pid_t spawn(const std::vector<std::string>& args, const fs::path& out) {
  posix_spawn_file_actions_t fa;
  posix_spawn_file_actions_init(&fa);
  posix_spawn_file_actions_addopen(&fa, 1, out.c_str(), O_WRONLY | O_CREAT | O_TRUNC, 0644);
  posix_spawn_file_actions_adddup2(&fa, 1, 2);
  std::vector<char*> argv;
  for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
  argv.push_back(nullptr);
  pid_t pid = -1;
  if (posix_spawn(&pid, argv[0], &fa, nullptr, argv.data(), environ) != 0) pid = -1;
  posix_spawn_file_actions_destroy(&fa);
  return pid;
}

int wait_for(pid_t pid) {
  int status = 0;
  waitpid(pid, &status, 0);
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

Outcome loopback_parity(const fs::path& cli, const fs::path& dir, int episodes) {
  if (cli.empty() || !fs::exists(cli)) return {false, "netrl CLI not found; pass --cli"};
  ExperimentConfig x;
  const PolicyFile policy = ensure_policy(x, dir, Regime::kBaseline, 0, true);
  EvalOptions o;
  o.episodes = episodes;
  const double local = evaluate_policy(policy, "sim-clean", std::nullopt, o).row.mean_return;

  const auto ini = dir / "loopback.ini";
  {
    std::ofstream out(ini);
    out << "[run]\nout_dir = " << dir.string() << "\nepisodes = " << episodes
        << "\ncontrol_period_ms = 5\neval_seed = 0\n"
        << "[serve]\nport = 47711\naction_window_ms = 4\nregime = baseline\npolicy_seed = 0\n";
  }
  const auto t0 = Clock::now();
  const pid_t env = spawn({cli.string(), "serve", "env", ini.string()}, dir / "serve-env.out");
  const pid_t agent = spawn({cli.string(), "serve", "agent", ini.string()}, dir / "serve-agent.out");
  if (env < 0 || agent < 0) return {false, "could not start the serve processes"};
  const int agent_rc = wait_for(agent);
  const int env_rc = wait_for(env);

  std::map<std::string, std::string> kv;
  std::istringstream in(slurp(dir / "serve-env.out"));
  for (std::string line; std::getline(in, line);) {
    const auto eq = line.find('=');
    if (eq != std::string::npos) kv[line.substr(0, eq)] = line.substr(eq + 1);
  }
  if (env_rc != 0 || agent_rc != 0 || !kv.count("mean_return")) {
    return {false, fmt("serve processes exited %d/%d", env_rc, agent_rc)};
  }
  const double remote = std::stod(kv["mean_return"]);
  const double rel = std::abs(remote - local) / local;
  return {rel <= 0.02 && std::stoi(kv["episodes"]) == episodes,
          fmt("local %.2f, loopback %.2f over %s episodes (%.2f%% apart), late actions %s, e2e p50/p95 %s/%s ms; "
              "%.0fs",
              local, remote, kv["episodes"].c_str(), 100 * rel, kv["late_actions"].c_str(),
              kv["e2e_p50_ms"].c_str(), kv["e2e_p95_ms"].c_str(), seconds_since(t0))};
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"acceptance checks"};
  fs::path work = "acceptance-work";
  fs::path cli;
  bool fresh = false;
  std::vector<int> only;
  int seeds = 10, episodes = 50;
  app.add_option("--work", work, "scratch directory; trained policies are cached here");
  app.add_option("--cli", cli, "path to the netrl executable");
  app.add_flag("--fresh", fresh, "clear the scratch directory first");
  app.add_option("--only", only, "run only these criteria");
  app.add_option("--seeds", seeds, "policies per regime for 5-7");
  app.add_option("--episodes", episodes, "evaluation episodes per cell");
  CLI11_PARSE(app, argc, argv);

  if (fresh) fs::remove_all(work);
  fs::create_directories(work);
  const auto exp_dir = work / "experiment";
  auto wanted = [&](int c) { return only.empty() || std::count(only.begin(), only.end(), c) > 0; };

  std::optional<Experiment> exp;
  auto experiment = [&]() -> const Experiment& {
    if (!exp) exp = run_main_experiment(exp_dir, seeds, episodes);
    return *exp;
  };

  const std::vector<std::pair<int, std::function<Outcome()>>> checks{
      {1, shim_fidelity},
      {2, [&] { return determinism(work); }},
      {3, [] { return passthrough(100); }},
      {4, delay_semantics},
      {5, [&] { return degradation(experiment()); }},
      {6, [&] { return recovery(experiment()); }},
      {7, [&] { return ablation(experiment()); }},
      {8, statistics_oracles},
      {9, [&] { return trace_replay(work); }},
      {10, doorkey_solvable},
      {11, [&] { return policy_graph(exp_dir, episodes); }},
      {12, [&] { return loopback_parity(cli, exp_dir, episodes); }},
  };
  int failed = 0;
  std::vector<std::string> lines;
  for (const auto& [id, check] : checks) {
    if (!wanted(id)) continue;
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += o.pass ? 0 : 1;
    lines.push_back(fmt("criterion %2d: %s  %s", id, o.pass ? "PASS" : "FAIL", o.detail.c_str()));
    std::cout << lines.back() << std::endl;
  }
  std::cout << "\nsummary\n";
  for (const auto& l : lines) std::cout << l.substr(0, l.find("  ", 17)) << '\n';
  return failed == 0 ? 0 : 1;
}
