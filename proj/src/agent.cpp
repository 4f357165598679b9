#include "netrl/agent.hpp"

#include <cstdio>
#include <fstream>
#include <sstream>

namespace netrl {

std::vector<double> observation_features(const Observation& obs) {
  if (const auto* v = std::get_if<VectorObservation>(&obs)) return v->values;
  const auto& g = std::get<GridObservation>(obs);
  std::vector<double> out(g.cells.size());
  for (std::size_t i = 0; i < g.cells.size(); ++i) out[i] = g.cells[i] / 10.0;
  return out;
}

std::size_t observation_dim(EnvKind env) { return env == EnvKind::kCartPole ? 4 : kGridBytes; }

AgentContext::AgentContext(const ContextSpec& spec)
    : frames_(spec.stack, spec.obs_dim), actions_(spec.history, spec.action_count) {
  refresh();
}

void AgentContext::clear() {
  frames_.clear();
  actions_.clear();
  refresh();
}

std::span<const double> AgentContext::observe(const Observation& obs) {
  const auto feats = observation_features(obs);
  frames_.push(feats);
  refresh();
  return features_;
}

void AgentContext::record_action(int action) {
  actions_.push(action);
  refresh();
}

void AgentContext::refresh() {
  features_.assign(frames_.stacked().begin(), frames_.stacked().end());
  features_.insert(features_.end(), actions_.encoded().begin(), actions_.encoded().end());
}

MlpAgent::MlpAgent(PolicyMLP policy, ContextSpec context, ActionSelection selection)
    : policy_(std::move(policy)), spec_(context), context_(context), selection_(selection) {
  if (policy_.shape().input != spec_.input_dim()) {
    throw ShapeError("policy input dimension does not match its context");
  }
}

void MlpAgent::begin_episode(std::uint64_t seed) {
  context_.clear();
  rng_ = Rng(seed);
}

int MlpAgent::act(const Observation& obs) {
  const auto input = context_.observe(obs);
  policy_.forward(input, cache_);
  int action = 0;
  if (selection_ == ActionSelection::kGreedy) {
    action = static_cast<int>(argmax(cache_.logits));
  } else {
    action = sample_categorical(softmax(cache_.logits), rng_);
  }
  context_.record_action(action);
  return action;
}

namespace {
constexpr const char* kPolicyMagic = "netrl-policy";
constexpr int kPolicyVersion = 1;
}  // namespace

void save_policy(const PolicyFile& file, const std::filesystem::path& path) {
  if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
  std::ofstream out(path);
  if (!out) throw PolicyFormatError("cannot write " + path.string());
  const auto& s = file.policy.shape();
  out << kPolicyMagic << " v" << kPolicyVersion << '\n';
  out << "layers " << s.input << ' ' << s.hidden << ' ' << s.hidden << ' ' << s.actions << '\n';
  out << "context " << file.context.obs_dim << ' ' << file.context.action_count << ' '
      << file.context.stack << ' ' << file.context.history << '\n';
  out << "env " << file.env << '\n';
  out << "regime " << file.regime << '\n';
  out << "seed " << file.seed << '\n';
  out << "params " << file.policy.params().size() << '\n';
  char buf[64];
  for (double p : file.policy.params()) {
    std::snprintf(buf, sizeof buf, "%a\n", p);  // hex float: exact round trip
    out << buf;
  }
  if (!out) throw PolicyFormatError("write failed for " + path.string());
}

PolicyFile load_policy(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw PolicyFormatError("cannot open policy file " + path.string());
  auto expect = [&in](const std::string& key) {
    std::string k;
    if (!(in >> k) || k != key) throw PolicyFormatError("expected '" + key + "' in policy file");
  };
  std::string magic, version;
  in >> magic >> version;
  if (magic != kPolicyMagic) throw PolicyFormatError("not a policy file");
  if (version != "v" + std::to_string(kPolicyVersion)) {
    throw PolicyFormatError("unsupported policy version " + version);
  }
  PolicyFile f;
  MlpShape shape;
  std::size_t hidden2 = 0;
  expect("layers");
  in >> shape.input >> shape.hidden >> hidden2 >> shape.actions;
  if (hidden2 != shape.hidden) throw PolicyFormatError("hidden layers must have equal width");
  expect("context");
  in >> f.context.obs_dim >> f.context.action_count >> f.context.stack >> f.context.history;
  expect("env");
  in >> f.env;
  expect("regime");
  in >> f.regime;
  expect("seed");
  in >> f.seed;
  expect("params");
  std::size_t count = 0;
  in >> count;
  if (!in) throw PolicyFormatError("malformed policy header");
  f.policy = PolicyMLP(shape);
  if (count != f.policy.params().size()) throw PolicyFormatError("parameter count mismatch");
  std::string tok;
  for (auto& p : f.policy.params()) {
    if (!(in >> tok)) throw PolicyFormatError("truncated parameter list");
    p = std::strtod(tok.c_str(), nullptr);
  }
  if (f.context.input_dim() != shape.input) {
    throw PolicyFormatError("context does not match input layer");
  }
  return f;
}

}  // namespace netrl
