#include "netrl/ppo.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <numeric>

namespace netrl {
namespace {

std::vector<double> log_softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  double sum = 0.0;
  for (double z : logits) sum += std::exp(z - top);
  const double lse = top + std::log(sum);
  std::vector<double> out(logits.size());
  for (std::size_t i = 0; i < logits.size(); ++i) out[i] = logits[i] - lse;
  return out;
}

bool all_finite(std::span<const double> xs) {
  return std::all_of(xs.begin(), xs.end(), [](double x) { return std::isfinite(x); });
}

}  // namespace

void TrainerConfig::validate() const {
  if (!(clip > 0.0 && clip < 1.0)) throw std::invalid_argument("clip ratio must lie in (0, 1)");
  if (!(gamma > 0.0 && gamma <= 1.0)) throw std::invalid_argument("gamma must lie in (0, 1]");
  if (!(lambda >= 0.0 && lambda <= 1.0)) throw std::invalid_argument("lambda must lie in [0, 1]");
  if (rollout <= 0 || epochs <= 0 || minibatch <= 0) {
    throw std::invalid_argument("rollout, epochs and minibatch must be positive");
  }
  if (!(learning_rate > 0.0)) throw std::invalid_argument("learning rate must be positive");
  if (total_steps <= 0) throw std::invalid_argument("total_steps must be positive");
  if (hidden == 0) throw std::invalid_argument("hidden width must be positive");
}

GaeResult compute_gae(std::span<const double> rewards, std::span<const double> values,
                      std::span<const bool> terminal, double last_value, double gamma,
                      double lambda) {
  const std::size_t n = rewards.size();
  GaeResult out{std::vector<double>(n), std::vector<double>(n)};
  double running = 0.0;
  for (std::size_t i = n; i-- > 0;) {
    const double next_value = i + 1 < n ? values[i + 1] : last_value;
    const double nonterminal = terminal[i] ? 0.0 : 1.0;
    const double delta = rewards[i] + gamma * next_value * nonterminal - values[i];
    running = delta + gamma * lambda * nonterminal * running;
    out.advantages[i] = running;
    out.returns[i] = running + values[i];
  }
  return out;
}

LossTerms ppo_loss(const PolicyMLP& policy, std::span<const Transition* const> batch,
                   const TrainerConfig& config, bool normalize_advantages,
                   std::span<double> grad) {
  LossTerms terms;
  const auto n = static_cast<double>(batch.size());
  if (batch.empty()) return terms;

  double adv_mean = 0.0, adv_scale = 1.0;
  if (normalize_advantages && batch.size() > 1) {
    for (const auto* t : batch) adv_mean += t->advantage;
    adv_mean /= n;
    double ss = 0.0;
    for (const auto* t : batch) ss += (t->advantage - adv_mean) * (t->advantage - adv_mean);
    adv_scale = 1.0 / (std::sqrt(ss / (n - 1.0)) + 1e-8);
  } else {
    adv_mean = 0.0;
  }

  MlpCache cache;
  std::vector<double> dlogits(policy.shape().actions);
  for (const auto* t : batch) {
    policy.forward(t->input, cache);
    const auto logp = log_softmax(cache.logits);
    const double adv = (t->advantage - adv_mean) * adv_scale;
    const double ratio = std::exp(logp[t->action] - t->log_prob);
    const double clipped = std::clamp(ratio, 1.0 - config.clip, 1.0 + config.clip);
    const double surr1 = ratio * adv;
    const double surr2 = clipped * adv;
    terms.policy += -std::min(surr1, surr2) / n;
    if (surr2 < surr1) terms.clip_fraction += 1.0 / n;

    double entropy = 0.0;
    for (double lp : logp) entropy -= std::exp(lp) * lp;
    terms.entropy += entropy / n;

    const double value_err = cache.value - t->ret;
    terms.value += value_err * value_err / n;

    // d(-min(surr1, surr2))/d logp[a]; zero when the clipped branch binds.
    const double dlogp = surr1 <= surr2 ? -adv * ratio : 0.0;
    for (std::size_t j = 0; j < dlogits.size(); ++j) {
      const double p = std::exp(logp[j]);
      const double indicator = static_cast<int>(j) == t->action ? 1.0 : 0.0;
      const double d_policy = dlogp * (indicator - p);
      // -c_ent * dH/dz_j with dH/dz_j = -p_j (log p_j + H)
      const double d_entropy = config.entropy_coef * p * (logp[j] + entropy);
      dlogits[j] = (d_policy + d_entropy) / n;
    }
    const double dvalue = 2.0 * config.value_coef * value_err / n;
    policy.backward(t->input, cache, dlogits, dvalue, grad);
  }
  terms.total = terms.policy + config.value_coef * terms.value - config.entropy_coef * terms.entropy;
  return terms;
}

Adam::Adam(std::size_t n, double lr, double beta1, double beta2, double eps)
    : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(eps), m_(n, 0.0), v_(n, 0.0) {}

void Adam::step(std::span<double> params, std::span<const double> grad) {
  ++t_;
  const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
  for (std::size_t i = 0; i < params.size(); ++i) {
    m_[i] = beta1_ * m_[i] + (1.0 - beta1_) * grad[i];
    v_[i] = beta2_ * v_[i] + (1.0 - beta2_) * grad[i] * grad[i];
    const double m_hat = m_[i] / c1;
    const double v_hat = v_[i] / c2;
    params[i] -= lr_ * m_hat / (std::sqrt(v_hat) + eps_);
  }
}

TrainResult train_policy(EnvLoop& loop, const ContextSpec& context, const TrainerConfig& config,
                         const IterationCallback& on_iteration) {
  config.validate();
  if (static_cast<int>(context.action_count) != loop.action_count()) {
    throw ShapeError("context action count does not match the environment");
  }

  TrainResult result;
  result.context = context;
  result.policy = PolicyMLP(MlpShape{context.input_dim(), config.hidden, context.action_count});
  {
    Rng init_rng(derive_seed({config.seed, hash_name("init")}));
    result.policy.init_orthogonal(init_rng);
  }
  PolicyMLP& policy = result.policy;
  Rng act_rng(derive_seed({config.seed, hash_name("act")}));
  Rng shuffle_rng(derive_seed({config.seed, hash_name("shuffle")}));
  Adam adam(policy.params().size(), config.learning_rate);

  AgentContext ctx(context);
  std::uint64_t episode_index = 0;
  std::vector<double> finished_returns;

  auto start_episode = [&]() {
    for (;;) {
      ctx.clear();
      const auto first = loop.reset(derive_seed({config.seed, hash_name("episode"), episode_index++}));
      if (first) {
        ctx.observe(*first);
        return;
      }
      finished_returns.push_back(loop.episode_return());
      ++result.episodes;
    }
  };
  start_episode();

  const auto rollout = static_cast<std::size_t>(config.rollout);
  std::vector<Transition> buffer(rollout);
  std::vector<double> rewards(rollout), values(rollout);
  std::unique_ptr<bool[]> terminal(new bool[rollout]);
  std::vector<double> grad(policy.params().size());
  std::vector<std::size_t> order(rollout);
  std::vector<const Transition*> minibatch;
  MlpCache cache;
  double last_curve_value = 0.0;

  int iteration = 0;
  while (result.steps < config.total_steps) {
    finished_returns.clear();
    for (std::size_t t = 0; t < rollout; ++t) {
      Transition& tr = buffer[t];
      const auto input = ctx.features();
      tr.input.assign(input.begin(), input.end());
      policy.forward(tr.input, cache);
      const auto probs = softmax(cache.logits);
      tr.action = sample_categorical(probs, act_rng);
      tr.log_prob = std::log(std::max(probs[tr.action], 1e-300));
      tr.value = cache.value;
      values[t] = cache.value;

      const LoopStep st = loop.step(tr.action);
      ctx.record_action(tr.action);
      double reward = st.reward;
      if (st.truncated) {
        AgentContext peek = ctx;
        reward += config.gamma * policy.value(peek.observe(st.obs));
      }
      rewards[t] = reward;
      terminal[t] = st.done;
      ++result.steps;

      if (st.done) {
        finished_returns.push_back(loop.episode_return());
        ++result.episodes;
        start_episode();
      } else {
        ctx.observe(st.obs);
      }
    }
    const double last_value = policy.value(ctx.features());
    const auto gae = compute_gae(rewards, values, std::span<const bool>(terminal.get(), rollout),
                                 last_value, config.gamma, config.lambda);
    for (std::size_t t = 0; t < rollout; ++t) {
      buffer[t].advantage = gae.advantages[t];
      buffer[t].ret = gae.returns[t];
    }

    std::iota(order.begin(), order.end(), std::size_t{0});
    for (int epoch = 0; epoch < config.epochs; ++epoch) {
      for (std::size_t i = rollout; i > 1; --i) {
        std::swap(order[i - 1], order[shuffle_rng.below(i)]);
      }
      for (std::size_t start = 0; start < rollout; start += config.minibatch) {
        const std::size_t end = std::min(rollout, start + config.minibatch);
        minibatch.clear();
        for (std::size_t i = start; i < end; ++i) minibatch.push_back(&buffer[order[i]]);
        std::fill(grad.begin(), grad.end(), 0.0);
        const auto terms = ppo_loss(policy, minibatch, config, true, grad);
        if (!std::isfinite(terms.total) || !all_finite(grad)) {
          throw TrainingDiverged(iteration, "non-finite loss or gradient");
        }
        double norm = 0.0;
        for (double g : grad) norm += g * g;
        norm = std::sqrt(norm);
        if (norm > config.max_grad_norm) {
          const double scale = config.max_grad_norm / (norm + 1e-6);
          for (auto& g : grad) g *= scale;
        }
        adam.step(policy.params(), grad);
      }
    }
    if (!all_finite(policy.params())) throw TrainingDiverged(iteration, "non-finite parameters");

    if (!finished_returns.empty()) {
      last_curve_value = std::accumulate(finished_returns.begin(), finished_returns.end(), 0.0) /
                         static_cast<double>(finished_returns.size());
    }
    result.curve.push_back(last_curve_value);
    if (on_iteration) on_iteration(iteration, result.steps, last_curve_value);
    ++iteration;
  }
  return result;
}

}  // namespace netrl
