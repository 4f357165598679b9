#include "netrl/mlp.hpp"

#include <algorithm>
#include <cmath>

namespace netrl {
namespace {

// Fills `w` ([rows][cols] row-major) with a scaled semi-orthogonal matrix:
// orthonormal rows when rows <= cols, orthonormal columns otherwise.
void orthogonal_fill(std::span<double> w, std::size_t rows, std::size_t cols, double gain,
                     Rng& rng) {
  const bool by_rows = rows <= cols;
  const std::size_t count = by_rows ? rows : cols;
  const std::size_t len = by_rows ? cols : rows;
  std::vector<std::vector<double>> vecs(count, std::vector<double>(len));
  for (auto& v : vecs) {
    for (auto& x : v) x = rng.normal();
  }
  for (std::size_t i = 0; i < count; ++i) {
    for (std::size_t j = 0; j < i; ++j) {
      double dot = 0.0;
      for (std::size_t t = 0; t < len; ++t) dot += vecs[i][t] * vecs[j][t];
      for (std::size_t t = 0; t < len; ++t) vecs[i][t] -= dot * vecs[j][t];
    }
    double norm = 0.0;
    for (double x : vecs[i]) norm += x * x;
    norm = std::sqrt(norm);
    for (auto& x : vecs[i]) x /= norm;
  }
  for (std::size_t r = 0; r < rows; ++r) {
    for (std::size_t c = 0; c < cols; ++c) {
      w[r * cols + c] = gain * (by_rows ? vecs[r][c] : vecs[c][r]);
    }
  }
}

void dense_relu(std::span<const double> w, std::span<const double> b,
                std::span<const double> in, std::span<double> out) {
  const std::size_t n_in = in.size();
  for (std::size_t o = 0; o < out.size(); ++o) {
    const double* row = w.data() + o * n_in;
    double acc = b[o];
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * in[i];
    out[o] = acc > 0.0 ? acc : 0.0;
  }
}

}  // namespace

PolicyMLP::Offsets PolicyMLP::offsets_for(const MlpShape& s) {
  Offsets o{};
  o.w1 = 0;
  o.b1 = o.w1 + s.hidden * s.input;
  o.w2 = o.b1 + s.hidden;
  o.b2 = o.w2 + s.hidden * s.hidden;
  o.wp = o.b2 + s.hidden;
  o.bp = o.wp + s.actions * s.hidden;
  o.wv = o.bp + s.actions;
  o.bv = o.wv + s.hidden;
  o.end = o.bv + 1;
  return o;
}

std::size_t PolicyMLP::parameter_count(const MlpShape& shape) { return offsets_for(shape).end; }

PolicyMLP::PolicyMLP(MlpShape shape)
    : shape_(shape), off_(offsets_for(shape)), params_(off_.end, 0.0) {
  if (shape.input == 0 || shape.hidden == 0 || shape.actions == 0) {
    throw std::invalid_argument("MLP dimensions must be positive");
  }
}

void PolicyMLP::init_orthogonal(Rng& rng) {
  std::fill(params_.begin(), params_.end(), 0.0);
  const auto& s = shape_;
  std::span<double> p(params_);
  orthogonal_fill(p.subspan(off_.w1, s.hidden * s.input), s.hidden, s.input, std::sqrt(2.0), rng);
  orthogonal_fill(p.subspan(off_.w2, s.hidden * s.hidden), s.hidden, s.hidden, std::sqrt(2.0),
                  rng);
  orthogonal_fill(p.subspan(off_.wp, s.actions * s.hidden), s.actions, s.hidden, 0.01, rng);
  orthogonal_fill(p.subspan(off_.wv, s.hidden), 1, s.hidden, 1.0, rng);
}

void PolicyMLP::forward(std::span<const double> input, MlpCache& cache) const {
  const auto& s = shape_;
  if (input.size() != s.input) throw NumericsError("MLP input has the wrong dimension");
  for (double x : input) {
    if (!std::isfinite(x)) throw NumericsError("non-finite policy input");
  }
  cache.h1.resize(s.hidden);
  cache.h2.resize(s.hidden);
  cache.logits.resize(s.actions);
  std::span<const double> p(params_);

  dense_relu(p.subspan(off_.w1, s.hidden * s.input), p.subspan(off_.b1, s.hidden), input,
             cache.h1);
  dense_relu(p.subspan(off_.w2, s.hidden * s.hidden), p.subspan(off_.b2, s.hidden), cache.h1,
             cache.h2);
  for (std::size_t a = 0; a < s.actions; ++a) {
    const double* row = params_.data() + off_.wp + a * s.hidden;
    double acc = params_[off_.bp + a];
    for (std::size_t i = 0; i < s.hidden; ++i) acc += row[i] * cache.h2[i];
    cache.logits[a] = acc;
  }
  double v = params_[off_.bv];
  for (std::size_t i = 0; i < s.hidden; ++i) v += params_[off_.wv + i] * cache.h2[i];
  cache.value = v;
}

void PolicyMLP::backward(std::span<const double> input, const MlpCache& cache,
                         std::span<const double> dlogits, double dvalue,
                         std::span<double> grad) const {
  const auto& s = shape_;
  const std::size_t H = s.hidden;
  // Small fixed-size scratch; hidden widths here are modest.
  std::vector<double> dh2(H, 0.0), dh1(H, 0.0);

  for (std::size_t a = 0; a < s.actions; ++a) {
    const double g = dlogits[a];
    if (g == 0.0) continue;
    double* gw = grad.data() + off_.wp + a * H;
    const double* w = params_.data() + off_.wp + a * H;
    for (std::size_t i = 0; i < H; ++i) {
      gw[i] += g * cache.h2[i];
      dh2[i] += g * w[i];
    }
    grad[off_.bp + a] += g;
  }
  for (std::size_t i = 0; i < H; ++i) {
    grad[off_.wv + i] += dvalue * cache.h2[i];
    dh2[i] += dvalue * params_[off_.wv + i];
  }
  grad[off_.bv] += dvalue;

  for (std::size_t o = 0; o < H; ++o) {
    if (cache.h2[o] <= 0.0) continue;
    const double g = dh2[o];
    double* gw = grad.data() + off_.w2 + o * H;
    const double* w = params_.data() + off_.w2 + o * H;
    for (std::size_t i = 0; i < H; ++i) {
      gw[i] += g * cache.h1[i];
      dh1[i] += g * w[i];
    }
    grad[off_.b2 + o] += g;
  }
  for (std::size_t o = 0; o < H; ++o) {
    if (cache.h1[o] <= 0.0) continue;
    const double g = dh1[o];
    double* gw = grad.data() + off_.w1 + o * s.input;
    for (std::size_t i = 0; i < s.input; ++i) gw[i] += g * input[i];
    grad[off_.b1 + o] += g;
  }
}

std::vector<double> PolicyMLP::probabilities(std::span<const double> input) const {
  MlpCache cache;
  forward(input, cache);
  return softmax(cache.logits);
}

double PolicyMLP::value(std::span<const double> input) const {
  MlpCache cache;
  forward(input, cache);
  return cache.value;
}

std::vector<double> softmax(std::span<const double> logits) {
  const double top = *std::max_element(logits.begin(), logits.end());
  std::vector<double> out(logits.size());
  double sum = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out[i] = std::exp(logits[i] - top);
    sum += out[i];
  }
  for (auto& p : out) p /= sum;
  return out;
}

std::size_t argmax(std::span<const double> values) {
  return static_cast<std::size_t>(std::max_element(values.begin(), values.end()) -
                                  values.begin());
}

int sample_categorical(std::span<const double> probs, Rng& rng) {
  const double u = rng.uniform();
  double acc = 0.0;
  for (std::size_t i = 0; i < probs.size(); ++i) {
    acc += probs[i];
    if (u < acc) return static_cast<int>(i);
  }
  return static_cast<int>(probs.size() - 1);
}

}  // namespace netrl
