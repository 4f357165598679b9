#pragma once

#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

#include "netrl/random.hpp"

namespace netrl {

class NumericsError : public std::domain_error {
 public:
  using std::domain_error::domain_error;
};

struct MlpShape {
  std::size_t input = 4;
  std::size_t hidden = 64;
  std::size_t actions = 2;

  friend bool operator==(const MlpShape&, const MlpShape&) = default;
};

// Activations kept for the backward pass.
struct MlpCache {
  std::vector<double> h1;  // post-ReLU
  std::vector<double> h2;  // post-ReLU
  std::vector<double> logits;
  double value = 0.0;
};

// Two ReLU hidden layers shared by a softmax policy head and a scalar
// value head. Parameters live in one flat vector laid out as
// W1 b1 W2 b2 Wpi bpi Wv bv, weights row-major [out][in].
class PolicyMLP {
 public:
  PolicyMLP() = default;
  explicit PolicyMLP(MlpShape shape);

  static std::size_t parameter_count(const MlpShape& shape);

  const MlpShape& shape() const { return shape_; }
  std::span<double> params() { return params_; }
  std::span<const double> params() const { return params_; }

  // Orthogonal init: gain sqrt(2) on hidden layers, 0.01 on the policy head,
  // 1 on the value head; zero biases.
  void init_orthogonal(Rng& rng);

  // Throws NumericsError on non-finite input.
  void forward(std::span<const double> input, MlpCache& cache) const;

  // Accumulates dL/dparams into `grad` given dL/dlogits and dL/dvalue.
  void backward(std::span<const double> input, const MlpCache& cache,
                std::span<const double> dlogits, double dvalue, std::span<double> grad) const;

  std::vector<double> probabilities(std::span<const double> input) const;
  double value(std::span<const double> input) const;

 private:
  struct Offsets {
    std::size_t w1, b1, w2, b2, wp, bp, wv, bv, end;
  };
  static Offsets offsets_for(const MlpShape& shape);

  MlpShape shape_{};
  Offsets off_{};
  std::vector<double> params_;
};

// Numerically stable softmax.
std::vector<double> softmax(std::span<const double> logits);

std::size_t argmax(std::span<const double> values);

// Inverse-CDF draw from a categorical distribution.
int sample_categorical(std::span<const double> probs, Rng& rng);

}  // namespace netrl
