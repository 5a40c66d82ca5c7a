#pragma once

#include <cmath>
#include <cstdint>
#include <span>
#include <vector>

namespace medie {

struct TrainConfig {
  double learning_rate = 1e-3;
  std::size_t batch_size = 48;
  std::size_t max_epochs = 50;
  double grad_clip_l2 = 5.0;
  double l2_penalty = 1e-6;  // decoupled weight decay in AdamW
  std::size_t patience = 5;
  std::uint64_t seed = 0;
  std::size_t jobs = 1;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;

  void check() const;  // throws std::invalid_argument

  // Preset for the attribute/relation heads. Their inputs are sparse pooled
  // features where Adam's per-coordinate scaling lets rare word-identity
  // features outrun the shared cue features; a larger epsilon damps that.
  static TrainConfig span_defaults() {
    TrainConfig c;
    c.learning_rate = 1e-2;
    c.epsilon = 1e-2;
    return c;
  }
};

// Adam moments for one parameter group; grows with the group.
struct AdamState {
  std::vector<double> m;
  std::vector<double> v;
};

// AdamW with decoupled weight decay:
//   m <- b1 m + (1-b1) g;  v <- b2 v + (1-b2) g^2
//   w <- w - lr * (m_hat / (sqrt(v_hat) + eps) + decay * w)
class AdamW {
 public:
  AdamW(double lr, double beta1, double beta2, double epsilon, double weight_decay)
      : lr_(lr), beta1_(beta1), beta2_(beta2), eps_(epsilon), decay_(weight_decay) {}
  explicit AdamW(const TrainConfig& c) : AdamW(c.learning_rate, c.beta1, c.beta2, c.epsilon, c.l2_penalty) {}

  // Call once per optimizer step, before updating the groups.
  void begin_step() { ++step_; }
  std::uint64_t step() const { return step_; }

  void update(std::span<double> params, std::span<const double> grads, AdamState& state, bool decay = true) const {
    if (state.m.size() < params.size()) {
      state.m.resize(params.size(), 0.0);
      state.v.resize(params.size(), 0.0);
    }
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(step_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(step_));
    const double d = decay ? decay_ : 0.0;
    for (std::size_t i = 0; i < params.size(); ++i) {
      const double g = grads[i];
      state.m[i] = beta1_ * state.m[i] + (1.0 - beta1_) * g;
      state.v[i] = beta2_ * state.v[i] + (1.0 - beta2_) * g * g;
      const double m_hat = state.m[i] / c1;
      const double v_hat = state.v[i] / c2;
      params[i] -= lr_ * (m_hat / (std::sqrt(v_hat) + eps_) + d * params[i]);
    }
  }

 private:
  double lr_, beta1_, beta2_, eps_, decay_;
  std::uint64_t step_ = 0;
};

// Scales every group in place so the joint L2 norm is at most max_norm.
// Returns the norm before clipping.
double clip_global_norm(std::span<const std::span<double>> groups, double max_norm);

}  // namespace medie
