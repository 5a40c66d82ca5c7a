#include "medie/optim.hpp"

#include <stdexcept>

namespace medie {

void TrainConfig::check() const {
  if (!(learning_rate > 0)) throw std::invalid_argument("learning_rate must be positive");
  if (batch_size == 0) throw std::invalid_argument("batch_size must be positive");
  if (max_epochs == 0) throw std::invalid_argument("max_epochs must be positive");
  if (!(grad_clip_l2 > 0)) throw std::invalid_argument("grad_clip_l2 must be positive");
  if (l2_penalty < 0) throw std::invalid_argument("l2_penalty must be non-negative");
  if (patience == 0) throw std::invalid_argument("patience must be >= 1");
  if (!(beta1 >= 0 && beta1 < 1 && beta2 >= 0 && beta2 < 1)) throw std::invalid_argument("Adam betas must lie in [0, 1)");
  if (!(epsilon > 0)) throw std::invalid_argument("epsilon must be positive");
}

double clip_global_norm(std::span<const std::span<double>> groups, double max_norm) {
  double sq = 0.0;
  for (auto g : groups) {
    for (double x : g) sq += x * x;
  }
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double scale = max_norm / norm;
    for (auto g : groups) {
      for (double& x : g) x *= scale;
    }
  }
  return norm;
}

}  // namespace medie
