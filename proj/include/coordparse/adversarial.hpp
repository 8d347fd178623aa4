#pragma once

#include <cmath>
#include <stdexcept>
#include <string>
#include <vector>

namespace coordparse::adversarial {

struct AdversarialConfig {
  bool enabled = false;
  double gamma = 2.0;
  std::vector<std::string> slot_label_set;
};

// Progress-dependent weight on the adversarial loss:
//   lambda(p) = 2 / (1 + exp(-gamma * p)) - 1
// Monotone nondecreasing on [0, 1] with lambda(0) = 0.
inline double lambda_schedule(double p, double gamma) {
  if (p < 0.0 || p > 1.0) throw std::invalid_argument("training progress p must be in [0,1]");
  if (gamma <= 0.0) throw std::invalid_argument("gamma must be > 0");
  return 2.0 / (1.0 + std::exp(-gamma * p)) - 1.0;
}

// Gradient reversal: identity forward, gradient scaled by -lambda on the way
// down into the shared encoder. The forward helper exists for symmetry; the
// model applies the backward scale directly.
template <typename V>
const V& grad_reversal_forward(const V& h) {
  return h;
}

template <typename V>
void grad_reversal_backward(V& grad, double lambda) {
  for (auto& g : grad) g = -static_cast<typename V::value_type>(lambda) * g;
}

struct LossBreakdown {
  double tag_loss = 0.0;   // L_y
  double slot_loss = 0.0;  // L_d
  double lambda = 0.0;
  double total = 0.0;      // L_y - lambda * L_d
};

inline LossBreakdown combined_loss(double tag_loss, double slot_loss, double lambda) {
  if (!std::isfinite(tag_loss) || !std::isfinite(slot_loss)) {
    throw std::runtime_error("non-finite loss in combined objective");
  }
  return {tag_loss, slot_loss, lambda, tag_loss - lambda * slot_loss};
}

}  // namespace coordparse::adversarial
