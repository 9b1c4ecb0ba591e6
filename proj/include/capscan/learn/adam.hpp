#pragma once

#include "capscan/common/types.hpp"

namespace capscan::learn {

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

class Adam {
 public:
  Adam() = default;
  explicit Adam(Eigen::Index size, AdamConfig cfg = {});

  void step(Eigen::Ref<Vec> theta, const Vec& grad, double lr);
  long long steps() const { return t_; }

 private:
  AdamConfig cfg_;
  Vec m_, v_;
  long long t_ = 0;
};

// Scales `grads` in place so their joint L2 norm is at most `max_norm`.
// Returns the norm before scaling.
double clip_global_norm(std::initializer_list<Vec*> grads, double max_norm);

}  // namespace capscan::learn
