#include "capscan/learn/adam.hpp"

#include <cmath>
#include <stdexcept>

namespace capscan::learn {

Adam::Adam(Eigen::Index size, AdamConfig cfg) : cfg_(cfg), m_(Vec::Zero(size)), v_(Vec::Zero(size)) {}

void Adam::step(Eigen::Ref<Vec> theta, const Vec& grad, double lr) {
  if (theta.size() != m_.size() || grad.size() != m_.size()) throw std::invalid_argument("Adam size mismatch");
  ++t_;
  m_ = cfg_.beta1 * m_ + (1.0 - cfg_.beta1) * grad;
  v_ = cfg_.beta2 * v_ + (1.0 - cfg_.beta2) * grad.cwiseProduct(grad);
  const double c1 = 1.0 - std::pow(cfg_.beta1, static_cast<double>(t_));
  const double c2 = 1.0 - std::pow(cfg_.beta2, static_cast<double>(t_));
  theta.array() -= lr * (m_.array() / c1) / ((v_.array() / c2).sqrt() + cfg_.epsilon);
}

double clip_global_norm(std::initializer_list<Vec*> grads, double max_norm) {
  double sq = 0.0;
  for (const Vec* g : grads) sq += g->squaredNorm();
  const double norm = std::sqrt(sq);
  if (norm > max_norm && norm > 0.0) {
    const double s = max_norm / norm;
    for (Vec* g : grads) *g *= s;
  }
  return norm;
}

}  // namespace capscan::learn
