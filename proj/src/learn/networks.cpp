#include "capscan/learn/networks.hpp"

#include "capscan/learn/distributions.hpp"

namespace capscan::learn {

GaussianActor::GaussianActor(int obs_dim, const std::vector<int>& hidden, int act_dim, double init_log_std)
    : mlp(obs_dim, hidden, act_dim), action_dim(act_dim) {
  theta = Vec::Zero(static_cast<Eigen::Index>(mlp.parameter_count()) + act_dim);
  theta.tail(act_dim).setConstant(init_log_std);
  project();
}

void GaussianActor::init(std::mt19937_64& rng, double hidden_gain, double output_gain) {
  mlp.init(theta.head(static_cast<Eigen::Index>(net_size())), rng, hidden_gain, output_gain);
}

void GaussianActor::project() {
  theta.tail(action_dim) = theta.tail(action_dim).cwiseMax(kLogStdMin).cwiseMin(kLogStdMax);
}

Mat standard_normal(int rows, int cols, std::mt19937_64& rng) {
  std::normal_distribution<double> n(0.0, 1.0);
  Mat m(rows, cols);
  for (int j = 0; j < cols; ++j)
    for (int i = 0; i < rows; ++i) m(i, j) = n(rng);
  return m;
}

}  // namespace capscan::learn
