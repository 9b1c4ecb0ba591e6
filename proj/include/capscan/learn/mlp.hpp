#pragma once

#include <cstdint>
#include <random>
#include <vector>

#include "capscan/common/types.hpp"

namespace capscan::learn {

// Fully connected network with tanh hidden layers and a linear output layer.
// The object only describes the architecture; parameters live in a flat
// vector owned by the caller, laid out per layer as W (out x in, column
// major) followed by b. Samples are columns.
class Mlp {
 public:
  struct Cache {
    std::vector<Mat> activations;  // input, then each hidden layer output
  };

  Mlp() = default;
  explicit Mlp(std::vector<int> layer_sizes);
  Mlp(int input, const std::vector<int>& hidden, int output);

  int input_dim() const { return sizes_.front(); }
  int output_dim() const { return sizes_.back(); }
  int layer_count() const { return static_cast<int>(sizes_.size()) - 1; }
  const std::vector<int>& sizes() const { return sizes_; }
  std::size_t parameter_count() const { return count_; }

  // Orthogonal init scaled by `hidden_gain` for hidden layers and
  // `output_gain` for the last layer; zero biases.
  void init(Eigen::Ref<Vec> theta, std::mt19937_64& rng, double hidden_gain, double output_gain) const;

  // Throws std::invalid_argument on a shape mismatch.
  Mat forward(Eigen::Ref<const Vec> theta, const Mat& x, Cache* cache = nullptr) const;

  // Reverse pass for dL/dY given the cache of the matching forward call.
  // Adds dL/dtheta into `grad`; writes dL/dX when `dx` is non-null.
  void backward(Eigen::Ref<const Vec> theta, const Cache& cache, const Mat& dy, Eigen::Ref<Vec> grad,
                Mat* dx = nullptr) const;

 private:
  void check_theta(std::ptrdiff_t size) const;

  std::vector<int> sizes_;
  std::vector<std::size_t> offsets_;  // start of each layer's W
  std::size_t count_ = 0;
};

}  // namespace capscan::learn
