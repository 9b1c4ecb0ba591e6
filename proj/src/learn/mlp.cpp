#include "capscan/learn/mlp.hpp"

#include <stdexcept>
#include <string>

#include <Eigen/QR>

namespace capscan::learn {

namespace {

using ConstMatMap = Eigen::Map<const Mat>;
using ConstVecMap = Eigen::Map<const Vec>;

std::vector<int> chain(int input, const std::vector<int>& hidden, int output) {
  std::vector<int> s{input};
  s.insert(s.end(), hidden.begin(), hidden.end());
  s.push_back(output);
  return s;
}

// Eigen evaluates double tanh one scalar at a time; the exp form vectorizes
// and stays within a few ulp of std::tanh.
Mat fast_tanh(const Mat& z) { return (1.0 - 2.0 / ((2.0 * z.array()).exp() + 1.0)).matrix(); }

}  // namespace

Mlp::Mlp(std::vector<int> layer_sizes) : sizes_(std::move(layer_sizes)) {
  if (sizes_.size() < 2) throw std::invalid_argument("an MLP needs at least an input and an output size");
  for (int s : sizes_) {
    if (s < 1) throw std::invalid_argument("MLP layer sizes must be positive");
  }
  for (std::size_t l = 0; l + 1 < sizes_.size(); ++l) {
    offsets_.push_back(count_);
    count_ += static_cast<std::size_t>(sizes_[l + 1]) * (sizes_[l] + 1);
  }
}

Mlp::Mlp(int input, const std::vector<int>& hidden, int output) : Mlp(chain(input, hidden, output)) {}

void Mlp::check_theta(std::ptrdiff_t size) const {
  if (static_cast<std::size_t>(size) != count_) {
    throw std::invalid_argument("MLP expects " + std::to_string(count_) + " parameters, got " + std::to_string(size));
  }
}

void Mlp::init(Eigen::Ref<Vec> theta, std::mt19937_64& rng, double hidden_gain, double output_gain) const {
  check_theta(theta.size());
  std::normal_distribution<double> normal(0.0, 1.0);
  for (int l = 0; l < layer_count(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const int rows = std::max(in, out), cols = std::min(in, out);
    Mat a(rows, cols);
    for (Eigen::Index j = 0; j < a.cols(); ++j)
      for (Eigen::Index i = 0; i < a.rows(); ++i) a(i, j) = normal(rng);
    Eigen::HouseholderQR<Mat> qr(a);
    Mat q = qr.householderQ() * Mat::Identity(rows, cols);
    const Mat r = qr.matrixQR().topLeftCorner(cols, cols);
    for (int j = 0; j < cols; ++j) {
      if (r(j, j) < 0.0) q.col(j) *= -1.0;
    }
    const Mat w = out >= in ? q : Mat(q.transpose());
    const double gain = l + 1 == layer_count() ? output_gain : hidden_gain;
    Eigen::Map<Mat>(theta.data() + offsets_[l], out, in) = gain * w;
    Eigen::Map<Vec>(theta.data() + offsets_[l] + static_cast<std::size_t>(out) * in, out).setZero();
  }
}

Mat Mlp::forward(Eigen::Ref<const Vec> theta, const Mat& x, Cache* cache) const {
  check_theta(theta.size());
  if (x.rows() != input_dim()) {
    throw std::invalid_argument("MLP input has " + std::to_string(x.rows()) + " rows, expected " +
                                std::to_string(input_dim()));
  }
  if (cache) {
    cache->activations.clear();
    cache->activations.push_back(x);
  }
  Mat h = x;
  for (int l = 0; l < layer_count(); ++l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    ConstMatMap w(theta.data() + offsets_[l], out, in);
    ConstVecMap b(theta.data() + offsets_[l] + static_cast<std::size_t>(out) * in, out);
    Mat z = w * h;
    z.colwise() += b;
    if (l + 1 < layer_count()) {
      h = fast_tanh(z);
      if (cache) cache->activations.push_back(h);
    } else {
      h = std::move(z);
    }
  }
  return h;
}

void Mlp::backward(Eigen::Ref<const Vec> theta, const Cache& cache, const Mat& dy, Eigen::Ref<Vec> grad,
                   Mat* dx) const {
  check_theta(theta.size());
  check_theta(grad.size());
  if (static_cast<int>(cache.activations.size()) != layer_count()) {
    throw std::invalid_argument("MLP backward needs the cache of a forward pass");
  }
  Mat delta = dy;
  for (int l = layer_count() - 1; l >= 0; --l) {
    const int in = sizes_[l], out = sizes_[l + 1];
    const Mat& a = cache.activations[l];
    Eigen::Map<Mat>(grad.data() + offsets_[l], out, in).noalias() += delta * a.transpose();
    Eigen::Map<Vec>(grad.data() + offsets_[l] + static_cast<std::size_t>(out) * in, out) += delta.rowwise().sum();
    if (l == 0 && !dx) break;
    ConstMatMap w(theta.data() + offsets_[l], out, in);
    Mat da = w.transpose() * delta;
    if (l == 0) {
      *dx = std::move(da);
    } else {
      delta = da.array() * (1.0 - a.array().square());
    }
  }
}

}  // namespace capscan::learn
