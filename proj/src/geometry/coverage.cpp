#include "capscan/geometry/coverage.hpp"

#include <stdexcept>
#include <string>

namespace capscan::geometry {

CoverageTracker::CoverageTracker(std::size_t vertex_count) : visited_(vertex_count, false) {
  if (vertex_count == 0) throw std::invalid_argument("coverage tracker needs at least one vertex");
}

double CoverageTracker::mark_and_diff(std::span<const std::uint32_t> newly_seen) {
  for (auto i : newly_seen) {
    if (i >= visited_.size()) {
      throw std::out_of_range("vertex index " + std::to_string(i) + " out of range");
    }
  }
  for (auto i : newly_seen) {
    if (!visited_[i]) {
      visited_[i] = true;
      ++visible_count_;
    }
  }
  current_ = 100.0 * static_cast<double>(visible_count_) / static_cast<double>(visited_.size());
  const double diff = current_ - previous_;
  previous_ = current_;
  return diff;
}

void CoverageTracker::reset() {
  visited_.assign(visited_.size(), false);
  visible_count_ = 0;
  current_ = 0.0;
  previous_ = 0.0;
}

}  // namespace capscan::geometry
