#pragma once

#include <cstdint>
#include <span>
#include <vector>

namespace capscan::geometry {

// Cumulative set of vertices seen by the camera during an episode. A vertex
// counts once no matter how often it is seen, so coverage stays within
// [0, 100] and never decreases.
class CoverageTracker {
 public:
  explicit CoverageTracker(std::size_t vertex_count);

  // Marks the given vertices visited, recomputes coverage and returns the
  // change since the previous call in percentage points. Throws
  // std::out_of_range for an invalid index (nothing is marked in that case).
  double mark_and_diff(std::span<const std::uint32_t> newly_seen);

  void reset();

  const std::vector<bool>& visited() const { return visited_; }
  std::size_t visible_count() const { return visible_count_; }
  std::size_t vertice_count() const { return visited_.size(); }
  double current_coverage() const { return current_; }
  double previous_coverage() const { return previous_; }

 private:
  std::vector<bool> visited_;
  std::size_t visible_count_ = 0;
  double current_ = 0.0;
  double previous_ = 0.0;
};

}  // namespace capscan::geometry
