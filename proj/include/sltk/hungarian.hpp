#pragma once

#include <vector>

namespace sltk {

/// Minimum-cost perfect assignment on a square cost matrix.
/// Returns the assigned column for each row. O(n^3).
std::vector<int> hungarian_assignment(const std::vector<std::vector<double>>& cost);

}  // namespace sltk
