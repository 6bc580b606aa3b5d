#pragma once

#include <vector>

namespace mts {

struct Assignment {
    double cost = 0.0;
    std::vector<int> row_to_col;  // -1 when a row stays unassigned (only if rows > cols)
};

// Minimum-cost assignment on a rectangular matrix (Hungarian method, O(n^3)).
// Every row is assigned when rows <= cols, every column otherwise. Infinite
// entries are allowed; the result is infinite when no finite assignment exists.
Assignment min_cost_assignment(const std::vector<std::vector<double>>& cost);

// Children matching used by the one-degree DPs: rows are matched to columns or
// left out at their own price.
//   total = sum matched pair[i][j] + sum unmatched del_row[i] + sum unmatched del_col[j]
Assignment match_with_gaps(const std::vector<std::vector<double>>& pair,
                           const std::vector<double>& del_row, const std::vector<double>& del_col);

} // namespace mts
