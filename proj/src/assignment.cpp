#include "mtstab/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace mts {

namespace {
constexpr double kBig = 1e15;  // stand-in for +inf inside the potentials
}

Assignment min_cost_assignment(const std::vector<std::vector<double>>& cost) {
    Assignment out;
    const int rows = static_cast<int>(cost.size());
    if (rows == 0) return out;
    const int cols = static_cast<int>(cost[0].size());
    const bool flip = rows > cols;
    const int n = flip ? cols : rows;  // n <= m
    const int m = flip ? rows : cols;
    auto at = [&](int i, int j) {
        double c = flip ? cost[j][i] : cost[i][j];
        return std::isinf(c) ? kBig : c;
    };

    // e-maxx formulation, 1-based
    std::vector<double> u(n + 1, 0.0), v(m + 1, 0.0), minv(m + 1);
    std::vector<int> p(m + 1, 0), way(m + 1, 0);
    std::vector<char> used(m + 1);
    for (int i = 1; i <= n; ++i) {
        p[0] = i;
        int j0 = 0;
        std::fill(minv.begin(), minv.end(), std::numeric_limits<double>::infinity());
        std::fill(used.begin(), used.end(), 0);
        do {
            used[j0] = 1;
            int i0 = p[j0], j1 = 0;
            double delta = std::numeric_limits<double>::infinity();
            for (int j = 1; j <= m; ++j) {
                if (used[j]) continue;
                double cur = at(i0 - 1, j - 1) - u[i0] - v[j];
                if (cur < minv[j]) {
                    minv[j] = cur;
                    way[j] = j0;
                }
                if (minv[j] < delta) {
                    delta = minv[j];
                    j1 = j;
                }
            }
            for (int j = 0; j <= m; ++j) {
                if (used[j]) {
                    u[p[j]] += delta;
                    v[j] -= delta;
                } else {
                    minv[j] -= delta;
                }
            }
            j0 = j1;
        } while (p[j0] != 0);
        do {
            int j1 = way[j0];
            p[j0] = p[j1];
            j0 = j1;
        } while (j0);
    }

    out.row_to_col.assign(rows, -1);
    double total = 0.0;
    bool infinite = false;
    for (int j = 1; j <= m; ++j) {
        if (p[j] == 0) continue;
        int r = flip ? j - 1 : p[j] - 1;
        int c = flip ? p[j] - 1 : j - 1;
        out.row_to_col[r] = c;
        double e = cost[r][c];
        if (std::isinf(e)) infinite = true;
        total += e;
    }
    out.cost = infinite ? std::numeric_limits<double>::infinity() : total;
    return out;
}

Assignment match_with_gaps(const std::vector<std::vector<double>>& pair,
                           const std::vector<double>& del_row, const std::vector<double>& del_col) {
    const int a = static_cast<int>(del_row.size());
    const int b = static_cast<int>(del_col.size());
    const double inf = std::numeric_limits<double>::infinity();
    // square (a+b) matrix: real columns, then one private gap column per row;
    // gap rows for the real columns, and free gap-gap cells
    std::vector<std::vector<double>> m(a + b, std::vector<double>(a + b, inf));
    for (int i = 0; i < a; ++i) {
        for (int j = 0; j < b; ++j) m[i][j] = pair[i][j];
        m[i][b + i] = del_row[i];
    }
    for (int j = 0; j < b; ++j) {
        m[a + j][j] = del_col[j];
        for (int k = 0; k < a; ++k) m[a + j][b + k] = 0.0;
    }
    Assignment full = min_cost_assignment(m);
    Assignment out;
    out.cost = full.cost;
    out.row_to_col.assign(a, -1);
    for (int i = 0; i < a; ++i)
        if (full.row_to_col[i] < b) out.row_to_col[i] = full.row_to_col[i];
    return out;
}

} // namespace mts
