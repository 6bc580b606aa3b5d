#include "mtstab/field.hpp"

#include <algorithm>
#include <numeric>
#include <set>
#include <sstream>

#include "mtstab/common.hpp"

namespace mts {

Domain make_domain(int vertex_count, const std::vector<std::pair<int, int>>& edges) {
    if (vertex_count < 1)
        throw Error(ErrorKind::Validation, "domain needs at least one vertex");
    Domain d;
    d.vertex_count = vertex_count;
    std::set<std::pair<int, int>> seen;
    for (auto [a, b] : edges) {
        if (a < 0 || b < 0 || a >= vertex_count || b >= vertex_count) {
            std::ostringstream os;
            os << "edge endpoint out of range: (" << a << "," << b << ")";
            throw Error(ErrorKind::Validation, os.str());
        }
        if (a == b)
            throw Error(ErrorKind::Validation, "self loop at vertex " + std::to_string(a));
        auto e = std::minmax(a, b);
        if (!seen.insert({e.first, e.second}).second) {
            std::ostringstream os;
            os << "duplicate edge (" << e.first << "," << e.second << ")";
            throw Error(ErrorKind::Validation, os.str());
        }
    }
    d.edges.assign(seen.begin(), seen.end());
    d.adjacency.assign(vertex_count, {});
    for (auto [a, b] : d.edges) {
        d.adjacency[a].push_back(b);
        d.adjacency[b].push_back(a);
    }
    for (auto& nb : d.adjacency) std::sort(nb.begin(), nb.end());
    return d;
}

Domain build_grid_domain(int rows, int cols) {
    if (rows < 2 || cols < 2)
        throw Error(ErrorKind::Parameter, "grid dimensions must be at least 2x2");
    std::vector<std::pair<int, int>> edges;
    auto id = [cols](int r, int c) { return r * cols + c; };
    for (int r = 0; r < rows; ++r) {
        for (int c = 0; c < cols; ++c) {
            if (c + 1 < cols) edges.push_back({id(r, c), id(r, c + 1)});
            if (r + 1 < rows) edges.push_back({id(r, c), id(r + 1, c)});
            // one diagonal per cell, always the same direction
            if (r + 1 < rows && c + 1 < cols) edges.push_back({id(r, c), id(r + 1, c + 1)});
        }
    }
    return make_domain(rows * cols, edges);
}

Domain build_path_domain(int n) {
    std::vector<std::pair<int, int>> edges;
    for (int i = 0; i + 1 < n; ++i) edges.push_back({i, i + 1});
    return make_domain(n, edges);
}

bool is_connected(const Domain& d) {
    if (d.vertex_count == 0) return true;
    std::vector<char> seen(d.vertex_count, 0);
    std::vector<int> stack{0};
    seen[0] = 1;
    int count = 1;
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        for (int u : d.adjacency[v]) {
            if (!seen[u]) {
                seen[u] = 1;
                ++count;
                stack.push_back(u);
            }
        }
    }
    return count == d.vertex_count;
}

namespace {

void check_distinct(const std::vector<double>& values) {
    std::vector<int> idx(values.size());
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) {
        return values[a] < values[b] || (values[a] == values[b] && a < b);
    });
    for (size_t i = 1; i < idx.size(); ++i) {
        if (values[idx[i]] == values[idx[i - 1]]) {
            std::ostringstream os;
            os << "duplicate value " << values[idx[i]] << " at vertices " << idx[i - 1] << " and "
               << idx[i];
            throw Error(ErrorKind::Validation, os.str());
        }
    }
}

} // namespace

ScalarField validate_field(const Domain& domain, std::vector<double> values) {
    if (static_cast<int>(values.size()) != domain.vertex_count) {
        std::ostringstream os;
        os << "length mismatch: " << values.size() << " values for " << domain.vertex_count
           << " vertices";
        throw Error(ErrorKind::Validation, os.str());
    }
    check_distinct(values);
    if (!is_connected(domain)) throw Error(ErrorKind::Validation, "disconnected domain");
    return ScalarField{domain, std::move(values)};
}

std::vector<int> vertex_order(const ScalarField& f) {
    const int n = f.size();
    std::vector<int> idx(n);
    std::iota(idx.begin(), idx.end(), 0);
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f.values[a] < f.values[b]; });
    std::vector<int> rank(n);
    for (int i = 0; i < n; ++i) rank[idx[i]] = i + 1;
    return rank;
}

ScalarField apply_value_change(const ScalarField& f, int vertex, double new_value) {
    if (vertex < 0 || vertex >= f.size())
        throw Error(ErrorKind::Validation, "unknown vertex " + std::to_string(vertex));
    for (int v = 0; v < f.size(); ++v) {
        if (v != vertex && f.values[v] == new_value) {
            std::ostringstream os;
            os << "duplicate value " << new_value << " at vertices " << std::min(v, vertex) << " and "
               << std::max(v, vertex);
            throw Error(ErrorKind::Validation, os.str());
        }
    }
    ScalarField g = f;
    g.values[vertex] = new_value;
    return g;
}

std::vector<std::vector<int>> superlevel_components(const ScalarField& f, double threshold) {
    const int n = f.size();
    std::vector<int> comp(n, -1);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (comp[s] >= 0 || !(f.values[s] > threshold)) continue;
        std::vector<int> members{s};
        comp[s] = static_cast<int>(out.size());
        for (size_t i = 0; i < members.size(); ++i) {
            for (int u : f.domain.adjacency[members[i]]) {
                if (comp[u] < 0 && f.values[u] > threshold) {
                    comp[u] = comp[s];
                    members.push_back(u);
                }
            }
        }
        std::sort(members.begin(), members.end());
        out.push_back(std::move(members));
    }
    return out;
}

} // namespace mts
