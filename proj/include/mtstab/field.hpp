#pragma once

#include <utility>
#include <vector>

namespace mts {

// 1-skeleton of the domain complex. Edges are stored as (min, max) pairs, sorted.
struct Domain {
    int vertex_count = 0;
    std::vector<std::pair<int, int>> edges;
    std::vector<std::vector<int>> adjacency;
};

struct ScalarField {
    Domain domain;
    std::vector<double> values;

    int size() const { return domain.vertex_count; }
};

// Builds a domain from an edge list; rejects self loops, duplicates and bad endpoints.
// Connectivity is checked by validate_field, not here.
Domain make_domain(int vertex_count, const std::vector<std::pair<int, int>>& edges);

Domain build_grid_domain(int rows, int cols);
Domain build_path_domain(int n);

bool is_connected(const Domain& d);

ScalarField validate_field(const Domain& domain, std::vector<double> values);

// Ranks 1..n ascending by value.
std::vector<int> vertex_order(const ScalarField& f);

ScalarField apply_value_change(const ScalarField& f, int vertex, double new_value);

// Connected components of the induced subgraph on {v : f(v) > threshold}.
// Components are sorted internally and ordered by their smallest vertex.
std::vector<std::vector<int>> superlevel_components(const ScalarField& f, double threshold);

} // namespace mts
