#pragma once

#include <string>
#include <utility>
#include <vector>

#include "mtstab/editcore.hpp"
#include "mtstab/mergetree.hpp"

namespace mts {

// Edge-length tree for deformation operations. len[v] is the length of the edge
// (v, parent(v)); id[v] names the node in edit operations.
struct EdgeTree {
    std::vector<int> id;
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    std::vector<double> len;
    int root = -1;

    int size() const { return static_cast<int>(parent.size()); }
};

EdgeTree edge_tree(const MergeTree& t);

// Contracts every edge whose child node v has in_d[v] set, all at once, then
// prunes non-root nodes left with one child (merged edges add up).
EdgeTree contract(const EdgeTree& t, const std::vector<char>& in_d);

std::string canonical_shape(const EdgeTree& t);

// Cheapest root-preserving isomorphism, summing |length differences|. Infinite
// when the shapes differ. `pairs` receives matched (id in a, id in b).
double iso_cost(const EdgeTree& a, const EdgeTree& b, std::vector<std::pair<int, int>>* pairs = nullptr);

bool edge_equivalent(const EdgeTree& a, const EdgeTree& b);

struct DeformResult {
    double cost = 0.0;
    std::vector<int> d1, d2;  // contracted edges, named by child node id
    std::vector<std::pair<int, int>> iso;
};

// Exact deformation distance over contracted edge subsets. With one_degree the
// subsets must be closed under descendants.
DeformResult deform_brute_force(const MergeTree& t1, const MergeTree& t2, bool one_degree,
                                int guard = 10);

// Witness to explicit operations: deletions in T1, relabels, then the reversed
// deletions of T2 as inserts. Fresh ids for T2-only nodes are t1.size() + id.
EditSequence deform_sequence(const MergeTree& t1, const MergeTree& t2, const DeformResult& w);

// Applies deformation operations. Delete and relabel costs must agree with the
// current edge lengths; violations throw Validation naming the 1-based step.
EdgeTree apply_deform_sequence(const EdgeTree& t, const EditSequence& s);

} // namespace mts
