#pragma once

#include <string>
#include <vector>

#include "mtstab/field.hpp"
#include "mtstab/tree.hpp"

namespace mts {

// Merge (split) tree. Used for both the augmented tree, where node i is field
// vertex i, and the abstract tree, where nodes are the surviving critical
// vertices ordered by vertex id.
struct MergeTree {
    std::vector<int> vertex;
    std::vector<double> value;
    std::vector<int> parent;  // -1 at the root
    std::vector<std::vector<int>> children;
    int root = -1;
    std::vector<std::string> name;

    int size() const { return static_cast<int>(value.size()); }
    int edge_count() const { return size() > 0 ? size() - 1 : 0; }
    int degree() const;  // max child count
    double edge_length(int v) const { return value[v] - value[parent[v]]; }
    bool is_leaf(int v) const { return children[v].empty(); }
};

MergeTree build_augmented(const ScalarField& f);
MergeTree prune_to_abstract(const MergeTree& aug);
MergeTree build_merge_tree(const ScalarField& f);  // augmented then pruned

// Free-standing tree from parent indices. Node i gets vertex id i. Values must
// increase strictly from parent to child; ties between unrelated nodes are fine.
MergeTree make_tree(const std::vector<double>& values, const std::vector<int>& parent,
                    const std::vector<std::string>& names = {});

// Throws Validation unless the root has one child and no other node has one child.
void check_abstract(const MergeTree& t);

struct Branch {
    std::vector<int> nodes;  // attachment node first, leaf last
    double birth = 0.0;
    double death = 0.0;
    int parent = -1;      // parent branch, -1 for the main branch
    int attach_pos = -1;  // index of nodes.front() inside the parent branch
};

struct BranchDecomposition {
    std::vector<Branch> branches;  // branches[0] is the main branch
    std::vector<int> branch_of;    // node -> branch whose edge enters it; root -> main
};

// For every node the child that continues its branch (-1 at leaves).
using ContinuationChoice = std::vector<int>;

ContinuationChoice elder_choice(const MergeTree& t);
BranchDecomposition decompose(const MergeTree& t, const ContinuationChoice& choice);
BranchDecomposition persistence_branch_decomposition(const MergeTree& t);

// Every continuation choice, in lexicographic order. Throws Guard past `limit`.
std::vector<ContinuationChoice> all_continuation_choices(const MergeTree& t, std::size_t limit);

struct Bdt {
    std::vector<double> birth, death;
    std::vector<int> birth_vertex, death_vertex;  // field vertices (MergeTree::vertex)
    std::vector<int> parent;
    std::vector<std::vector<int>> children;  // sorted by attach_pos, then death vertex
    int root = 0;
    std::vector<int> attach_pos;
    std::vector<std::string> name;

    int size() const { return static_cast<int>(birth.size()); }
};

// Bdt plus the attachment order between siblings.
struct OrderedBdt {
    Bdt bdt;
    // a <_B b: same parent, strictly earlier attachment. Same-saddle siblings are incomparable.
    bool precedes(int a, int b) const {
        return bdt.parent[a] >= 0 && bdt.parent[a] == bdt.parent[b] &&
               bdt.attach_pos[a] < bdt.attach_pos[b];
    }
};

Bdt build_bdt(const MergeTree& t, const BranchDecomposition& bd);
OrderedBdt build_obdt(const MergeTree& t, const BranchDecomposition& bd);

LabeledTree label_for_scheme(const MergeTree& t, LabelScheme scheme);
LabeledTree label_for_scheme(const Bdt& b, LabelScheme scheme);

// Tree with per-node coordinate vectors for inclusion tests. source[v][k] is the
// field vertex whose value produced coord[v][k].
struct ValuedTree {
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    int root = -1;
    std::vector<std::vector<double>> coord;
    std::vector<std::vector<int>> source;
    std::vector<int> rank;

    int size() const { return static_cast<int>(parent.size()); }
};

ValuedTree valued(const MergeTree& t);
ValuedTree valued(const Bdt& b);

// Relaxations used when the two trees come from fields that differ at vertex x
// (and possibly swapped with y). Default: plain value equality.
struct MatchPolicy {
    int x = -1;
    int y = -1;
    int loose_coord = -1;  // coordinate for which any source in {x, y} matches
    // x and y may trade places between the root and its child (the global
    // minimum passing the lowest saddle)
    bool root_exchange = false;
};

// Injective map from `inner` into `host` preserving the root, parent edges and
// coordinates; with `ordered`, sibling rank comparisons must agree.
bool tree_included_up_to_iso(const ValuedTree& inner, const ValuedTree& host, bool ordered,
                             const MatchPolicy& policy = {}, int guard = 64);
bool tree_included_up_to_iso(const MergeTree& inner, const MergeTree& host);

} // namespace mts
