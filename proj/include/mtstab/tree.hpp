#pragma once

#include <string>
#include <vector>

namespace mts {

enum class LabelScheme { EdgeLength, NodeDistToParent, BdtBirthDeath, OrderedBdtBirthDeath, BranchLabelOnNodes };

// Scalar labels use `a` only. Birth/death labels use (a, b).
struct Label {
    double a = 0.0;
    double b = 0.0;
    bool blank = false;
};

// Rooted tree with one label per node. For EdgeLength the label of node v is the
// length of the edge (v, parent(v)); the root label is blank.
struct LabeledTree {
    LabelScheme scheme = LabelScheme::NodeDistToParent;
    std::vector<int> parent;
    std::vector<std::vector<int>> children;
    int root = -1;
    std::vector<Label> label;
    std::vector<int> rank;  // sibling order key (ordered schemes); equal keys are incomparable
    std::vector<std::string> name;

    int size() const { return static_cast<int>(parent.size()); }
    bool ordered() const { return scheme == LabelScheme::OrderedBdtBirthDeath; }
};

std::vector<int> preorder(const std::vector<std::vector<int>>& children, int root);
std::vector<int> postorder(const std::vector<std::vector<int>>& children, int root);

// anc[u][v] is true when u is an ancestor of v or u == v.
std::vector<std::vector<char>> ancestor_matrix(const std::vector<int>& parent, int root);

std::vector<int> depths(const std::vector<int>& parent, const std::vector<std::vector<int>>& children,
                        int root);

// Rebuilds children lists from a parent array and returns the root. Throws on
// malformed input (no root, several roots, cycles, out-of-range parents).
int children_from_parents(const std::vector<int>& parent, std::vector<std::vector<int>>& children);

} // namespace mts
