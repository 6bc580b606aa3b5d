#pragma once

#include <random>
#include <vector>

#include "mtstab/mergetree.hpp"
#include "mtstab/stability.hpp"
#include "mtstab/tree.hpp"

namespace testing {

// Abstract merge tree with random shape: root, one child, every inner node 2-3
// children, distinct values increasing away from the root.
inline mts::MergeTree random_abstract_tree(std::mt19937_64& rng, int max_nodes) {
    std::uniform_real_distribution<double> step(0.5, 4.0);
    std::uniform_int_distribution<int> kids(2, 3);
    std::bernoulli_distribution grow(0.5);
    std::vector<double> value{0.0};
    std::vector<int> parent{-1};
    value.push_back(step(rng));
    parent.push_back(0);
    std::vector<int> open{1};
    while (!open.empty()) {
        int v = open.front();
        open.erase(open.begin());
        int k = kids(rng);
        if (static_cast<int>(value.size()) + k > max_nodes || !grow(rng)) continue;
        for (int i = 0; i < k; ++i) {
            value.push_back(value[v] + step(rng));
            parent.push_back(v);
            open.push_back(static_cast<int>(value.size()) - 1);
        }
    }
    return mts::make_tree(value, parent);
}

// Random labeled tree with non-blank scalar labels.
inline mts::LabeledTree random_labeled_tree(std::mt19937_64& rng, int n) {
    std::uniform_real_distribution<double> lab(0.0, 5.0);
    mts::LabeledTree t;
    t.scheme = mts::LabelScheme::NodeDistToParent;
    t.parent.push_back(-1);
    for (int v = 1; v < n; ++v) t.parent.push_back(std::uniform_int_distribution<int>(0, v - 1)(rng));
    t.root = mts::children_from_parents(t.parent, t.children);
    for (int v = 0; v < n; ++v) t.label.push_back(mts::Label{std::round(lab(rng) * 4) / 4, 0.0, false});
    t.rank.assign(n, 0);
    t.name.assign(n, "");
    return t;
}

// Two trees built from a random grid field and one of its minimal perturbations.
struct PerturbedPair {
    mts::ScalarField f, g;
};

inline PerturbedPair random_minimal_pair(std::mt19937_64& rng, int grid) {
    mts::ScalarField f = mts::random_grid_field(grid, grid, rng);
    int v = std::uniform_int_distribution<int>(0, f.size() - 1)(rng);
    auto cands = mts::enumerate_minimal_perturbations(f, v);
    auto& p = cands[std::uniform_int_distribution<int>(0, static_cast<int>(cands.size()) - 1)(rng)];
    return {f, mts::apply(f, p)};
}

} // namespace testing
