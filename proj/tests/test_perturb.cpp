#include <doctest.h>

#include <algorithm>
#include <map>
#include <random>
#include <set>
#include <tuple>

#include "helpers.hpp"
#include "mtstab/common.hpp"
#include "mtstab/perturb.hpp"
#include "mtstab/stability.hpp"

using namespace mts;

namespace {

ErrorKind kind_of(auto&& fn) {
    try {
        fn();
    } catch (const Error& e) {
        return e.kind();
    }
    FAIL("expected an error");
    return ErrorKind::Io;
}

// Structure keyed by field vertices: tree edges, and each branch as
// (leaf vertex, saddle vertex, parent branch leaf vertex).
std::set<std::pair<int, int>> tree_edges(const MergeTree& t) {
    std::set<std::pair<int, int>> e;
    for (int v = 0; v < t.size(); ++v)
        if (v != t.root) e.insert({t.vertex[v], t.vertex[t.parent[v]]});
    return e;
}

std::set<std::tuple<int, int, int>> branch_keys(const MergeTree& t) {
    Bdt b = build_bdt(t, persistence_branch_decomposition(t));
    std::set<std::tuple<int, int, int>> k;
    for (int i = 0; i < b.size(); ++i)
        k.insert({b.death_vertex[i], b.birth_vertex[i], b.parent[i] < 0 ? -1 : b.death_vertex[b.parent[i]]});
    return k;
}

std::vector<int> ranks(const ScalarField& f) {
    std::vector<int> idx(f.size());
    for (int i = 0; i < f.size(); ++i) idx[i] = i;
    std::sort(idx.begin(), idx.end(), [&](int a, int b) { return f.values[a] < f.values[b]; });
    std::vector<int> r(f.size());
    for (int i = 0; i < f.size(); ++i) r[idx[i]] = i;
    return r;
}

} // namespace

TEST_CASE("scenario suite classes") {
    auto suite = scenario_suite();
    std::set<ChangeClass> seen;
    std::set<std::string> names;
    for (const auto& s : suite) {
        INFO(s.name);
        CHECK(names.insert(s.name).second);
        CHECK_NOTHROW(check_minimal(s.f, s.g));
        Classification c = classify(s.f, s.g);
        CHECK(c.cls == s.expected);
        CHECK(shape_violation(s.f, s.g, c.cls).empty());
        seen.insert(c.cls);
    }
    CHECK(seen.size() == 5);
    for (ChangeClass c : seen) CHECK(!class_short(c).empty());
    CHECK(is_horizontal(ChangeClass::OrderedHorizontalSwap));
    CHECK(is_horizontal(ChangeClass::UnorderedHorizontalSwap));
    CHECK_FALSE(is_horizontal(ChangeClass::VerticalSwap));
}

TEST_CASE("classification on random minimal perturbations") {
    std::mt19937_64 rng(41);
    std::map<ChangeClass, int> counts;
    for (int i = 0; i < 500; ++i) {
        auto [f, g] = testing::random_minimal_pair(rng, 3 + i % 3);
        Classification c;
        REQUIRE_NOTHROW(c = classify(f, g));
        ++counts[c.cls];
        INFO("trial " << i << " class " << class_short(c.cls));
        CHECK(shape_violation(f, g, c.cls).empty());
        CHECK(observation_violations(f, g).empty());
        CHECK(classify_change(g, f) == c.cls);

        MergeTree tf = build_merge_tree(f), tg = build_merge_tree(g);
        const bool same_edges = tree_edges(tf) == tree_edges(tg);
        const bool same_branches = branch_keys(tf) == branch_keys(tg);
        if (same_edges && same_branches) CHECK(c.cls == ChangeClass::SimpleChange);
        if (same_edges && !same_branches) CHECK(c.cls == ChangeClass::VerticalSwap);
        if (std::abs(tf.size() - tg.size()) == 2) CHECK(c.cls == ChangeClass::EdgeSplit);
        if (c.move.partner < 0) CHECK(c.cls != ChangeClass::VerticalSwap);
    }
    CHECK(counts[ChangeClass::SimpleChange] > 0);
}

TEST_CASE("enumerated perturbations are minimal") {
    std::mt19937_64 rng(42);
    for (int i = 0; i < 40; ++i) {
        ScalarField f = random_grid_field(3, 4, rng);
        int v = i % f.size();
        auto cands = enumerate_minimal_perturbations(f, v);
        CHECK(!cands.empty());
        CHECK(cands.size() <= 4);
        const auto rf = ranks(f);
        for (const auto& p : cands) {
            CHECK(p.vertex == v);
            CHECK(p.old_value == f.values[v]);
            CHECK(p.extent == doctest::Approx(std::abs(p.new_value - p.old_value)));
            ScalarField g = apply(f, p);
            MinimalPerturbation back = check_minimal(f, g);
            CHECK(back.vertex == v);
            CHECK(back.partner == p.partner);
            // at most one adjacent transposition of ranks
            const auto rg = ranks(g);
            int moved = 0;
            for (int u = 0; u < f.size(); ++u) {
                CHECK(std::abs(rf[u] - rg[u]) <= 1);
                moved += rf[u] != rg[u];
            }
            CHECK(moved == (p.partner >= 0 ? 2 : 0));
        }
    }
    ScalarField f = random_grid_field(2, 2, rng);
    CHECK(kind_of([&] { enumerate_minimal_perturbations(f, 9); }) == ErrorKind::Validation);
}

TEST_CASE("non-minimal changes are rejected") {
    ScalarField f = validate_field(build_path_domain(4), {0, 1, 2, 3});
    CHECK(check_minimal(f, f).vertex == -1);
    CHECK(check_minimal(f, f).extent == 0);
    MinimalPerturbation up = check_minimal(f, validate_field(f.domain, {0, 1, 2.5, 3}));
    CHECK(up.vertex == 2);
    CHECK(up.up);
    CHECK(up.partner == -1);
    MinimalPerturbation swap = check_minimal(f, validate_field(f.domain, {0, 1, 3.5, 3}));
    CHECK(swap.partner == 3);
    CHECK(kind_of([&] { check_minimal(f, validate_field(f.domain, {0, 1.5, 2.5, 3})); }) ==
          ErrorKind::Validation);
    CHECK(kind_of([&] { check_minimal(f, validate_field(f.domain, {0, 1, 4, 3.5})); }) ==
          ErrorKind::Validation);
    CHECK(kind_of([&] { check_minimal(f, validate_field(f.domain, {4, 1, 2, 3})); }) ==
          ErrorKind::Validation);
    ScalarField other = validate_field(build_path_domain(3), {0, 1, 2});
    CHECK(kind_of([&] { check_minimal(f, other); }) == ErrorKind::Validation);
}

TEST_CASE("decomposition into minimal steps") {
    std::mt19937_64 rng(43);
    for (int i = 0; i < 60; ++i) {
        ScalarField f = random_grid_field(3, 3, rng), g = random_grid_field(3, 3, rng);
        PerturbationSequence s = decompose_perturbation(f, g);
        REQUIRE(s.fields.size() == s.steps.size() + 1);
        CHECK(s.fields.front().values == f.values);
        CHECK(s.fields.back().values == g.values);
        for (std::size_t k = 0; k < s.steps.size(); ++k) {
            MinimalPerturbation m = check_minimal(s.fields[k], s.fields[k + 1]);
            CHECK(m.vertex == s.steps[k].vertex);
        }
        // pairs in the same order in f and g never swap; the others swap once
        const auto rf = ranks(f), rg = ranks(g);
        std::map<std::pair<int, int>, int> swaps;
        for (const auto& st : s.steps)
            if (st.partner >= 0) ++swaps[{std::min(st.vertex, st.partner), std::max(st.vertex, st.partner)}];
        int inversions = 0;
        for (int a = 0; a < f.size(); ++a)
            for (int b = a + 1; b < f.size(); ++b) {
                bool flip = (rf[a] < rf[b]) != (rg[a] < rg[b]);
                inversions += flip;
                auto it = swaps.find({a, b});
                CHECK((it == swaps.end() ? 0 : it->second) == (flip ? 1 : 0));
            }
        CHECK(static_cast<int>(s.steps.size()) <= f.size() + inversions);
    }
    ScalarField f = random_grid_field(3, 3, rng);
    PerturbationSequence id = decompose_perturbation(f, f);
    CHECK(id.fields.size() == 1);
    CHECK(id.steps.empty());
}

TEST_CASE("lowest saddle dropping below the minimum is a simple change") {
    // vertex 0 is the minimum, vertex 1 joins the maxima 2 and 3; after the
    // move vertex 1 is the minimum and vertex 0 does the joining
    Domain d = make_domain(4, {{0, 1}, {0, 2}, {0, 3}, {1, 2}, {1, 3}});
    ScalarField f = validate_field(d, {0.1, 0.3, 0.9, 0.8});
    ScalarField g = validate_field(d, {0.1, 0.05, 0.9, 0.8});
    MergeTree tf = build_merge_tree(f), tg = build_merge_tree(g);
    REQUIRE(tf.vertex[tf.root] == 0);
    REQUIRE(tg.vertex[tg.root] == 1);
    CHECK(tf.size() == tg.size());
    Classification c = classify(f, g);
    CHECK(c.move.partner == 0);
    CHECK(c.cls == ChangeClass::SimpleChange);
    CHECK(classify_change(g, f) == ChangeClass::SimpleChange);
    CHECK(shape_violation(f, g, c.cls).empty());
}
