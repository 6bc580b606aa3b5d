#include <doctest.h>

#include <cmath>
#include <random>

#include "helpers.hpp"
#include "mtstab/common.hpp"
#include "mtstab/distances.hpp"
#include "mtstab/stability.hpp"

using namespace mts;

namespace {

const CostModel kAbs{CostKind::AbsDiff};
const CostModel kWas{CostKind::Wasserstein};

// points above the diagonal as (birth, death) labels, ranks 0..2
LabeledTree random_point_tree(std::mt19937_64& rng, int n, bool ordered) {
    LabeledTree t = testing::random_labeled_tree(rng, n);
    std::uniform_real_distribution<double> u(0.0, 4.0);
    std::uniform_int_distribution<int> r(0, 2);
    t.scheme = ordered ? LabelScheme::OrderedBdtBirthDeath : LabelScheme::BdtBirthDeath;
    for (int v = 0; v < n; ++v) {
        double b = std::round(u(rng) * 4) / 4;
        t.label[v] = Label{b, b + 0.25 + std::round(u(rng) * 4) / 4, false};
        t.rank[v] = ordered ? r(rng) : 0;
    }
    return t;
}

std::vector<MergeTree> small_trees(std::mt19937_64& rng, int n, int max_nodes) {
    std::vector<MergeTree> out;
    for (int i = 0; i < n; ++i) out.push_back(testing::random_abstract_tree(rng, max_nodes));
    return out;
}

} // namespace

TEST_CASE("one-degree DP agrees with exhaustive mappings") {
    std::mt19937_64 rng(31);
    for (int i = 0; i < 200; ++i) {
        int n1 = 1 + i % 6, n2 = 1 + (i / 6) % 6;
        LabeledTree a = testing::random_labeled_tree(rng, n1), b = testing::random_labeled_tree(rng, n2);
        CHECK(selkow_dp(a, b, kAbs) == doctest::Approx(brute_force_distance(a, b, Constraint::Selkow, kAbs).cost));

        LabeledTree p = random_point_tree(rng, n1, false), q = random_point_tree(rng, n2, false);
        CHECK(selkow_dp(p, q, kWas) == doctest::Approx(brute_force_distance(p, q, Constraint::Selkow, kWas).cost));

        LabeledTree op = random_point_tree(rng, n1, true), oq = random_point_tree(rng, n2, true);
        INFO("ordered pair " << i);
        CHECK(ordered_selkow_dp(op, oq, kWas) ==
              doctest::Approx(brute_force_distance(op, oq, Constraint::Selkow, kWas).cost));
    }
}

TEST_CASE("merge tree distances agree with exhaustive mappings") {
    std::mt19937_64 rng(32);
    for (int i = 0; i < 200; ++i) {
        MergeTree a = testing::random_abstract_tree(rng, 6), b = testing::random_abstract_tree(rng, 6);
        auto la = label_for_scheme(a, LabelScheme::NodeDistToParent);
        auto lb = label_for_scheme(b, LabelScheme::NodeDistToParent);
        CHECK(delta_L(a, b) == doctest::Approx(brute_force_distance(la, lb, Constraint::Selkow, kAbs).cost));
        CHECK(delta_W(a, b) == doctest::Approx(brute_force_distance(bdt_labels(a, false), bdt_labels(b, false),
                                                                    Constraint::Selkow, kWas)
                                                   .cost));
        CHECK(delta_X(a, b) == doctest::Approx(brute_force_distance(bdt_labels(a, true), bdt_labels(b, true),
                                                                    Constraint::Selkow, kWas)
                                                   .cost));
    }
}

TEST_CASE("values on the edge split pair") {
    const double x = 10, eps = 0.1;
    auto [a, b] = counterexample(Family::EdgeSplit, x, eps);
    // removing the short F-E branch is the whole difference
    CHECK(delta_E(a, b) == doctest::Approx(eps));
    CHECK(delta_P(a, b) == doctest::Approx(eps));
    CHECK(delta_W(a, b) == doctest::Approx(eps / std::sqrt(2.0)));
    // node-based mappings must keep E: relabel it onto D (x) and drop its two
    // children (x and eps)
    CHECK(delta_L(a, b) == doctest::Approx(2 * x + eps));
    CHECK(delta_G(a, b) == doctest::Approx(2 * x + eps));
}

TEST_CASE("values on the horizontal swap pair") {
    const double x = 10, eps = 0.1;
    auto [a, b] = counterexample(Family::HorizontalSwap, x, eps);
    // any mapping pays eps on the root edge (x - eps against x), and the inner
    // edge has to be contracted and grown again elsewhere
    CHECK(delta_E(a, b) == doctest::Approx(0.6));
    CHECK(delta_G(a, b) == doctest::Approx(0.6));
    CHECK(delta_E(a, b) > 2 * eps);
    for (Metric m : unstable_metrics(Family::HorizontalSwap)) {
        INFO(metric_name(m));
        CHECK(distance(m, a, b) > x);
    }
}

TEST_CASE("values on the vertical swap pair") {
    const double x = 10, eps = 0.1;
    auto [a, b] = counterexample(Family::VerticalSwap, x, eps);
    // same shape, one edge longer by 2 eps
    for (Metric m : {Metric::L, Metric::G, Metric::P, Metric::E}) {
        INFO(metric_name(m));
        CHECK(distance(m, a, b) == doctest::Approx(2 * eps));
    }
    for (Metric m : unstable_metrics(Family::VerticalSwap)) {
        INFO(metric_name(m));
        CHECK(distance(m, a, b) > x);
    }
}

TEST_CASE("metric axioms") {
    std::mt19937_64 rng(33);
    auto ts = small_trees(rng, 7, 7);
    for (Metric m : all_metrics()) {
        INFO(metric_name(m));
        for (std::size_t i = 0; i < ts.size(); ++i) {
            CHECK(std::abs(distance(m, ts[i], ts[i])) <= kTol);
            for (std::size_t j = 0; j < ts.size(); ++j) {
                double ij = distance(m, ts[i], ts[j]);
                CHECK(ij >= 0);
                CHECK(ij == doctest::Approx(distance(m, ts[j], ts[i])));
                // the branch mapping distance is not claimed to be a metric
                if (m == Metric::B) continue;
                for (std::size_t k = 0; k < ts.size(); ++k)
                    CHECK(ij <= distance(m, ts[i], ts[k]) + distance(m, ts[k], ts[j]) + kTol);
            }
        }
    }
}

TEST_CASE("orderings between distances") {
    std::mt19937_64 rng(34);
    for (int i = 0; i < 80; ++i) {
        MergeTree a = testing::random_abstract_tree(rng, 8), b = testing::random_abstract_tree(rng, 8);
        CHECK(delta_W(a, b) <= delta_X(a, b) + kTol);
        CHECK(delta_G(a, b) <= delta_L(a, b) + kTol);
        CHECK(delta_E(a, b) <= delta_P(a, b) + kTol);
        CHECK(delta_B(a, b) <= delta_X(a, b) + kTol);
    }
}

TEST_CASE("distances ignore a common shift") {
    std::mt19937_64 rng(35);
    for (int i = 0; i < 20; ++i) {
        ScalarField f = random_grid_field(3, 3, rng), g = random_grid_field(3, 3, rng);
        std::vector<double> fs = f.values, gs = g.values;
        for (double& v : fs) v += 3.5;
        for (double& v : gs) v += 3.5;
        ScalarField f2 = validate_field(f.domain, fs), g2 = validate_field(g.domain, gs);
        for (Metric m : all_metrics()) {
            INFO(metric_name(m));
            CHECK(compute(m, f, g) == doctest::Approx(compute(m, f2, g2)).epsilon(1e-9));
        }
    }
}

TEST_CASE("metric names and guards") {
    CHECK(parse_metric("w") == Metric::W);
    CHECK(parse_metric("E") == Metric::E);
    CHECK(metric_name(Metric::G) == "delta_G");
    for (Metric m : all_metrics()) CHECK(parse_metric(std::string(1, metric_letter(m))) == m);
    try {
        parse_metric("q");
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
    }
    CHECK_THROWS_AS(parse_metric("ww"), Error);

    std::mt19937_64 rng(36);
    MergeTree big = testing::random_abstract_tree(rng, 40);
    while (big.edge_count() <= 12) big = testing::random_abstract_tree(rng, 40);
    for (Metric m : {Metric::S, Metric::G, Metric::P, Metric::E, Metric::B}) {
        INFO(metric_name(m));
        try {
            distance(m, big, big);
            FAIL("expected a guard error");
        } catch (const Error& e) {
            CHECK(e.kind() == ErrorKind::Guard);
        }
    }
    // polynomial distances have no guard
    CHECK(delta_W(big, big) == 0);
    CHECK(delta_L(big, big) == 0);
}
