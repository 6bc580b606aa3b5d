#include <doctest.h>

#include <cmath>
#include <random>
#include <set>

#include "helpers.hpp"
#include "mtstab/common.hpp"
#include "mtstab/io.hpp"
#include "mtstab/stability.hpp"

using namespace mts;

namespace {

using C = ChangeClass;

const std::vector<C> kClasses{C::SimpleChange, C::EdgeSplit, C::VerticalSwap, C::OrderedHorizontalSwap,
                              C::UnorderedHorizontalSwap};

SuiteConfig small_suite(std::uint64_t seed, int trials) {
    SuiteConfig cfg;
    cfg.seed = seed;
    cfg.trials = trials;
    cfg.grid = 3;
    cfg.metrics = all_metrics();
    return cfg;
}

} // namespace

TEST_CASE("claimed cells") {
    const std::map<Metric, std::set<C>> table{
        {Metric::E, {kClasses.begin(), kClasses.end()}},
        {Metric::P, {C::SimpleChange, C::EdgeSplit, C::VerticalSwap}},
        {Metric::B, {C::SimpleChange, C::EdgeSplit, C::VerticalSwap}},
        {Metric::W, {C::SimpleChange, C::EdgeSplit, C::OrderedHorizontalSwap}},
        {Metric::X, {C::SimpleChange, C::EdgeSplit}},
        {Metric::S, {C::SimpleChange, C::EdgeSplit}},
        {Metric::L, {C::SimpleChange, C::VerticalSwap}},
        {Metric::G, {C::SimpleChange, C::VerticalSwap, C::OrderedHorizontalSwap, C::UnorderedHorizontalSwap}},
    };
    for (Metric m : all_metrics())
        for (C c : kClasses) {
            INFO(metric_name(m) << " " << class_short(c));
            CHECK(claimed(m, c) == (table.at(m).count(c) == 1));
        }
}

TEST_CASE("bound reports") {
    for (const Scenario& s : scenario_suite()) {
        INFO(s.name);
        const int deg = build_merge_tree(s.f).degree();
        const double extent = check_minimal(s.f, s.g).extent;
        for (Metric m : all_metrics()) {
            BoundReport r = check_bound(s.f, s.g, m);
            CHECK(r.cls == s.expected);
            CHECK(r.deg == deg);
            CHECK(r.extent == doctest::Approx(extent));
            CHECK(r.bound == doctest::Approx(deg * extent));
            CHECK(r.distance == doctest::Approx(distance(m, build_merge_tree(s.f), build_merge_tree(s.g))));
            CHECK(r.claimed == claimed(m, s.expected));
            CHECK(r.pass == (!r.claimed || r.distance <= r.bound + kTol));
        }
        BoundReport same = check_bound(s.f, s.f, Metric::E);
        CHECK(same.distance == 0);
        CHECK(same.pass);
    }
}

TEST_CASE("counterexample families") {
    CHECK(parse_family("horizontal-swap") == Family::HorizontalSwap);
    CHECK(family_name(parse_family("vertical-swap")) == "vertical-swap");
    CHECK_THROWS_AS(parse_family("diagonal"), Error);
    try {
        counterexample(Family::EdgeSplit, 0.15, 0.1);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.kind() == ErrorKind::Parameter);
    }
    for (Family fam : {Family::EdgeSplit, Family::HorizontalSwap, Family::VerticalSwap}) {
        auto [a, b] = counterexample(fam, 10, 0.1);
        CHECK_NOTHROW(check_abstract(a));
        CHECK_NOTHROW(check_abstract(b));
        for (Metric m : unstable_metrics(fam)) {
            INFO(family_name(fam) << " " << metric_name(m));
            GrowthTable g = instability_growth(fam, m, {5, 10, 20, 40}, 0.1);
            CHECK(g.rows.size() == 4);
            CHECK(g.linear);
            for (auto [x, d] : g.rows) CHECK(d > x / 2);
        }
    }
    // the deformation distances do not grow with x on the edge split family
    GrowthTable flat = instability_growth(Family::EdgeSplit, Metric::E, {5, 10, 20}, 0.1);
    CHECK_FALSE(flat.linear);
    for (auto [x, d] : flat.rows) CHECK(d == doctest::Approx(0.1));
    CHECK_FALSE(instability_growth(Family::HorizontalSwap, Metric::W, {5, 7}, 0.1).linear);
}

TEST_CASE("random fields and trial streams") {
    std::mt19937_64 a = trial_rng(5, 3), b = trial_rng(5, 3), c = trial_rng(5, 4);
    CHECK(a() == b());
    CHECK(trial_rng(5, 3)() != c());
    std::mt19937_64 rng(1);
    ScalarField f = random_grid_field(3, 5, rng);
    CHECK(f.size() == 15);
    for (double v : f.values) {
        CHECK(v >= 0);
        CHECK(v < 1);
    }
}

TEST_CASE("suite bookkeeping") {
    SuiteReport r = run_stability_suite(small_suite(3, 40));
    CHECK(r.trials_run == 40);
    int total = 0;
    for (auto [c, n] : r.class_counts) total += n;
    CHECK(total == 40);
    for (Metric m : all_metrics()) {
        int per_metric = 0;
        for (C c : kClasses) {
            auto it = r.cells.find({m, c});
            if (it == r.cells.end()) continue;
            const CellStats& s = it->second;
            per_metric += s.trials;
            CHECK(s.passes <= s.trials);
            CHECK(s.within_deg_plus_one <= s.trials);
            CHECK(s.within_deg_plus_one >= s.passes);
            CHECK(s.worst_ratio >= 0);
            if (s.passes == s.trials && s.trials > 0) CHECK(s.worst_ratio <= 1 + 1e-6);
        }
        CHECK(per_metric == 40);
    }
    CHECK(r.shape_failures == 0);
    CHECK(r.witness_checked == 40);
    CHECK(r.witness_reproduces == r.witness_checked);
    CHECK(r.failures.size() <= 50);
    for (const Witness& w : r.failures) {
        CHECK(claimed(w.metric, w.cls));
        CHECK(w.distance > w.bound);
        CHECK(classify_change(w.f, w.g) == w.cls);
    }

    SuiteReport again = run_stability_suite(small_suite(3, 40));
    CHECK(suite_to_json(r).dump() == suite_to_json(again).dump());
    CHECK(suite_to_json(run_stability_suite(small_suite(4, 40))).dump() != suite_to_json(r).dump());

    SuiteReport empty = run_stability_suite(small_suite(3, 0));
    CHECK(empty.trials_run == 0);
    CHECK(empty.cells.empty());
    CHECK(empty.claimed_cells_pass());
}

TEST_CASE("finite perturbations") {
    FiniteConfig cfg;
    cfg.trials = 30;
    cfg.metrics = all_metrics();
    FiniteReport r = run_finite_stability(cfg);
    CHECK(r.steps_valid == r.steps_total);
    CHECK(r.sequences_exact == cfg.trials);
    CHECK(r.step_bound_ok == cfg.trials);
    CHECK(r.shift_zero == r.shift_checks);
    CHECK(r.shift_checks == cfg.trials);
    for (auto [m, s] : r.stats) {
        INFO(metric_name(m));
        CHECK(s.checked + s.skipped == cfg.trials);
        CHECK(s.passes <= s.checked);
    }
    CHECK(r.stats.count(Metric::E) == 1);
    CHECK(r.stats.at(Metric::E).skipped == 0);
    CHECK(r.all_pass() == (r.failures.empty()));
}
