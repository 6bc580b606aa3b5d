#include "mtstab/stability.hpp"

#include <algorithm>
#include <cmath>
#include <set>

#include "mtstab/common.hpp"
#include "mtstab/deform.hpp"

namespace mts {

bool claimed(Metric m, ChangeClass c) {
    using C = ChangeClass;
    const bool sc = c == C::SimpleChange, es = c == C::EdgeSplit, vs = c == C::VerticalSwap;
    const bool ohs = c == C::OrderedHorizontalSwap, uhs = c == C::UnorderedHorizontalSwap;
    switch (m) {
    case Metric::E: return true;
    case Metric::P:
    case Metric::B: return sc || es || vs;
    case Metric::W: return sc || es || ohs;
    case Metric::X:
    case Metric::S: return sc || es;
    case Metric::L: return sc || vs;
    case Metric::G: return sc || vs || ohs || uhs;
    }
    return false;
}

BoundReport check_bound(const ScalarField& f, const ScalarField& g, Metric m, const Guards& guards) {
    Classification c = classify(f, g);
    BoundReport r;
    r.metric = m;
    r.cls = c.cls;
    r.extent = c.move.extent;
    MergeTree tf = build_merge_tree(f), tg = build_merge_tree(g);
    r.deg = tf.degree();
    r.distance = distance(m, tf, tg, guards);
    r.bound = r.deg * r.extent;
    r.claimed = claimed(m, c.cls);
    r.pass = !r.claimed || r.distance <= r.bound + kTol;
    return r;
}

Family parse_family(const std::string& s) {
    if (s == "edge-split") return Family::EdgeSplit;
    if (s == "horizontal-swap") return Family::HorizontalSwap;
    if (s == "vertical-swap") return Family::VerticalSwap;
    throw Error(ErrorKind::Parameter, "unknown family '" + s + "' (expected edge-split, horizontal-swap or vertical-swap)");
}

std::string family_name(Family f) {
    switch (f) {
    case Family::EdgeSplit: return "edge-split";
    case Family::HorizontalSwap: return "horizontal-swap";
    case Family::VerticalSwap: return "vertical-swap";
    }
    return "?";
}

std::pair<MergeTree, MergeTree> counterexample(Family fam, double x, double eps) {
    if (!(eps > 0) || !(x > 2 * eps))
        throw Error(ErrorKind::Parameter, "counterexample needs x > 2*eps > 0");
    switch (fam) {
    case Family::EdgeSplit:
        // F sits eps above the saddle E; without it E is regular and vanishes
        return {make_tree({0, x, 3 * x, 3 * x, 2 * x, 2 * x + eps}, {-1, 0, 1, 4, 1, 4},
                          {"A", "B", "C", "D", "E", "F"}),
                make_tree({0, x, 3 * x, 3 * x}, {-1, 0, 1, 1}, {"A", "B", "C", "D"})};
    case Family::HorizontalSwap:
        return {make_tree({0, x - eps, 4 * x, 3 * x, x, 2 * x}, {-1, 0, 1, 4, 1, 4},
                          {"a", "b", "c", "d", "e", "f"}),
                make_tree({0, x + eps, 4 * x, 3 * x, x, 2 * x}, {-1, 4, 1, 4, 0, 1},
                          {"a", "b", "c", "d", "e", "f"})};
    case Family::VerticalSwap:
        return {make_tree({0, x, 2 * x, 4 * x + eps, 4 * x, 3 * x}, {-1, 0, 1, 1, 2, 2},
                          {"a", "b", "c", "d", "e", "f"}),
                make_tree({0, x, 2 * x, 4 * x - eps, 4 * x, 3 * x}, {-1, 0, 1, 1, 2, 2},
                          {"a", "b", "c", "d", "e", "f"})};
    }
    throw Error(ErrorKind::Parameter, "unknown family");
}

std::vector<Metric> unstable_metrics(Family fam) {
    switch (fam) {
    case Family::EdgeSplit: return {Metric::L, Metric::G};
    case Family::HorizontalSwap: return {Metric::W, Metric::X, Metric::S, Metric::L, Metric::P, Metric::B};
    case Family::VerticalSwap: return {Metric::W, Metric::X, Metric::S};
    }
    return {};
}

GrowthTable instability_growth(Family fam, Metric m, const std::vector<double>& xs, double eps) {
    GrowthTable t{fam, m, eps, {}, true};
    for (double x : xs) {
        auto [a, b] = counterexample(fam, x, eps);
        t.rows.push_back({x, distance(m, a, b)});
    }
    bool any = false;
    for (const auto& [x1, d1] : t.rows) {
        for (const auto& [x2, d2] : t.rows) {
            if (std::abs(x2 - 2 * x1) > kTol) continue;
            any = true;
            if (!(d1 > 0) || std::abs(d2 / d1 - 2.0) > 0.2) t.linear = false;
        }
    }
    t.linear = t.linear && any;
    return t;
}

ScalarField random_grid_field(int rows, int cols, std::mt19937_64& rng) {
    std::uniform_real_distribution<double> u(0.0, 1.0);
    Domain d = build_grid_domain(rows, cols);
    for (;;) {
        std::vector<double> v(rows * cols);
        for (double& x : v) x = u(rng);
        std::vector<double> s = v;
        std::sort(s.begin(), s.end());
        if (std::adjacent_find(s.begin(), s.end()) == s.end()) return validate_field(d, v);
    }
}

std::mt19937_64 trial_rng(std::uint64_t seed, int trial) {
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(trial)};
    return std::mt19937_64(seq);
}

namespace {

bool fits(const MergeTree& t, const std::vector<Metric>& metrics, const Guards& g) {
    for (Metric m : metrics) {
        switch (m) {
        case Metric::E:
        case Metric::P:
            if (t.edge_count() > g.deform_edges) return false;
            break;
        case Metric::B:
            if (t.edge_count() > g.branch_edges) return false;
            break;
        case Metric::G:
        case Metric::S:
            if (t.size() > g.brute_nodes) return false;
            break;
        default: break;
        }
    }
    return true;
}

} // namespace

bool SuiteReport::claimed_cells_pass() const {
    for (const auto& [key, s] : cells)
        if (claimed(key.first, key.second) && s.passes != s.trials) return false;
    return true;
}

SuiteReport run_stability_suite(const SuiteConfig& cfg) {
    SuiteReport rep;
    rep.config = cfg;
    for (int trial = 0; trial < cfg.trials; ++trial) {
        std::mt19937_64 rng = trial_rng(cfg.seed, trial);
        ScalarField f, g;
        MergeTree tf, tg;
        bool ok = false;
        for (int attempt = 0; attempt < cfg.max_attempts && !ok; ++attempt) {
            f = random_grid_field(cfg.grid, cfg.grid, rng);
            std::uniform_int_distribution<int> pick_v(0, f.size() - 1);
            auto cands = enumerate_minimal_perturbations(f, pick_v(rng));
            std::uniform_int_distribution<int> pick_c(0, static_cast<int>(cands.size()) - 1);
            g = apply(f, cands[pick_c(rng)]);
            tf = build_merge_tree(f);
            tg = build_merge_tree(g);
            ok = fits(tf, cfg.metrics, cfg.guards) && fits(tg, cfg.metrics, cfg.guards);
        }
        if (!ok) continue;
        ++rep.trials_run;
        Classification c = classify(f, g);
        ++rep.class_counts[c.cls];
        if (!shape_violation(f, g, c.cls).empty()) ++rep.shape_failures;
        const int deg = tf.degree();
        const double eps = c.move.extent;
        for (Metric m : cfg.metrics) {
            double d = distance(m, tf, tg, cfg.guards);
            double bound = deg * eps;
            CellStats& s = rep.cells[{m, c.cls}];
            ++s.trials;
            bool pass = d <= bound + kTol;
            if (pass) ++s.passes;
            if (d <= (deg + 1) * eps + kTol) ++s.within_deg_plus_one;
            if (eps > 0) s.worst_ratio = std::max(s.worst_ratio, d / (deg * eps));
            if (!pass && claimed(m, c.cls) && rep.failures.size() < 50)
                rep.failures.push_back(Witness{trial, m, c.cls, f, g, d, bound});
        }
        if (cfg.witness && std::find(cfg.metrics.begin(), cfg.metrics.end(), Metric::E) != cfg.metrics.end()) {
            // candidates: the optimal deformation and, when the shapes agree,
            // plain relabels of every edge
            const EdgeTree ef = edge_tree(tf), eg = edge_tree(tg);
            DeformResult opt = deform_brute_force(tf, tg, false, cfg.guards.deform_edges);
            std::vector<DeformResult> cands{opt};
            if (canonical_shape(ef) == canonical_shape(eg)) {
                DeformResult plain;
                plain.cost = iso_cost(ef, eg, &plain.iso);
                cands.push_back(plain);
            }
            ++rep.witness_checked;
            int best = -1;
            bool opt_ok = false;
            for (const DeformResult& w : cands) {
                EditSequence s = deform_sequence(tf, tg, w);
                bool reaches = false;
                try {
                    reaches = edge_equivalent(apply_deform_sequence(ef, s), eg) &&
                              std::abs(s.cost() - w.cost) <= 1e-7;
                } catch (const Error&) {
                }
                if (&w == &cands[0]) opt_ok = reaches;
                if (!reaches) continue;
                bool cheap = std::all_of(s.ops.begin(), s.ops.end(),
                                         [&](const EditOp& op) { return op.cost <= eps + kTol; });
                bool brief = static_cast<int>(s.ops.size()) <= deg;
                best = std::max(best, 2 * cheap + brief);
            }
            if (opt_ok) ++rep.witness_reproduces;
            if (best >= 2) ++rep.witness_cheap;
            if (best == 3 || best == 1) ++rep.witness_short;
            if (best == 3) ++rep.witness_valid;
        }
    }
    return rep;
}

bool FiniteReport::all_pass() const {
    for (const auto& [m, s] : stats)
        if (s.passes != s.checked) return false;
    return steps_valid == steps_total && sequences_exact == config.trials &&
           step_bound_ok == config.trials && shift_zero == shift_checks;
}

FiniteReport run_finite_stability(const FiniteConfig& cfg) {
    FiniteReport rep;
    rep.config = cfg;
    for (Metric m : cfg.metrics) rep.stats[m];
    for (int trial = 0; trial < cfg.trials; ++trial) {
        std::mt19937_64 rng = trial_rng(cfg.seed, trial);
        std::uniform_real_distribution<double> noise(-cfg.eps, cfg.eps);
        ScalarField f, g;
        MergeTree tf, tg;
        for (;;) {
            f = random_grid_field(cfg.grid, cfg.grid, rng);
            std::vector<double> v = f.values;
            for (double& x : v) x += noise(rng);
            std::vector<double> s = v;
            std::sort(s.begin(), s.end());
            if (std::adjacent_find(s.begin(), s.end()) != s.end()) continue;  // re-jitter on ties
            g = validate_field(f.domain, v);
            tf = build_merge_tree(f);
            tg = build_merge_tree(g);
            if (fits(tf, cfg.metrics, cfg.guards) && fits(tg, cfg.metrics, cfg.guards)) break;
        }

        PerturbationSequence seq = decompose_perturbation(f, g);
        std::set<ChangeClass> classes;
        for (std::size_t i = 0; i + 1 < seq.fields.size(); ++i) {
            ++rep.steps_total;
            try {
                check_minimal(seq.fields[i], seq.fields[i + 1]);
                ++rep.steps_valid;
            } catch (const Error&) {
                continue;
            }
            classes.insert(classify_change(seq.fields[i], seq.fields[i + 1]));
        }
        if (seq.fields.back().values == g.values) ++rep.sequences_exact;
        int inversions = 0;
        for (int a = 0; a < f.size(); ++a)
            for (int b = a + 1; b < f.size(); ++b)
                if ((f.values[a] < f.values[b]) != (g.values[a] < g.values[b])) ++inversions;
        if (static_cast<int>(seq.steps.size()) <= f.size() + inversions) ++rep.step_bound_ok;

        auto only = [&](std::initializer_list<ChangeClass> allowed) {
            for (ChangeClass c : classes)
                if (std::find(allowed.begin(), allowed.end(), c) == allowed.end()) return false;
            return true;
        };
        using C = ChangeClass;
        const bool no_hs = !classes.count(C::OrderedHorizontalSwap) && !classes.count(C::UnorderedHorizontalSwap);
        const double node_bound = (tf.size() + tg.size()) * 2 * cfg.eps;
        const Bdt bf = build_bdt(tf, persistence_branch_decomposition(tf));
        const Bdt bg = build_bdt(tg, persistence_branch_decomposition(tg));
        const double bdt_bound = (bf.size() + bg.size()) * 2 * cfg.eps;
        for (Metric m : cfg.metrics) {
            bool applies = false;
            double bound = node_bound;
            switch (m) {
            case Metric::E: applies = true; break;
            case Metric::P: applies = no_hs; break;
            case Metric::G: applies = !classes.count(C::EdgeSplit); break;
            case Metric::L: applies = only({C::SimpleChange, C::VerticalSwap}); break;
            case Metric::W:
            case Metric::X:
                applies = only({C::SimpleChange, C::EdgeSplit});
                bound = bdt_bound;
                break;
            default: break;
            }
            FiniteStats& st = rep.stats[m];
            if (!applies) {
                ++st.skipped;
                continue;
            }
            ++st.checked;
            double d = distance(m, tf, tg, cfg.guards);
            if (d <= bound + kTol) {
                ++st.passes;
            } else if (rep.failures.size() < 50) {
                rep.failures.push_back(Witness{trial, m, C::SimpleChange, f, g, d, bound});
            }
        }

        // a uniform shift leaves every edge length alone
        std::vector<double> shifted = f.values;
        for (double& x : shifted) x += cfg.eps;
        ScalarField fs = validate_field(f.domain, shifted);
        ++rep.shift_checks;
        if (delta_E(tf, build_merge_tree(fs), cfg.guards) <= kTol) ++rep.shift_zero;
    }
    return rep;
}

} // namespace mts
