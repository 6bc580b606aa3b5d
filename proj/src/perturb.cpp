#include "mtstab/perturb.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>
#include <set>
#include <sstream>

#include "mtstab/common.hpp"

namespace mts {

std::string class_name(ChangeClass c) {
    switch (c) {
    case ChangeClass::SimpleChange: return "SimpleChange";
    case ChangeClass::EdgeSplit: return "EdgeSplit";
    case ChangeClass::VerticalSwap: return "VerticalSwap";
    case ChangeClass::OrderedHorizontalSwap: return "OrderedHorizontalSwap";
    case ChangeClass::UnorderedHorizontalSwap: return "UnorderedHorizontalSwap";
    }
    return "?";
}

std::string class_short(ChangeClass c) {
    switch (c) {
    case ChangeClass::SimpleChange: return "SC";
    case ChangeClass::EdgeSplit: return "ES";
    case ChangeClass::VerticalSwap: return "VS";
    case ChangeClass::OrderedHorizontalSwap: return "OHS";
    case ChangeClass::UnorderedHorizontalSwap: return "UHS";
    }
    return "?";
}

bool is_horizontal(ChangeClass c) {
    return c == ChangeClass::OrderedHorizontalSwap || c == ChangeClass::UnorderedHorizontalSwap;
}

namespace {

void same_domain(const ScalarField& f, const ScalarField& g) {
    if (f.size() != g.size() || f.domain.edges != g.domain.edges)
        throw Error(ErrorKind::Validation, "fields live on different domains");
}

} // namespace

MinimalPerturbation check_minimal(const ScalarField& f, const ScalarField& g) {
    same_domain(f, g);
    MinimalPerturbation p;
    int changed = 0;
    for (int v = 0; v < f.size(); ++v) {
        if (f.values[v] != g.values[v]) {
            ++changed;
            p.vertex = v;
        }
    }
    if (changed > 1) {
        throw Error(ErrorKind::Validation,
                    "not a minimal perturbation: " + std::to_string(changed) + " vertices changed");
    }
    if (changed == 0) return p;
    const int x = p.vertex;
    p.old_value = f.values[x];
    p.new_value = g.values[x];
    p.extent = std::abs(p.new_value - p.old_value);
    p.up = p.new_value > p.old_value;
    auto rf = vertex_order(f), rg = vertex_order(g);
    std::vector<int> moved;
    for (int v = 0; v < f.size(); ++v)
        if (rf[v] != rg[v]) moved.push_back(v);
    if (moved.empty()) return p;
    if (moved.size() != 2)
        throw Error(ErrorKind::Validation, "not a minimal perturbation: vertex " + std::to_string(x) +
                                               " passes more than one vertex");
    int u = moved[0] == x ? moved[1] : moved[0];
    if (std::abs(rf[x] - rf[u]) != 1 || rf[x] != rg[u] || rf[u] != rg[x])
        throw Error(ErrorKind::Validation, "not a minimal perturbation: ranks do not swap");
    p.partner = u;
    return p;
}

ScalarField apply(const ScalarField& f, const MinimalPerturbation& p) {
    if (p.vertex < 0) return f;
    return apply_value_change(f, p.vertex, p.new_value);
}

std::vector<MinimalPerturbation> enumerate_minimal_perturbations(const ScalarField& f, int vertex,
                                                                 double margin) {
    if (vertex < 0 || vertex >= f.size())
        throw Error(ErrorKind::Validation, "unknown vertex " + std::to_string(vertex));
    std::vector<int> order(f.size());
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f.values[a] < f.values[b]; });
    const int r = static_cast<int>(std::find(order.begin(), order.end(), vertex) - order.begin());
    const int n = f.size();
    const double v = f.values[vertex];
    auto val = [&](int k) { return f.values[order[k]]; };
    const bool has_up = r + 1 < n, has_down = r > 0;

    auto make = [&](double nv, int partner) {
        MinimalPerturbation p;
        p.vertex = vertex;
        p.old_value = v;
        p.new_value = nv;
        p.extent = std::abs(nv - v);
        p.partner = partner;
        p.up = nv > v;
        return p;
    };

    std::vector<MinimalPerturbation> out;
    // stay inside the current gap
    if (has_up) out.push_back(make((v + val(r + 1)) / 2, -1));
    else out.push_back(make(v + (has_down ? (v - val(r - 1)) / 2 : 0.5), -1));
    if (has_down) out.push_back(make((v + val(r - 1)) / 2, -1));
    else out.push_back(make(v - (has_up ? (val(r + 1) - v) / 2 : 0.5), -1));
    // one transposition, never two
    if (has_up) {
        double next = val(r + 1);
        double room = r + 2 < n ? (val(r + 2) - next) / 2 : (next - v) / 2;
        double m = (margin > 0 && margin < 2 * room) ? margin : room;
        out.push_back(make(next + m, order[r + 1]));
    }
    if (has_down) {
        double prev = val(r - 1);
        double room = r - 2 >= 0 ? (prev - val(r - 2)) / 2 : (v - prev) / 2;
        double m = (margin > 0 && margin < 2 * room) ? margin : room;
        out.push_back(make(prev - m, order[r - 1]));
    }
    return out;
}

namespace {

struct Trees {
    MergeTree t;
    Bdt b;
};

Trees trees_of(const ScalarField& f) {
    Trees r;
    r.t = build_merge_tree(f);
    r.b = build_bdt(r.t, persistence_branch_decomposition(r.t));
    return r;
}

bool includes(const ValuedTree& a, const ValuedTree& b, bool ordered, const MatchPolicy& p) {
    return tree_included_up_to_iso(a, b, ordered, p);
}

} // namespace

Classification classify(const ScalarField& f, const ScalarField& g) {
    Classification c;
    c.move = check_minimal(f, g);
    Trees tf = trees_of(f), tg = trees_of(g);
    c.nodes_f = tf.t.size();
    c.nodes_g = tg.t.size();
    c.branches_f = tf.b.size();
    c.branches_g = tg.b.size();

    MatchPolicy tree_policy{c.move.vertex, c.move.partner, -1, true};
    MatchPolicy bdt_policy{c.move.vertex, c.move.partner, 0};
    const ValuedTree vf = valued(tf.t), vg = valued(tg.t);
    const ValuedTree bf = valued(tf.b), bg = valued(tg.b);
    c.tree_f_in_g = includes(vf, vg, false, tree_policy);
    c.tree_g_in_f = includes(vg, vf, false, tree_policy);
    c.obdt_f_in_g = includes(bf, bg, true, bdt_policy);
    c.obdt_g_in_f = includes(bg, bf, true, bdt_policy);
    c.bdt_f_in_g = includes(bf, bg, false, bdt_policy);
    c.bdt_g_in_f = includes(bg, bf, false, bdt_policy);

    const bool tree = c.tree_f_in_g || c.tree_g_in_f;
    const bool obdt = c.obdt_f_in_g || c.obdt_g_in_f;
    const bool bdt = c.bdt_f_in_g || c.bdt_g_in_f;
    if (tree && obdt) c.cls = ChangeClass::SimpleChange;
    else if (tree) c.cls = ChangeClass::VerticalSwap;
    else if (obdt) c.cls = ChangeClass::EdgeSplit;
    else if (bdt) c.cls = ChangeClass::OrderedHorizontalSwap;
    else c.cls = ChangeClass::UnorderedHorizontalSwap;
    return c;
}

ChangeClass classify_change(const ScalarField& f, const ScalarField& g) { return classify(f, g).cls; }

std::string shape_violation(const ScalarField& f, const ScalarField& g, ChangeClass c) {
    MinimalPerturbation mp = check_minimal(f, g);
    Trees tf = trees_of(f), tg = trees_of(g);
    const int dv = std::abs(tf.t.size() - tg.t.size());
    const int db = std::abs(tf.b.size() - tg.b.size());
    std::ostringstream os;
    switch (c) {
    case ChangeClass::SimpleChange:
        if (!((dv == 0 && db == 0) || (dv == 1 && db == 1)))
            os << "simple change with node delta " << dv << " and branch delta " << db;
        break;
    case ChangeClass::EdgeSplit: {
        if (dv != 2 || db != 1) {
            os << "edge split with node delta " << dv << " and branch delta " << db;
            break;
        }
        const bool f_small = tf.b.size() < tg.b.size();
        MatchPolicy p{mp.vertex, mp.partner, 0};
        bool inc = f_small ? tree_included_up_to_iso(valued(tf.b), valued(tg.b), true, p)
                           : tree_included_up_to_iso(valued(tg.b), valued(tf.b), true, p);
        if (!inc) os << "edge split where the smaller ordered BDT is not included in the larger";
        break;
    }
    case ChangeClass::VerticalSwap: {
        std::set<int> vf(tf.t.vertex.begin(), tf.t.vertex.end()), vg(tg.t.vertex.begin(), tg.t.vertex.end());
        auto edges = [](const MergeTree& t) {
            std::set<std::pair<int, int>> e;
            for (int v = 0; v < t.size(); ++v)
                if (v != t.root) e.insert({t.vertex[v], t.vertex[t.parent[v]]});
            return e;
        };
        if (vf != vg || edges(tf.t) != edges(tg.t)) {
            os << "vertical swap changes the tree structure";
            break;
        }
        int differing = 0;
        for (int v = 0; v < tf.t.size(); ++v) {
            int w = static_cast<int>(std::find(tg.t.vertex.begin(), tg.t.vertex.end(), tf.t.vertex[v]) -
                                     tg.t.vertex.begin());
            if (v != tf.t.root && std::abs(tf.t.edge_length(v) - tg.t.edge_length(w)) > kTol) ++differing;
        }
        if (differing != 1) os << "vertical swap with " << differing << " differing edge labels";
        break;
    }
    case ChangeClass::OrderedHorizontalSwap:
    case ChangeClass::UnorderedHorizontalSwap:
        if (dv > 1 || db != 0) os << "horizontal swap with node delta " << dv << " and branch delta " << db;
        break;
    }
    return os.str();
}

std::vector<std::string> observation_violations(const ScalarField& f0, const ScalarField& g0) {
    MinimalPerturbation mp = check_minimal(f0, g0);
    std::vector<std::string> out;
    if (mp.vertex < 0) return out;
    // read every move as upward
    const ScalarField& f = mp.up ? f0 : g0;
    const ScalarField& g = mp.up ? g0 : f0;
    const MergeTree af = build_augmented(f), ag = build_augmented(g);
    auto edges = [](const MergeTree& t) {
        std::set<std::pair<int, int>> e;
        for (int v = 0; v < t.size(); ++v)
            if (t.parent[v] >= 0) e.insert({v, t.parent[v]});
        return e;
    };
    const auto ef = edges(af), eg = edges(ag);
    const int x = mp.vertex, y = mp.partner;
    if (y < 0 || !ef.count({y, x})) {
        if (ef != eg) out.push_back("edges changed although the passed vertex is not a child of x");
        return out;
    }
    for (auto [u, v] : ef)
        if (u != x && u != y && v != x && v != y && !eg.count({u, v}))
            out.push_back("edge away from x and y disappeared");
    if (!eg.count({x, y})) out.push_back("edge between x and y did not flip");
    if (af.parent[x] >= 0 && !eg.count({y, af.parent[x]})) out.push_back("y did not inherit the parent of x");
    for (int z : af.children[x])
        if (z != y && !eg.count({z, x})) out.push_back("child of x left x");
    for (int z : af.children[y])
        if (!eg.count({z, x}) && !eg.count({z, y})) out.push_back("child of y attached elsewhere");
    return out;
}

namespace {

struct Spec {
    std::string name;
    std::vector<std::string> vertices;
    std::vector<std::pair<std::string, std::string>> edges;
    std::vector<double> values;
    std::string moved;
    double new_value;
    ChangeClass expected;
};

Scenario build(const Spec& s) {
    std::map<std::string, int> id;
    for (std::size_t i = 0; i < s.vertices.size(); ++i) id[s.vertices[i]] = static_cast<int>(i);
    std::vector<std::pair<int, int>> e;
    for (auto& [a, b] : s.edges) e.push_back({id.at(a), id.at(b)});
    ScalarField f = validate_field(make_domain(static_cast<int>(s.vertices.size()), e), s.values);
    ScalarField g = apply_value_change(f, id.at(s.moved), s.new_value);
    return Scenario{s.name, f, g, s.expected};
}

} // namespace

std::vector<Scenario> scenario_suite() {
    using C = ChangeClass;
    const C SC = C::SimpleChange, ES = C::EdgeSplit, VS = C::VerticalSwap;
    const C OHS = C::OrderedHorizontalSwap, UHS = C::UnorderedHorizontalSwap;
    const std::vector<std::pair<std::string, std::string>> fork{{"a", "s"}, {"s", "m1"}, {"s", "m2"}};
    const std::vector<std::pair<std::string, std::string>> y_fork{
        {"a", "x"}, {"x", "y"}, {"y", "m1"}, {"y", "m2"}};
    auto plus = [](std::vector<std::pair<std::string, std::string>> e,
                   std::vector<std::pair<std::string, std::string>> more) {
        e.insert(e.end(), more.begin(), more.end());
        return e;
    };

    std::vector<Spec> specs = {
        {"regular vertex moves without passing", {"a", "r", "m"}, {{"a", "r"}, {"r", "m"}}, {0, 1, 3}, "r", 1.5, SC},
        {"minimum moves without passing", {"a", "r", "m"}, {{"a", "r"}, {"r", "m"}}, {0, 1, 3}, "a", -1, SC},
        {"saddle moves without passing", {"a", "s", "m1", "m2"}, fork, {0, 1, 5, 4}, "s", 2, SC},
        {"maximum moves without passing", {"a", "s", "m1", "m2"}, fork, {0, 1, 5, 4}, "m2", 4.5, SC},
        {"regular vertex passes a non-neighbour",
         {"a", "s", "r1", "m1", "r2", "m2"},
         {{"a", "s"}, {"s", "r1"}, {"r1", "m1"}, {"s", "r2"}, {"r2", "m2"}},
         {0, 1, 2, 10, 2.5, 9}, "r1", 2.75, SC},
        {"saddle passes a non-neighbour",
         {"a", "p", "x", "m1", "m2", "y", "m3"},
         {{"a", "p"}, {"p", "x"}, {"x", "m1"}, {"x", "m2"}, {"p", "y"}, {"y", "m3"}},
         {0, 0.5, 1, 10, 9, 1.2, 8}, "x", 1.3, SC},
        {"maximum passes the maximum of its parent branch",
         {"a", "s", "d", "e"}, {{"a", "s"}, {"s", "d"}, {"s", "e"}}, {0, 1, 10, 9.9}, "e", 10.05, VS},
        {"maximum passes an unrelated maximum",
         {"a", "s", "m2", "s2", "m1", "m3"},
         {{"a", "s"}, {"s", "m2"}, {"s", "s2"}, {"s2", "m1"}, {"s2", "m3"}},
         {0, 1, 5, 2, 10, 5.5}, "m2", 5.75, SC},
        {"minimum passes its neighbour",
         {"a", "r", "m"}, {{"a", "r"}, {"r", "m"}, {"a", "m"}}, {0, 1, 5}, "a", 1.5, SC},
        {"regular passes regular neighbour, child stays",
         {"a", "x", "y", "m"}, {{"a", "x"}, {"x", "y"}, {"y", "m"}}, {0, 1, 2, 5}, "x", 2.5, ES},
        {"regular passes regular neighbour, child moves",
         {"a", "x", "y", "m"}, {{"a", "x"}, {"x", "y"}, {"y", "m"}, {"x", "m"}}, {0, 1, 2, 5}, "x", 2.5, SC},
        {"regular passes maximum neighbour", {"a", "x", "y"}, {{"a", "x"}, {"x", "y"}}, {0, 1, 2}, "x", 2.5, SC},
        {"regular passes saddle neighbour, all children move",
         {"a", "x", "y", "m1", "m2"}, plus(y_fork, {{"x", "m1"}, {"x", "m2"}}), {0, 1, 2, 5, 6}, "x", 2.5, SC},
        {"regular passes saddle neighbour, no child moves",
         {"a", "x", "y", "m1", "m2"}, y_fork, {0, 1, 2, 5, 6}, "x", 2.5, SC},
        {"regular passes saddle neighbour, one child moves",
         {"a", "x", "y", "m1", "m2"}, plus(y_fork, {{"x", "m1"}}), {0, 1, 2, 5, 6}, "x", 2.5, SC},
        {"regular passes saddle neighbour, some children move, order kept",
         {"a", "x", "y", "m1", "m2", "m3"}, plus(y_fork, {{"y", "m3"}, {"x", "m1"}, {"x", "m2"}}),
         {0, 1, 2, 7, 6, 5}, "x", 2.5, OHS},
        {"regular passes saddle neighbour, some children move, nesting changes",
         {"a", "x", "y", "m1", "m2", "m3"}, plus(y_fork, {{"y", "m3"}, {"x", "m1"}, {"x", "m2"}}),
         {0, 1, 2, 5, 6, 7}, "x", 2.5, UHS},
        {"saddle passes regular neighbour, child stays, three children",
         {"a", "x", "y", "m1", "m2", "m3"},
         {{"a", "x"}, {"x", "y"}, {"y", "m1"}, {"x", "m2"}, {"x", "m3"}}, {0, 1, 2, 5, 6, 7}, "x", 2.5, OHS},
        {"saddle passes regular neighbour, child stays, two children",
         {"a", "x", "y", "m1", "m2"}, {{"a", "x"}, {"x", "y"}, {"y", "m1"}, {"x", "m2"}}, {0, 1, 2, 5, 6}, "x", 2.5, SC},
        {"saddle passes regular neighbour, child moves",
         {"a", "x", "y", "m1", "m2"}, {{"a", "x"}, {"x", "y"}, {"y", "m1"}, {"x", "m2"}, {"x", "m1"}},
         {0, 1, 2, 5, 6}, "x", 2.5, SC},
        {"saddle passes maximum neighbour, two children remain",
         {"a", "x", "y", "m2", "m3"}, {{"a", "x"}, {"x", "y"}, {"x", "m2"}, {"x", "m3"}}, {0, 1, 1.5, 6, 7}, "x", 1.75, SC},
        {"saddle passes maximum neighbour, one child remains",
         {"a", "x", "y", "m2"}, {{"a", "x"}, {"x", "y"}, {"x", "m2"}}, {0, 1, 1.5, 6}, "x", 1.75, ES},
        {"saddle passes saddle neighbour, all children move, order kept",
         {"a", "x", "y", "m1", "m2", "m3"}, plus(y_fork, {{"x", "m1"}, {"x", "m2"}, {"x", "m3"}}),
         {0, 1, 2, 7, 6, 5}, "x", 2.5, OHS},
        {"saddle passes saddle neighbour, all children move, nesting changes",
         {"a", "x", "y", "m1", "m2", "m3"}, plus(y_fork, {{"x", "m1"}, {"x", "m2"}, {"x", "m3"}}),
         {0, 1, 2, 5, 6, 7}, "x", 2.5, UHS},
        {"saddle passes saddle neighbour, some children stay",
         {"a", "x", "y", "m1", "m2", "m3"}, plus(y_fork, {{"x", "m1"}, {"x", "m3"}}),
         {0, 1, 2, 5, 6, 7}, "x", 2.5, UHS},
        {"saddle passes saddle neighbour, all children stay, nesting changes",
         {"a", "x", "y", "m1", "m2", "m3"}, plus(y_fork, {{"x", "m3"}}), {0, 1, 2, 5, 6, 7}, "x", 2.5, UHS},
        {"saddle passes saddle neighbour, all children stay, order kept",
         {"a", "x", "y", "m1", "m2", "m3"}, plus(y_fork, {{"x", "m3"}}), {0, 1, 2, 7, 6, 5}, "x", 2.5, OHS},
        {"maximum passes a regular non-neighbour",
         {"a", "s", "m2", "r1", "m1"}, {{"a", "s"}, {"s", "m2"}, {"s", "r1"}, {"r1", "m1"}},
         {0, 1, 5, 5.5, 10}, "m2", 5.75, SC},
        {"edge split counterexample field",
         {"A", "B", "C", "D", "E", "F"}, {{"A", "B"}, {"B", "C"}, {"B", "E"}, {"E", "D"}, {"E", "F"}},
         {0, 10, 30, 30.5, 20, 19.9}, "F", 20.1, ES},
        {"horizontal swap counterexample field",
         {"a", "b", "c", "d", "e", "f"}, {{"a", "b"}, {"b", "c"}, {"b", "f"}, {"f", "e"}, {"e", "d"}},
         {0, 9.9, 40, 30, 10, 20}, "b", 10.1, UHS},
        {"vertical swap counterexample field",
         {"a", "b", "c", "d", "e", "f"}, {{"a", "b"}, {"b", "d"}, {"b", "c"}, {"c", "e"}, {"c", "f"}},
         {0, 10, 20, 40.1, 40, 30}, "d", 39.9, VS},
    };
    std::vector<Scenario> out;
    for (const Spec& s : specs) out.push_back(build(s));
    return out;
}

PerturbationSequence decompose_perturbation(const ScalarField& f, const ScalarField& g) {
    same_domain(f, g);
    PerturbationSequence seq;
    seq.fields.push_back(f);
    ScalarField cur = f;
    const int n = f.size();
    auto step = [&](int v, double nv) {
        MinimalPerturbation p;
        p.vertex = v;
        p.old_value = cur.values[v];
        p.new_value = nv;
        p.extent = std::abs(nv - p.old_value);
        p.up = nv > p.old_value;
        ScalarField next = apply_value_change(cur, v, nv);
        p.partner = check_minimal(cur, next).partner;
        seq.steps.push_back(p);
        seq.fields.push_back(next);
        cur = std::move(next);
    };

    // bubble sort towards the target order; each inverted pair crosses once
    auto target_before = [&](int a, int b) { return g.values[a] < g.values[b]; };
    for (;;) {
        std::vector<int> order(n);
        std::iota(order.begin(), order.end(), 0);
        std::sort(order.begin(), order.end(), [&](int a, int b) { return cur.values[a] < cur.values[b]; });
        int i = 0;
        while (i + 1 < n && !target_before(order[i + 1], order[i])) ++i;
        if (i + 1 >= n) break;
        int lo = order[i], hi = order[i + 1];
        if (g.values[lo] > cur.values[lo]) {
            double above = i + 2 < n ? cur.values[order[i + 2]]
                                     : cur.values[hi] + (cur.values[hi] - cur.values[lo]);
            step(lo, (cur.values[hi] + above) / 2);
        } else {
            double below = i - 1 >= 0 ? cur.values[order[i - 1]]
                                      : cur.values[lo] - (cur.values[hi] - cur.values[lo]);
            step(hi, (cur.values[lo] + below) / 2);
        }
    }

    // orders agree now; move onto the targets without crossing anything
    std::vector<int> ups, downs;
    for (int v = 0; v < n; ++v) {
        if (g.values[v] > cur.values[v]) ups.push_back(v);
        else if (g.values[v] < cur.values[v]) downs.push_back(v);
    }
    std::sort(ups.begin(), ups.end(), [&](int a, int b) { return g.values[a] > g.values[b]; });
    std::sort(downs.begin(), downs.end(), [&](int a, int b) { return g.values[a] < g.values[b]; });
    for (int v : ups) step(v, g.values[v]);
    for (int v : downs) step(v, g.values[v]);
    return seq;
}

} // namespace mts
