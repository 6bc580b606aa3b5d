#include "mtstab/distances.hpp"

#include <algorithm>
#include <cctype>
#include <functional>
#include <map>
#include <sstream>
#include <tuple>

#include "mtstab/assignment.hpp"
#include "mtstab/common.hpp"
#include "mtstab/deform.hpp"

namespace mts {

const std::vector<Metric>& all_metrics() {
    static const std::vector<Metric> m{Metric::W, Metric::X, Metric::S, Metric::L,
                                       Metric::G, Metric::P, Metric::E, Metric::B};
    return m;
}

Metric parse_metric(const std::string& s) {
    if (s.size() == 1) {
        switch (std::tolower(static_cast<unsigned char>(s[0]))) {
        case 'w': return Metric::W;
        case 'x': return Metric::X;
        case 's': return Metric::S;
        case 'l': return Metric::L;
        case 'g': return Metric::G;
        case 'p': return Metric::P;
        case 'e': return Metric::E;
        case 'b': return Metric::B;
        default: break;
        }
    }
    throw Error(ErrorKind::Parameter, "unknown metric '" + s + "' (expected one of w x s l g p e b)");
}

char metric_letter(Metric m) { return "wxslgpeb"[static_cast<int>(m)]; }

std::string metric_name(Metric m) {
    return std::string("delta_") + static_cast<char>(std::toupper(metric_letter(m)));
}

namespace {

std::vector<double> subtree_removal(const LabeledTree& t, const CostModel& cost) {
    std::vector<double> s(t.size(), 0.0);
    for (int v : postorder(t.children, t.root)) {
        s[v] = cost.remove(t.label[v]);
        for (int c : t.children[v]) s[v] += s[c];
    }
    return s;
}

} // namespace

double selkow_dp(const LabeledTree& t1, const LabeledTree& t2, const CostModel& cost) {
    const auto del = subtree_removal(t1, cost);
    const auto ins = subtree_removal(t2, cost);
    std::vector<std::vector<double>> d(t1.size(), std::vector<double>(t2.size(), 0.0));
    const auto post1 = postorder(t1.children, t1.root);
    const auto post2 = postorder(t2.children, t2.root);
    for (int a : post1) {
        for (int b : post2) {
            const auto& ca = t1.children[a];
            const auto& cb = t2.children[b];
            std::vector<std::vector<double>> pair(ca.size(), std::vector<double>(cb.size()));
            std::vector<double> dr, dc;
            for (std::size_t i = 0; i < ca.size(); ++i) {
                dr.push_back(del[ca[i]]);
                for (std::size_t j = 0; j < cb.size(); ++j) pair[i][j] = d[ca[i]][cb[j]];
            }
            for (int c : cb) dc.push_back(ins[c]);
            d[a][b] = cost.relabel(t1.label[a], t2.label[b]) + match_with_gaps(pair, dr, dc).cost;
        }
    }
    return d[t1.root][t2.root];
}

namespace {

// Children of v grouped by rank, groups ascending.
std::vector<std::vector<int>> rank_groups(const LabeledTree& t, int v) {
    std::map<int, std::vector<int>> g;
    for (int c : t.children[v]) g[t.rank[c]].push_back(c);
    std::vector<std::vector<int>> out;
    for (auto& [r, m] : g) {
        (void)r;
        out.push_back(m);
    }
    return out;
}

} // namespace

double ordered_selkow_dp(const LabeledTree& t1, const LabeledTree& t2, const CostModel& cost) {
    const auto del = subtree_removal(t1, cost);
    const auto ins = subtree_removal(t2, cost);
    std::vector<std::vector<double>> d(t1.size(), std::vector<double>(t2.size(), 0.0));
    for (int a : postorder(t1.children, t1.root)) {
        const auto ga = rank_groups(t1, a);
        for (int b : postorder(t2.children, t2.root)) {
            const auto gb = rank_groups(t2, b);
            double rel = cost.relabel(t1.label[a], t2.label[b]);
            if (ga.empty() || gb.empty()) {
                double rest = 0.0;
                for (int c : t1.children[a]) rest += del[c];
                for (int c : t2.children[b]) rest += ins[c];
                d[a][b] = rel + rest;
                continue;
            }
            // matched children form a chain in (group of a) x (group of b); walk
            // that staircase with the used members of the current two groups
            const int p = static_cast<int>(ga.size()), q = static_cast<int>(gb.size());
            std::map<std::tuple<int, int, unsigned, unsigned>, double> memo;
            std::function<double(int, int, unsigned, unsigned)> go = [&](int i, int j, unsigned ua,
                                                                         unsigned ub) -> double {
                auto key = std::make_tuple(i, j, ua, ub);
                auto it = memo.find(key);
                if (it != memo.end()) return it->second;
                const auto& A = ga[i];
                const auto& B = gb[j];
                double rest_a = 0.0, rest_b = 0.0;
                for (std::size_t k = 0; k < A.size(); ++k)
                    if (!((ua >> k) & 1u)) rest_a += del[A[k]];
                for (std::size_t k = 0; k < B.size(); ++k)
                    if (!((ub >> k) & 1u)) rest_b += ins[B[k]];
                double best;
                if (i + 1 == p && j + 1 == q) {
                    best = rest_a + rest_b;
                } else {
                    best = kInf;
                    if (i + 1 < p) best = std::min(best, rest_a + go(i + 1, j, 0u, ub));
                    if (j + 1 < q) best = std::min(best, rest_b + go(i, j + 1, ua, 0u));
                }
                for (std::size_t x = 0; x < A.size(); ++x) {
                    if ((ua >> x) & 1u) continue;
                    for (std::size_t y = 0; y < B.size(); ++y) {
                        if ((ub >> y) & 1u) continue;
                        best = std::min(best, d[A[x]][B[y]] + go(i, j, ua | (1u << x), ub | (1u << y)));
                    }
                }
                memo[key] = best;
                return best;
            };
            d[a][b] = rel + go(0, 0, 0u, 0u);
        }
    }
    return d[t1.root][t2.root];
}

LabeledTree bdt_labels(const MergeTree& t, bool ordered) {
    Bdt b = build_bdt(t, persistence_branch_decomposition(t));
    return label_for_scheme(b, ordered ? LabelScheme::OrderedBdtBirthDeath : LabelScheme::BdtBirthDeath);
}

double delta_W(const MergeTree& t1, const MergeTree& t2) {
    return selkow_dp(bdt_labels(t1, false), bdt_labels(t2, false), CostModel{CostKind::Wasserstein});
}

double delta_X(const MergeTree& t1, const MergeTree& t2) {
    return ordered_selkow_dp(bdt_labels(t1, true), bdt_labels(t2, true), CostModel{CostKind::Wasserstein});
}

double delta_S(const MergeTree& t1, const MergeTree& t2, const Guards& g) {
    return brute_force_distance(label_for_scheme(t1, LabelScheme::BranchLabelOnNodes),
                                label_for_scheme(t2, LabelScheme::BranchLabelOnNodes),
                                Constraint::ZhangConstrained, CostModel{CostKind::Wasserstein},
                                g.brute_nodes)
        .cost;
}

double delta_L(const MergeTree& t1, const MergeTree& t2) {
    return selkow_dp(label_for_scheme(t1, LabelScheme::NodeDistToParent),
                     label_for_scheme(t2, LabelScheme::NodeDistToParent), CostModel{CostKind::AbsDiff});
}

double delta_G(const MergeTree& t1, const MergeTree& t2, const Guards& g) {
    return brute_force_distance(label_for_scheme(t1, LabelScheme::NodeDistToParent),
                                label_for_scheme(t2, LabelScheme::NodeDistToParent), Constraint::Tai,
                                CostModel{CostKind::AbsDiff}, g.brute_nodes)
        .cost;
}

double delta_P(const MergeTree& t1, const MergeTree& t2, const Guards& g) {
    return deform_brute_force(t1, t2, true, g.deform_edges).cost;
}

double delta_E(const MergeTree& t1, const MergeTree& t2, const Guards& g) {
    return deform_brute_force(t1, t2, false, g.deform_edges).cost;
}

double delta_B(const MergeTree& t1, const MergeTree& t2, const Guards& g) {
    if (t1.edge_count() > g.branch_edges || t2.edge_count() > g.branch_edges) {
        std::ostringstream os;
        os << "branch mapping enumeration on " << std::max(t1.edge_count(), t2.edge_count())
           << " edges exceeds guard " << g.branch_edges;
        throw Error(ErrorKind::Guard, os.str());
    }
    const std::size_t limit = 1u << 16;
    auto labels = [](const MergeTree& t) {
        std::vector<LabeledTree> out;
        for (const auto& ch : all_continuation_choices(t, limit))
            out.push_back(label_for_scheme(build_bdt(t, decompose(t, ch)), LabelScheme::OrderedBdtBirthDeath));
        return out;
    };
    const auto l1 = labels(t1), l2 = labels(t2);
    const CostModel cost{CostKind::Wasserstein};
    double best = kInf;
    for (const auto& a : l1)
        for (const auto& b : l2) best = std::min(best, ordered_selkow_dp(a, b, cost));
    return best;
}

double distance(Metric m, const MergeTree& t1, const MergeTree& t2, const Guards& g) {
    switch (m) {
    case Metric::W: return delta_W(t1, t2);
    case Metric::X: return delta_X(t1, t2);
    case Metric::S: return delta_S(t1, t2, g);
    case Metric::L: return delta_L(t1, t2);
    case Metric::G: return delta_G(t1, t2, g);
    case Metric::P: return delta_P(t1, t2, g);
    case Metric::E: return delta_E(t1, t2, g);
    case Metric::B: return delta_B(t1, t2, g);
    }
    return kInf;
}

double compute(Metric m, const ScalarField& f1, const ScalarField& f2, const Guards& g) {
    return distance(m, build_merge_tree(f1), build_merge_tree(f2), g);
}

} // namespace mts
