#include "mtstab/editcore.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <sstream>

#include "mtstab/common.hpp"

namespace mts {

double CostModel::relabel(const Label& l1, const Label& l2) const {
    if (kind == CostKind::AbsDiff) {
        if (l1.blank || l2.blank) return (l1.blank && l2.blank) ? 0.0 : kInf;
        return std::abs(l1.a - l2.a);
    }
    return std::hypot(l1.a - l2.a, l1.b - l2.b);
}

double CostModel::remove(const Label& l) const {
    if (kind == CostKind::AbsDiff) return l.blank ? kInf : std::abs(l.a);
    return std::abs(l.a - l.b) / std::sqrt(2.0);
}

CostModel cost_for(LabelScheme scheme) {
    switch (scheme) {
    case LabelScheme::EdgeLength:
    case LabelScheme::NodeDistToParent: return CostModel{CostKind::AbsDiff};
    default: return CostModel{CostKind::Wasserstein};
    }
}

double mapping_cost(const LabeledTree& t1, const LabeledTree& t2, const EditMapping& m,
                    const CostModel& cost) {
    std::vector<char> m1(t1.size(), 0), m2(t2.size(), 0);
    double total = 0.0;
    for (auto [v, w] : m.pairs) {
        m1[v] = m2[w] = 1;
        total += cost.relabel(t1.label[v], t2.label[w]);
    }
    for (int v = 0; v < t1.size(); ++v)
        if (!m1[v]) total += cost.remove(t1.label[v]);
    for (int w = 0; w < t2.size(); ++w)
        if (!m2[w]) total += cost.remove(t2.label[w]);
    return total;
}

namespace {

std::vector<std::vector<int>> lca_matrix(const LabeledTree& t) {
    const int n = t.size();
    auto anc = ancestor_matrix(t.parent, t.root);
    auto dep = depths(t.parent, t.children, t.root);
    std::vector<std::vector<int>> lca(n, std::vector<int>(n, -1));
    for (int a = 0; a < n; ++a)
        for (int b = 0; b < n; ++b)
            for (int u = 0; u < n; ++u)
                if (anc[u][a] && anc[u][b] && (lca[a][b] < 0 || dep[u] > dep[lca[a][b]])) lca[a][b] = u;
    return lca;
}

// Pairwise constraint checks shared by the validator and the search.
class PairRules {
public:
    PairRules(const LabeledTree& t1, const LabeledTree& t2, Constraint c)
        : t1_(t1), t2_(t2), c_(c), anc1_(ancestor_matrix(t1.parent, t1.root)),
          anc2_(ancestor_matrix(t2.parent, t2.root)) {
        if (c == Constraint::ZhangConstrained) {
            lca1_ = lca_matrix(t1);
            lca2_ = lca_matrix(t2);
        }
        ordered_ = t1.ordered() && t2.ordered();
    }

    // Is (v, w) compatible with every pair already in `m`?
    bool compatible(int v, int w, const std::vector<std::pair<int, int>>& m) const {
        for (auto [a, b] : m) {
            if (a == v || b == w) return false;
            if (c_ != Constraint::Selkow) {
                if (anc1_[a][v] != anc2_[b][w] || anc1_[v][a] != anc2_[w][b]) return false;
            }
            if (ordered_ && t1_.parent[a] == t1_.parent[v] && t2_.parent[b] == t2_.parent[w] &&
                a != v) {
                int d1 = t1_.rank[v] - t1_.rank[a];
                int d2 = t2_.rank[w] - t2_.rank[b];
                if ((d1 < 0 && d2 > 0) || (d1 > 0 && d2 < 0)) return false;
            }
        }
        if (c_ == Constraint::ZhangConstrained) {
            auto sep1 = [&](int x, int y, int z) {
                int l = lca1_[x][y];
                return !anc1_[l][z] && !anc1_[z][l];
            };
            auto sep2 = [&](int x, int y, int z) {
                int l = lca2_[x][y];
                return !anc2_[l][z] && !anc2_[z][l];
            };
            for (auto [a, b] : m) {
                for (auto [c, d] : m) {
                    if (sep1(v, a, c) != sep2(w, b, d)) return false;
                    if (sep1(a, v, c) != sep2(b, w, d)) return false;
                    if (sep1(a, c, v) != sep2(b, d, w)) return false;
                }
            }
        }
        return true;
    }

    bool anc1(int a, int b) const { return anc1_[a][b]; }

private:
    const LabeledTree& t1_;
    const LabeledTree& t2_;
    Constraint c_;
    std::vector<std::vector<char>> anc1_, anc2_;
    std::vector<std::vector<int>> lca1_, lca2_;
    bool ordered_ = false;
};

void check_node_constraint(Constraint c) {
    if (c == Constraint::DeformFree || c == Constraint::DeformOneDegree)
        throw Error(ErrorKind::Parameter, "deformation constraints are edge based; use deform_brute_force");
}

} // namespace

bool mapping_valid(const LabeledTree& t1, const LabeledTree& t2, const EditMapping& m,
                   Constraint c) {
    check_node_constraint(c);
    std::vector<int> img1(t1.size(), -1), img2(t2.size(), -1);
    for (auto [v, w] : m.pairs) {
        if (v < 0 || v >= t1.size() || w < 0 || w >= t2.size()) return false;
        if (img1[v] >= 0 || img2[w] >= 0) return false;
        img1[v] = w;
        img2[w] = v;
    }
    PairRules rules(t1, t2, c);
    std::vector<std::pair<int, int>> acc;
    for (auto p : m.pairs) {
        if (!rules.compatible(p.first, p.second, acc)) return false;
        acc.push_back(p);
    }
    if (c == Constraint::Selkow) {
        if (t1.size() > 0 && t2.size() > 0 && img1[t1.root] != t2.root) return false;
        for (auto [v, w] : m.pairs) {
            if (v == t1.root) continue;
            if (img1[t1.parent[v]] != t2.parent[w]) return false;
        }
    }
    return true;
}

MappingResult brute_force_distance(const LabeledTree& t1, const LabeledTree& t2, Constraint c,
                                   const CostModel& cost, int guard) {
    check_node_constraint(c);
    const int n1 = t1.size(), n2 = t2.size();
    if (n1 > guard || n2 > guard) {
        std::ostringstream os;
        os << "brute force on " << std::max(n1, n2) << " nodes exceeds guard " << guard;
        throw Error(ErrorKind::Guard, os.str());
    }
    std::vector<std::vector<double>> rel(n1, std::vector<double>(n2));
    std::vector<double> del(n1), ins(n2);
    for (int v = 0; v < n1; ++v) {
        del[v] = cost.remove(t1.label[v]);
        for (int w = 0; w < n2; ++w) rel[v][w] = cost.relabel(t1.label[v], t2.label[w]);
    }
    for (int w = 0; w < n2; ++w) ins[w] = cost.remove(t2.label[w]);

    const std::vector<int> order = preorder(t1.children, t1.root);
    PairRules rules(t1, t2, c);
    std::vector<int> img(n1, -1);
    std::vector<char> used(n2, 0);
    std::vector<std::pair<int, int>> cur;
    double best = kInf;
    std::vector<std::pair<int, int>> best_pairs;
    bool found = false;

    auto lower_bound = [&](std::size_t i) {
        double lb = 0.0;
        for (std::size_t k = i; k < order.size(); ++k) {
            int v = order[k];
            double b = del[v];
            for (int w = 0; w < n2; ++w)
                if (!used[w]) b = std::min(b, rel[v][w] / 2);
            lb += b;
        }
        for (int w = 0; w < n2; ++w) {
            if (used[w]) continue;
            double b = ins[w];
            for (std::size_t k = i; k < order.size(); ++k) b = std::min(b, rel[order[k]][w] / 2);
            lb += b;
        }
        return lb;
    };

    std::function<void(std::size_t, double)> rec = [&](std::size_t i, double acc) {
        if (acc + lower_bound(i) >= best - kTol && found) return;
        if (i == order.size()) {
            double total = acc;
            for (int w = 0; w < n2; ++w)
                if (!used[w]) total += ins[w];
            if (!found || total < best - kTol) {
                best = total;
                best_pairs = cur;
                found = true;
            }
            return;
        }
        int v = order[i];
        std::vector<int> cand;
        bool allow_unmapped = true;
        if (c == Constraint::Selkow) {
            if (v == t1.root) {
                if (n2 > 0) cand.push_back(t2.root);
                allow_unmapped = n2 == 0;
            } else if (img[t1.parent[v]] >= 0) {
                cand = t2.children[img[t1.parent[v]]];
                std::sort(cand.begin(), cand.end());
            }
        } else {
            for (int w = 0; w < n2; ++w) cand.push_back(w);
        }
        for (int w : cand) {
            if (used[w] || !rules.compatible(v, w, cur)) continue;
            if (std::isinf(rel[v][w])) continue;
            img[v] = w;
            used[w] = 1;
            cur.push_back({v, w});
            rec(i + 1, acc + rel[v][w]);
            cur.pop_back();
            used[w] = 0;
            img[v] = -1;
        }
        if (allow_unmapped && !std::isinf(del[v])) rec(i + 1, acc + del[v]);
    };
    rec(0, 0.0);

    MappingResult r;
    r.cost = found ? best : kInf;
    r.mapping.pairs = best_pairs;
    std::sort(r.mapping.pairs.begin(), r.mapping.pairs.end());
    return r;
}

double EditSequence::cost() const {
    double s = 0.0;
    for (const auto& op : ops) s += op.cost;
    return s;
}

std::string op_kind_name(EditOp::Kind k) {
    switch (k) {
    case EditOp::Kind::Delete: return "delete";
    case EditOp::Kind::Relabel: return "relabel";
    case EditOp::Kind::Insert: return "insert";
    }
    return "?";
}

namespace {

struct WorkNode {
    int parent = -1;
    std::vector<int> children;
    Label label;
    int rank = 0;
};

// Mutable forest keyed by stable ids.
struct WorkForest {
    std::map<int, WorkNode> nodes;
    std::vector<int> roots;

    std::vector<int>& kids(int p) { return p < 0 ? roots : nodes.at(p).children; }

    static WorkForest from(const LabeledTree& t) {
        WorkForest f;
        for (int v = 0; v < t.size(); ++v)
            f.nodes[v] = WorkNode{t.parent[v], t.children[v], t.label[v], t.rank[v]};
        if (t.root >= 0) f.roots.push_back(t.root);
        return f;
    }

    void fail(std::size_t step, const std::string& why) const {
        std::ostringstream os;
        os << "step " << step << ": " << why;
        throw Error(ErrorKind::Validation, os.str());
    }

    void apply(const EditOp& op, std::size_t step) {
        switch (op.kind) {
        case EditOp::Kind::Delete: {
            auto it = nodes.find(op.node);
            if (it == nodes.end()) fail(step, "delete of missing node " + std::to_string(op.node));
            WorkNode n = it->second;
            auto& sib = kids(n.parent);
            auto pos = std::find(sib.begin(), sib.end(), op.node);
            pos = sib.erase(pos);
            sib.insert(pos, n.children.begin(), n.children.end());
            for (int c : n.children) nodes[c].parent = n.parent;
            nodes.erase(it);
            break;
        }
        case EditOp::Kind::Relabel: {
            auto it = nodes.find(op.node);
            if (it == nodes.end()) fail(step, "relabel of missing node " + std::to_string(op.node));
            it->second.label = op.to;
            it->second.rank = op.rank;
            break;
        }
        case EditOp::Kind::Insert: {
            if (nodes.count(op.node)) fail(step, "insert reuses id " + std::to_string(op.node));
            if (op.parent >= 0 && !nodes.count(op.parent))
                fail(step, "insert under missing node " + std::to_string(op.parent));
            auto& sib = kids(op.parent);
            for (int c : op.adopt)
                if (std::find(sib.begin(), sib.end(), c) == sib.end())
                    fail(step, "adopted node " + std::to_string(c) + " is not a child of the parent");
            WorkNode n{op.parent, op.adopt, op.to, op.rank};
            for (int c : op.adopt) {
                sib.erase(std::find(sib.begin(), sib.end(), c));
                nodes[c].parent = op.node;
            }
            kids(op.parent).push_back(op.node);
            nodes[op.node] = n;
            break;
        }
        }
    }

    LabeledTree to_tree(LabelScheme scheme) const {
        if (roots.size() > 1) throw Error(ErrorKind::Validation, "sequence leaves a forest");
        LabeledTree t;
        t.scheme = scheme;
        std::map<int, int> idx;
        for (const auto& [id, n] : nodes) {
            idx[id] = static_cast<int>(idx.size());
            (void)n;
        }
        for (const auto& [id, n] : nodes) {
            t.parent.push_back(n.parent < 0 ? -1 : idx.at(n.parent));
            t.label.push_back(n.label);
            t.rank.push_back(n.rank);
            t.name.push_back(std::to_string(id));
        }
        t.root = children_from_parents(t.parent, t.children);
        return t;
    }
};

} // namespace

EditSequence mapping_to_sequence(const LabeledTree& t1, const LabeledTree& t2, const EditMapping& m,
                                 const CostModel& cost) {
    const int n1 = t1.size();
    std::vector<int> img1(t1.size(), -1), img2(t2.size(), -1);
    for (auto [v, w] : m.pairs) {
        if (v < 0 || v >= t1.size() || w < 0 || w >= t2.size() || img1[v] >= 0 || img2[w] >= 0)
            throw Error(ErrorKind::Validation, "inconsistent mapping");
        img1[v] = w;
        img2[w] = v;
    }
    EditSequence s;
    for (int v : postorder(t1.children, t1.root)) {
        if (img1[v] >= 0) continue;
        EditOp op;
        op.kind = EditOp::Kind::Delete;
        op.node = v;
        op.from = t1.label[v];
        op.cost = cost.remove(t1.label[v]);
        s.ops.push_back(op);
    }
    for (auto [v, w] : m.pairs) {
        const Label &a = t1.label[v], &b = t2.label[w];
        bool same = a.blank == b.blank && a.a == b.a && a.b == b.b;
        bool rank_moves = t1.ordered() && t1.rank[v] != t2.rank[w];
        if (same && !rank_moves) continue;
        EditOp op;
        op.kind = EditOp::Kind::Relabel;
        op.node = v;
        op.from = a;
        op.to = b;
        op.rank = t2.rank[w];
        op.cost = cost.relabel(a, b);
        s.ops.push_back(op);
    }

    // simulate so that inserts know the current children of their parent
    WorkForest f = WorkForest::from(t1);
    for (std::size_t i = 0; i < s.ops.size(); ++i) f.apply(s.ops[i], i + 1);
    auto anc2 = ancestor_matrix(t2.parent, t2.root);
    auto twin = [&](int id) { return id < n1 ? img1[id] : id - n1; };
    for (int w : preorder(t2.children, t2.root)) {
        if (img2[w] >= 0) continue;
        EditOp op;
        op.kind = EditOp::Kind::Insert;
        op.node = n1 + w;
        int pw = t2.parent[w];
        op.parent = pw < 0 ? -1 : (img2[pw] >= 0 ? img2[pw] : n1 + pw);
        for (int c : f.kids(op.parent))
            if (anc2[w][twin(c)]) op.adopt.push_back(c);
        op.to = t2.label[w];
        op.rank = t2.rank[w];
        op.cost = cost.remove(t2.label[w]);
        f.apply(op, s.ops.size() + 1);
        s.ops.push_back(op);
    }
    return s;
}

LabeledTree check_sequence(const LabeledTree& t1, const EditSequence& s) {
    WorkForest f = WorkForest::from(t1);
    for (std::size_t i = 0; i < s.ops.size(); ++i) f.apply(s.ops[i], i + 1);
    return f.to_tree(t1.scheme);
}

namespace {

bool same_label(const Label& a, const Label& b) {
    if (a.blank || b.blank) return a.blank == b.blank;
    return std::abs(a.a - b.a) <= kTol && std::abs(a.b - b.b) <= kTol;
}

} // namespace

bool equivalent(const LabeledTree& a, const LabeledTree& b) {
    if (a.size() != b.size()) return false;
    if (a.size() == 0) return true;
    const bool ordered = a.ordered() && b.ordered();
    std::vector<std::vector<signed char>> memo(a.size(), std::vector<signed char>(b.size(), -1));
    std::function<bool(int, int)> iso = [&](int u, int v) -> bool {
        signed char& m = memo[u][v];
        if (m >= 0) return m;
        const auto& cu = a.children[u];
        const auto& cv = b.children[v];
        if (!same_label(a.label[u], b.label[v]) || cu.size() != cv.size()) {
            m = 0;
            return false;
        }
        std::vector<int> img(cu.size(), -1);
        std::vector<char> used(cv.size(), 0);
        std::function<bool(std::size_t)> rec = [&](std::size_t i) -> bool {
            if (i == cu.size()) return true;
            for (std::size_t j = 0; j < cv.size(); ++j) {
                if (used[j] || !iso(cu[i], cv[j])) continue;
                bool ok = true;
                for (std::size_t k = 0; k < i && ok && ordered; ++k) {
                    int d1 = a.rank[cu[i]] - a.rank[cu[k]];
                    int d2 = b.rank[cv[j]] - b.rank[cv[img[k]]];
                    ok = (d1 > 0) == (d2 > 0) && (d1 < 0) == (d2 < 0);
                }
                if (!ok) continue;
                used[j] = 1;
                img[i] = static_cast<int>(j);
                if (rec(i + 1)) return true;
                used[j] = 0;
            }
            return false;
        };
        m = rec(0) ? 1 : 0;
        return m == 1;
    };
    return iso(a.root, b.root);
}

} // namespace mts
