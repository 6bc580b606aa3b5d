#include "mtstab/mergetree.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>
#include <set>
#include <sstream>

#include "mtstab/common.hpp"

namespace mts {

int MergeTree::degree() const {
    std::size_t d = 0;
    for (const auto& c : children) d = std::max(d, c.size());
    return static_cast<int>(d);
}

namespace {

struct UnionFind {
    std::vector<int> up;
    explicit UnionFind(int n) : up(n) { std::iota(up.begin(), up.end(), 0); }
    int find(int v) {
        while (up[v] != v) v = up[v] = up[up[v]];
        return v;
    }
};

} // namespace

MergeTree build_augmented(const ScalarField& f) {
    const int n = f.size();
    std::vector<int> order(n);
    std::iota(order.begin(), order.end(), 0);
    std::sort(order.begin(), order.end(), [&](int a, int b) { return f.values[a] > f.values[b]; });

    MergeTree t;
    t.vertex.resize(n);
    std::iota(t.vertex.begin(), t.vertex.end(), 0);
    t.value = f.values;
    t.parent.assign(n, -1);
    t.name.resize(n);
    for (int v = 0; v < n; ++v) t.name[v] = std::to_string(v);

    UnionFind uf(n);
    std::vector<int> lowest(n);
    std::vector<char> done(n, 0);
    for (int x : order) {
        done[x] = 1;
        lowest[x] = x;
        for (int u : f.domain.adjacency[x]) {
            if (!done[u]) continue;
            int r = uf.find(u);
            int rx = uf.find(x);
            if (r == rx) continue;
            t.parent[lowest[r]] = x;
            uf.up[r] = rx;
            lowest[rx] = x;
        }
    }
    t.root = children_from_parents(t.parent, t.children);
    return t;
}

MergeTree prune_to_abstract(const MergeTree& aug) {
    const int n = aug.size();
    std::vector<int> keep;
    std::vector<int> idx(n, -1);
    for (int v = 0; v < n; ++v) {
        if (v == aug.root || aug.children[v].size() != 1) {
            idx[v] = static_cast<int>(keep.size());
            keep.push_back(v);
        }
    }
    // keep is sorted by node index; for augmented trees that is vertex id
    MergeTree t;
    for (int v : keep) {
        t.vertex.push_back(aug.vertex[v]);
        t.value.push_back(aug.value[v]);
        t.name.push_back(aug.name.empty() ? std::to_string(aug.vertex[v]) : aug.name[v]);
        int p = aug.parent[v];
        while (p >= 0 && idx[p] < 0) p = aug.parent[p];
        t.parent.push_back(p < 0 ? -1 : idx[p]);
    }
    t.root = children_from_parents(t.parent, t.children);
    check_abstract(t);
    return t;
}

MergeTree build_merge_tree(const ScalarField& f) { return prune_to_abstract(build_augmented(f)); }

void check_abstract(const MergeTree& t) {
    if (t.size() < 2) throw Error(ErrorKind::Validation, "merge tree needs at least two nodes");
    if (t.children[t.root].size() != 1) {
        std::ostringstream os;
        os << "root " << t.name[t.root] << " has " << t.children[t.root].size()
           << " children (expected 1); the global minimum separates the domain";
        throw Error(ErrorKind::Validation, os.str());
    }
    for (int v = 0; v < t.size(); ++v) {
        if (v != t.root && t.children[v].size() == 1)
            throw Error(ErrorKind::Validation, "regular node " + t.name[v] + " in abstract tree");
    }
}

MergeTree make_tree(const std::vector<double>& values, const std::vector<int>& parent,
                    const std::vector<std::string>& names) {
    if (values.size() != parent.size())
        throw Error(ErrorKind::Validation, "values and parents differ in length");
    MergeTree t;
    t.value = values;
    t.parent = parent;
    t.vertex.resize(values.size());
    std::iota(t.vertex.begin(), t.vertex.end(), 0);
    t.name = names;
    if (t.name.empty())
        for (std::size_t i = 0; i < values.size(); ++i) t.name.push_back(std::to_string(i));
    if (t.name.size() != values.size()) throw Error(ErrorKind::Validation, "wrong number of names");
    t.root = children_from_parents(t.parent, t.children);
    for (int v = 0; v < t.size(); ++v) {
        if (v != t.root && !(t.value[v] > t.value[t.parent[v]]))
            throw Error(ErrorKind::Validation, "node " + t.name[v] + " is not above its parent");
    }
    check_abstract(t);
    return t;
}

ContinuationChoice elder_choice(const MergeTree& t) {
    const int n = t.size();
    std::vector<int> best(n);  // node holding the subtree maximum
    for (int v : postorder(t.children, t.root)) {
        best[v] = v;
        for (int c : t.children[v]) {
            int a = best[c], b = best[v];
            if (t.value[a] > t.value[b] || (t.value[a] == t.value[b] && t.vertex[a] < t.vertex[b]))
                best[v] = a;
        }
    }
    ContinuationChoice cont(n, -1);
    for (int v = 0; v < n; ++v)
        for (int c : t.children[v])
            if (best[c] == best[v]) cont[v] = c;
    return cont;
}

BranchDecomposition decompose(const MergeTree& t, const ContinuationChoice& choice) {
    const int n = t.size();
    if (static_cast<int>(choice.size()) != n)
        throw Error(ErrorKind::Validation, "continuation choice has wrong length");
    for (int v = 0; v < n; ++v) {
        bool ok = t.children[v].empty()
                      ? choice[v] == -1
                      : std::find(t.children[v].begin(), t.children[v].end(), choice[v]) !=
                            t.children[v].end();
        if (!ok) throw Error(ErrorKind::Validation, "invalid continuation at node " + t.name[v]);
    }

    BranchDecomposition bd;
    bd.branch_of.assign(n, -1);
    auto grow = [&](int start, int first, int parent, int pos) {
        Branch b;
        b.nodes.push_back(start);
        for (int v = first; v >= 0; v = choice[v]) b.nodes.push_back(v);
        b.birth = t.value[b.nodes.front()];
        b.death = t.value[b.nodes.back()];
        b.parent = parent;
        b.attach_pos = pos;
        int id = static_cast<int>(bd.branches.size());
        for (std::size_t i = 1; i < b.nodes.size(); ++i) bd.branch_of[b.nodes[i]] = id;
        bd.branches.push_back(std::move(b));
    };
    grow(t.root, choice[t.root], -1, -1);
    bd.branch_of[t.root] = 0;
    for (std::size_t bi = 0; bi < bd.branches.size(); ++bi) {
        const std::vector<int> nodes = bd.branches[bi].nodes;
        for (std::size_t i = 0; i < nodes.size(); ++i) {
            int p = nodes[i];
            if (i == 0 && bi != 0) continue;  // the attachment node belongs to the parent branch
            for (int c : t.children[p])
                if (c != choice[p]) grow(p, c, static_cast<int>(bi), static_cast<int>(i));
        }
    }
    return bd;
}

BranchDecomposition persistence_branch_decomposition(const MergeTree& t) {
    return decompose(t, elder_choice(t));
}

std::vector<ContinuationChoice> all_continuation_choices(const MergeTree& t, std::size_t limit) {
    std::size_t count = 1;
    for (const auto& c : t.children) {
        if (c.size() > 1) {
            count *= c.size();
            if (count > limit) {
                std::ostringstream os;
                os << "branch decomposition count exceeds guard " << limit;
                throw Error(ErrorKind::Guard, os.str());
            }
        }
    }
    std::vector<ContinuationChoice> out;
    ContinuationChoice cur(t.size(), -1);
    std::function<void(int)> rec = [&](int v) {
        if (v == t.size()) {
            out.push_back(cur);
            return;
        }
        if (t.children[v].empty()) {
            rec(v + 1);
            return;
        }
        for (int c : t.children[v]) {
            cur[v] = c;
            rec(v + 1);
        }
        cur[v] = -1;
    };
    rec(0);
    return out;
}

Bdt build_bdt(const MergeTree& t, const BranchDecomposition& bd) {
    Bdt b;
    const int m = static_cast<int>(bd.branches.size());
    for (const Branch& br : bd.branches) {
        b.birth.push_back(br.birth);
        b.death.push_back(br.death);
        b.birth_vertex.push_back(t.vertex[br.nodes.front()]);
        b.death_vertex.push_back(t.vertex[br.nodes.back()]);
        b.parent.push_back(br.parent);
        b.attach_pos.push_back(br.attach_pos);
        b.name.push_back(t.name[br.nodes.back()] + "-" + t.name[br.nodes.front()]);
    }
    b.root = children_from_parents(b.parent, b.children);
    for (int i = 0; i < m; ++i) {
        std::sort(b.children[i].begin(), b.children[i].end(), [&](int x, int y) {
            if (b.attach_pos[x] != b.attach_pos[y]) return b.attach_pos[x] < b.attach_pos[y];
            return b.death_vertex[x] < b.death_vertex[y];
        });
    }
    return b;
}

OrderedBdt build_obdt(const MergeTree& t, const BranchDecomposition& bd) {
    return OrderedBdt{build_bdt(t, bd)};
}

LabeledTree label_for_scheme(const MergeTree& t, LabelScheme scheme) {
    LabeledTree l;
    l.scheme = scheme;
    l.parent = t.parent;
    l.children = t.children;
    l.root = t.root;
    l.name = t.name;
    l.rank.assign(t.size(), 0);
    l.label.resize(t.size());
    switch (scheme) {
    case LabelScheme::EdgeLength:
    case LabelScheme::NodeDistToParent:
        for (int v = 0; v < t.size(); ++v) {
            if (v == t.root)
                l.label[v].blank = true;
            else
                l.label[v].a = t.edge_length(v);
        }
        break;
    case LabelScheme::BranchLabelOnNodes: {
        BranchDecomposition bd = persistence_branch_decomposition(t);
        auto set_from = [&](int v, int b) {
            l.label[v].a = bd.branches[b].death;
            l.label[v].b = bd.branches[b].birth;
        };
        for (int v = 0; v < t.size(); ++v) {
            if (v == t.root) {
                set_from(v, 0);
                continue;
            }
            int pick = -1;
            for (int b = 1; b < static_cast<int>(bd.branches.size()); ++b) {
                const Branch& br = bd.branches[b];
                if (br.nodes.front() != v) continue;
                if (pick < 0 || br.death - br.birth >
                                    bd.branches[pick].death - bd.branches[pick].birth)
                    pick = b;
            }
            set_from(v, pick >= 0 ? pick : bd.branch_of[v]);
        }
        break;
    }
    default:
        throw Error(ErrorKind::Parameter, "label scheme needs a branch decomposition tree");
    }
    return l;
}

LabeledTree label_for_scheme(const Bdt& b, LabelScheme scheme) {
    if (scheme != LabelScheme::BdtBirthDeath && scheme != LabelScheme::OrderedBdtBirthDeath)
        throw Error(ErrorKind::Parameter, "label scheme needs a merge tree");
    LabeledTree l;
    l.scheme = scheme;
    l.parent = b.parent;
    l.children = b.children;
    l.root = b.root;
    l.name = b.name;
    l.rank = b.attach_pos;
    l.label.resize(b.size());
    for (int i = 0; i < b.size(); ++i) {
        l.label[i].a = b.birth[i];
        l.label[i].b = b.death[i];
    }
    return l;
}

ValuedTree valued(const MergeTree& t) {
    ValuedTree v{t.parent, t.children, t.root, {}, {}, std::vector<int>(t.size(), 0)};
    for (int i = 0; i < t.size(); ++i) {
        v.coord.push_back({t.value[i]});
        v.source.push_back({t.vertex[i]});
    }
    return v;
}

ValuedTree valued(const Bdt& b) {
    ValuedTree v{b.parent, b.children, b.root, {}, {}, b.attach_pos};
    for (int i = 0; i < b.size(); ++i) {
        v.coord.push_back({b.birth[i], b.death[i]});
        v.source.push_back({b.birth_vertex[i], b.death_vertex[i]});
    }
    return v;
}

namespace {

class Inclusion {
public:
    Inclusion(const ValuedTree& in, const ValuedTree& host, bool ordered, const MatchPolicy& p)
        : in_(in), host_(host), ordered_(ordered), p_(p),
          memo_(in.size(), std::vector<signed char>(host.size(), -1)) {
        for (const auto& s : in.source) in_src_.insert(s.begin(), s.end());
        for (const auto& s : host.source) host_src_.insert(s.begin(), s.end());
        exchange_ = p.root_exchange && p.x >= 0 && p.y >= 0 && in.size() > 1 && host.size() > 1 &&
                    in.children[in.root].size() == 1 && host.children[host.root].size() == 1 &&
                    in.source[in.root] == host.source[host.children[host.root][0]] &&
                    host.source[host.root] == in.source[in.children[in.root][0]] &&
                    in.source[in.root] != host.source[host.root];
    }

    bool run() {
        if (in_.size() == 0) return true;
        if (host_.size() == 0) return false;
        return can(in_.root, host_.root);
    }

private:
    bool moved(int v) const { return p_.x >= 0 && (v == p_.x || v == p_.y); }

    bool coord_match(int a, int b) const {
        if (in_.coord[a].size() != host_.coord[b].size()) return false;
        for (std::size_t k = 0; k < in_.coord[a].size(); ++k) {
            int u = in_.source[a][k], w = host_.source[b][k];
            if (std::abs(in_.coord[a][k] - host_.coord[b][k]) <= kTol) continue;
            if (p_.x >= 0 && u == p_.x && w == p_.x) continue;
            if (u != w && moved(u) && moved(w) && !host_src_.count(u) && !in_src_.count(w)) continue;
            if (static_cast<int>(k) == p_.loose_coord && moved(u) && moved(w)) continue;
            if (exchange_ && moved(u) && moved(w) &&
                ((a == in_.root && b == host_.root) ||
                 (in_.parent[a] == in_.root && host_.parent[b] == host_.root)))
                continue;
            return false;
        }
        return true;
    }

    bool can(int a, int b) {
        signed char& m = memo_[a][b];
        if (m >= 0) return m;
        m = 0;
        if (!coord_match(a, b)) return false;
        const auto& ca = in_.children[a];
        const auto& cb = host_.children[b];
        if (ca.size() > cb.size()) return false;
        m = ordered_ ? ordered_match(ca, cb) : bipartite(ca, cb);
        return m;
    }

    bool bipartite(const std::vector<int>& ca, const std::vector<int>& cb) {
        std::vector<int> owner(cb.size(), -1);
        std::function<bool(int, std::vector<char>&)> augment = [&](int i, std::vector<char>& seen) {
            for (std::size_t j = 0; j < cb.size(); ++j) {
                if (seen[j] || !can(ca[i], cb[j])) continue;
                seen[j] = 1;
                if (owner[j] < 0 || augment(owner[j], seen)) {
                    owner[j] = i;
                    return true;
                }
            }
            return false;
        };
        for (std::size_t i = 0; i < ca.size(); ++i) {
            std::vector<char> seen(cb.size(), 0);
            if (!augment(static_cast<int>(i), seen)) return false;
        }
        return true;
    }

    static int sgn(int d) { return (d > 0) - (d < 0); }

    bool ordered_match(const std::vector<int>& ca, const std::vector<int>& cb) {
        std::vector<int> img(ca.size(), -1);
        std::vector<char> used(cb.size(), 0);
        std::function<bool(std::size_t)> rec = [&](std::size_t i) {
            if (i == ca.size()) return true;
            for (std::size_t j = 0; j < cb.size(); ++j) {
                if (used[j] || !can(ca[i], cb[j])) continue;
                bool ok = true;
                for (std::size_t k = 0; k < i && ok; ++k) {
                    ok = sgn(in_.rank[ca[i]] - in_.rank[ca[k]]) ==
                         sgn(host_.rank[cb[j]] - host_.rank[cb[img[k]]]);
                }
                if (!ok) continue;
                used[j] = 1;
                img[i] = static_cast<int>(j);
                if (rec(i + 1)) return true;
                used[j] = 0;
            }
            return false;
        };
        return rec(0);
    }

    const ValuedTree& in_;
    const ValuedTree& host_;
    bool ordered_;
    MatchPolicy p_;
    std::set<int> in_src_, host_src_;
    bool exchange_ = false;
    std::vector<std::vector<signed char>> memo_;
};

} // namespace

bool tree_included_up_to_iso(const ValuedTree& inner, const ValuedTree& host, bool ordered,
                             const MatchPolicy& policy, int guard) {
    int n = std::max(inner.size(), host.size());
    if (n > guard) {
        std::ostringstream os;
        os << "inclusion test on " << n << " nodes exceeds guard " << guard;
        throw Error(ErrorKind::Guard, os.str());
    }
    return Inclusion(inner, host, ordered, policy).run();
}

bool tree_included_up_to_iso(const MergeTree& inner, const MergeTree& host) {
    return tree_included_up_to_iso(valued(inner), valued(host), false);
}

} // namespace mts
