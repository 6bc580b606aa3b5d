#include "mtstab/deform.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <map>
#include <set>
#include <sstream>

#include "mtstab/assignment.hpp"
#include "mtstab/common.hpp"

namespace mts {

EdgeTree edge_tree(const MergeTree& t) {
    EdgeTree e;
    e.parent = t.parent;
    e.children = t.children;
    e.root = t.root;
    e.id.resize(t.size());
    e.len.assign(t.size(), 0.0);
    for (int v = 0; v < t.size(); ++v) {
        e.id[v] = v;
        if (v != t.root) e.len[v] = t.edge_length(v);
    }
    return e;
}

EdgeTree contract(const EdgeTree& t, const std::vector<char>& in_d) {
    const int n = t.size();
    std::vector<int> rep(n, -1);
    const std::vector<int> pre = preorder(t.children, t.root);
    for (int v : pre) rep[v] = (v == t.root || !in_d[v]) ? v : rep[t.parent[v]];

    std::vector<int> par(n, -1);
    std::vector<double> len(n, 0.0);
    std::vector<char> alive(n, 0);
    std::vector<std::vector<int>> kids(n);
    for (int v : pre) {
        if (rep[v] != v) continue;
        alive[v] = 1;
        len[v] = t.len[v];
        if (v != t.root) {
            par[v] = rep[t.parent[v]];
            kids[par[v]].push_back(v);
        }
    }
    for (int v : pre) {
        if (!alive[v] || v == t.root || kids[v].size() != 1) continue;
        int c = kids[v][0], p = par[v];
        len[c] += len[v];
        par[c] = p;
        std::replace(kids[p].begin(), kids[p].end(), v, c);
        alive[v] = 0;
    }

    EdgeTree out;
    std::vector<int> idx(n, -1);
    for (int v = 0; v < n; ++v) {
        if (!alive[v]) continue;
        idx[v] = out.size();
        out.id.push_back(t.id[v]);
        out.len.push_back(v == t.root ? 0.0 : len[v]);
        out.parent.push_back(-1);
    }
    for (int v = 0; v < n; ++v)
        if (alive[v] && v != t.root) out.parent[idx[v]] = idx[par[v]];
    out.root = children_from_parents(out.parent, out.children);
    return out;
}

namespace {

std::vector<std::string> node_shapes(const EdgeTree& t) {
    std::vector<std::string> s(t.size());
    for (int v : postorder(t.children, t.root)) {
        std::vector<std::string> parts;
        for (int c : t.children[v]) parts.push_back(s[c]);
        std::sort(parts.begin(), parts.end());
        s[v] = "(";
        for (auto& p : parts) s[v] += p;
        s[v] += ")";
    }
    return s;
}

} // namespace

std::string canonical_shape(const EdgeTree& t) {
    if (t.size() == 0) return "";
    return node_shapes(t)[t.root];
}

double iso_cost(const EdgeTree& a, const EdgeTree& b, std::vector<std::pair<int, int>>* pairs) {
    if (a.size() != b.size()) return kInf;
    if (a.size() == 0) return 0.0;
    const auto sa = node_shapes(a), sb = node_shapes(b);
    if (sa[a.root] != sb[b.root]) return kInf;
    std::vector<std::vector<double>> memo(a.size(), std::vector<double>(b.size(), -1.0));
    std::vector<std::vector<std::vector<int>>> choice(a.size(), std::vector<std::vector<int>>(b.size()));
    std::function<double(int, int)> cost = [&](int u, int v) -> double {
        double& m = memo[u][v];
        if (m >= 0) return m;
        const auto& cu = a.children[u];
        const auto& cv = b.children[v];
        std::vector<std::vector<double>> mat(cu.size(), std::vector<double>(cv.size(), kInf));
        for (std::size_t i = 0; i < cu.size(); ++i)
            for (std::size_t j = 0; j < cv.size(); ++j)
                if (sa[cu[i]] == sb[cv[j]]) mat[i][j] = cost(cu[i], cv[j]);
        double c = std::abs(a.len[u] - b.len[v]);
        if (!cu.empty()) {
            Assignment as = min_cost_assignment(mat);
            c += as.cost;
            choice[u][v] = as.row_to_col;
        }
        return m = c;
    };
    double total = cost(a.root, b.root);
    if (pairs) {
        pairs->clear();
        std::function<void(int, int)> collect = [&](int u, int v) {
            pairs->push_back({a.id[u], b.id[v]});
            for (std::size_t i = 0; i < a.children[u].size(); ++i)
                collect(a.children[u][i], b.children[v][choice[u][v][i]]);
        };
        collect(a.root, b.root);
        std::sort(pairs->begin(), pairs->end());
    }
    return total;
}

bool edge_equivalent(const EdgeTree& a, const EdgeTree& b) {
    return iso_cost(a, b) <= kTol * std::max(1, a.size());
}

namespace {

struct Entry {
    unsigned mask;
    double cost;
    EdgeTree tree;
    std::string shape;
};

std::vector<Entry> contractions(const EdgeTree& t, bool one_degree) {
    std::vector<int> edges;
    for (int v = 0; v < t.size(); ++v)
        if (v != t.root) edges.push_back(v);
    const int m = static_cast<int>(edges.size());
    std::vector<Entry> out;
    std::vector<char> in_d(t.size());
    for (unsigned mask = 0; mask < (1u << m); ++mask) {
        double c = 0.0;
        for (int i = 0; i < m; ++i) {
            in_d[edges[i]] = (mask >> i) & 1u;
            if (in_d[edges[i]]) c += t.len[edges[i]];
        }
        if (one_degree) {
            bool closed = true;
            for (int i = 0; i < m && closed; ++i)
                if (in_d[edges[i]])
                    for (int ch : t.children[edges[i]]) closed = closed && in_d[ch];
            if (!closed) continue;
        }
        EdgeTree ct = contract(t, in_d);
        std::string s = canonical_shape(ct);
        out.push_back(Entry{mask, c, std::move(ct), std::move(s)});
    }
    std::stable_sort(out.begin(), out.end(),
                     [](const Entry& a, const Entry& b) { return a.cost < b.cost; });
    return out;
}

std::vector<int> mask_ids(const EdgeTree& t, unsigned mask) {
    std::vector<int> ids;
    int i = 0;
    for (int v = 0; v < t.size(); ++v) {
        if (v == t.root) continue;
        if ((mask >> i) & 1u) ids.push_back(t.id[v]);
        ++i;
    }
    return ids;
}

} // namespace

DeformResult deform_brute_force(const MergeTree& t1, const MergeTree& t2, bool one_degree, int guard) {
    if (t1.edge_count() > guard || t2.edge_count() > guard) {
        std::ostringstream os;
        os << "deformation brute force on " << std::max(t1.edge_count(), t2.edge_count())
           << " edges exceeds guard " << guard;
        throw Error(ErrorKind::Guard, os.str());
    }
    EdgeTree e1 = edge_tree(t1), e2 = edge_tree(t2);
    std::vector<Entry> c1 = contractions(e1, one_degree);
    std::vector<Entry> c2 = contractions(e2, one_degree);
    std::map<std::string, std::vector<const Entry*>> groups;
    for (const Entry& e : c2) groups[e.shape].push_back(&e);

    DeformResult best;
    best.cost = kInf;
    const Entry* b1 = nullptr;
    const Entry* b2 = nullptr;
    for (const Entry& a : c1) {
        if (a.cost >= best.cost - kTol) break;
        auto it = groups.find(a.shape);
        if (it == groups.end()) continue;
        for (const Entry* b : it->second) {
            if (a.cost + b->cost >= best.cost - kTol) break;
            double total = a.cost + b->cost + iso_cost(a.tree, b->tree);
            if (total < best.cost - kTol) {
                best.cost = total;
                b1 = &a;
                b2 = b;
            }
        }
    }
    best.d1 = mask_ids(e1, b1->mask);
    best.d2 = mask_ids(e2, b2->mask);
    iso_cost(b1->tree, b2->tree, &best.iso);
    return best;
}

namespace {

constexpr double kSeqTol = 1e-7;

// Mutable edge tree keyed by node id. chain lists the original edges merged into
// a node's edge (top first); only the sequence builder uses it.
struct DynTree {
    struct Node {
        int parent = -1;
        std::vector<int> kids;
        double len = 0.0;
        std::vector<int> chain;
    };
    std::map<int, Node> n;
    int root = -1;

    struct Pruned {
        int saddle = -1;
        int absorber = -1;
        double saddle_len = 0.0;
    };

    static DynTree from(const EdgeTree& t) {
        DynTree d;
        for (int v = 0; v < t.size(); ++v) {
            Node x;
            x.parent = t.parent[v] < 0 ? -1 : t.id[t.parent[v]];
            for (int c : t.children[v]) x.kids.push_back(t.id[c]);
            x.len = t.len[v];
            x.chain = {t.id[v]};
            d.n[t.id[v]] = x;
        }
        d.root = t.id[t.root];
        return d;
    }

    void replace_kid(int p, int old, const std::vector<int>& with) {
        auto& k = n.at(p).kids;
        auto it = std::find(k.begin(), k.end(), old);
        it = k.erase(it);
        k.insert(it, with.begin(), with.end());
    }

    Pruned remove(int v, std::vector<int>* moved) {
        Node x = n.at(v);
        int p = x.parent;
        replace_kid(p, v, x.kids);
        for (int c : x.kids) n[c].parent = p;
        if (moved) *moved = x.kids;
        n.erase(v);
        Pruned pr;
        if (x.kids.empty() && p != root && n.at(p).kids.size() == 1) {
            int c = n.at(p).kids[0];
            Node& s = n.at(p);
            Node& cn = n.at(c);
            pr = Pruned{p, c, s.len};
            cn.len += s.len;
            cn.chain.insert(cn.chain.begin(), s.chain.begin(), s.chain.end());
            cn.parent = s.parent;
            replace_kid(s.parent, p, {c});
            n.erase(p);
        }
        return pr;
    }

    int depth(int v) const {
        int d = 0;
        for (int u = v; u != root; u = n.at(u).parent) ++d;
        return d;
    }

    EdgeTree to_edge_tree() const {
        EdgeTree t;
        std::map<int, int> idx;
        for (const auto& [id, x] : n) {
            (void)x;
            int k = static_cast<int>(idx.size());
            idx[id] = k;
        }
        for (const auto& [id, x] : n) {
            t.id.push_back(id);
            t.parent.push_back(x.parent < 0 ? -1 : idx.at(x.parent));
            t.len.push_back(id == root ? 0.0 : x.len);
        }
        t.root = children_from_parents(t.parent, t.children);
        return t;
    }
};

struct DelRec {
    EditOp op;
    int parent = -1;
    std::vector<int> moved;
    DynTree::Pruned pruned;
};

std::vector<DelRec> delete_sequence(DynTree& w, const EdgeTree& orig, const std::vector<int>& d) {
    std::map<int, double> olen;
    for (int v = 0; v < orig.size(); ++v) olen[orig.id[v]] = orig.len[v];
    std::set<int> pending(d.begin(), d.end());
    std::vector<DelRec> recs;
    for (;;) {
        // inner edges top-down first, then leaves by id
        int pick = -1;
        bool pick_inner = false;
        int pick_depth = 0;
        for (const auto& [id, x] : w.n) {
            if (id == w.root) continue;
            bool hit = std::any_of(x.chain.begin(), x.chain.end(),
                                   [&](int o) { return pending.count(o) > 0; });
            if (!hit) continue;
            bool inner = !x.kids.empty();
            int dep = w.depth(id);
            bool better = pick < 0 || (inner && !pick_inner) ||
                          (inner && pick_inner && dep < pick_depth);
            if (better) {
                pick = id;
                pick_inner = inner;
                pick_depth = dep;
            }
        }
        if (pick < 0) break;
        DynTree::Node& x = w.n.at(pick);
        double dpart = 0.0;
        std::vector<int> keep;
        for (int o : x.chain) {
            if (pending.count(o)) {
                pending.erase(o);
                dpart += olen.at(o);
            } else {
                keep.push_back(o);
            }
        }
        DelRec r;
        r.op.node = pick;
        r.op.from.a = x.len;
        r.parent = x.parent;
        if (keep.empty()) {
            r.op.kind = EditOp::Kind::Delete;
            r.op.cost = x.len;
            r.pruned = w.remove(pick, &r.moved);
        } else {
            // part of a merged edge goes away: shorten it instead
            r.op.kind = EditOp::Kind::Relabel;
            r.op.to.a = x.len - dpart;
            r.op.cost = dpart;
            x.len -= dpart;
            x.chain = keep;
        }
        recs.push_back(r);
    }
    return recs;
}

} // namespace

EditSequence deform_sequence(const MergeTree& t1, const MergeTree& t2, const DeformResult& wit) {
    EdgeTree e1 = edge_tree(t1), e2 = edge_tree(t2);
    DynTree w1 = DynTree::from(e1), w2 = DynTree::from(e2);
    std::vector<DelRec> r1 = delete_sequence(w1, e1, wit.d1);
    std::vector<DelRec> r2 = delete_sequence(w2, e2, wit.d2);
    EdgeTree f1 = w1.to_edge_tree(), f2 = w2.to_edge_tree();
    std::vector<std::pair<int, int>> pairs;
    if (std::isinf(iso_cost(f1, f2, &pairs)))
        throw Error(ErrorKind::Validation, "deformation witness does not yield isomorphic trees");

    EditSequence s;
    for (const DelRec& r : r1) s.ops.push_back(r.op);

    std::map<int, int> ren;
    for (auto [a, b] : pairs) ren[b] = a;
    const int off = t1.size();
    auto rn = [&](int id) {
        auto it = ren.find(id);
        return it != ren.end() ? it->second : off + id;
    };
    std::map<int, double> l1, l2;
    for (int v = 0; v < f1.size(); ++v) l1[f1.id[v]] = f1.len[v];
    for (int v = 0; v < f2.size(); ++v) l2[f2.id[v]] = f2.len[v];
    for (auto [a, b] : pairs) {
        if (a == w1.root) continue;
        double from = l1.at(a), to = l2.at(b);
        if (from == to) continue;
        EditOp op;
        op.kind = EditOp::Kind::Relabel;
        op.node = a;
        op.from.a = from;
        op.to.a = to;
        op.cost = std::abs(from - to);
        s.ops.push_back(op);
    }

    for (auto it = r2.rbegin(); it != r2.rend(); ++it) {
        const DelRec& r = *it;
        EditOp op;
        op.node = rn(r.op.node);
        op.cost = r.op.cost;
        if (r.op.kind == EditOp::Kind::Relabel) {
            op.kind = EditOp::Kind::Relabel;
            op.from.a = r.op.to.a;
            op.to.a = r.op.from.a;
        } else {
            op.kind = EditOp::Kind::Insert;
            op.to.a = r.op.from.a;
            op.parent = rn(r.parent);
            if (r.pruned.saddle >= 0) {
                op.saddle = rn(r.pruned.saddle);
                op.split_child = rn(r.pruned.absorber);
                op.split_len = r.pruned.saddle_len;
                op.parent = op.saddle;
            } else {
                for (int c : r.moved) op.adopt.push_back(rn(c));
            }
        }
        s.ops.push_back(op);
    }
    return s;
}

EdgeTree apply_deform_sequence(const EdgeTree& t, const EditSequence& s) {
    DynTree w = DynTree::from(t);
    auto fail = [](std::size_t step, const std::string& why) {
        std::ostringstream os;
        os << "step " << step << ": " << why;
        throw Error(ErrorKind::Validation, os.str());
    };
    for (std::size_t i = 0; i < s.ops.size(); ++i) {
        const EditOp& op = s.ops[i];
        const std::size_t step = i + 1;
        switch (op.kind) {
        case EditOp::Kind::Delete: {
            if (!w.n.count(op.node) || op.node == w.root)
                fail(step, "no edge above node " + std::to_string(op.node));
            if (std::abs(w.n.at(op.node).len - op.cost) > kSeqTol)
                fail(step, "delete cost differs from the edge length");
            w.remove(op.node, nullptr);
            break;
        }
        case EditOp::Kind::Relabel: {
            if (!w.n.count(op.node) || op.node == w.root)
                fail(step, "no edge above node " + std::to_string(op.node));
            auto& x = w.n.at(op.node);
            if (std::abs(x.len - op.from.a) > kSeqTol) fail(step, "relabel source length differs");
            if (!(op.to.a > 0.0)) fail(step, "edge lengths must stay positive");
            x.len = op.to.a;
            break;
        }
        case EditOp::Kind::Insert: {
            if (w.n.count(op.node)) fail(step, "insert reuses id " + std::to_string(op.node));
            if (!(op.to.a > 0.0)) fail(step, "edge lengths must stay positive");
            if (op.split_child >= 0) {
                if (!w.n.count(op.split_child) || op.split_child == w.root)
                    fail(step, "no edge above node " + std::to_string(op.split_child));
                if (w.n.count(op.saddle) || op.saddle == op.node)
                    fail(step, "insert reuses id " + std::to_string(op.saddle));
                auto& c = w.n.at(op.split_child);
                if (!(op.split_len > 0.0 && op.split_len < c.len))
                    fail(step, "split point outside the edge");
                int p = c.parent;
                DynTree::Node sn{p, {op.split_child, op.node}, op.split_len, {op.saddle}};
                c.len -= op.split_len;
                c.parent = op.saddle;
                w.replace_kid(p, op.split_child, {op.saddle});
                w.n[op.saddle] = sn;
                w.n[op.node] = DynTree::Node{op.saddle, {}, op.to.a, {op.node}};
            } else {
                if (!w.n.count(op.parent)) fail(step, "insert under missing node " + std::to_string(op.parent));
                auto& p = w.n.at(op.parent);
                for (int c : op.adopt)
                    if (std::find(p.kids.begin(), p.kids.end(), c) == p.kids.end())
                        fail(step, "adopted node " + std::to_string(c) + " is not a child of the parent");
                if (op.adopt.size() == 1) fail(step, "inserted inner node would have one child");
                if (op.parent != w.root && !op.adopt.empty() && op.adopt.size() == p.kids.size())
                    fail(step, "parent would be left with one child");
                for (int c : op.adopt) {
                    p.kids.erase(std::find(p.kids.begin(), p.kids.end(), c));
                    w.n.at(c).parent = op.node;
                }
                p.kids.push_back(op.node);
                w.n[op.node] = DynTree::Node{op.parent, op.adopt, op.to.a, {op.node}};
            }
            break;
        }
        }
    }
    return w.to_edge_tree();
}

} // namespace mts
