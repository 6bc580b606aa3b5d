#include "mtstab/tree.hpp"

#include <algorithm>

#include "mtstab/common.hpp"

namespace mts {

std::vector<int> preorder(const std::vector<std::vector<int>>& children, int root) {
    std::vector<int> out;
    if (root < 0) return out;
    std::vector<int> stack{root};
    while (!stack.empty()) {
        int v = stack.back();
        stack.pop_back();
        out.push_back(v);
        for (auto it = children[v].rbegin(); it != children[v].rend(); ++it) stack.push_back(*it);
    }
    return out;
}

std::vector<int> postorder(const std::vector<std::vector<int>>& children, int root) {
    std::vector<int> out;
    if (root < 0) return out;
    std::vector<std::pair<int, size_t>> stack{{root, 0}};
    while (!stack.empty()) {
        auto& [v, i] = stack.back();
        if (i < children[v].size()) {
            int c = children[v][i++];
            stack.push_back({c, 0});
        } else {
            out.push_back(v);
            stack.pop_back();
        }
    }
    return out;
}

std::vector<std::vector<char>> ancestor_matrix(const std::vector<int>& parent, int root) {
    (void)root;
    const int n = static_cast<int>(parent.size());
    std::vector<std::vector<char>> anc(n, std::vector<char>(n, 0));
    for (int v = 0; v < n; ++v) {
        for (int u = v; u >= 0; u = parent[u]) anc[u][v] = 1;
    }
    return anc;
}

std::vector<int> depths(const std::vector<int>& parent, const std::vector<std::vector<int>>& children,
                        int root) {
    std::vector<int> d(parent.size(), 0);
    for (int v : preorder(children, root))
        if (parent[v] >= 0) d[v] = d[parent[v]] + 1;
    return d;
}

int children_from_parents(const std::vector<int>& parent, std::vector<std::vector<int>>& children) {
    const int n = static_cast<int>(parent.size());
    children.assign(n, {});
    int root = -1;
    for (int v = 0; v < n; ++v) {
        int p = parent[v];
        if (p < 0) {
            if (root >= 0) throw Error(ErrorKind::Validation, "tree has more than one root");
            root = v;
        } else {
            if (p >= n) throw Error(ErrorKind::Validation, "parent index out of range");
            children[p].push_back(v);
        }
    }
    if (root < 0 && n > 0) throw Error(ErrorKind::Validation, "tree has no root");
    if (static_cast<int>(preorder(children, root).size()) != n)
        throw Error(ErrorKind::Validation, "parent array contains a cycle");
    return root;
}

} // namespace mts
