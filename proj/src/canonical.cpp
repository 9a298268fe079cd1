#include "fdc/diagram.hpp"

#include "fdc/errors.hpp"

#include <algorithm>
#include <map>
#include <mutex>
#include <numeric>
#include <array>
#include <set>
#include <shared_mutex>
#include <unordered_map>

namespace fdc {

Diagram relabel(const CellMatrix& c, std::optional<int> root, const std::vector<int>& perm);

namespace {

std::uint64_t checked_mul(std::uint64_t a, std::uint64_t b) {
    if (b != 0 && a > UINT64_MAX / b) throw BudgetError("automorphism count overflows 64 bits");
    return a * b;
}

std::uint64_t factorial(int k) {
    std::uint64_t r = 1;
    for (int i = 2; i <= k; ++i) r = checked_mul(r, i);
    return r;
}

std::string cell_token(const Cell& c, char open, char close) {
    return open + std::to_string(c.p) + "," + std::to_string(c.q) + close;
}

struct Coded {
    std::string code;
    std::uint64_t aut = 1;
    std::vector<int> order;  // vertices in canonical order
};

// Tree codes: "(" loops children ")", a child entry is edge-token + child code.
// Single plain edges carry no token.
Coded code_rooted(const CellMatrix& g, int v, int parent) {
    std::vector<std::pair<std::string, Coded>> kids;
    for (int w : g.neighbors(v)) {
        if (w == parent) continue;
        Coded c = code_rooted(g, w, v);
        const Cell& e = g.at(v, w);
        std::string entry = (e.p == 1 && e.q == 0) ? "" : cell_token(e, '[', ']');
        entry += c.code;
        kids.emplace_back(std::move(entry), std::move(c));
    }
    std::sort(kids.begin(), kids.end(),
              [](const auto& a, const auto& b) { return a.first < b.first; });
    Coded r;
    r.code = "(";
    if (!g.at(v, v).empty()) r.code += cell_token(g.at(v, v), '<', '>');
    r.order.push_back(v);
    for (size_t i = 0; i < kids.size();) {
        size_t j = i;
        while (j < kids.size() && kids[j].first == kids[i].first) {
            r.aut = checked_mul(r.aut, kids[j].second.aut);
            r.code += kids[j].first;
            r.order.insert(r.order.end(), kids[j].second.order.begin(), kids[j].second.order.end());
            ++j;
        }
        r.aut = checked_mul(r.aut, factorial(int(j - i)));
        i = j;
    }
    r.code += ")";
    return r;
}

Coded code_unrooted_tree(const CellMatrix& g, const std::vector<int>& comp) {
    // Strip leaves until one or two centers remain.
    std::map<int, int> deg;
    for (int v : comp) deg[v] = int(g.neighbors(v).size());
    std::vector<int> layer, remaining = comp;
    while (remaining.size() > 2) {
        std::vector<int> keep, leaves;
        for (int v : remaining) (deg[v] <= 1 ? leaves : keep).push_back(v);
        for (int v : leaves)
            for (int w : g.neighbors(v)) deg[w]--;
        remaining = std::move(keep);
    }
    Coded r;
    if (remaining.size() == 1) {
        r = code_rooted(g, remaining[0], -1);
        r.code = "{" + r.code + "}";
        return r;
    }
    Coded x = code_rooted(g, remaining[0], remaining[1]);
    Coded y = code_rooted(g, remaining[1], remaining[0]);
    if (y.code < x.code) std::swap(x, y);
    const Cell& e = g.at(remaining[0], remaining[1]);
    std::string t = (e.p == 1 && e.q == 0) ? "" : cell_token(e, '[', ']');
    r.code = "{" + x.code + "~" + t + y.code + "}";
    r.aut = checked_mul(x.aut, y.aut);
    if (x.code == y.code) r.aut = checked_mul(r.aut, 2);
    r.order = x.order;
    r.order.insert(r.order.end(), y.order.begin(), y.order.end());
    return r;
}

// Individualization-refinement over a whole component.
class Refiner {
public:
    Refiner(const CellMatrix& g, const std::vector<int>& comp, int root)
        : g_(g), comp_(comp), root_(root) {}

    Coded run() {
        std::vector<int> col(comp_.size(), 1);
        for (size_t i = 0; i < comp_.size(); ++i)
            if (comp_[i] == root_) col[i] = 0;
        search(col);
        Coded r;
        r.aut = leaves_with_best_;
        std::string s = std::string(root_ >= 0 ? "Gr" : "Gu") + std::to_string(comp_.size()) + ":";
        for (size_t i = 0; i < best_.size(); i += 2)
            s += std::to_string(best_[i]) + "." + std::to_string(best_[i + 1]) + ",";
        r.code = "(" + s + ")";
        r.order.resize(comp_.size());
        for (size_t i = 0; i < comp_.size(); ++i) r.order[best_perm_[i]] = comp_[i];
        return r;
    }

private:
    void refine(std::vector<int>& col) const {
        size_t m = comp_.size();
        int classes = int(std::set<int>(col.begin(), col.end()).size());
        while (true) {
            std::vector<std::vector<int>> sig(m);
            for (size_t i = 0; i < m; ++i) {
                const Cell& l = g_.at(comp_[i], comp_[i]);
                sig[i] = {col[i], l.p, l.q};
                std::vector<std::array<int, 3>> nb;
                for (size_t j = 0; j < m; ++j) {
                    if (j == i) continue;
                    const Cell& c = g_.at(comp_[i], comp_[j]);
                    if (!c.empty()) nb.push_back({col[j], c.p, c.q});
                }
                std::sort(nb.begin(), nb.end());
                for (const auto& a : nb) sig[i].insert(sig[i].end(), a.begin(), a.end());
            }
            std::vector<std::vector<int>> uniq = sig;
            std::sort(uniq.begin(), uniq.end());
            uniq.erase(std::unique(uniq.begin(), uniq.end()), uniq.end());
            for (size_t i = 0; i < m; ++i)
                col[i] = int(std::lower_bound(uniq.begin(), uniq.end(), sig[i]) - uniq.begin());
            if (int(uniq.size()) == classes) return;
            classes = int(uniq.size());
        }
    }

    void search(std::vector<int> col) {
        refine(col);
        size_t m = comp_.size();
        std::vector<int> count(m, 0);
        for (int c : col) count[c]++;
        int target = -1;
        for (size_t c = 0; c < m; ++c)
            if (count[c] > 1) {
                target = int(c);
                break;
            }
        if (target < 0) {
            leaf(col);
            return;
        }
        for (size_t i = 0; i < m; ++i) {
            if (col[i] != target) continue;
            std::vector<int> next(m);
            for (size_t j = 0; j < m; ++j) next[j] = 2 * col[j];
            next[i] = 2 * col[i] - 1;
            search(std::move(next));
        }
    }

    void leaf(const std::vector<int>& pos) {
        if (++leaves_ > 5'000'000) throw BudgetError("canonical labeling search too large");
        size_t m = comp_.size();
        std::vector<int> inv(m);
        for (size_t i = 0; i < m; ++i) inv[pos[i]] = int(i);
        std::vector<int> cert;
        cert.reserve(m * (m + 1));
        for (size_t a = 0; a < m; ++a)
            for (size_t b = a; b < m; ++b) {
                const Cell& c = g_.at(comp_[inv[a]], comp_[inv[b]]);
                cert.push_back(c.p);
                cert.push_back(c.q);
            }
        if (best_.empty() || cert < best_) {
            best_ = std::move(cert);
            best_perm_ = pos;
            leaves_with_best_ = 1;
        } else if (cert == best_) {
            leaves_with_best_++;
        }
    }

    const CellMatrix& g_;
    const std::vector<int>& comp_;
    int root_;
    std::vector<int> best_;
    std::vector<int> best_perm_;
    std::uint64_t leaves_with_best_ = 0;
    std::uint64_t leaves_ = 0;
};

std::vector<std::vector<int>> components(const CellMatrix& g) {
    int n = g.size();
    std::vector<int> seen(n, 0);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::vector<int> comp{s}, stack{s};
        seen[s] = 1;
        while (!stack.empty()) {
            int v = stack.back();
            stack.pop_back();
            for (int w : g.neighbors(v))
                if (!seen[w]) {
                    seen[w] = 1;
                    comp.push_back(w);
                    stack.push_back(w);
                }
        }
        std::sort(comp.begin(), comp.end());
        out.push_back(std::move(comp));
    }
    return out;
}

bool component_is_forest(const CellMatrix& g, const std::vector<int>& comp) {
    int edges = 0;
    for (int v : comp)
        for (int w : g.neighbors(v))
            if (w > v) ++edges;
    return edges == int(comp.size()) - 1;
}

struct InternTable {
    std::shared_mutex mu;
    std::unordered_map<std::string, DiagramRef> table;
};

InternTable& interned() {
    static InternTable t;
    return t;
}

TreeStructure build_tree_structure(const std::shared_ptr<CanonicalDiagram>& self) {
    const CanonicalDiagram& d = *self;
    const CellMatrix& g = d.cells();
    TreeStructure ts;
    if (g.neighbors(0).size() == 1) {
        // Root degree one: the only branch is the tree itself.
        ts.branches.emplace_back(self, 1);
    }
    std::map<std::string, std::pair<DiagramRef, int>> groups;
    for (int c : g.neighbors(0)) {
        if (!ts.branches.empty()) break;
        // Copy the subtree hanging from c, together with the root edge.
        std::vector<int> order{c};
        std::vector<int> parent(g.size(), -1);
        parent[c] = 0;
        for (size_t i = 0; i < order.size(); ++i)
            for (int w : g.neighbors(order[i]))
                if (w != parent[order[i]]) {
                    parent[w] = order[i];
                    order.push_back(w);
                }
        std::vector<int> local(g.size(), -1);
        local[0] = 0;
        for (size_t i = 0; i < order.size(); ++i) local[order[i]] = int(i) + 1;
        Diagram s = shapes::singleton();
        s.vertex_count = int(order.size()) + 1;
        for (int v : order) s.add_edge(local[parent[v]], local[v]);
        DiagramRef ref = canonicalize(s);
        auto [it, ins] = groups.try_emplace(ref->key(), ref, 0);
        it->second.second++;
    }
    for (auto& [k, v] : groups) ts.branches.push_back(v);
    std::vector<int> depth(g.size(), -1), queue{0};
    depth[0] = 0;
    for (size_t i = 0; i < queue.size(); ++i)
        for (int w : g.neighbors(queue[i]))
            if (depth[w] < 0) {
                depth[w] = depth[queue[i]] + 1;
                ts.depth = std::max(ts.depth, depth[w]);
                queue.push_back(w);
            }
    return ts;
}

}  // namespace

std::vector<int> isolated_set(const Diagram& d) {
    d.validate();
    CellMatrix g(d);
    std::vector<int> out;
    for (int v = 0; v < d.vertex_count; ++v) {
        if (d.root && *d.root == v) continue;
        bool all = true;
        for (int w : g.neighbors(v))
            if (g.at(v, w).count() < 2) all = false;
        if (all) out.push_back(v);
    }
    return out;
}

DiagramRef canonicalize(const Diagram& d) {
    d.validate();
    CellMatrix g(d);
    int root = d.root ? *d.root : -1;

    struct Part {
        std::string code;
        std::uint64_t aut;
        std::vector<int> order;
    };
    std::optional<Part> root_part;
    std::vector<Part> floating;
    bool forest = true;
    auto comps = components(g);
    for (const auto& comp : comps) {
        bool is_root = root >= 0 && std::binary_search(comp.begin(), comp.end(), root);
        Coded c;
        if (component_is_forest(g, comp)) {
            c = is_root ? code_rooted(g, root, -1) : code_unrooted_tree(g, comp);
        } else {
            forest = false;
            c = Refiner(g, comp, is_root ? root : -1).run();
        }
        Part p{std::move(c.code), c.aut, std::move(c.order)};
        if (is_root) root_part = std::move(p);
        else floating.push_back(std::move(p));
    }
    std::sort(floating.begin(), floating.end(),
              [](const Part& a, const Part& b) { return a.code < b.code; });

    std::string key = root >= 0 ? "R" : "S";
    std::uint64_t aut = 1;
    std::vector<int> order;
    if (root_part) {
        key += root_part->code;
        aut = root_part->aut;
        order = root_part->order;
    }
    for (size_t i = 0; i < floating.size();) {
        size_t j = i;
        while (j < floating.size() && floating[j].code == floating[i].code) {
            key += floating[j].code;
            aut = checked_mul(aut, floating[j].aut);
            order.insert(order.end(), floating[j].order.begin(), floating[j].order.end());
            ++j;
        }
        aut = checked_mul(aut, factorial(int(j - i)));
        i = j;
    }

    {
        std::shared_lock lock(interned().mu);
        auto it = interned().table.find(key);
        if (it != interned().table.end()) return it->second;
    }

    auto cd = std::shared_ptr<CanonicalDiagram>(new CanonicalDiagram());
    std::vector<int> perm(d.vertex_count);
    for (size_t i = 0; i < order.size(); ++i) perm[order[i]] = int(i);
    cd->key_ = key;
    cd->aut_ = aut;
    cd->rep_ = relabel(g, d.root, perm);
    cd->cells_ = CellMatrix(cd->rep_);
    const CellMatrix& c = cd->cells_;
    int n = c.size();
    for (int u = 0; u < n; ++u)
        for (int v = u; v < n; ++v) {
            const Cell& x = c.at(u, v);
            cd->edge_count_ += x.p + 2 * x.q;
            if (x.q) cd->has_labels_ = true;
            if (u == v && !x.empty()) cd->has_loops_ = true;
            if (u != v && x.count() > 1) cd->proper_ = false;
        }
    if (cd->has_labels_ || cd->has_loops_) cd->proper_ = false;
    cd->isolated_count_ = int(isolated_set(cd->rep_).size());
    cd->component_count_ = int(comps.size());
    cd->forest_shaped_ = forest;
    bool tree = cd->rooted() && comps.size() == 1 && forest && cd->proper_;
    if (tree) cd->tree_ = build_tree_structure(cd);

    std::unique_lock lock(interned().mu);
    auto [it, inserted] = interned().table.try_emplace(key, cd);
    return it->second;
}

const std::optional<TreeStructure>& tree_structure(const CanonicalDiagram& d) { return d.tree(); }

}  // namespace fdc
