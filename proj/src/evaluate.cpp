#include "fdc/evaluate.hpp"

#include "fdc/algebra.hpp"
#include "fdc/errors.hpp"

#include <algorithm>
#include <cmath>
#include <functional>

namespace fdc {

using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

std::string cell_str(const Cell& c) { return std::to_string(c.p) + "," + std::to_string(c.q); }

// Shape code of the subtree at v seen from parent, including the parent edge.
std::string subtree_code(const CellMatrix& g, int v, int parent) {
    std::vector<std::string> kids;
    for (int w : g.neighbors(v))
        if (w != parent) kids.push_back(subtree_code(g, w, v));
    std::sort(kids.begin(), kids.end());
    std::string s = "[" + (parent >= 0 ? cell_str(g.at(parent, v)) : std::string("-")) + "|" +
                    cell_str(g.at(v, v)) + "(";
    for (auto& k : kids) s += k;
    return s + ")]";
}

std::vector<std::vector<int>> components_of(const CellMatrix& g) {
    int n = g.size();
    std::vector<int> seen(n, 0);
    std::vector<std::vector<int>> out;
    for (int s = 0; s < n; ++s) {
        if (seen[s]) continue;
        std::vector<int> comp{s};
        seen[s] = 1;
        for (size_t i = 0; i < comp.size(); ++i)
            for (int w : g.neighbors(comp[i]))
                if (!seen[w]) {
                    seen[w] = 1;
                    comp.push_back(w);
                }
        out.push_back(comp);
    }
    return out;
}

void check_symmetric(const MatrixXd& A) {
    if (A.rows() != A.cols()) throw PreconditionError("matrix is not square");
    for (int i = 0; i < A.rows(); ++i)
        for (int j = 0; j < i; ++j)
            if (A(i, j) != A(j, i)) throw PreconditionError("matrix is not symmetric");
}

}  // namespace

Evaluator::Evaluator(const MatrixXd& A, EvalMode mode) : A_(A), n_(int(A.rows())), mode_(mode) {
    check_symmetric(A);
    if (n_ < 1) throw PreconditionError("matrix dimension must be positive");
}

bool Evaluator::use_naive() const {
    return mode_ == EvalMode::naive || (mode_ == EvalMode::automatic && n_ <= 8);
}

double Evaluator::weight(int p, int q, double a) const {
    double w = 1.0;
    for (int i = 0; i < p; ++i) w *= a;
    double l = a * a - 1.0 / n_;
    for (int i = 0; i < q; ++i) w *= l;
    return w;
}

const MatrixXd& Evaluator::power(int p, int q) {
    if (p == 1 && q == 0) return A_;
    auto& slot = powers_[{p, q}];
    if (!slot) slot = std::make_unique<MatrixXd>(A_.unaryExpr([this, p, q](double a) { return weight(p, q, a); }));
    return *slot;
}

VectorXd Evaluator::diag_power(int p, int q) const {
    VectorXd d(n_);
    for (int i = 0; i < n_; ++i) d[i] = weight(p, q, A_(i, i));
    return d;
}

// ---------------------------------------------------------------- naive

VectorXd Evaluator::naive_injective(const CanonicalDiagram& d, const std::vector<int>& roots) {
    const CellMatrix& g = d.cells();
    int V = g.size();
    VectorXd out = VectorXd::Zero(Eigen::Index(roots.size()));
    if (V > n_) return out;
    // BFS-ish order from the root so partial products prune early.
    std::vector<int> order{0}, placed(V, 0);
    placed[0] = 1;
    for (size_t i = 0; i < order.size(); ++i)
        for (int w : g.neighbors(order[i]))
            if (!placed[w]) {
                placed[w] = 1;
                order.push_back(w);
            }
    for (int v = 0; v < V; ++v)
        if (!placed[v]) order.push_back(v);
    std::vector<int> pos(V);
    for (int i = 0; i < V; ++i) pos[order[i]] = i;

    std::vector<int> label(V, -1), used(n_, 0);
    std::function<double(int)> rec = [&](int k) -> double {
        if (k == V) return 1.0;
        int v = order[k];
        double total = 0.0;
        for (int x = 0; x < n_; ++x) {
            if (used[x]) continue;
            label[v] = x;
            double w = 1.0;
            const Cell& l = g.at(v, v);
            if (!l.empty()) w *= weight(l.p, l.q, A_(x, x));
            for (int j = 0; j < k && w != 0.0; ++j) {
                int u = order[j];
                const Cell& c = g.at(u, v);
                if (!c.empty()) w *= weight(c.p, c.q, A_(label[u], x));
            }
            if (w == 0.0) continue;
            used[x] = 1;
            total += w * rec(k + 1);
            used[x] = 0;
        }
        return total;
    };
    for (size_t ri = 0; ri < roots.size(); ++ri) {
        int r = roots[ri];
        label[0] = r;
        used[r] = 1;
        const Cell& l = g.at(0, 0);
        double w = l.empty() ? 1.0 : weight(l.p, l.q, A_(r, r));
        out[Eigen::Index(ri)] = w == 0.0 ? 0.0 : w * rec(1);
        used[r] = 0;
    }
    return out;
}

double Evaluator::naive_injective_scalar(const CanonicalDiagram& d) {
    const CellMatrix& g = d.cells();
    int V = g.size();
    if (V == 0) return 1.0;
    if (V > n_) return 0.0;
    // Treat vertex 0 as a root and sum over its label.
    Diagram rooted = d.diagram();
    rooted.root = 0;
    std::vector<int> all(n_);
    for (int i = 0; i < n_; ++i) all[i] = i;
    auto ref = canonicalize(rooted);
    return naive_injective(*ref, all).sum();
}

// ---------------------------------------------------------------- forests

VectorXd Evaluator::forest_message(const CellMatrix& g, int v, int parent, const std::string& code) {
    auto it = message_memo_.find(code);
    if (it != message_memo_.end()) return it->second;
    VectorXd h = VectorXd::Ones(n_);
    const Cell& l = g.at(v, v);
    if (!l.empty()) h.array() *= diag_power(l.p, l.q).array();
    for (int w : g.neighbors(v))
        if (w != parent) h.array() *= forest_message(g, w, v, subtree_code(g, w, v)).array();
    const Cell& e = g.at(parent, v);
    VectorXd m = power(e.p, e.q) * h;
    message_memo_.emplace(code, m);
    return m;
}

VectorXd Evaluator::forest_root_vector(const CanonicalDiagram& d) {
    const CellMatrix& g = d.cells();
    VectorXd h = VectorXd::Ones(n_);
    const Cell& l = g.at(0, 0);
    if (!l.empty()) h.array() *= diag_power(l.p, l.q).array();
    for (int w : g.neighbors(0)) h.array() *= forest_message(g, w, 0, subtree_code(g, w, 0)).array();
    double s = 1.0;
    for (const auto& comp : components_of(g))
        if (comp[0] != 0) s *= forest_component(g, comp);
    return h * s;
}

double Evaluator::forest_component(const CellMatrix& g, const std::vector<int>& comp) {
    int c = *std::min_element(comp.begin(), comp.end());
    std::string key = "F" + subtree_code(g, c, -1);
    auto it = scalar_memo_.find(key);
    if (it != scalar_memo_.end()) return it->second;
    VectorXd h = VectorXd::Ones(n_);
    const Cell& l = g.at(c, c);
    if (!l.empty()) h.array() *= diag_power(l.p, l.q).array();
    for (int w : g.neighbors(c)) h.array() *= forest_message(g, w, c, subtree_code(g, w, c)).array();
    double s = h.sum();
    scalar_memo_.emplace(key, s);
    return s;
}

double Evaluator::forest_scalar(const CanonicalDiagram& d) {
    double s = 1.0;
    for (const auto& comp : components_of(d.cells())) s *= forest_component(d.cells(), comp);
    return s;
}

// ---------------------------------------------------------------- elimination

struct Evaluator::Elim {
    struct Mat {
        const MatrixXd* m;   // borrowed, or points into own
        std::shared_ptr<MatrixXd> own;
        int row_var;
    };
    Evaluator& ev;
    int nvars;
    std::vector<int> alive;
    std::vector<std::optional<VectorXd>> unary;
    std::map<std::pair<int, int>, std::vector<Mat>> binary;
    double scalar = 1.0;

    Elim(Evaluator& e, int nv) : ev(e), nvars(nv), alive(nv, 1), unary(nv) {}

    void mul_unary(int v, const VectorXd& x) {
        if (unary[v]) unary[v]->array() *= x.array();
        else unary[v] = x;
    }
    void add_binary(int u, int v, Mat m) { binary[{std::min(u, v), std::max(u, v)}].push_back(std::move(m)); }

    std::vector<int> neighbors(int v) const {
        std::vector<int> r;
        for (const auto& [k, l] : binary) {
            if (k.first == v) r.push_back(k.second);
            else if (k.second == v) r.push_back(k.first);
        }
        return r;
    }

    // Hadamard product of all factors on (u, v), oriented with rows indexed by u.
    MatrixXd oriented(int u, int v) {
        auto& l = binary.at({std::min(u, v), std::max(u, v)});
        MatrixXd r;
        bool first = true;
        for (const auto& f : l) {
            if (first) {
                r = f.row_var == u ? *f.m : MatrixXd(f.m->transpose());
                first = false;
            } else if (f.row_var == u) {
                r.array() *= f.m->array();
            } else {
                r.array() *= f.m->transpose().array();
            }
        }
        return r;
    }

    VectorXd apply(int u, int v, const VectorXd& g) {
        auto& l = binary.at({std::min(u, v), std::max(u, v)});
        if (l.size() == 1) {
            const auto& f = l[0];
            return f.row_var == u ? VectorXd(*f.m * g) : VectorXd(f.m->transpose() * g);
        }
        return oriented(u, v) * g;
    }

    void eliminate(int v) {
        auto nb = neighbors(v);
        VectorXd g = unary[v] ? *unary[v] : VectorXd::Ones(ev.n_);
        if (nb.empty()) {
            scalar *= g.sum();
        } else if (nb.size() == 1) {
            int u = nb[0];
            VectorXd h = apply(u, v, g);
            binary.erase({std::min(u, v), std::max(u, v)});
            mul_unary(u, h);
        } else if (nb.size() == 2) {
            int u = nb[0], w = nb[1];
            MatrixXd left = oriented(u, v);
            left = left * g.asDiagonal();
            MatrixXd right = oriented(v, w);
            auto prod = std::make_shared<MatrixXd>(left * right);
            binary.erase({std::min(u, v), std::max(u, v)});
            binary.erase({std::min(v, w), std::max(v, w)});
            add_binary(u, w, Mat{prod.get(), prod, u});
        } else {
            throw BudgetError("contraction width exceeded: vertex with " + std::to_string(nb.size()) +
                              " neighbours in elimination");
        }
        alive[v] = 0;
        unary[v].reset();
    }

    // Leaves first, then minimum degree; never eliminates `keep`.
    void run(int keep) {
        while (true) {
            int best = -1;
            size_t best_deg = 0;
            for (int v = 0; v < nvars; ++v) {
                if (!alive[v] || v == keep) continue;
                size_t d = neighbors(v).size();
                if (best < 0 || d < best_deg) {
                    best = v;
                    best_deg = d;
                }
            }
            if (best < 0) return;
            eliminate(best);
        }
    }
};

namespace {

// Elimination widths on the bare graph, optionally with the root already fixed.
int max_width(const CellMatrix& g, bool drop_root) {
    int n = g.size();
    std::vector<std::vector<int>> adj(n, std::vector<int>(n, 0));
    for (int u = 0; u < n; ++u)
        for (int v = 0; v < n; ++v)
            if (u != v && !g.at(u, v).empty()) adj[u][v] = 1;
    std::vector<int> alive(n, 1);
    if (drop_root) alive[0] = 0;
    int worst = 0;
    while (true) {
        int best = -1, bd = 0;
        for (int v = 0; v < n; ++v) {
            if (!alive[v] || (!drop_root && v == 0)) continue;
            int d = 0;
            for (int w = 0; w < n; ++w) d += alive[w] && adj[v][w];
            if (best < 0 || d < bd) {
                best = v;
                bd = d;
            }
        }
        if (best < 0) break;
        worst = std::max(worst, bd);
        std::vector<int> nb;
        for (int w = 0; w < n; ++w)
            if (alive[w] && adj[best][w]) nb.push_back(w);
        for (int a : nb)
            for (int b : nb)
                if (a != b) adj[a][b] = 1;
        alive[best] = 0;
    }
    return worst;
}

}  // namespace

bool Evaluator::fixed_root_is_cheap(const CanonicalDiagram& d) const {
    return max_width(d.cells(), true) <= 1;
}

VectorXd Evaluator::eliminate_all(const CanonicalDiagram& d) {
    const CellMatrix& g = d.cells();
    int V = g.size();
    Elim el(*this, V);
    for (int u = 0; u < V; ++u) {
        const Cell& l = g.at(u, u);
        if (!l.empty()) el.mul_unary(u, diag_power(l.p, l.q));
        for (int v = u + 1; v < V; ++v) {
            const Cell& c = g.at(u, v);
            if (!c.empty()) el.add_binary(u, v, {&power(c.p, c.q), nullptr, u});
        }
    }
    el.run(0);
    VectorXd r = el.unary[0] ? *el.unary[0] : VectorXd::Ones(n_);
    return r * el.scalar;
}

double Evaluator::eliminate_fixed(const CanonicalDiagram& d, int r) {
    const CellMatrix& g = d.cells();
    int V = g.size();
    Elim el(*this, V);
    el.alive[0] = 0;
    const Cell& rl = g.at(0, 0);
    if (!rl.empty()) el.scalar *= weight(rl.p, rl.q, A_(r, r));
    for (int u = 0; u < V; ++u) {
        if (u > 0) {
            const Cell& l = g.at(u, u);
            if (!l.empty()) el.mul_unary(u, diag_power(l.p, l.q));
        }
        for (int v = u + 1; v < V; ++v) {
            const Cell& c = g.at(u, v);
            if (c.empty()) continue;
            if (u == 0) {
                VectorXd row(n_);
                for (int j = 0; j < n_; ++j) row[j] = weight(c.p, c.q, A_(r, j));
                el.mul_unary(v, row);
            } else {
                el.add_binary(u, v, {&power(c.p, c.q), nullptr, u});
            }
        }
    }
    el.run(-1);
    return el.scalar;
}

double Evaluator::eliminate_scalar(const CanonicalDiagram& d) {
    const CellMatrix& g = d.cells();
    int V = g.size();
    Elim el(*this, V);
    for (int u = 0; u < V; ++u) {
        const Cell& l = g.at(u, u);
        if (!l.empty()) el.mul_unary(u, diag_power(l.p, l.q));
        for (int v = u + 1; v < V; ++v) {
            const Cell& c = g.at(u, v);
            if (!c.empty()) el.add_binary(u, v, {&power(c.p, c.q), nullptr, u});
        }
    }
    el.run(-1);
    return el.scalar;
}

// ---------------------------------------------------------------- public

VectorXd Evaluator::repeated(const DiagramRef& d) {
    if (!d->rooted()) throw KindError("repeated(): vector diagram expected");
    auto it = tilde_memo_.find(d->key());
    if (it != tilde_memo_.end()) return it->second;
    VectorXd r = d->forest_shaped() ? forest_root_vector(*d) : eliminate_all(*d);
    tilde_memo_.emplace(d->key(), r);
    return r;
}

VectorXd Evaluator::repeated_at(const DiagramRef& d, const std::vector<int>& roots) {
    if (!d->rooted()) throw KindError("repeated_at(): vector diagram expected");
    VectorXd out(Eigen::Index(roots.size()));
    bool cached = tilde_memo_.count(d->key()) > 0;
    if (cached || d->forest_shaped() || !fixed_root_is_cheap(*d) || roots.size() * 8 > size_t(n_)) {
        VectorXd full = repeated(d);
        for (size_t i = 0; i < roots.size(); ++i) out[Eigen::Index(i)] = full[roots[i]];
        return out;
    }
    for (size_t i = 0; i < roots.size(); ++i) out[Eigen::Index(i)] = eliminate_fixed(*d, roots[i]);
    return out;
}

double Evaluator::repeated_scalar(const DiagramRef& d) {
    if (d->rooted()) throw KindError("repeated_scalar(): scalar diagram expected");
    if (d->vertex_count() == 0) return 1.0;
    auto it = scalar_memo_.find("S" + d->key());
    if (it != scalar_memo_.end()) return it->second;
    double s = d->forest_shaped() ? forest_scalar(*d) : eliminate_scalar(*d);
    scalar_memo_.emplace("S" + d->key(), s);
    return s;
}

VectorXd Evaluator::injective(const DiagramRef& d) {
    std::vector<int> all(n_);
    for (int i = 0; i < n_; ++i) all[i] = i;
    if (use_naive()) return naive_injective(*d, all);
    if (d->vertex_count() > n_) return VectorXd::Zero(n_);
    VectorXd out = VectorXd::Zero(n_);
    const DiagramExpression rl = injective_from_repeated(d);
    for (const auto& [k, t] : rl.terms())
        out += t.coefficient.constant_term().get_d() * repeated(t.diagram);
    return out;
}

VectorXd Evaluator::injective_at(const DiagramRef& d, const std::vector<int>& roots) {
    for (int r : roots)
        if (r < 0 || r >= n_) throw PreconditionError("coordinate out of range");
    if (use_naive()) return naive_injective(*d, roots);
    VectorXd out = VectorXd::Zero(Eigen::Index(roots.size()));
    if (d->vertex_count() > n_) return out;
    const DiagramExpression rl = injective_from_repeated(d);
    for (const auto& [k, t] : rl.terms())
        out += t.coefficient.constant_term().get_d() * repeated_at(t.diagram, roots);
    return out;
}

double Evaluator::injective_scalar(const DiagramRef& d) {
    if (d->rooted()) throw KindError("injective_scalar(): scalar diagram expected");
    if (use_naive()) return naive_injective_scalar(*d);
    if (d->vertex_count() > n_) return 0.0;
    double s = 0.0;
    const DiagramExpression rl = injective_from_repeated(d);
    for (const auto& [k, t] : rl.terms())
        s += t.coefficient.constant_term().get_d() * repeated_scalar(t.diagram);
    return s;
}

VectorXd Evaluator::vector(const DiagramExpression& e) {
    if (e.kind() != Kind::vector) throw KindError("vector(): vector expression expected");
    VectorXd out = VectorXd::Zero(n_);
    for (const auto& [k, t] : e.terms()) {
        double c = t.coefficient.evaluate(n_);
        out += c * (e.basis() == Basis::injective ? injective(t.diagram) : repeated(t.diagram));
    }
    return out;
}

VectorXd Evaluator::vector_at(const DiagramExpression& e, const std::vector<int>& roots) {
    if (e.kind() != Kind::vector) throw KindError("vector_at(): vector expression expected");
    VectorXd out = VectorXd::Zero(Eigen::Index(roots.size()));
    for (const auto& [k, t] : e.terms()) {
        double c = t.coefficient.evaluate(n_);
        out += c * (e.basis() == Basis::injective ? injective_at(t.diagram, roots)
                                                  : repeated_at(t.diagram, roots));
    }
    return out;
}

double Evaluator::scalar(const DiagramExpression& e) {
    if (e.kind() != Kind::scalar) throw KindError("scalar(): scalar expression expected");
    double s = 0.0;
    for (const auto& [k, t] : e.terms()) {
        double c = t.coefficient.evaluate(n_);
        s += c * (e.basis() == Basis::injective ? injective_scalar(t.diagram) : repeated_scalar(t.diagram));
    }
    return s;
}

Evaluation evaluate(const DiagramExpression& e, const EvaluationContext& ctx) {
    if (!ctx.A) throw PreconditionError("evaluation context has no matrix");
    Evaluator ev(*ctx.A, ctx.mode);
    Evaluation r;
    if (e.kind() == Kind::scalar) {
        r.is_scalar = true;
        r.scalar = ev.scalar(e);
    } else {
        r.vector = ev.vector(e);
    }
    return r;
}

}  // namespace fdc
