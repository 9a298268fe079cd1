#include "fdc/harness.hpp"

#include "fdc/algebra.hpp"
#include "fdc/errors.hpp"
#include "fdc/evaluate.hpp"
#include "fdc/hermite.hpp"
#include "fdc/rng.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <numeric>

namespace fdc {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

double median(std::vector<double> v) {
    if (v.empty()) throw PreconditionError("median of an empty sample");
    std::sort(v.begin(), v.end());
    size_t m = v.size() / 2;
    return v.size() % 2 ? v[m] : 0.5 * (v[m - 1] + v[m]);
}

double mean(const std::vector<double>& v) {
    if (v.empty()) throw PreconditionError("mean of an empty sample");
    return std::accumulate(v.begin(), v.end(), 0.0) / double(v.size());
}

double standard_error(const std::vector<double>& v) {
    if (v.size() < 2) return 0.0;
    double m = mean(v), s = 0.0;
    for (double x : v) s += (x - m) * (x - m);
    return std::sqrt(s / double(v.size() - 1) / double(v.size()));
}

double loglog_slope(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size() || x.size() < 2) throw PreconditionError("slope needs two or more paired points");
    std::vector<double> lx, ly;
    for (size_t i = 0; i < x.size(); ++i) {
        if (x[i] <= 0 || y[i] <= 0) throw PreconditionError("log-log slope needs positive values");
        lx.push_back(std::log(x[i]));
        ly.push_back(std::log(y[i]));
    }
    double mx = mean(lx), my = mean(ly), sxy = 0, sxx = 0;
    for (size_t i = 0; i < lx.size(); ++i) {
        sxy += (lx[i] - mx) * (ly[i] - my);
        sxx += (lx[i] - mx) * (lx[i] - mx);
    }
    return sxy / sxx;
}

double ks_two_sample(std::vector<double> a, std::vector<double> b) {
    if (a.empty() || b.empty()) throw PreconditionError("KS distance needs two nonempty samples");
    std::sort(a.begin(), a.end());
    std::sort(b.begin(), b.end());
    size_t i = 0, j = 0;
    double d = 0.0;
    const double na = double(a.size()), nb = double(b.size());
    while (i < a.size() && j < b.size()) {
        double x = std::min(a[i], b[j]);
        while (i < a.size() && a[i] <= x) ++i;
        while (j < b.size() && b[j] <= x) ++j;
        d = std::max(d, std::abs(double(i) / na - double(j) / nb));
    }
    return d;
}

double ks_standard_normal(std::vector<double> a) {
    if (a.empty()) throw PreconditionError("KS distance needs a nonempty sample");
    std::sort(a.begin(), a.end());
    const double n = double(a.size());
    double d = 0.0;
    for (size_t i = 0; i < a.size(); ++i) {
        double F = 0.5 * std::erfc(-a[i] / std::sqrt(2.0));
        d = std::max({d, std::abs(F - double(i) / n), std::abs(double(i + 1) / n - F)});
    }
    return d;
}

json CheckRecord::to_json() const {
    return json{{"check", check}, {"params", params},       {"predicted", predicted},
                {"observed", observed}, {"tolerance", tolerance}, {"pass", pass}};
}

// ---------------------------------------------------------------------------

TreeState asymptotic_state_of(const DiagramRef& d) {
    if (!d->rooted()) throw KindError("moment factors must be vector diagrams");
    if (d->is_tree()) return TreeState::of(d);
    TreeState out;
    StripResult r = strip_hanging(DiagramExpression::of(d));
    for (const auto& [k, t] : r.asymptotic.terms()) {
        if (classify(t.coefficient, *t.diagram) == Order::Negligible) continue;
        if (!t.diagram->is_tree())
            throw PreconditionError("order-one diagram without a tree limit: " + t.diagram->key());
        out.add(t.diagram, t.coefficient.constant_term());
    }
    return out;
}

Rational predicted_moment(const MomentSpec& spec) {
    std::map<int, TreeState> per;
    for (const auto& f : spec.factors) {
        TreeState s = asymptotic_state_of(f.diagram);
        auto it = per.find(f.coordinate);
        if (it == per.end()) per.emplace(f.coordinate, s);
        else it->second = it->second * s;
    }
    Rational p = 1;
    for (const auto& [c, s] : per) p *= expectation(s);
    return p;
}

double MomentEstimate::z() const {
    double diff = empirical - predicted.get_d();
    if (stderr_ == 0.0) return diff == 0.0 ? 0.0 : INFINITY;
    return diff / stderr_;
}

namespace {

std::uint64_t rep_seed(std::uint64_t base, int rep) {
    auto b = CounterRng(base, streams::test_cases).block(std::uint64_t(rep));
    return (std::uint64_t(b[0]) << 32) | b[1];
}

}  // namespace

MomentEstimate mc_joint_moment(const MomentSpec& spec, const MatrixEnsemble& ens, int reps) {
    MomentEstimate est;
    est.predicted = predicted_moment(spec);
    std::vector<double> samples;
    for (int r = 0; r < reps; ++r) {
        MatrixEnsemble e = ens;
        e.seed = rep_seed(ens.seed, r);
        MatrixXd A = sample_wigner(e);
        Evaluator ev(A);
        double prod = 1.0;
        for (const auto& f : spec.factors) {
            if (f.coordinate < 0 || f.coordinate >= e.n) throw PreconditionError("coordinate out of range");
            prod *= ev.injective_at(f.diagram, {f.coordinate})[0];
        }
        samples.push_back(prod);
    }
    est.empirical = mean(samples);
    est.stderr_ = standard_error(samples);
    return est;
}

BatteryMoments mc_battery_moments(const std::vector<DiagramRef>& battery, const MatrixEnsemble& ens, int reps,
                                  int coordinates) {
    const size_t k = battery.size();
    if (coordinates < 1 || coordinates > ens.n) throw PreconditionError("bad coordinate count");
    std::vector<TreeState> states;
    for (const auto& d : battery) states.push_back(asymptotic_state_of(d));
    BatteryMoments out;
    out.predicted.assign(k, std::vector<Rational>(k, 0));
    for (size_t a = 0; a < k; ++a)
        for (size_t b = 0; b < k; ++b) out.predicted[a][b] = expectation(states[a] * states[b]);

    std::vector<int> coords(coordinates);
    std::iota(coords.begin(), coords.end(), 0);
    std::vector<std::vector<std::vector<double>>> samples(k, std::vector<std::vector<double>>(k));
    for (int r = 0; r < reps; ++r) {
        MatrixEnsemble e = ens;
        e.seed = rep_seed(ens.seed, r);
        MatrixXd A = sample_wigner(e);
        Evaluator ev(A);
        std::vector<VectorXd> vals;
        for (const auto& d : battery) vals.push_back(ev.injective_at(d, coords));
        for (size_t a = 0; a < k; ++a)
            for (size_t b = a; b < k; ++b) samples[a][b].push_back(vals[a].dot(vals[b]) / double(coordinates));
    }
    out.moment.assign(k, std::vector<double>(k, 0.0));
    out.stderr_.assign(k, std::vector<double>(k, 0.0));
    for (size_t a = 0; a < k; ++a)
        for (size_t b = a; b < k; ++b) {
            out.moment[a][b] = out.moment[b][a] = mean(samples[a][b]);
            out.stderr_[a][b] = out.stderr_[b][a] = standard_error(samples[a][b]);
        }
    return out;
}

std::vector<DiagramRef> proper_rooted_diagrams(int max_vertices) {
    if (max_vertices < 1 || max_vertices > 6) throw BudgetError("proper diagram enumeration is limited to 6 vertices");
    std::map<std::string, DiagramRef> seen;
    for (int v = 1; v <= max_vertices; ++v) {
        std::vector<std::pair<int, int>> pairs;
        for (int a = 0; a < v; ++a)
            for (int b = a + 1; b < v; ++b) pairs.push_back({a, b});
        for (std::uint64_t mask = 0; mask < (std::uint64_t(1) << pairs.size()); ++mask) {
            Diagram d;
            d.vertex_count = v;
            d.root = 0;
            std::vector<int> deg(v, 0);
            for (size_t k = 0; k < pairs.size(); ++k)
                if ((mask >> k) & 1) {
                    d.add_edge(pairs[k].first, pairs[k].second);
                    deg[pairs[k].first]++;
                    deg[pairs[k].second]++;
                }
            bool ok = true;
            for (int x = 1; x < v; ++x)
                if (deg[x] == 0) ok = false;
            if (!ok) continue;
            DiagramRef c = canonicalize(d);
            seen.emplace(c->key(), c);
        }
    }
    std::vector<DiagramRef> out;
    for (auto& [k, d] : seen) out.push_back(d);
    return out;
}

// ---------------------------------------------------------------------------

Diagram Traversal::diagram() const {
    Diagram d;
    d.vertex_count = vertex_count;
    d.root = 0;
    for (const auto& w : walks)
        for (size_t j = 0; j + 1 < w.size(); ++j) d.add_edge(w[j], w[j + 1]);
    return d;
}

std::vector<Traversal> enumerate_all_traversals(int q, int t) {
    if (q < 1 || t < 1 || q * t > 8) throw BudgetError("traversal enumeration is limited to q * t <= 8");
    std::vector<Traversal> out;
    std::vector<std::vector<int>> walks(q, std::vector<int>(t + 1, 0));
    std::function<void(int, int, int)> rec = [&](int wi, int step, int next_id) {
        if (wi == q) {
            Traversal tr;
            tr.walks = walks;
            tr.vertex_count = next_id;
            std::map<std::pair<int, int>, int> count;
            tr.self_loop_free = tr.non_backtracking = tr.non_full_forward = true;
            for (const auto& w : walks) {
                bool repeat = false;
                for (int j = 0; j < t; ++j) {
                    if (w[j] == w[j + 1]) tr.self_loop_free = false;
                    count[{std::min(w[j], w[j + 1]), std::max(w[j], w[j + 1])}]++;
                    if (j >= 1 && w[j + 1] == w[j - 1]) tr.non_backtracking = false;
                }
                for (int a = 0; a <= t && !repeat; ++a)
                    for (int b = a + 1; b <= t; ++b)
                        if (w[a] == w[b]) repeat = true;
                if (!repeat) tr.non_full_forward = false;
            }
            tr.even = true;
            for (const auto& [e, c] : count)
                if (c % 2) tr.even = false;
            out.push_back(std::move(tr));
            return;
        }
        if (step > t) {
            rec(wi + 1, 1, next_id);
            return;
        }
        for (int v = 0; v <= next_id; ++v) {
            walks[wi][step] = v;
            rec(wi, step + 1, v == next_id ? next_id + 1 : next_id);
        }
    };
    rec(0, 1, 1);
    return out;
}

std::vector<Traversal> enumerate_traversals(int q, int t) {
    std::vector<Traversal> all = enumerate_all_traversals(q, t), out;
    for (auto& tr : all)
        if (tr.in_family()) out.push_back(std::move(tr));
    return out;
}

WalkCheck walk_decomposition_check(int q, int t, int n) {
    ExhaustiveRademacher ens(n, true);
    const long s = ens.scale();
    WalkCheck r;
    DiagramExpression path = DiagramExpression::of(shapes::path(t));
    r.lhs = ens.expectation([&](const SignMatrix& S) {
        std::vector<Surd> prev(n, ens.one()), cur = ens.matvec(S, prev);
        for (int k = 1; k < t; ++k) {
            auto next = ens.matvec(S, cur);
            for (int i = 0; i < n; ++i) next[i] -= prev[i];
            prev = std::move(cur);
            cur = std::move(next);
        }
        Surd diff = cur[0] - ens.values(path, S)[0];
        Surd p = ens.one();
        for (int i = 0; i < q; ++i) p *= diff;
        return p;
    });
    auto family = enumerate_traversals(q, t);
    r.traversal_count = family.size();
    r.rhs = ens.zero();
    for (const auto& tr : family) {
        // (n-1)(n-2)...(n-V+1) injective placements, each with E[prod A] = s^{-qt/2}
        Rational placements = 1;
        for (int v = 1; v < tr.vertex_count; ++v) placements *= (n - v);
        if (tr.vertex_count > n) placements = 0;
        Rational w = 1;
        for (int e = 0; e < q * t / 2; ++e) w /= s;
        r.rhs += Surd(placements * w, 0, s);
    }
    r.equal = r.lhs == r.rhs;
    return r;
}

// ---------------------------------------------------------------------------

mpz_class star_matching_count(int d) {
    if (d < 0 || d > 10) throw BudgetError("star matching count is limited to d <= 10");
    return cross_matching_count({d, d, d, d}, 2 * d);
}

mpz_class star_matching_bruteforce(int d) {
    if (d < 0 || d > 3) throw BudgetError("brute-force matching count is limited to d <= 3");
    const int m = 4 * d;
    std::vector<char> used(m, 0);
    std::function<mpz_class()> rec = [&]() -> mpz_class {
        int i = 0;
        while (i < m && used[i]) ++i;
        if (i == m) return 1;
        used[i] = 1;
        mpz_class total = 0;
        for (int j = i + 1; j < m; ++j)
            if (!used[j] && j / d != i / d) {
                used[j] = 1;
                total += rec();
                used[j] = 0;
            }
        used[i] = 0;
        return total;
    };
    return rec();
}

StarMoments star_moments(int d, int n) {
    StarMoments r;
    r.m2_exact = exact_second_moment(canonicalize(shapes::extended_star(d)));
    r.m2 = 0;
    for (const auto& [tk, c] : r.m2_exact.terms()) {
        if (tk % 2) throw ConsistencyError("unexpected half-integer power in a second moment");
        Rational p = 1;
        for (int i = 0; i < std::abs(tk / 2); ++i) p *= n;
        r.m2 += tk >= 0 ? Rational(c / p) : Rational(c * p);
    }
    mpz_class f;
    mpz_fac_ui(f.get_mpz_t(), unsigned(d));
    r.m4_prediction = Rational(3 * f * f) + Rational(star_matching_count(d)) / n;
    r.m4_prediction.canonicalize();
    return r;
}

// ---------------------------------------------------------------------------

namespace {

MatrixXd variant_matrix(int n, std::uint64_t seed) {
    MatrixEnsemble e;
    e.n = n;
    e.seed = seed;
    e.offdiag = OffDiagLaw::rademacher;
    e.diag = DiagLaw::zero;
    e.rademacher_variant = true;
    return sample_wigner(e);
}

}  // namespace

PowerIterationStats long_run_power_iteration_check(int n, int T, std::uint64_t seed) {
    PowerIterationStats st;
    st.n = n;
    st.T = T;
    MatrixXd A = variant_matrix(n, seed);
    RunResult r = run_debiased_power(T, A);
    const auto& x = r.iterates;
    st.ks_final = ks_standard_normal(std::vector<double>(x[T].data(), x[T].data() + n));
    for (int t = 1; t <= T; ++t) {
        st.second_moments.push_back(x[t].squaredNorm() / n);
        for (int s = 1; s < t; ++s) st.max_cross_correlation = std::max(st.max_cross_correlation, std::abs(x[s].dot(x[t]) / n));
    }
    return st;
}

double power_iteration_path_gap(int n, int t, std::uint64_t seed) {
    MatrixXd A = variant_matrix(n, seed);
    RunResult r = run_debiased_power(t, A);
    Evaluator ev(A);
    VectorXd z = ev.injective(canonicalize(shapes::path(t)));
    return (r.iterates[t] - z).cwiseAbs().maxCoeff();
}

}  // namespace fdc
