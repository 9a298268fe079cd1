#include "fdc/errors.hpp"
#include "fdc/hermite.hpp"
#include "fdc/program.hpp"
#include "fdc/state_evolution.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fdc;

namespace {

TreeState T(const Diagram& d, const Rational& c = 1) { return TreeState::of(d, c); }

Diagram random_tree(std::mt19937_64& rng, int max_vertices) {
    std::uniform_int_distribution<int> nv(1, max_vertices);
    return testing::random_diagram(rng, nv(rng), 0);
}

Rational small_rational(std::mt19937_64& rng) {
    std::uniform_int_distribution<int> num(-4, 4), den(1, 3);
    int a = num(rng);
    if (a == 0) a = 1;
    Rational q(a, den(rng));
    q.canonicalize();
    return q;
}

TreeState random_state(std::mt19937_64& rng, int max_terms, int max_vertices) {
    std::uniform_int_distribution<int> nt(1, max_terms);
    TreeState x;
    int k = nt(rng);
    for (int i = 0; i < k; ++i) x.add(canonicalize(random_tree(rng, max_vertices)), small_rational(rng));
    return x;
}

HistoryPolynomial random_poly(std::mt19937_64& rng, int vars, int max_degree) {
    std::uniform_int_distribution<int> nterms(1, 4), var(0, vars - 1), deg(0, max_degree);
    HistoryPolynomial p(vars);
    int k = nterms(rng);
    for (int i = 0; i < k; ++i) {
        std::vector<int> e(vars, 0);
        int d = deg(rng);
        for (int j = 0; j < d; ++j) e[var(rng)]++;
        p.add_term(e, small_rational(rng));
    }
    return p;
}

HistoryPolynomial poly(int vars, std::initializer_list<std::pair<std::vector<int>, Rational>> terms) {
    HistoryPolynomial p(vars);
    for (const auto& [e, c] : terms) p.add_term(e, c);
    return p;
}

}  // namespace

TEST_CASE("plus and minus on basic trees") {
    CHECK(plus(TreeState::constant(1)) == T(shapes::edge()));
    CHECK(minus(T(shapes::edge())) == TreeState::constant(1));
    CHECK(minus(T(shapes::star(2))).empty());
    CHECK(minus(TreeState::constant(3)).empty());
    CHECK(plus(T(shapes::star(3))) == T(shapes::extended_star(3)));
    CHECK(canonicalize(shapes::extended_star(3))->aut() == canonicalize(shapes::star(3))->aut());
}

TEST_CASE("tree products and Hermite polynomials") {
    TreeState e = T(shapes::edge());
    CHECK(e * e == T(shapes::star(2)) + TreeState::constant(1));
    CHECK(apply_polynomial(poly(1, {{{2}, 1}, {{0}, -1}}), {e}) == T(shapes::star(2)));
    CHECK(apply_polynomial(poly(2, {{{1, 0}, 1}, {{0, 1}, 1}}), {TreeState::constant(2), e}) ==
          TreeState::constant(2) + e);

    // non-isomorphic branches never match
    TreeState p2 = T(shapes::path(2));
    auto both = e * p2;
    CHECK(both.size() == 1);
    CHECK(expectation(both) == 0);

    CHECK(hermite(2, 3).c == std::vector<Rational>{-3, 0, 1});
    CHECK(hermite(3, 1).c == std::vector<Rational>{0, -3, 0, 1});
    for (int k = 0; k <= 8; ++k) CHECK(hermite(k, Rational(5, 2)) == hermite_from_matchings(k, Rational(5, 2)));
    auto h11 = hermite_product_expand({1, 1}, 2);
    CHECK(h11.size() == 2);
    CHECK(h11[2] == 1);
    CHECK(h11[0] == 2);
    CHECK(std::abs(hermite_value(4, 2.0, 1.5) - double(hermite(4, 2)(Rational(3, 2)).get_d())) < 1e-12);

    // expansion agrees with multiplying the polynomials out
    std::vector<int> ks{2, 3, 1};
    auto exp = hermite_product_expand(ks, Rational(3));
    for (Rational x : {Rational(0), Rational(1, 2), Rational(-2), Rational(7, 3)}) {
        Rational lhs = 1, rhs = 0;
        for (int k : ks) lhs *= hermite(k, 3)(x);
        for (const auto& [j, c] : exp) rhs += c * hermite(j, 3)(x);
        CHECK(lhs == rhs);
    }
}

TEST_CASE("expectations and inner products") {
    TreeState t12 = T(shapes::one_two_tree());
    CHECK(inner_product(t12, t12) == 2);
    CHECK(expectation(t12) == 0);
    CHECK(expectation(TreeState::constant(Rational(3, 4))) == Rational(3, 4));
    CHECK(inner_product(T(shapes::star(3)), T(shapes::star(3))) == 6);
    CHECK(inner_product(T(shapes::star(2)), T(shapes::path(2))) == 0);
}

TEST_CASE("small program runs") {
    GfomProgram p;
    p.steps.push_back({StepOp::matvec, {}});
    auto xs = gfom_asymptotic_run(p);
    REQUIRE(xs.size() == 2);
    CHECK(xs[1] == T(shapes::edge()));

    auto sq = gfom_asymptotic_run(GfomProgram::square_example());
    CHECK(sq[3] == T(shapes::one_two_tree()) + T(shapes::edge()));

    auto bench = gfom_asymptotic_run(GfomProgram::benchmark());
    REQUIRE(bench.size() == 6);
    CHECK(bench[3] == T(shapes::one_two_tree()) + T(shapes::edge()));
    CHECK(bench[4] == bench[3] * bench[3] - TreeState::constant(1));
    CHECK(expectation(bench[4]) == 2);
    CHECK(expectation(bench[5]) == 0);

    // debiased power iteration gives paths
    auto dp = gfom_asymptotic_run(GfomProgram::debiased_power(5));
    for (int t = 1; t <= 5; ++t) CHECK(dp[t] == T(shapes::path(t)));
}

TEST_CASE("AMP state evolution") {
    std::vector<HistoryPolynomial> ident;
    for (int t = 0; t < 5; ++t) ident.push_back(HistoryPolynomial::variable(t, t + 1));
    auto ev = amp_state_evolution(ident);
    for (int t = 1; t <= 5; ++t) {
        CHECK(ev.states[t] == T(shapes::path(t)));
        CHECK(ev.covariance[t][t] == 1);
        for (int s = 1; s < t; ++s) CHECK(ev.covariance[s][t] == 0);
    }
    auto b = onsager_coefficients(ident, ev.states);
    for (int t = 1; t < 5; ++t) CHECK(b[t][t] == 1);

    std::vector<HistoryPolynomial> sq{HistoryPolynomial::variable(0, 1), poly(2, {{{0, 2}, 1}})};
    auto ev2 = amp_state_evolution(sq);
    CHECK(ev2.covariance[2][2] == 3);
    CHECK(onsager_coefficients(sq, ev2.states)[1][1] == 0);

    // scalar recursion sigma_{t+1}^2 = E f(sigma_t Z)^2 for f(w) = w^2 + w
    std::vector<HistoryPolynomial> fs{HistoryPolynomial::variable(0, 1)};
    for (int t = 1; t < 4; ++t) {
        std::vector<int> e2(t + 1, 0), e1(t + 1, 0);
        e2[t] = 2;
        e1[t] = 1;
        fs.push_back(poly(t + 1, {{e2, 1}, {e1, 1}}));
    }
    auto ev3 = amp_state_evolution(fs);
    Rational s2 = 1;
    for (int t = 1; t < 4; ++t) {
        // E (sZ)^4 + E (sZ)^2 = 3 s^4 + s^2
        s2 = 3 * s2 * s2 + s2;
        CHECK(ev3.covariance[t + 1][t + 1] == s2);
    }

    // a non-AMP program mixing steps is rejected
    GfomProgram bad = GfomProgram::amp(ident);
    bad.steps.push_back({StepOp::matvec, {}});
    CHECK_THROWS_AS(bad.validate(), ConfigError);
}

TEST_CASE("AMP program steps agree with the Onsager-free Gaussian recursion") {
    std::vector<HistoryPolynomial> fs{HistoryPolynomial::variable(0, 1), poly(2, {{{0, 2}, 1}, {{0, 1}, 1}}),
                                      poly(3, {{{0, 1, 1}, Rational(1, 2)}, {{0, 0, 1}, 1}})};
    auto xs = gfom_asymptotic_run(GfomProgram::amp(fs));
    auto ev = amp_state_evolution(fs);
    REQUIRE(xs.size() == ev.states.size());
    for (size_t t = 0; t < xs.size(); ++t) CHECK(xs[t] == ev.states[t]);
}

TEST_CASE("IAMP objective") {
    for (int T = 1; T <= 6; ++T) {
        std::vector<HistoryPolynomial> us;
        for (int t = 1; t <= T; ++t) us.push_back(HistoryPolynomial::constant(1, t));
        auto r = iamp_objective(us);
        CHECK(r.value == 2 * (T - 1));
        CHECK(r.direct_value == r.value);
        for (int t = 1; t <= T; ++t) {
            CHECK(r.W[t] == TreeState::of(shapes::path(t)));
            CHECK(r.second_w[t] == 1);
        }
    }
    // u_2(w_1) = w_1^2
    std::vector<HistoryPolynomial> us{HistoryPolynomial::constant(1, 1), poly(2, {{{0, 2}, 1}}),
                                      HistoryPolynomial::constant(1, 3)};
    auto r = iamp_objective(us);
    CHECK(r.mean_u[2] == 1);
    CHECK(r.second_w[2] == 1);
    CHECK(r.second_w[3] == 3);
    CHECK(r.value == r.direct_value);
    CHECK(r.value == 8);

    std::vector<HistoryPolynomial> cheat{HistoryPolynomial::constant(1, 1), poly(2, {{{0, 1}, 1}})};
    cheat[1] = HistoryPolynomial::variable(2, 3);
    CHECK_THROWS_AS(iamp_objective(cheat), PreconditionError);
}

TEST_CASE("randomized Omega identities") {
    std::mt19937_64 rng(20240611);
    for (int trial = 0; trial < 200; ++trial) {
        TreeState x = random_state(rng, 10, 6), y = random_state(rng, 10, 6);
        CHECK(inner_product(plus(x), y) == inner_product(x, minus(y)));
        CHECK(inner_product(x, y) == inner_product(plus(x), plus(y)));
        CHECK(minus(plus(x)) == x);
        TreeState xm = minus(x);
        CHECK(inner_product(xm * xm, TreeState::constant(1)) <= inner_product(x * x, TreeState::constant(1)));
        // (X^-)^+ keeps exactly the root-degree-one part
        TreeState proj;
        for (const auto& [k, t] : x.terms())
            if (t.tree->tree()->branches.size() == 1 && t.tree->tree()->branches[0].second == 1)
                proj.add(t.tree, t.coef);
        CHECK(plus(xm) == proj);
    }
}

TEST_CASE("randomized Hermite rule and aut factorization") {
    std::mt19937_64 rng(99);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> nv(1, 3), dd(1, 4);
        Diagram base = testing::random_diagram(rng, nv(rng), 0);
        DiagramRef sigma = canonicalize(base);
        TreeState s = plus(TreeState::of(sigma));
        DiagramRef sig = s.terms().begin()->second.tree;
        int d = dd(rng);
        Rational a = sig->aut();
        // Z_{d copies of sigma} = h_d(Z_sigma; |Aut sigma|)
        TreeState expected = TreeState::of(join_branches({{sig, d}}));
        TreeState viaH;
        auto h = hermite(d, a);
        for (int j = 0; j <= d; ++j)
            if (h.c[j] != 0) viaH += h.c[j] * power(s, j);
        CHECK(viaH == expected);

        // |Aut tau| = prod d_sigma! |Aut sigma|^{d_sigma}, and it is the squared norm
        DiagramRef tau = canonicalize(random_tree(rng, 7));
        mpz_class prod = 1;
        for (const auto& [br, cnt] : tau->tree()->branches) {
            mpz_class f;
            mpz_fac_ui(f.get_mpz_t(), cnt);
            mpz_class p;
            mpz_pow_ui(p.get_mpz_t(), mpz_class(br->aut()).get_mpz_t(), cnt);
            prod *= f * p;
        }
        CHECK(prod == mpz_class(tau->aut()));
        CHECK(inner_product(TreeState::of(tau), TreeState::of(tau)) == Rational(mpz_class(tau->aut())));
    }
}

TEST_CASE("randomized Taylor expansion and Gaussian integration by parts") {
    std::mt19937_64 rng(7);
    for (int trial = 0; trial < 200; ++trial) {
        std::uniform_int_distribution<int> nk(1, 3);
        int k = nk(rng);
        std::vector<TreeState> ws;
        for (int j = 0; j < k; ++j) ws.push_back(plus(random_state(rng, 3, 3)));
        HistoryPolynomial f = random_poly(rng, k, 3);
        TreeState fw = apply_polynomial(f, ws);

        TreeState rhs;
        for (int s = 0; s < k; ++s) rhs += expectation(apply_polynomial(f.derivative(s), ws)) * minus(ws[s]);
        CHECK(minus(fw) == rhs);

        Rational lhs = inner_product(ws[0], fw), ipp = 0;
        for (int j = 0; j < k; ++j)
            ipp += inner_product(ws[0], ws[j]) * expectation(apply_polynomial(f.derivative(j), ws));
        CHECK(lhs == ipp);
    }
}

TEST_CASE("sampling asymptotic states") {
    CHECK(sample_state(TreeState::constant(Rational(5, 2)), 3) == doctest::Approx(2.5));
    const int N = 100000;
    auto check = [&](const TreeState& x, std::uint64_t seed) {
        auto v = sample_states({x}, seed, N);
        double m = 0, m2 = 0;
        for (double a : v) m += a;
        m /= N;
        for (double a : v) m2 += (a - m) * (a - m);
        double var = m2 / (N - 1);
        double mu = expectation(x).get_d();
        double sd = std::sqrt(var);
        double pred_var = Rational(inner_product(x, x) - expectation(x) * expectation(x)).get_d();
        CHECK(std::abs(m - mu) <= 4 * sd / std::sqrt(double(N)));
        // variance standard error from the fourth moment
        double m4 = 0;
        for (double a : v) m4 += std::pow(a - m, 4);
        m4 /= N;
        double se_var = std::sqrt(std::max(m4 - var * var, 1e-12) / N);
        CHECK(std::abs(var - pred_var) <= 4 * se_var);
    };
    check(TreeState::of(shapes::edge()), 1);
    check(TreeState::of(shapes::star(2)), 2);
    check(TreeState::of(shapes::one_two_tree()) + TreeState::of(shapes::edge()), 3);
    check(TreeState::of(shapes::star(3)) + TreeState::constant(1) + TreeState::of(shapes::path(3)), 4);

    auto v = sample_states({TreeState::of(shapes::edge())}, 11, N);
    double var = 0;
    for (double a : v) var += a * a;
    CHECK(var / N == doctest::Approx(1.0).epsilon(0.03));

    // joint sampling keeps the covariance structure
    TreeState e = TreeState::of(shapes::edge());
    auto j = sample_states({e, e * e}, 5, N);
    double c = 0;
    for (int i = 0; i < N; ++i) c += j[2 * i] * j[2 * i + 1];
    CHECK(std::abs(c / N) < 0.05);
    CHECK(sample_states({e}, 5, 10) == sample_states({e}, 5, 10));
}
