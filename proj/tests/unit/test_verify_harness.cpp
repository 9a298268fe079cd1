#include "fdc/algebra.hpp"
#include "fdc/errors.hpp"
#include "fdc/harness.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace fdc;

namespace {

DiagramExpression E(const Diagram& d) { return DiagramExpression::of(d); }

}  // namespace

TEST_CASE("surd arithmetic") {
    Surd x(1, 2, 3), y(Rational(1, 2), -1, 3);
    CHECK(x * y == Surd(Rational(1, 2) - 6, -1 + 1, 3));
    CHECK((x + y).a() == Rational(3, 2));
    CHECK(Surd(0, 1, 4) == Surd(2, 0, 4));
    CHECK(std::abs(x.value() - (1 + 2 * std::sqrt(3.0))) < 1e-12);
}

TEST_CASE("exhaustive Rademacher oracle") {
    CHECK(exhaustive_rademacher_expectation({E(shapes::singleton())}, 4) == Surd(1, 0, 4));
    CHECK(exhaustive_rademacher_expectation({E(shapes::edge()), E(shapes::path(2))}, 4).is_zero());
    CHECK(exhaustive_rademacher_expectation({E(shapes::edge()), E(shapes::edge())}, 4) == Surd(Rational(3, 4), 0, 4));
    CHECK(exhaustive_rademacher_expectation({E(shapes::edge()), E(shapes::edge())}, 5) == Surd(Rational(4, 5), 0, 5));
    // a two-labeled edge vanishes identically for +-1/sqrt(n) entries
    CHECK(exhaustive_rademacher_expectation({E(shapes::two_labeled_edge()), E(shapes::two_labeled_edge())}, 4)
              .is_zero());
    CHECK_THROWS_AS(ExhaustiveRademacher(6), PreconditionError);

    // half-integer coefficient powers are kept exactly
    ExhaustiveRademacher ens(5);
    CHECK(ens.coefficient(Coefficient::power(1, 2)) == Surd(0, Rational(2, 5), 5));
    CHECK(ens.coefficient(Coefficient::power(-2, 1)) == Surd(5, 0, 5));
}

TEST_CASE("variance formula and orthogonality on small proper diagrams") {
    auto ds = proper_rooted_diagrams(4);
    CHECK(ds.size() > 8);
    for (int n : {4, 5}) {
        for (const auto& d : ds) {
            Coefficient m = exact_second_moment(d);
            ExhaustiveRademacher ens(n);
            Surd pred = ens.coefficient(m);
            CHECK(exhaustive_rademacher_expectation({DiagramExpression::of(d), DiagramExpression::of(d)}, n) == pred);
        }
    }
    for (size_t a = 0; a < ds.size(); ++a)
        for (size_t b = a + 1; b < ds.size(); ++b)
            CHECK(exhaustive_rademacher_expectation({DiagramExpression::of(ds[a]), DiagramExpression::of(ds[b])}, 4)
                      .is_zero());
}

TEST_CASE("A (A 1)^2 expansion holds exactly on every sign pattern") {
    DiagramExpression x1 = multiply_by_A(E(shapes::singleton()));
    DiagramExpression x3 = multiply_by_A(pointwise_product({x1, x1}));
    ExhaustiveRademacher ens(4);
    for (std::uint64_t p = 0; p < ens.patterns(); ++p) {
        auto S = ens.pattern(p);
        std::vector<Surd> one(4, ens.one());
        auto a1 = ens.matvec(S, one);
        for (auto& v : a1) v = v * v;
        auto direct = ens.matvec(S, a1);
        CHECK(ens.values(x3, S) == direct);
    }
}

TEST_CASE("traversal enumeration") {
    auto all = enumerate_all_traversals(1, 3);
    // the forward path 0-1-2-3 is present but excluded from the family
    bool saw_path = false;
    for (const auto& t : all)
        if (t.walks[0] == std::vector<int>{0, 1, 2, 3}) {
            saw_path = true;
            CHECK_FALSE(t.non_full_forward);
            CHECK_FALSE(t.in_family());
        }
    CHECK(saw_path);
    for (const auto& t : enumerate_traversals(2, 3)) {
        CHECK(t.even);
        CHECK(t.non_backtracking);
        CHECK(t.self_loop_free);
    }
    CHECK(enumerate_traversals(1, 3).empty());
    CHECK_THROWS_AS(enumerate_all_traversals(3, 3), BudgetError);

    // the closed-form E[Z_gamma] agrees with the exhaustive oracle
    for (auto [q, t, n] : {std::tuple{2, 2, 4}, std::tuple{2, 3, 4}}) {
        for (const auto& tr : enumerate_traversals(q, t)) {
            DiagramExpression z = DiagramExpression::of(tr.diagram());
            Surd ex = exhaustive_rademacher_expectation({z}, n, 0, true);
            Rational placements = 1;
            for (int v = 1; v < tr.vertex_count; ++v) placements *= (n - v);
            Rational w = 1;
            for (int e = 0; e < q * t / 2; ++e) w /= (n - 1);
            CHECK(ex == Surd(placements * w, 0, n - 1));
        }
    }
}

TEST_CASE("walk decomposition") {
    auto r = walk_decomposition_check(2, 2, 4);
    CHECK(r.equal);
    // length-2 non-backtracking walks from the root never revisit a vertex
    CHECK(r.traversal_count == 0);
    CHECK(r.lhs.is_zero());
    // At t = 3, x_3 differs from the non-backtracking walk sum by -(A 1) / (n - 1)
    // because A_ij^3 = A_ij / (n - 1); the second moment picks up exactly 1 / (n - 1)^2.
    for (int n : {4, 5}) {
        auto r3 = walk_decomposition_check(2, 3, n);
        CHECK(r3.lhs - r3.rhs == Surd(Rational(1, (n - 1) * (n - 1)), 0, n - 1));
    }
    for (int t = 1; t <= 3; ++t) {
        auto r1 = walk_decomposition_check(1, t, 4);
        CHECK(r1.lhs.is_zero());
        CHECK(r1.rhs.is_zero());
    }
}

TEST_CASE("star matchings") {
    CHECK(star_matching_count(1) == 3);
    for (int d = 0; d <= 3; ++d) CHECK(star_matching_count(d) == star_matching_bruteforce(d));
    auto m = star_moments(2, 10);
    // |Aut| = 2, four vertices, three edges
    CHECK(m.m2 == Rational(126, 125));
    CHECK(m.m4_prediction == Rational(12) + Rational(star_matching_count(2)) / 10);
}

TEST_CASE("statistics helpers") {
    CHECK(median({3, 1, 2}) == 2);
    CHECK(median({4, 1, 2, 3}) == 2.5);
    CHECK(loglog_slope({1, 2, 4}, {1, 0.5, 0.25}) == doctest::Approx(-1));
    CHECK(ks_two_sample({1, 2, 3}, {1, 2, 3}) == 0);
    CHECK(ks_two_sample({1, 2}, {3, 4}) == 1);
    std::mt19937_64 rng(1);
    std::normal_distribution<double> g;
    std::vector<double> v(20000);
    for (auto& x : v) x = g(rng);
    CHECK(ks_standard_normal(v) < 0.02);
    for (auto& x : v) x += 1;
    CHECK(ks_standard_normal(v) > 0.3);
    CheckRecord c{"demo", {{"n", 3}}, 1.0, 1.01, 0.1, true};
    CHECK(c.to_json()["pass"] == true);
}

TEST_CASE("asymptotic limits and small Monte Carlo moments") {
    CHECK(asymptotic_state_of(canonicalize(shapes::edge())) == TreeState::of(shapes::edge()));
    CHECK(asymptotic_state_of(canonicalize(shapes::double_edge())) == TreeState::constant(1));
    CHECK(asymptotic_state_of(canonicalize(shapes::cycle(4))).empty());

    MatrixEnsemble ens;
    ens.n = 300;
    ens.seed = 5;
    MomentSpec s{{{canonicalize(shapes::edge()), 0}, {canonicalize(shapes::edge()), 0}}};
    auto est = mc_joint_moment(s, ens, 60);
    CHECK(est.predicted == 1);
    CHECK(std::abs(est.z()) < 4);

    auto bm = mc_battery_moments({canonicalize(shapes::edge()), canonicalize(shapes::one_two_tree())}, ens, 20, 8);
    CHECK(bm.predicted[1][1] == 2);
    CHECK(bm.predicted[0][1] == 0);
    CHECK(std::abs(bm.moment[1][1] - 2) < 4 * bm.stderr_[1][1] + 0.05);
}

TEST_CASE("power iteration diagnostics run") {
    auto st = long_run_power_iteration_check(400, 5, 3);
    CHECK(st.second_moments.size() == 5);
    CHECK(st.ks_final < 0.2);
    CHECK(power_iteration_path_gap(200, 2, 1) < 1.0);
}
