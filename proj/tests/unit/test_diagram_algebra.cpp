#include "fdc/algebra.hpp"
#include "fdc/errors.hpp"
#include "fdc/evaluate.hpp"
#include "test_support.hpp"

#include <doctest.h>

#include <random>

using namespace fdc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixXd random_symmetric(int n, std::mt19937_64& rng, bool zero_diag, bool rademacher = false) {
    std::normal_distribution<double> g(0.0, 1.0);
    MatrixXd A(n, n);
    for (int i = 0; i < n; ++i)
        for (int j = i; j < n; ++j) {
            double x = rademacher ? ((rng() & 1) ? 1.0 : -1.0) : g(rng);
            A(i, j) = A(j, i) = x / std::sqrt(double(n));
        }
    if (zero_diag) A.diagonal().setZero();
    return A;
}

double rel_err(const VectorXd& a, const VectorXd& b) {
    double scale = std::max({1.0, a.cwiseAbs().maxCoeff(), b.cwiseAbs().maxCoeff()});
    return (a - b).cwiseAbs().maxCoeff() / scale;
}

DiagramExpression E(const Diagram& d, const Coefficient& c = 1) { return DiagramExpression::of(d, c); }

Diagram path_with_cells(std::vector<int> mult) {
    Diagram d = shapes::singleton();
    d.vertex_count = int(mult.size()) + 1;
    for (size_t i = 0; i < mult.size(); ++i) d.add_edge(int(i), int(i) + 1, mult[i]);
    return d;
}

}  // namespace

TEST_CASE("multiply_by_A on the singleton") {
    auto r = multiply_by_A(E(shapes::singleton()));
    DiagramExpression want = E(shapes::edge()) + E(shapes::self_loop());
    CHECK(r == want);
}

TEST_CASE("A(A1)^2 expansion under zero diagonal") {
    auto x1 = multiply_by_A(E(shapes::singleton()));
    auto x2 = pointwise_product({x1, x1});
    auto x3 = multiply_by_A(x2);
    // Drop every diagram carrying a self-loop (they vanish on a zero diagonal).
    DiagramExpression kept(Kind::vector);
    for (const auto& [k, t] : x3.terms())
        if (!t.diagram->has_loops()) kept.add(t.diagram, t.coefficient);
    Diagram triple = shapes::singleton();
    triple.vertex_count = 2;
    triple.add_edge(0, 1, 3);
    DiagramExpression want = E(shapes::one_two_tree()) + E(path_with_cells({2, 1}), 2) +
                             E(path_with_cells({1, 2})) + E(triple);
    CHECK(kept == want);

    std::mt19937_64 rng(1);
    MatrixXd A = random_symmetric(20, rng, true);
    Evaluator ev(A);
    VectorXd ones = VectorXd::Ones(20);
    VectorXd a1 = A * ones;
    VectorXd direct = A * a1.cwiseProduct(a1);
    CHECK(rel_err(ev.vector(want), direct) < 1e-9);
}

TEST_CASE("pointwise products of edges") {
    auto e = E(shapes::edge());
    CHECK(pointwise_product({e, e}) == E(shapes::star(2)) + E(shapes::double_edge()));
    Diagram de_plus_edge = shapes::star(2);
    de_plus_edge.edges[0].multiplicity = 2;
    Diagram triple = shapes::singleton();
    triple.vertex_count = 2;
    triple.add_edge(0, 1, 3);
    CHECK(pointwise_product({e, e, e}) == E(shapes::star(3)) + E(de_plus_edge, 3) + E(triple));
    auto t = E(shapes::one_two_tree()) + E(shapes::cycle(3), Coefficient::power(1, 3));
    CHECK(pointwise_product({E(shapes::singleton()), t}) == t);

    std::mt19937_64 rng(2);
    MatrixXd A = random_symmetric(30, rng, true);
    Evaluator ev(A);
    VectorXd a1 = A * VectorXd::Ones(30);
    CHECK(rel_err(ev.vector(pointwise_product({e, e, e})), a1.cwiseProduct(a1).cwiseProduct(a1)) < 1e-9);
}

TEST_CASE("vertex budget is enforced") {
    auto t = E(shapes::path(4));
    CHECK_THROWS_AS(pointwise_product({t, t, t, t}, 12), BudgetError);
}

TEST_CASE("scalar products") {
    auto se = E(shapes::scalar_edge());
    Diagram two_edges;
    two_edges.vertex_count = 4;
    two_edges.add_edge(0, 1).add_edge(2, 3);
    Diagram sde;
    sde.vertex_count = 2;
    sde.add_edge(0, 1, 2);
    Diagram p2;
    p2.vertex_count = 3;
    p2.add_edge(0, 1).add_edge(1, 2);
    DiagramExpression want = E(two_edges) + E(sde, 2) + E(p2, 4);
    auto got = scalar_product({se, se});
    CHECK(got == want);
    std::mt19937_64 rng(4);
    MatrixXd A = random_symmetric(20, rng, true);
    Evaluator ev(A);
    double s = ev.scalar(se);
    CHECK(ev.scalar(got) == doctest::Approx(s * s).epsilon(1e-10));

    Diagram empty;
    CHECK(scalar_product({E(empty), se}) == se);
    auto mixed = scalar_product({E(shapes::edge()), se});
    CHECK(mixed.kind() == Kind::vector);
    Diagram edge_float = shapes::edge();
    edge_float.vertex_count = 4;
    edge_float.add_edge(2, 3);
    CHECK(mixed.coefficient_of(edge_float) == Coefficient(1));
    VectorXd lhs = ev.vector(mixed), rhs = ev.vector(E(shapes::edge())) * s;
    CHECK(rel_err(lhs, rhs) < 1e-9);
}

TEST_CASE("symbolic operations are exact numerically") {
    std::mt19937_64 rng(17);
    for (int n : {8, 12, 20}) {
        MatrixXd A = random_symmetric(n, rng, false);
        Evaluator ev(A);
        VectorXd ones = VectorXd::Ones(n);
        for (int trial = 0; trial < 25; ++trial) {
            int v = 1 + int(rng() % 4);
            auto d = E(testing::random_diagram(rng, v, int(rng() % 3)));
            VectorXd x = ev.vector(d);
            CHECK(rel_err(ev.vector(multiply_by_A(d)), A * x) < 1e-9);
            auto d2 = E(testing::random_diagram(rng, 1 + int(rng() % 3), int(rng() % 2)));
            VectorXd y = ev.vector(d2);
            CHECK(rel_err(ev.vector(pointwise_product({d, d2})), x.cwiseProduct(y)) < 1e-9);
            double avg = x.mean();
            double got = ev.scalar(unroot_average(d));
            CHECK(std::abs(got - avg) <= 1e-9 * std::max(1.0, std::abs(avg)));
        }
    }
}

TEST_CASE("naive and moebius evaluation agree") {
    std::mt19937_64 rng(21);
    MatrixXd A = random_symmetric(20, rng, true, true);
    Evaluator naive(A, EvalMode::naive), moeb(A, EvalMode::moebius);
    auto t = canonicalize(shapes::one_two_tree());
    CHECK((naive.injective(t) - moeb.injective(t)).cwiseAbs().maxCoeff() <= 1e-10);

    MatrixXd B = random_symmetric(9, rng, false);
    Evaluator nb(B, EvalMode::naive), mb(B, EvalMode::moebius);
    for (int trial = 0; trial < 60; ++trial) {
        int v = 1 + int(rng() % 5);
        bool scalar = trial % 4 == 0 && v > 1;
        auto d = canonicalize(testing::random_diagram(rng, v, int(rng() % 4), scalar));
        if (scalar) {
            double a = nb.injective_scalar(d), b = mb.injective_scalar(d);
            CHECK(std::abs(a - b) <= 1e-9 * std::max(1.0, std::abs(a)));
        } else {
            CHECK(rel_err(nb.injective(d), mb.injective(d)) < 1e-10);
        }
    }
}

TEST_CASE("coordinate subsets agree with full evaluation") {
    std::mt19937_64 rng(22);
    MatrixXd A = random_symmetric(40, rng, true);
    Evaluator ev(A);
    std::vector<int> roots{0, 5, 17, 39};
    for (auto d : {shapes::path(3), shapes::cycle(4), shapes::cycle(3), shapes::one_two_tree()}) {
        auto c = canonicalize(d);
        Evaluator fresh(A);
        VectorXd full = ev.injective(c), part = fresh.injective_at(c, roots);
        for (size_t i = 0; i < roots.size(); ++i) CHECK(part[int(i)] == doctest::Approx(full[roots[i]]).epsilon(1e-10));
    }
}

TEST_CASE("evaluation small cases") {
    MatrixXd A(2, 2);
    A << 0, 0.3, 0.3, 0;
    EvaluationContext ctx{&A, EvalMode::automatic};
    auto e = evaluate(E(shapes::edge()), ctx);
    CHECK(e.vector[0] == doctest::Approx(0.3));
    CHECK(e.vector[1] == doctest::Approx(0.3));
    auto p = evaluate(E(shapes::path(2)), ctx);
    CHECK(p.vector.cwiseAbs().maxCoeff() == 0.0);
    MatrixXd B(2, 2);
    B << 0, 1, 2, 0;
    CHECK_THROWS_AS(evaluate(E(shapes::edge()), EvaluationContext{&B}), PreconditionError);
}

TEST_CASE("hanging double edge removal") {
    auto r = remove_hanging_double_edge({1, canonicalize(shapes::double_edge())});
    DiagramExpression want = E(shapes::singleton(), Coefficient(1) - Coefficient::power(2, 1)) +
                             E(shapes::two_labeled_edge());
    CHECK(r == want);
    CHECK_THROWS_AS(remove_hanging_double_edge({1, canonicalize(shapes::edge())}), PreconditionError);

    auto s = strip_hanging(E(path_with_cells({1, 2})));
    CHECK(s.asymptotic == E(shapes::edge()));
    for (int depth = 1; depth <= 4; ++depth) {
        std::vector<int> m(depth, 2);
        CHECK(strip_hanging(E(path_with_cells(m))).asymptotic == E(shapes::singleton()));
    }
    // double tree: root with two hanging double edges
    Diagram dt = shapes::star(2);
    for (auto& e : dt.edges) e.multiplicity = 2;
    CHECK(strip_hanging(E(dt)).asymptotic == E(shapes::singleton()));

    std::mt19937_64 rng(8);
    MatrixXd A = random_symmetric(20, rng, false);
    Evaluator ev(A, EvalMode::naive);
    for (auto d : {shapes::double_edge(), path_with_cells({1, 2}), path_with_cells({2, 1, 2}), dt}) {
        auto c = canonicalize(d);
        auto exact = remove_hanging_double_edge({1, c});
        CHECK(rel_err(ev.vector(exact), ev.vector(E(d))) < 1e-9);
        CHECK(rel_err(ev.vector(strip_hanging(E(d)).exact), ev.vector(E(d))) < 1e-9);
    }
}

TEST_CASE("repeated-label basis and its inverse") {
    auto edge = canonicalize(shapes::edge());
    CHECK(to_injective(injective_from_repeated(edge)) == E(shapes::edge()));
    DiagramExpression want(Kind::vector, Basis::repeated_label);
    want.add(edge, 1);
    want.add(canonicalize(shapes::self_loop()), -1);
    CHECK(injective_from_repeated(edge) == want);
    CHECK(repeated_label_expand(edge) == E(shapes::edge()) + E(shapes::self_loop()));
    CHECK(repeated_label_expand(canonicalize(shapes::singleton())) == E(shapes::singleton()));
    auto st = repeated_label_expand(canonicalize(shapes::star(2)));
    CHECK(st.coefficient_of(shapes::star(2)) == Coefficient(1));
    CHECK(st.coefficient_of(shapes::double_edge()) == Coefficient(1));

    std::mt19937_64 rng(12);
    for (int trial = 0; trial < 120; ++trial) {
        int v = 1 + int(rng() % 5);
        auto d = canonicalize(testing::random_diagram(rng, v, int(rng() % 3), trial % 3 == 0 && v > 1));
        CHECK(to_injective(injective_from_repeated(d)) == DiagramExpression::of(d));
    }

    MatrixXd A = random_symmetric(25, rng, false);
    Evaluator naive(A, EvalMode::naive), ev(A, EvalMode::moebius);
    auto p2 = canonicalize(shapes::path(2));
    CHECK(rel_err(ev.vector(injective_from_repeated(p2)), naive.injective(p2)) < 1e-10);
    CHECK(rel_err(ev.vector(repeated_label_expand(p2)), ev.repeated(p2)) < 1e-10);
}

TEST_CASE("unroot average") {
    CHECK(unroot_average(E(shapes::singleton())) == E(Diagram{}));
    DiagramExpression want(Kind::scalar);
    want.add(shapes::scalar_edge(), Coefficient::power(2));
    CHECK(unroot_average(E(shapes::edge())) == want);
    // n = 3 hand check: (1/n) sum_i (A1)_i = (2/n) sum_{i<j} A_ij
    MatrixXd A(3, 3);
    A << 0, 1, 2, 1, 0, 3, 2, 3, 0;
    Evaluator ev(A);
    CHECK(ev.scalar(unroot_average(E(shapes::edge()))) == doctest::Approx(2.0 * 6.0 / 3.0));
}

TEST_CASE("exact second moment formula") {
    CHECK(exact_second_moment(canonicalize(shapes::edge())) == Coefficient(1) - Coefficient::power(2));
    CHECK(exact_second_moment(canonicalize(shapes::singleton())) == Coefficient(1));
    // 2(n-1)(n-2)(n-3)/n^3 = 2 - 12/n + 22/n^2 - 12/n^3
    Coefficient want = Coefficient(2) - Coefficient::power(2, 12) + Coefficient::power(4, 22) -
                       Coefficient::power(6, 12);
    CHECK(exact_second_moment(canonicalize(shapes::one_two_tree())) == want);
    CHECK_THROWS_AS(exact_second_moment(canonicalize(shapes::double_edge())), PreconditionError);
}
