#include "fdc/algebra.hpp"
#include "fdc/engine.hpp"
#include "fdc/errors.hpp"
#include "fdc/evaluate.hpp"

#include <doctest.h>

#include <cmath>

using namespace fdc;
using Eigen::MatrixXd;
using Eigen::VectorXd;

namespace {

MatrixEnsemble ens(int n, std::uint64_t seed, OffDiagLaw law = OffDiagLaw::rademacher, DiagLaw diag = DiagLaw::zero) {
    MatrixEnsemble e;
    e.n = n;
    e.seed = seed;
    e.offdiag = law;
    e.diag = diag;
    return e;
}

HistoryPolynomial var(int s, int vars) { return HistoryPolynomial::variable(s, vars); }

}  // namespace

TEST_CASE("Wigner sampling") {
    MatrixXd A = sample_wigner(ens(2, 1));
    CHECK(std::abs(std::abs(A(0, 1)) - 1 / std::sqrt(2.0)) < 1e-15);
    CHECK(A(0, 1) == A(1, 0));
    CHECK(A(0, 0) == 0.0);
    CHECK(A(1, 1) == 0.0);

    MatrixXd G = sample_wigner(ens(1000, 2, OffDiagLaw::gaussian));
    CHECK(G.isApprox(G.transpose()));
    double s2 = 0;
    for (int j = 0; j < 1000; ++j)
        for (int i = 0; i < j; ++i) s2 += G(i, j) * G(i, j);
    s2 /= 1000.0 * 999.0 / 2.0;
    CHECK(std::abs(s2 * 1000 - 1) < 0.05);

    MatrixXd U = sample_wigner(ens(500, 3, OffDiagLaw::uniform_centered, DiagLaw::same));
    CHECK(U.cwiseAbs().maxCoeff() <= std::sqrt(3.0 / 500) + 1e-12);
    CHECK(U.diagonal().cwiseAbs().maxCoeff() > 0);

    MatrixEnsemble v = ens(10, 4);
    v.rademacher_variant = true;
    MatrixXd R = sample_wigner(v);
    for (int i = 0; i < 10; ++i)
        for (int j = 0; j < 10; ++j)
            if (i != j) CHECK(std::abs(std::abs(R(i, j)) - 1 / 3.0) < 1e-15);

    CHECK(sample_wigner(ens(50, 9)) == sample_wigner(ens(50, 9)));
    CHECK(sample_wigner(ens(50, 9)) != sample_wigner(ens(50, 10)));
    CHECK_THROWS_AS(sample_wigner(ens(0, 1)), ConfigError);
    CHECK_THROWS_AS(ensemble_from_json({{"offdiag", "cauchy"}}, 10, 1), ConfigError);
    CHECK_THROWS_AS(ensemble_from_json({{"bogus", 1}}, 10, 1), ConfigError);
    auto e2 = ensemble_from_json(ensemble_to_json(ens(7, 3, OffDiagLaw::gaussian, DiagLaw::gaussian)).at("offdiag").is_string()
                                     ? nlohmann::json{{"offdiag", "gaussian"}, {"diag", "gaussian"}}
                                     : nlohmann::json::object(),
                                 7, 3);
    CHECK(ensemble_to_json(e2) == ensemble_to_json(ens(7, 3, OffDiagLaw::gaussian, DiagLaw::gaussian)));
}

TEST_CASE("GFOM runs") {
    MatrixXd A(2, 2);
    A << 0, 0.3, 0.3, 0;
    GfomProgram p;
    p.steps.push_back({StepOp::matvec, {}});
    auto r = run_gfom(p, A);
    CHECK(r.iterates[1] == VectorXd::Constant(2, 0.3));

    MatrixXd B = sample_wigner(ens(20, 5));
    auto sq = run_gfom(GfomProgram::square_example(), B);
    DiagramExpression e = multiply_by_A(DiagramExpression::of(shapes::singleton()));
    DiagramExpression e3 = multiply_by_A(pointwise_product({e, e}));
    Evaluator ev(B);
    VectorXd z = ev.vector(e3);
    CHECK((z - sq.iterates[3]).cwiseAbs().maxCoeff() < 1e-9);

    MatrixXd C(2, 2);
    C << 0, 1, 1, 0;  // +-1/sqrt(n-1) at n = 2
    auto dp = run_debiased_power(2, C);
    CHECK(dp.iterates[2] == VectorXd::Zero(2));

    GfomProgram blow;
    blow.steps.push_back({StepOp::matvec, {}});
    HistoryPolynomial big(2);
    big.add_term({0, 1}, Rational(mpz_class("1" + std::string(300, '0'))));
    blow.steps.push_back({StepOp::pointwise, big});
    HistoryPolynomial sq2(3);
    sq2.add_term({0, 0, 2}, 1);
    blow.steps.push_back({StepOp::pointwise, sq2});
    try {
        run_gfom(blow, B);
        CHECK(false);
    } catch (const NumericError& err) {
        CHECK(err.step() == 2);
    }
}

TEST_CASE("AMP and debiased power agree") {
    MatrixXd A = sample_wigner(ens(200, 6));
    std::vector<HistoryPolynomial> fs;
    for (int t = 0; t < 6; ++t) fs.push_back(var(t, t + 1));
    auto a = run_amp(fs, A);
    auto d = run_debiased_power(6, A);
    for (int t = 0; t <= 6; ++t) CHECK(a.iterates[t] == d.iterates[t]);
    for (int t = 1; t < 6; ++t) CHECK(a.onsager[t][t] == 1.0);

    // asymptotic Onsager coefficients for f(w) = w^2 + w
    std::vector<HistoryPolynomial> g{var(0, 1)};
    HistoryPolynomial q(2);
    q.add_term({0, 2}, 1);
    q.add_term({0, 1}, 1);
    g.push_back(q);
    auto asy = run_amp(g, A, OnsagerMode::asymptotic);
    CHECK(asy.onsager[1][1] == 1.0);
    auto emp = run_amp(g, A, OnsagerMode::empirical);
    CHECK(std::abs(emp.onsager[1][1] - 1.0) < 0.5);
}

TEST_CASE("belief propagation basics") {
    const int n = 30;
    MatrixXd A = sample_wigner(ens(n, 8, OffDiagLaw::gaussian, DiagLaw::gaussian));
    std::vector<HistoryPolynomial> fs{var(0, 1), var(1, 2)};
    auto bp = run_bp(fs, {var(0, 1), var(1, 2), var(2, 3)}, A, true);
    REQUIRE(bp.messages.size() == 2);
    for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
            if (i == j) continue;
            double s = 0;
            for (int k = 0; k < n; ++k)
                if (k != j && k != i) s += A(i, k);
            CHECK(std::abs(bp.messages[1](i, j) - s) < 1e-12);
        }
    // w^1 = A 1 without the diagonal
    MatrixXd B = A;
    B.diagonal().setZero();
    CHECK((bp.run.iterates[1] - B * VectorXd::Ones(n)).cwiseAbs().maxCoeff() < 1e-12);
    CHECK(bp.run.outputs.size() == 3);

    CHECK_THROWS(run_bp(fs, {}, MatrixXd::Zero(2, 3)));
}

TEST_CASE("IAMP numeric run") {
    // a single run fluctuates at the n^{-1/2} scale with a large constant, so average seeds
    const int n = 1000, T = 3, seeds = 8;
    std::vector<HistoryPolynomial> us;
    for (int t = 1; t <= T; ++t) us.push_back(HistoryPolynomial::constant(1, t));
    double mean = 0, mean1 = 0;
    for (int s = 0; s < seeds; ++s) {
        MatrixXd A = sample_wigner(ens(n, 100 + s));
        mean += run_iamp(us, A).objective / seeds;
        mean1 += run_iamp({HistoryPolynomial::constant(1, 1)}, A).objective / seeds;
    }
    CHECK(std::abs(mean - 2.0 * (T - 1)) < 10.0 * T / std::sqrt(double(n)));
    CHECK(std::abs(mean1) < 10.0 / std::sqrt(double(n)));
}

TEST_CASE("run summaries are deterministic") {
    MatrixXd A = sample_wigner(ens(100, 3));
    auto a = run_program(GfomProgram::benchmark(), A).summary().dump();
    auto b = run_program(GfomProgram::benchmark(), A).summary().dump();
    CHECK(a == b);
}
