#include "fdc/engine.hpp"

#include "fdc/errors.hpp"
#include "fdc/rng.hpp"
#include "fdc/state_evolution.hpp"

#include <chrono>
#include <cmath>

namespace fdc {

using Eigen::MatrixXd;
using Eigen::VectorXd;
using nlohmann::json;

namespace {

// Double-precision copy of a history polynomial for hot loops.
struct NumPoly {
    struct Mono {
        double c;
        std::vector<std::pair<int, int>> factors;  // (variable, exponent)
    };
    std::vector<Mono> monos;

    explicit NumPoly(const HistoryPolynomial& p) {
        for (const auto& [e, c] : p.terms()) {
            Mono m{c.get_d(), {}};
            for (int i = 0; i < int(e.size()); ++i)
                if (e[i] > 0) m.factors.push_back({i, e[i]});
            monos.push_back(std::move(m));
        }
    }
    double operator()(const double* w) const {
        double s = 0.0;
        for (const auto& m : monos) {
            double v = m.c;
            for (auto [i, k] : m.factors)
                for (int r = 0; r < k; ++r) v *= w[i];
            s += v;
        }
        return s;
    }
};

VectorXd apply_pointwise(const NumPoly& f, const std::vector<VectorXd>& hist, size_t upto) {
    const Eigen::Index n = hist[0].size();
    VectorXd out(n);
    std::vector<double> w(upto + 1);
    for (Eigen::Index i = 0; i < n; ++i) {
        for (size_t s = 0; s <= upto; ++s) w[s] = hist[s][i];
        out[i] = f(w.data());
    }
    return out;
}

void check_finite(const VectorXd& v, int step) {
    if (!v.allFinite()) throw NumericError("iterate is not finite", step);
}

void check_square(const MatrixXd& A) {
    if (A.rows() != A.cols() || A.rows() == 0) throw PreconditionError("matrix must be square and nonempty");
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

}  // namespace

void MatrixEnsemble::validate() const {
    if (n < 1) throw ConfigError("n must be positive");
    if (rademacher_variant && n < 2) throw ConfigError("the 1/sqrt(n-1) variant needs n >= 2");
}

json ensemble_to_json(const MatrixEnsemble& e) {
    static const char* off[] = {"rademacher", "gaussian", "uniform_centered"};
    static const char* dg[] = {"zero", "same", "gaussian"};
    return json{{"n", e.n},
                {"offdiag", off[int(e.offdiag)]},
                {"diag", dg[int(e.diag)]},
                {"rademacher_variant", e.rademacher_variant},
                {"seed", e.seed}};
}

MatrixEnsemble ensemble_from_json(const json& j, int n, std::uint64_t seed) {
    MatrixEnsemble e;
    e.n = n;
    e.seed = seed;
    if (!j.is_object()) throw ConfigError("ensemble must be an object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        const std::string& k = it.key();
        const json& v = it.value();
        if (k == "offdiag") {
            std::string s = v.get<std::string>();
            if (s == "rademacher") e.offdiag = OffDiagLaw::rademacher;
            else if (s == "gaussian") e.offdiag = OffDiagLaw::gaussian;
            else if (s == "uniform_centered") e.offdiag = OffDiagLaw::uniform_centered;
            else throw ConfigError("unknown offdiag law '" + s + "'");
        } else if (k == "diag") {
            std::string s = v.get<std::string>();
            if (s == "zero") e.diag = DiagLaw::zero;
            else if (s == "same") e.diag = DiagLaw::same;
            else if (s == "gaussian") e.diag = DiagLaw::gaussian;
            else throw ConfigError("unknown diag law '" + s + "'");
        } else if (k == "rademacher_variant") {
            e.rademacher_variant = v.get<bool>();
        } else {
            throw ConfigError("unknown ensemble key '" + k + "'");
        }
    }
    e.validate();
    return e;
}

MatrixXd sample_wigner(const MatrixEnsemble& ens) {
    ens.validate();
    const int n = ens.n;
    const double scale = 1.0 / std::sqrt(double(ens.rademacher_variant ? n - 1 : n));
    CounterRng rng(ens.seed, streams::matrix);
    auto draw = [&](std::uint64_t idx) {
        switch (ens.offdiag) {
            case OffDiagLaw::rademacher: return rng.coin(idx) ? scale : -scale;
            case OffDiagLaw::gaussian: return rng.normal(idx) * scale;
            case OffDiagLaw::uniform_centered: return (2.0 * rng.uniform(idx) - 1.0) * std::sqrt(3.0) * scale;
        }
        return 0.0;
    };
    MatrixXd A(n, n);
    for (int j = 0; j < n; ++j)
        for (int i = 0; i < j; ++i) A(i, j) = A(j, i) = draw(std::uint64_t(i) * std::uint64_t(n) + std::uint64_t(j));
    for (int i = 0; i < n; ++i) {
        std::uint64_t idx = std::uint64_t(i) * std::uint64_t(n) + std::uint64_t(i);
        switch (ens.diag) {
            case DiagLaw::zero: A(i, i) = 0.0; break;
            case DiagLaw::same: A(i, i) = draw(idx); break;
            case DiagLaw::gaussian: A(i, i) = rng.normal(idx) / std::sqrt(double(n)); break;
        }
    }
    return A;
}

json RunResult::summary() const {
    auto stats = [](const VectorXd& v) {
        const double n = double(v.size());
        return json{{"mean", v.sum() / n}, {"second_moment", v.squaredNorm() / n}, {"max_abs", v.cwiseAbs().maxCoeff()}};
    };
    json its = json::array();
    for (size_t t = 0; t < iterates.size(); ++t) {
        json s = stats(iterates[t]);
        s["t"] = t;
        its.push_back(s);
    }
    json outs = json::array();
    for (size_t t = 0; t < outputs.size(); ++t) {
        json s = stats(outputs[t]);
        s["t"] = t;
        outs.push_back(s);
    }
    json j{{"seed", meta.seed}, {"ensemble", meta.ensemble}, {"program_hash", meta.program_hash}, {"iterates", its}};
    if (!outputs.empty()) j["outputs"] = outs;
    if (!onsager.empty()) j["onsager"] = onsager;
    if (objective) j["objective"] = *objective;
    return j;
}

RunResult run_amp(const std::vector<HistoryPolynomial>& fs, const MatrixXd& A, OnsagerMode mode,
                  const std::vector<HistoryPolynomial>& outputs) {
    check_square(A);
    auto t0 = std::chrono::steady_clock::now();
    const Eigen::Index n = A.rows();
    const size_t T = fs.size();
    RunResult r;
    r.iterates.push_back(VectorXd::Ones(n));
    r.onsager.assign(T + 1, std::vector<double>(T, 0.0));
    if (mode == OnsagerMode::asymptotic) {
        auto ev = amp_state_evolution(fs);
        auto b = onsager_coefficients(fs, ev.states);
        for (size_t s = 0; s <= T; ++s)
            for (size_t t = 0; t < T; ++t) r.onsager[s][t] = b[s][t].get_d();
    }
    std::vector<VectorXd> fvals;
    for (size_t t = 0; t < T; ++t) {
        if (fs[t].highest_variable() > int(t))
            throw PreconditionError("f_" + std::to_string(t) + " uses a future iterate");
        fvals.push_back(apply_pointwise(NumPoly(fs[t]), r.iterates, t));
        VectorXd next = A * fvals.back();
        for (size_t s = 1; s <= t; ++s) {
            if (mode == OnsagerMode::empirical) {
                HistoryPolynomial d = fs[t].derivative(int(s));
                r.onsager[s][t] = d.is_zero() ? 0.0 : apply_pointwise(NumPoly(d), r.iterates, t).mean();
            }
            if (r.onsager[s][t] != 0.0) next -= r.onsager[s][t] * fvals[s - 1];
        }
        check_finite(next, int(t));
        r.iterates.push_back(std::move(next));
    }
    for (size_t t = 0; t < outputs.size() && t < r.iterates.size(); ++t) {
        r.outputs.push_back(apply_pointwise(NumPoly(outputs[t]), r.iterates, t));
        check_finite(r.outputs.back(), int(t));
    }
    r.meta.wall_seconds = seconds_since(t0);
    return r;
}

RunResult run_gfom(const GfomProgram& program, const MatrixXd& A, OnsagerMode mode) {
    program.validate();
    check_square(A);
    if (!program.steps.empty() && program.pure_amp()) {
        std::vector<HistoryPolynomial> fs;
        for (const auto& s : program.steps) fs.push_back(s.poly);
        RunResult r = run_amp(fs, A, mode, program.outputs);
        r.meta.program_hash = program.hash();
        return r;
    }
    auto t0 = std::chrono::steady_clock::now();
    RunResult r;
    r.iterates.push_back(VectorXd::Ones(A.rows()));
    for (size_t t = 0; t < program.steps.size(); ++t) {
        const Step& s = program.steps[t];
        VectorXd next = s.op == StepOp::matvec ? VectorXd(A * r.iterates.back())
                                               : apply_pointwise(NumPoly(s.poly), r.iterates, t);
        check_finite(next, int(t));
        r.iterates.push_back(std::move(next));
    }
    r.meta.program_hash = program.hash();
    r.meta.wall_seconds = seconds_since(t0);
    return r;
}

RunResult run_debiased_power(int T, const MatrixXd& A) {
    return run_gfom(GfomProgram::debiased_power(T), A);
}

BpResult run_bp(const std::vector<HistoryPolynomial>& fs, const std::vector<HistoryPolynomial>& outputs,
                const MatrixXd& A, bool keep_messages) {
    check_square(A);
    const Eigen::Index n = A.rows();
    if (n > kBpMaxDimension)
        throw BudgetError("belief propagation stores n x n messages; n = " + std::to_string(n) + " exceeds " +
                          std::to_string(kBpMaxDimension));
    auto t0 = std::chrono::steady_clock::now();
    const size_t T = fs.size();
    if (T == 0) throw PreconditionError("bp needs at least one nonlinearity");
    for (size_t t = 0; t < T; ++t)
        if (fs[t].highest_variable() > int(t))
            throw PreconditionError("f_" + std::to_string(t) + " uses a future iterate");

    MatrixXd B = A;
    B.diagonal().setZero();
    BpResult out;
    RunResult& r = out.run;
    r.iterates.push_back(VectorXd::Ones(n));

    const double one = 1.0;
    MatrixXd M = MatrixXd::Constant(n, n, NumPoly(fs[0])(&one));
    if (keep_messages) out.messages.push_back(M);
    std::vector<MatrixXd> fields;  // cavity fields u^1..u^t
    for (size_t t = 1; t <= T; ++t) {
        MatrixXd Mt = M.transpose();  // Mt(i, k) = m_{k->i}
        VectorXd w = B.cwiseProduct(Mt).rowwise().sum();
        check_finite(w, int(t) - 1);
        r.iterates.push_back(w);
        if (t == T) break;
        MatrixXd U(n, n);
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) U(i, j) = w[i] - B(i, j) * Mt(i, j);
        fields.push_back(std::move(U));
        NumPoly f(fs[t]);
        std::vector<double> h(t + 1);
        h[0] = 1.0;
        for (Eigen::Index j = 0; j < n; ++j)
            for (Eigen::Index i = 0; i < n; ++i) {
                for (size_t s = 1; s <= t; ++s) h[s] = fields[s - 1](i, j);
                M(i, j) = f(h.data());
            }
        for (Eigen::Index i = 0; i < n; ++i) M(i, i) = 0.0;
        if (!M.allFinite()) throw NumericError("message is not finite", int(t));
        if (keep_messages) out.messages.push_back(M);
    }
    for (size_t t = 0; t < outputs.size() && t < r.iterates.size(); ++t) {
        r.outputs.push_back(apply_pointwise(NumPoly(outputs[t]), r.iterates, t));
        check_finite(r.outputs.back(), int(t));
    }
    r.meta.wall_seconds = seconds_since(t0);
    return out;
}

IampRun run_iamp(const std::vector<HistoryPolynomial>& us, const MatrixXd& A, OnsagerMode mode) {
    GfomProgram p = GfomProgram::iamp(us);
    IampRun out;
    out.run = run_amp(p.fs, A, mode);
    out.run.meta.program_hash = p.hash();
    const int T = int(us.size());
    const auto& w = out.run.iterates;
    out.u.assign(T + 1, VectorXd());
    out.x = VectorXd::Zero(A.rows());
    for (int t = 1; t <= T; ++t) {
        if (p.us[t - 1].highest_variable() >= t)
            throw PreconditionError("u_" + std::to_string(t) + " must only use earlier iterates");
        out.u[t] = apply_pointwise(NumPoly(p.us[t - 1]), w, size_t(t - 1));
        out.x += w[t].cwiseProduct(out.u[t]);
    }
    out.objective = out.x.dot(A * out.x) / double(A.rows());
    out.run.objective = out.objective;
    return out;
}

RunResult run_program(const GfomProgram& program, const MatrixXd& A, OnsagerMode mode) {
    program.validate();
    switch (program.preset) {
        case PresetKind::bp: {
            RunResult r = run_bp(program.fs, program.outputs, A).run;
            r.meta.program_hash = program.hash();
            return r;
        }
        case PresetKind::iamp: return run_iamp(program.us, A, mode).run;
        default: return run_gfom(program, A, mode);
    }
}

}  // namespace fdc
