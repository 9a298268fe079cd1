#include "fdc/state_evolution.hpp"

#include "fdc/errors.hpp"
#include "fdc/hermite.hpp"

#include <cmath>

namespace fdc {

std::vector<TreeState> gfom_asymptotic_run(const GfomProgram& program) {
    program.validate();
    std::vector<TreeState> xs{TreeState::constant(1)};
    std::vector<TreeState> fvals;  // f_t(...) for AMP steps
    for (size_t t = 0; t < program.steps.size(); ++t) {
        const Step& s = program.steps[t];
        try {
            if (s.op == StepOp::matvec) {
                xs.push_back(plus(xs.back()) + minus(xs.back()));
            } else if (s.op == StepOp::pointwise) {
                xs.push_back(apply_polynomial(s.poly, xs));
            } else {
                TreeState f = apply_polynomial(s.poly, xs);
                TreeState next = plus(f) + minus(f);
                for (size_t k = 1; k <= t; ++k) {
                    Rational b = expectation(apply_polynomial(s.poly.derivative(int(k)), xs));
                    if (b != 0) next -= b * fvals[k - 1];
                }
                fvals.push_back(f);
                xs.push_back(next);
            }
        } catch (const BudgetError& e) {
            throw BudgetError("step " + std::to_string(t) + ": " + e.what());
        }
    }
    return xs;
}

AmpEvolution amp_state_evolution(const std::vector<HistoryPolynomial>& fs) {
    AmpEvolution r;
    r.states.push_back(TreeState::constant(1));
    for (size_t t = 0; t < fs.size(); ++t) {
        TreeState w = plus(apply_polynomial(fs[t], r.states));
        if (!w.gaussian())
            throw ConsistencyError("state W_" + std::to_string(t + 1) + " leaves the Gaussian span");
        r.states.push_back(std::move(w));
    }
    size_t T = r.states.size();
    r.covariance.assign(T, std::vector<Rational>(T, 0));
    for (size_t s = 0; s < T; ++s)
        for (size_t t = 0; t < T; ++t) r.covariance[s][t] = inner_product(r.states[s], r.states[t]);
    return r;
}

std::vector<std::vector<Rational>> onsager_coefficients(const std::vector<HistoryPolynomial>& fs,
                                                        const std::vector<TreeState>& states) {
    size_t T = fs.size();
    std::vector<std::vector<Rational>> b(T + 1, std::vector<Rational>(T, 0));
    for (size_t t = 0; t < T; ++t)
        for (size_t s = 1; s <= t; ++s)
            b[s][t] = expectation(apply_polynomial(fs[t].derivative(int(s)), states));
    return b;
}

IampEvolution iamp_objective(const std::vector<HistoryPolynomial>& us) {
    IampEvolution r;
    int T = int(us.size());
    r.W.push_back(TreeState::constant(1));
    r.U.push_back(TreeState::constant(1));
    for (int t = 0; t < T; ++t) {
        if (t > 0) {
            if (us[t - 1].highest_variable() >= t)
                throw PreconditionError("u_" + std::to_string(t) + " must only use earlier iterates");
            r.U.push_back(apply_polynomial(us[t - 1], r.W));
        }
        r.W.push_back(plus(r.U[t] * r.W[t]));
    }
    if (T > 0) {
        if (us[T - 1].highest_variable() >= T) throw PreconditionError("u_T must only use earlier iterates");
        r.U.push_back(apply_polynomial(us[T - 1], std::vector<TreeState>(r.W.begin(), r.W.begin() + T)));
    }
    for (int t = 1; t <= T; ++t) {
        const TreeState& w = r.W[t];
        if (!w.gaussian() || w.min_depth() != t || w.max_depth() != t)
            throw ConsistencyError("W_" + std::to_string(t) + " is not supported on depth-" + std::to_string(t) +
                                   " root-degree-one trees");
    }
    r.mean_u.resize(T + 1);
    r.second_w.resize(T + 1);
    r.value = 0;
    for (int t = 0; t <= T; ++t) {
        r.mean_u[t] = expectation(r.U[t]);
        r.second_w[t] = inner_product(r.W[t], r.W[t]);
        if (t >= 2) r.value += 2 * r.mean_u[t] * r.second_w[t];
    }
    for (int t = 1; t <= T; ++t) r.output += r.W[t] * r.U[t];
    r.direct_value = 2 * inner_product(r.output, plus(r.output));
    return r;
}

std::vector<double> sample_joint(const std::vector<TreeState>& xs, const std::vector<DiagramRef>& atoms,
                                 const CounterRng& rng, std::uint64_t draw) {
    std::map<std::string, std::pair<double, double>> z;  // key -> (value, variance)
    for (size_t a = 0; a < atoms.size(); ++a) {
        double var = double(atoms[a]->aut());
        z[atoms[a]->key()] = {std::sqrt(var) * rng.normal(draw * atoms.size() + a), var};
    }
    std::vector<double> out;
    out.reserve(xs.size());
    for (const auto& x : xs) {
        double s = 0.0;
        for (const auto& [k, t] : x.terms()) {
            double v = t.coef.get_d();
            for (const auto& [sigma, d] : t.tree->tree()->branches) {
                auto it = z.find(sigma->key());
                if (it == z.end()) throw PreconditionError("atom list does not cover the state");
                v *= hermite_value(d, it->second.second, it->second.first);
            }
            s += v;
        }
        out.push_back(s);
    }
    return out;
}

double sample_state(const TreeState& x, std::uint64_t seed) {
    return sample_states({x}, seed, 1)[0];
}

std::vector<double> sample_states(const std::vector<TreeState>& xs, std::uint64_t seed, int draws) {
    auto atoms = gaussian_atoms(xs);
    CounterRng rng(seed, streams::state_sampling);
    std::vector<double> out;
    out.reserve(size_t(draws) * xs.size());
    for (int d = 0; d < draws; ++d) {
        auto v = sample_joint(xs, atoms, rng, std::uint64_t(d));
        out.insert(out.end(), v.begin(), v.end());
    }
    return out;
}

}  // namespace fdc
