#include "fdc/engine.hpp"
#include "fdc/errors.hpp"
#include "fdc/harness.hpp"
#include "fdc/program.hpp"
#include "fdc/state_evolution.hpp"

#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace fdc;
using nlohmann::json;

namespace {

Diagram make_diagram(int vertices, std::optional<int> root, const std::vector<std::vector<int>>& edges,
                     const std::vector<std::vector<int>>& two_labeled) {
    Diagram d;
    d.vertex_count = vertices;
    d.root = root;
    auto add = [&](const std::vector<int>& e, EdgeLabel label) {
        if (e.size() < 2 || e.size() > 3) throw ConfigError("edges are (u, v) or (u, v, multiplicity)");
        d.add_edge(e[0], e[1], e.size() == 3 ? e[2] : 1, label);
    };
    for (const auto& e : edges) add(e, EdgeLabel::plain);
    for (const auto& e : two_labeled) add(e, EdgeLabel::two);
    return d;
}

py::dict classify_diagram(int vertices, std::optional<int> root, const std::vector<std::vector<int>>& edges,
                  const std::vector<std::vector<int>>& two_labeled) {
    DiagramRef d = canonicalize(make_diagram(vertices, root, edges, two_labeled));
    Order order = classify(Coefficient(1), *d);
    py::dict r;
    r["key"] = d->key();
    r["aut"] = d->aut();
    r["isolated"] = d->isolated_count();
    r["order_statistic"] = order_statistic(*d);
    r["classification"] = std::string(to_string(order));
    r["tree"] = d->is_tree();
    if (d->rooted() && order != Order::Negligible) {
        TreeState lim = asymptotic_state_of(d);
        r["limit"] = lim.str();
        r["variance"] = to_string(inner_product(lim, lim));
    }
    return r;
}

py::list evolve(const std::string& program_json) {
    GfomProgram p = program_from_json(json::parse(program_json));
    auto X = p.preset == PresetKind::iamp ? iamp_objective(p.us).W : gfom_asymptotic_run(p);
    py::list out;
    for (size_t t = 0; t < X.size(); ++t) {
        py::dict s;
        s["t"] = t;
        s["state"] = X[t].str();
        s["support"] = X[t].size();
        s["mean"] = to_string(expectation(X[t]));
        s["second_moment"] = to_string(expectation(X[t] * X[t]));
        out.append(s);
    }
    return out;
}

py::dict simulate(const std::string& program_json, int n, std::uint64_t seed, const std::string& ensemble_json,
                  bool asymptotic_onsager) {
    GfomProgram p = program_from_json(json::parse(program_json));
    MatrixEnsemble ens = ensemble_from_json(json::parse(ensemble_json), n, seed);
    RunResult r;
    {
        py::gil_scoped_release release;
        r = run_program(p, sample_wigner(ens), asymptotic_onsager ? OnsagerMode::asymptotic : OnsagerMode::empirical);
    }
    py::dict out;
    out["iterates"] = r.iterates;
    out["outputs"] = r.outputs;
    out["onsager"] = r.onsager;
    if (r.objective) out["objective"] = *r.objective;
    out["program_hash"] = p.hash();
    return out;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
    m.doc() = "Fourier diagram calculus for iterations on Wigner matrices";

    // Translators run newest first, so the base class goes in first.
    py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
    py::register_exception<ConfigError>(m, "ConfigError", PyExc_ValueError);
    py::register_exception<StructuralError>(m, "StructuralError", PyExc_ValueError);
    py::register_exception<BudgetError>(m, "BudgetError", PyExc_RuntimeError);

    m.def("classify", &classify_diagram, py::arg("vertices"), py::arg("root") = 0,
          py::arg("edges") = std::vector<std::vector<int>>{}, py::arg("two_labeled") = std::vector<std::vector<int>>{},
          "Canonical key, |Aut|, classification and Gaussian-space limit of a diagram. root=None gives a scalar diagram.");
    m.def("evolve", &evolve, py::arg("program_json"), "Symbolic tree states X_0..X_T of a program given as JSON.");
    m.def("simulate", &simulate, py::arg("program_json"), py::arg("n"), py::arg("seed") = 0,
          py::arg("ensemble_json") = "{}", py::arg("asymptotic_onsager") = false,
          "Run a program on one sampled Wigner matrix.");
    m.def("star_matching_count", [](int d) { return star_matching_count(d).get_str(); }, py::arg("d"));
    m.def(
        "walk_decomposition",
        [](int q, int t, int n) {
            auto w = walk_decomposition_check(q, t, n);
            return py::make_tuple(w.lhs.str(), w.rhs.str(), w.equal);
        },
        py::arg("q"), py::arg("t"), py::arg("n"));
}
