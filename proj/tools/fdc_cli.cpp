#include "fdc/algebra.hpp"
#include "fdc/engine.hpp"
#include "fdc/errors.hpp"
#include "fdc/exact.hpp"
#include "fdc/harness.hpp"
#include "fdc/program.hpp"
#include "fdc/rng.hpp"
#include "fdc/state_evolution.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <mutex>
#include <optional>
#include <random>
#include <sstream>
#include <thread>

using namespace fdc;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

constexpr int kExitOk = 0;
constexpr int kExitCheckFailed = 1;
constexpr int kExitConfig = 2;

struct Options {
    std::string config;
    std::optional<std::uint64_t> seed;
    std::optional<int> n;
    std::optional<int> reps;
    std::string out;
    int workers = 0;
    bool fresh_seeds = false;
};

// ---------------------------------------------------------------------------
// config files

json read_json_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ConfigError("cannot open '" + path + "'");
    std::stringstream ss;
    ss << in.rdbuf();
    std::string text = ss.str();
    try {
        return json::parse(text);
    } catch (const json::parse_error& e) {
        size_t line = 1, col = 1;
        for (size_t i = 0; i + 1 < e.byte && i < text.size(); ++i) {
            if (text[i] == '\n') {
                ++line;
                col = 1;
            } else {
                ++col;
            }
        }
        std::string msg = e.what();
        auto p = msg.find("syntax error");
        throw ConfigError(path + ":" + std::to_string(line) + ":" + std::to_string(col) + ": " +
                          (p == std::string::npos ? msg : msg.substr(p)));
    }
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    if (!j.is_object()) throw ConfigError(where + " must be a JSON object");
    for (auto it = j.begin(); it != j.end(); ++it) {
        if (std::none_of(allowed.begin(), allowed.end(), [&](const char* a) { return it.key() == a; }))
            throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

template <class T>
T get_or(const json& j, const char* key, T fallback) {
    if (!j.contains(key)) return fallback;
    try {
        return j.at(key).get<T>();
    } catch (const json::exception&) {
        throw ConfigError(std::string("bad value for '") + key + "'");
    }
}

std::string hash_json(const json& j) {
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : j.dump()) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

void write_file(const fs::path& p, const std::string& text) {
    if (p.has_parent_path()) fs::create_directories(p.parent_path());
    std::ofstream out(p);
    if (!out) throw ConfigError("cannot write '" + p.string() + "'");
    out << text;
}

// Results are stored by index, so the reduction order never depends on scheduling.
template <class R>
std::vector<R> parallel_map(size_t count, int workers, const std::function<R(size_t)>& fn) {
    std::vector<R> out(count);
    unsigned w = workers > 0 ? unsigned(workers) : std::max(1u, std::thread::hardware_concurrency());
    w = std::min<unsigned>(w, unsigned(std::max<size_t>(count, 1)));
    std::atomic<size_t> next{0};
    std::exception_ptr err;
    std::mutex m;
    auto body = [&] {
        for (size_t i; (i = next++) < count;) {
            try {
                out[i] = fn(i);
            } catch (...) {
                std::lock_guard<std::mutex> lock(m);
                if (!err) err = std::current_exception();
            }
        }
    };
    std::vector<std::thread> pool;
    for (unsigned k = 1; k < w; ++k) pool.emplace_back(body);
    body();
    for (auto& t : pool) t.join();
    if (err) std::rethrow_exception(err);
    return out;
}

std::uint64_t base_seed(const Options& o, std::uint64_t fallback) {
    if (o.fresh_seeds) {
        std::random_device rd;
        std::uint64_t s = CounterRng((std::uint64_t(rd()) << 32) | rd(), streams::fresh_seed).block(0)[0];
        std::cerr << "fresh seed: " << s << " (rerun with --seed " << s << ")\n";
        return s;
    }
    return o.seed.value_or(fallback);
}

// ---------------------------------------------------------------------------
// classify

Diagram diagram_from_json(const json& j) {
    reject_unknown(j, {"shape", "size", "vertices", "root", "edges"}, "diagram");
    if (j.contains("shape")) {
        std::string s = j["shape"].get<std::string>();
        int k = get_or<int>(j, "size", 1);
        if (k < 0 || k > 12) throw ConfigError("shape size out of range");
        if (s == "singleton") return shapes::singleton();
        if (s == "edge") return shapes::edge();
        if (s == "self_loop") return shapes::self_loop();
        if (s == "path") return shapes::path(k);
        if (s == "star") return shapes::star(k);
        if (s == "cycle") return shapes::cycle(k);
        if (s == "double_edge") return shapes::double_edge();
        if (s == "two_labeled_edge") return shapes::two_labeled_edge();
        if (s == "one_two_tree") return shapes::one_two_tree();
        if (s == "extended_star") return shapes::extended_star(k);
        if (s == "scalar_edge") return shapes::scalar_edge();
        throw ConfigError("unknown shape '" + s + "'");
    }
    if (!j.contains("vertices")) throw ConfigError("diagram needs 'vertices' or 'shape'");
    Diagram d;
    d.vertex_count = j["vertices"].get<int>();
    if (j.contains("root") && !j["root"].is_null()) d.root = j["root"].get<int>();
    for (const auto& e : get_or<json>(j, "edges", json::array())) {
        if (!e.is_array() || e.size() < 2 || e.size() > 4)
            throw ConfigError("edge must be [u, v] or [u, v, multiplicity] or [u, v, multiplicity, \"two\"]");
        int mult = e.size() > 2 ? e[2].get<int>() : 1;
        EdgeLabel label = EdgeLabel::plain;
        if (e.size() > 3) {
            std::string l = e[3].get<std::string>();
            if (l == "two") label = EdgeLabel::two;
            else if (l != "plain") throw ConfigError("edge label must be \"plain\" or \"two\"");
        }
        d.add_edge(e[0].get<int>(), e[1].get<int>(), mult, label);
    }
    return d;
}

std::string tree_name(const DiagramRef& d) {
    static const std::vector<std::pair<std::string, Diagram>> known = [] {
        std::vector<std::pair<std::string, Diagram>> v{{"singleton", shapes::singleton()},
                                                       {"edge", shapes::edge()},
                                                       {"(1,2)-tree", shapes::one_two_tree()}};
        for (int t = 2; t <= 6; ++t) v.push_back({std::to_string(t) + "-path", shapes::path(t)});
        for (int k = 2; k <= 5; ++k) v.push_back({std::to_string(k) + "-star", shapes::star(k)});
        return v;
    }();
    for (const auto& [name, shape] : known)
        if (canonicalize(shape)->key() == d->key()) return name;
    return d->key();
}

std::string hermite_form(const DiagramRef& d) {
    const auto& t = d->tree();
    if (!t || t->branches.empty()) return "1";
    std::ostringstream os;
    bool first = true;
    for (const auto& [br, cnt] : t->branches) {
        os << (first ? "" : " * ") << "h_" << cnt << "(Z_" << tree_name(br) << "; " << br->aut() << ")";
        first = false;
    }
    return os.str();
}

json classify_report(const Diagram& input) {
    DiagramRef d = canonicalize(input);
    Order order = classify(Coefficient(1), *d);
    json r{{"key", d->key()},
           {"kind", d->rooted() ? "vector" : "scalar"},
           {"vertices", d->vertex_count()},
           {"edges", d->edge_count()},
           {"aut", d->aut()},
           {"isolated", d->isolated_count()},
           {"order_statistic", order_statistic(*d)},
           {"classification", to_string(order)},
           {"proper", d->proper()},
           {"tree", d->is_tree()}};
    if (d->is_tree()) {
        json br = json::array();
        for (const auto& [b, cnt] : d->tree()->branches)
            br.push_back({{"branch", tree_name(b)}, {"key", b->key()}, {"count", cnt}, {"aut", b->aut()}});
        r["name"] = tree_name(d);
        r["branches"] = br;
        r["depth"] = d->tree()->depth;
    }
    if (!d->rooted()) return r;
    if (order == Order::Negligible) {
        r["asymptotic"] = "negligible";
        return r;
    }
    if (d->is_tree()) {
        r["asymptotic"] = hermite_form(d);
        r["gaussian"] = d->tree()->branches.size() == 1 && d->tree()->branches[0].second == 1;
        r["variance"] = std::to_string(d->aut());
        return r;
    }
    StripResult s = strip_hanging(DiagramExpression::of(d));
    r["after_double_edge_removal"] = s.asymptotic.str();
    try {
        TreeState lim = asymptotic_state_of(d);
        r["asymptotic"] = lim.empty() ? "negligible" : lim.str();
        r["variance"] = to_string(inner_product(lim, lim));
    } catch (const Error& e) {
        r["asymptotic"] = std::string("no tree limit: ") + e.what();
    }
    return r;
}

void print_classify(const json& r) {
    std::cout << "key            " << r["key"].get<std::string>() << "\n";
    if (r.contains("name")) std::cout << "name           " << r["name"].get<std::string>() << "\n";
    std::cout << "kind           " << r["kind"].get<std::string>() << "\n"
              << "|Aut|          " << r["aut"] << "\n"
              << "I(alpha)       " << r["isolated"] << "\n"
              << "order stat     " << r["order_statistic"] << "\n"
              << "class          " << r["classification"].get<std::string>() << (r["tree"].get<bool>() ? ", tree" : "")
              << "\n";
    if (r.contains("branches")) {
        std::cout << "branches      ";
        for (const auto& b : r["branches"]) std::cout << " " << b["count"] << " x " << b["branch"].get<std::string>();
        std::cout << "\n";
        std::cout << "depth          " << r["depth"] << "\n";
    }
    if (r.contains("after_double_edge_removal"))
        std::cout << "strip          " << r["after_double_edge_removal"].get<std::string>() << "\n";
    if (r.contains("asymptotic")) std::cout << "limit          " << r["asymptotic"].get<std::string>() << "\n";
    if (r.contains("variance")) std::cout << "variance       " << r["variance"].get<std::string>() << "\n";
}

int cmd_classify(const Options& o, const std::vector<std::string>& files) {
    std::vector<std::string> paths = files;
    if (!o.config.empty()) paths.push_back(o.config);
    if (paths.empty()) throw ConfigError("classify needs a diagram file");
    json all = json::array();
    for (const auto& p : paths) {
        json j = read_json_file(p);
        std::vector<json> ds = j.is_array() ? std::vector<json>(j.begin(), j.end()) : std::vector<json>{j};
        for (const auto& dj : ds) {
            Diagram d;
            try {
                d = diagram_from_json(dj);
            } catch (const json::exception& e) {
                throw ConfigError(p + ": " + e.what());
            } catch (const StructuralError& e) {
                throw ConfigError(p + ": " + e.what());
            }
            json r = classify_report(d);
            if (!all.empty()) std::cout << "\n";
            print_classify(r);
            all.push_back(r);
        }
    }
    if (!o.out.empty()) write_file(fs::path(o.out) / "classify.json", all.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// evolve

GfomProgram program_of(const json& j) {
    return program_from_json(j.contains("program") ? j["program"] : j);
}

int cmd_evolve(const Options& o, const std::vector<std::string>& files) {
    std::string path = !o.config.empty() ? o.config : files.empty() ? "" : files.front();
    if (path.empty()) throw ConfigError("evolve needs a program file");
    json j = read_json_file(path);
    if (j.contains("program")) reject_unknown(j, {"program", "ensemble", "n", "seeds", "seed", "onsager", "save_iterates"}, "config");
    GfomProgram prog = program_of(j);
    json out;
    out["program_hash"] = prog.hash();
    std::vector<TreeState> X;
    if (prog.preset == PresetKind::iamp) {
        IampEvolution ev = iamp_objective(prog.us);
        X = ev.W;
        out["iamp"] = {{"value", to_string(ev.value)}, {"direct_value", to_string(ev.direct_value)}};
    } else {
        X = gfom_asymptotic_run(prog);
    }
    json steps = json::array();
    for (size_t t = 0; t < X.size(); ++t) {
        Rational m = expectation(X[t]), m2 = expectation(X[t] * X[t]);
        steps.push_back({{"t", t},
                         {"support", X[t].size()},
                         {"mean", to_string(m)},
                         {"second_moment", to_string(m2)},
                         {"gaussian", X[t].gaussian()},
                         {"state", X[t].str()}});
        std::cout << "X_" << t << " = " << X[t].str() << "\n"
                  << "    support " << X[t].size() << ", E[X] = " << to_string(m) << ", E[X^2] = " << to_string(m2)
                  << (X[t].gaussian() ? ", gaussian" : "") << "\n";
    }
    json cov = json::array();
    for (size_t s = 0; s < X.size(); ++s) {
        json row = json::array();
        for (size_t t = 0; t < X.size(); ++t) row.push_back(to_string(expectation(X[s] * X[t])));
        cov.push_back(row);
    }
    out["steps"] = steps;
    out["covariance"] = cov;
    if (out.contains("iamp"))
        std::cout << "IAMP objective limit " << out["iamp"]["value"].get<std::string>() << "\n";
    if (!o.out.empty()) write_file(fs::path(o.out) / "evolve.json", out.dump(2) + "\n");
    return kExitOk;
}

// ---------------------------------------------------------------------------
// simulate

struct SimConfig {
    GfomProgram program;
    json ensemble = json::object();
    int n = 1000;
    std::vector<std::uint64_t> seeds{0};
    OnsagerMode mode = OnsagerMode::empirical;
    bool save_iterates = false;
    json raw;
};

SimConfig sim_config(const Options& o) {
    if (o.config.empty()) throw ConfigError("simulate needs --config");
    json j = read_json_file(o.config);
    reject_unknown(j, {"program", "ensemble", "n", "seeds", "seed", "onsager", "save_iterates"}, "config");
    if (!j.contains("program")) throw ConfigError("config needs 'program'");
    SimConfig c;
    c.program = program_from_json(j["program"]);
    c.ensemble = get_or<json>(j, "ensemble", json::object());
    c.n = o.n.value_or(get_or<int>(j, "n", 1000));
    if (c.n < 2) throw ConfigError("n must be at least 2");
    if (j.contains("seeds") && j.contains("seed")) throw ConfigError("give either 'seed' or 'seeds'");
    if (j.contains("seeds")) c.seeds = get_or<std::vector<std::uint64_t>>(j, "seeds", {});
    if (j.contains("seed")) c.seeds = {get_or<std::uint64_t>(j, "seed", 0)};
    if (o.seed || o.fresh_seeds) {
        std::uint64_t b = base_seed(o, 0);
        int reps = o.reps.value_or(int(c.seeds.size()));
        c.seeds.clear();
        for (int r = 0; r < reps; ++r) c.seeds.push_back(b + std::uint64_t(r));
    } else if (o.reps) {
        std::uint64_t b = c.seeds.empty() ? 0 : c.seeds.front();
        c.seeds.clear();
        for (int r = 0; r < *o.reps; ++r) c.seeds.push_back(b + std::uint64_t(r));
    }
    if (c.seeds.empty()) throw ConfigError("no seeds");
    std::string mode = get_or<std::string>(j, "onsager", "empirical");
    if (mode == "asymptotic") c.mode = OnsagerMode::asymptotic;
    else if (mode != "empirical") throw ConfigError("onsager must be 'empirical' or 'asymptotic'");
    c.save_iterates = get_or<bool>(j, "save_iterates", false);
    ensemble_from_json(c.ensemble, c.n, 0).validate();
    c.raw = j;
    c.raw["n"] = c.n;
    c.raw["seeds"] = c.seeds;
    c.raw.erase("seed");
    return c;
}

int cmd_simulate(const Options& o) {
    SimConfig c = sim_config(o);
    const std::string out = o.out.empty() ? "results" : o.out;
    const std::string config_hash = hash_json(c.raw);
    auto t0 = std::chrono::steady_clock::now();
    auto runs = parallel_map<json>(c.seeds.size(), o.workers, [&](size_t i) {
        MatrixEnsemble ens = ensemble_from_json(c.ensemble, c.n, c.seeds[i]);
        Eigen::MatrixXd A = sample_wigner(ens);
        RunResult r = run_program(c.program, A, c.mode);
        r.meta.seed = c.seeds[i];
        r.meta.ensemble = ensemble_to_json(ens);
        r.meta.program_hash = c.program.hash();
        json j = r.summary();
        j["config_hash"] = config_hash;
        if (c.save_iterates) {
            json its = json::array();
            for (const auto& v : r.iterates) its.push_back(std::vector<double>(v.data(), v.data() + v.size()));
            j["iterate_values"] = its;
        }
        return j;
    });
    double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    for (size_t i = 0; i < runs.size(); ++i)
        write_file(fs::path(out) / ("run_" + std::to_string(c.seeds[i]) + ".json"), runs[i].dump(2) + "\n");
    write_file(fs::path(out) / "config.json", c.raw.dump(2) + "\n");

    std::cout << "n=" << c.n << " seeds=" << c.seeds.size() << " program=" << c.program.hash()
              << " config=" << config_hash << "\n";
    std::cout << "  t        mean   second_moment   max_abs   (averaged over seeds)\n";
    const auto& first = runs.front()["iterates"];
    for (size_t t = 0; t < first.size(); ++t) {
        double m = 0, m2 = 0, mx = 0;
        for (const auto& r : runs) {
            m += r["iterates"][t]["mean"].get<double>();
            m2 += r["iterates"][t]["second_moment"].get<double>();
            mx += r["iterates"][t]["max_abs"].get<double>();
        }
        double k = double(runs.size());
        std::printf("%3zu %11.5f %15.5f %9.4f\n", t, m / k, m2 / k, mx / k);
    }
    if (runs.front().contains("objective")) {
        double obj = 0;
        for (const auto& r : runs) obj += r["objective"].get<double>();
        std::printf("objective %.5f\n", obj / double(runs.size()));
    }
    std::cerr << "wall time " << secs << " s\n";
    return kExitOk;
}

// ---------------------------------------------------------------------------
// verify

MatrixEnsemble zero_diag(int n, std::uint64_t seed, OffDiagLaw law = OffDiagLaw::rademacher, bool variant = false) {
    MatrixEnsemble e;
    e.n = n;
    e.seed = seed;
    e.offdiag = law;
    e.diag = DiagLaw::zero;
    e.rademacher_variant = variant;
    return e;
}

CheckRecord record(std::string name, json params, json predicted, json observed, json tol, bool pass) {
    CheckRecord r;
    r.check = std::move(name);
    r.params = std::move(params);
    r.predicted = std::move(predicted);
    r.observed = std::move(observed);
    r.tolerance = std::move(tol);
    r.pass = pass;
    return r;
}

using Suite = std::function<std::vector<CheckRecord>(const Options&)>;

std::vector<CheckRecord> suite_exact(const Options&) {
    std::vector<CheckRecord> out;
    auto ds = proper_rooted_diagrams(4);
    for (int n : {4, 5}) {
        ExhaustiveRademacher ens(n);
        int bad = 0;
        for (const auto& d : ds)
            if (exhaustive_rademacher_expectation({DiagramExpression::of(d), DiagramExpression::of(d)}, n) !=
                ens.coefficient(exact_second_moment(d)))
                ++bad;
        out.push_back(record("variance_formula", {{"n", n}, {"diagrams", ds.size()}}, 0, bad, 0, bad == 0));
    }
    int nonzero = 0;
    for (size_t a = 0; a < ds.size(); ++a)
        for (size_t b = a + 1; b < ds.size(); ++b)
            nonzero += !exhaustive_rademacher_expectation({DiagramExpression::of(ds[a]), DiagramExpression::of(ds[b])}, 4)
                            .is_zero();
    out.push_back(record("orthogonality", {{"n", 4}}, 0, nonzero, 0, nonzero == 0));
    return out;
}

std::vector<CheckRecord> suite_walk(const Options&) {
    std::vector<CheckRecord> out;
    for (auto [q, t, n] : {std::tuple{2, 2, 4}, std::tuple{2, 3, 4}, std::tuple{2, 3, 5}}) {
        auto w = walk_decomposition_check(q, t, n);
        out.push_back(record("walk_decomposition", {{"q", q}, {"t", t}, {"n", n}, {"traversals", w.traversal_count}},
                             w.rhs.str(), w.lhs.str(), 0, w.equal));
    }
    return out;
}

std::vector<CheckRecord> suite_star(const Options&) {
    std::vector<CheckRecord> out;
    out.push_back(record("star_matching_count", {{"d", 1}}, 3, star_matching_count(1).get_str(), 0,
                         star_matching_count(1) == 3));
    for (int d = 2; d <= 3; ++d) {
        auto dp = star_matching_count(d), bf = star_matching_bruteforce(d);
        out.push_back(record("star_matching_dp", {{"d", d}}, bf.get_str(), dp.get_str(), 0, dp == bf));
    }
    for (int d = 1; d <= 8; ++d) {
        mpz_class f, p3;
        mpz_fac_ui(f.get_mpz_t(), d);
        mpz_ui_pow_ui(p3.get_mpz_t(), 3, d);
        mpz_class bound = p3 * f * f;
        bool lower = star_matching_count(d) >= bound;
        out.push_back(record("star_lower_bound", {{"d", d}}, bound.get_str(), star_matching_count(d).get_str(),
                             nullptr, lower));
    }
    return out;
}

std::vector<CheckRecord> suite_classification(const Options& o) {
    const int n = o.n.value_or(2000), reps = o.reps.value_or(200);
    const std::uint64_t seed = base_seed(o, 3003);
    std::vector<std::pair<std::string, DiagramRef>> battery{{"edge", canonicalize(shapes::edge())},
                                                            {"2-path", canonicalize(shapes::path(2))},
                                                            {"(1,2)-tree", canonicalize(shapes::one_two_tree())},
                                                            {"2-star", canonicalize(shapes::star(2))},
                                                            {"3-path", canonicalize(shapes::path(3))}};
    std::vector<DiagramRef> ds;
    for (auto& b : battery) ds.push_back(b.second);
    auto m = mc_battery_moments(ds, zero_diag(n, seed), reps, 16);
    std::vector<CheckRecord> out;
    json params{{"n", n}, {"reps", reps}, {"seed", seed}, {"coordinates", 16}};
    for (size_t a = 0; a < ds.size(); ++a) {
        double pred = m.predicted[a][a].get_d();
        double tol = 0.1 * pred;
        json p = params;
        p["diagram"] = battery[a].first;
        out.push_back(record("second_moment", p, pred, m.moment[a][a], tol, std::abs(m.moment[a][a] - pred) <= tol));
    }
    for (size_t a = 0; a < ds.size(); ++a)
        for (size_t b = a + 1; b < ds.size(); ++b) {
            json p = params;
            p["pair"] = {battery[a].first, battery[b].first};
            out.push_back(record("covariance", p, 0, m.moment[a][b], 0.1, std::abs(m.moment[a][b]) <= 0.1));
        }
    auto cyc = mc_battery_moments({canonicalize(shapes::cycle(4))}, zero_diag(n, seed + 1), reps, 1);
    json p = params;
    p["diagram"] = "4-cycle";
    p["coordinates"] = 1;
    out.push_back(record("negligible_second_moment", p, 0, cyc.moment[0][0], 0.05, cyc.moment[0][0] <= 0.05));
    return out;
}

std::vector<CheckRecord> suite_state_evolution(const Options& o) {
    const int n = o.n.value_or(4000), reps = o.reps.value_or(50);
    const std::uint64_t seed = base_seed(o, 6000);
    GfomProgram prog = GfomProgram::benchmark();
    auto X = gfom_asymptotic_run(prog);
    const double tol = 5.0 / std::sqrt(double(n));
    auto means = parallel_map<std::vector<double>>(size_t(reps), o.workers, [&](size_t s) {
        RunResult r = run_gfom(prog, sample_wigner(zero_diag(n, seed + s)));
        std::vector<double> v;
        for (const auto& x : r.iterates) v.push_back(x.mean());
        return v;
    });
    std::vector<CheckRecord> out;
    for (size_t t = 1; t < X.size(); ++t) {
        double pred = expectation(X[t]).get_d();
        int good = 0;
        for (const auto& m : means) good += std::abs(m[t] - pred) <= tol;
        double frac = double(good) / reps;
        out.push_back(record("mean_within_band", {{"n", n}, {"reps", reps}, {"seed", seed}, {"t", t}, {"band", tol}},
                             pred, frac, 0.9, frac >= 0.9));
    }
    return out;
}

std::vector<CheckRecord> suite_bp_amp(const Options& o) {
    const int n = o.n.value_or(2000), reps = o.reps.value_or(20);
    const std::uint64_t seed = base_seed(o, 5000);
    auto f = [](int t) {
        if (t == 0) return HistoryPolynomial::variable(0, 1);
        HistoryPolynomial p(t + 1);
        std::vector<int> sq(t + 1, 0), lin(t + 1, 0), cross(t + 1, 0), cst(t + 1, 0);
        sq[t] = 2;
        lin[t] = 1;
        cross[t] = 1;
        cross[t - 1] += 1;
        p.add_term(sq, Rational(1, 2));
        p.add_term(lin, Rational(1, 2));
        p.add_term(cross, Rational(1, 4));
        p.add_term(cst, Rational(-1, 2));
        return p;
    };
    std::vector<HistoryPolynomial> fs, outs;
    for (int t = 0; t < 3; ++t) fs.push_back(f(t));
    for (int t = 0; t <= 3; ++t) outs.push_back(f(t));
    auto gaps = parallel_map<double>(size_t(reps), o.workers, [&](size_t s) {
        Eigen::MatrixXd A = sample_wigner(zero_diag(n, seed + s));
        auto amp = run_amp(fs, A, OnsagerMode::empirical, outs);
        auto bp = run_bp(fs, outs, A);
        return (amp.outputs[3] - bp.run.outputs[3]).cwiseAbs().maxCoeff();
    });
    double med = median(gaps);
    return {record("bp_amp_gap", {{"n", n}, {"reps", reps}, {"seed", seed}, {"T", 3}}, 0, med, 0.15, med <= 0.15)};
}

std::vector<CheckRecord> suite_iamp(const Options& o) {
    const int n = o.n.value_or(4000), reps = o.reps.value_or(20), T = 6;
    const std::uint64_t seed = base_seed(o, 7000);
    std::vector<HistoryPolynomial> us;
    for (int t = 1; t <= T; ++t) us.push_back(HistoryPolynomial::constant(1, t));
    IampEvolution ev = iamp_objective(us);
    auto obj = parallel_map<double>(size_t(reps), o.workers,
                                    [&](size_t s) { return run_iamp(us, sample_wigner(zero_diag(n, seed + s))).objective; });
    double m = mean(obj), tol = 10.0 * T / std::sqrt(double(n));
    return {record("iamp_depths", {{"T", T}}, to_string(ev.value), to_string(ev.direct_value), 0,
                   ev.value == ev.direct_value),
            record("iamp_objective_mean", {{"n", n}, {"reps", reps}, {"seed", seed}, {"T", T}}, ev.value.get_d(), m,
                   tol, std::abs(m - ev.value.get_d()) <= tol)};
}

std::vector<CheckRecord> suite_power_iteration(const Options& o) {
    const int n = o.n.value_or(5000), T = 20;
    const std::uint64_t seed = base_seed(o, 8000);
    auto st = long_run_power_iteration_check(n, T, seed);
    double tol = 5.0 / std::sqrt(double(n));
    json p{{"n", n}, {"T", T}, {"seed", seed}};
    return {record("power_iteration_ks", p, 0, st.ks_final, 0.05, st.ks_final <= 0.05),
            record("power_iteration_cross_correlation", p, 0, st.max_cross_correlation, tol,
                   st.max_cross_correlation <= tol)};
}

const std::map<std::string, Suite>& suites() {
    static const std::map<std::string, Suite> s{{"exact", suite_exact},
                                                {"walk", suite_walk},
                                                {"star", suite_star},
                                                {"classification", suite_classification},
                                                {"state-evolution", suite_state_evolution},
                                                {"bp-amp", suite_bp_amp},
                                                {"iamp", suite_iamp},
                                                {"power-iteration", suite_power_iteration}};
    return s;
}

std::string short_json(const json& j) {
    if (j.is_number_float()) {
        char buf[32];
        std::snprintf(buf, sizeof buf, "%.5g", j.get<double>());
        return buf;
    }
    return j.is_string() ? j.get<std::string>() : j.dump();
}

int cmd_verify(const Options& o, const std::vector<std::string>& names) {
    std::vector<std::string> run = names;
    if (run.empty() || (run.size() == 1 && run[0] == "all"))
        for (const auto& [k, v] : suites()) run.push_back(k);
    run.erase(std::remove(run.begin(), run.end(), "all"), run.end());
    for (const auto& s : run)
        if (!suites().count(s)) {
            std::string known;
            for (const auto& [k, v] : suites()) known += " " + k;
            throw ConfigError("unknown suite '" + s + "'; available:" + known + " all");
        }
    std::vector<CheckRecord> records;
    for (const auto& s : run) {
        auto r = suites().at(s)(o);
        records.insert(records.end(), r.begin(), r.end());
    }
    bool all = true;
    std::string lines;
    for (const auto& r : records) {
        all = all && r.pass;
        std::printf("%-4s %-34s predicted %-12s observed %-12s tol %-8s %s\n", r.pass ? "PASS" : "FAIL",
                    r.check.c_str(), short_json(r.predicted).c_str(), short_json(r.observed).c_str(),
                    short_json(r.tolerance).c_str(), r.params.dump().c_str());
        lines += r.to_json().dump() + "\n";
    }
    if (!o.out.empty()) write_file(fs::path(o.out) / "checks.jsonl", lines);
    std::printf("%zu checks, %s\n", records.size(), all ? "all passed" : "some failed");
    return all ? kExitOk : kExitCheckFailed;
}

// ---------------------------------------------------------------------------
// report

std::string csv_field(const json& j) {
    std::string s = j.is_string() ? j.get<std::string>() : j.dump();
    if (s.find_first_of(",\"\n") == std::string::npos) return s;
    std::string q = "\"";
    for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
    return q + "\"";
}

int cmd_report(const Options& o, const std::vector<std::string>& dirs) {
    if (dirs.empty()) throw ConfigError("report needs a results directory");
    const fs::path dir = dirs.front();
    if (!fs::is_directory(dir)) throw ConfigError("'" + dir.string() + "' is not a directory");
    const fs::path out = o.out.empty() ? dir : fs::path(o.out);

    std::vector<fs::path> runs;
    for (const auto& e : fs::directory_iterator(dir)) {
        auto name = e.path().filename().string();
        if (name.rfind("run_", 0) == 0 && e.path().extension() == ".json") runs.push_back(e.path());
    }
    std::sort(runs.begin(), runs.end());
    int written = 0;
    if (!runs.empty()) {
        std::ostringstream csv;
        csv << "seed,series,t,mean,second_moment,max_abs\n";
        for (const auto& p : runs) {
            json r = read_json_file(p.string());
            for (const char* series : {"iterates", "outputs"}) {
                if (!r.contains(series)) continue;
                for (const auto& s : r[series])
                    csv << r["seed"] << "," << series << "," << s["t"] << "," << s["mean"] << ","
                        << s["second_moment"] << "," << s["max_abs"] << "\n";
            }
        }
        write_file(out / "iterates.csv", csv.str());
        std::cout << "wrote " << (out / "iterates.csv").string() << " from " << runs.size() << " runs\n";
        ++written;
    }
    if (fs::exists(dir / "checks.jsonl")) {
        std::ifstream in(dir / "checks.jsonl");
        std::ostringstream csv;
        csv << "check,params,predicted,observed,tolerance,pass\n";
        int total = 0, passed = 0;
        for (std::string line; std::getline(in, line);) {
            if (line.empty()) continue;
            json r;
            try {
                r = json::parse(line);
            } catch (const json::parse_error& e) {
                throw ConfigError("checks.jsonl:" + std::to_string(total + 1) + ": " + e.what());
            }
            ++total;
            passed += r["pass"].get<bool>();
            csv << csv_field(r["check"]) << "," << csv_field(r["params"]) << "," << csv_field(r["predicted"]) << ","
                << csv_field(r["observed"]) << "," << csv_field(r["tolerance"]) << "," << r["pass"] << "\n";
        }
        write_file(out / "checks.csv", csv.str());
        std::cout << "wrote " << (out / "checks.csv").string() << ": " << passed << "/" << total << " checks passed\n";
        ++written;
    }
    if (!written) throw ConfigError("no run_*.json or checks.jsonl in '" + dir.string() + "'");
    return kExitOk;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Fourier diagram calculus for Wigner-matrix iterations"};
    app.require_subcommand(1);
    Options o;
    std::uint64_t seed = 0;
    int n = 0, reps = 0;
    auto add_common = [&](CLI::App* c) {
        c->add_option("--config", o.config, "JSON config or input file");
        c->add_option("--seed", seed, "base seed");
        c->add_option("--n", n, "matrix dimension")->check(CLI::Range(2, 1 << 20));
        c->add_option("--reps", reps, "repetitions / number of seeds")->check(CLI::PositiveNumber);
        c->add_option("--out", o.out, "output directory");
        c->add_option("--workers", o.workers, "worker threads (default: all cores)")->check(CLI::NonNegativeNumber);
        c->add_flag("--fresh-seeds", o.fresh_seeds, "draw a random base seed (printed to stderr)");
    };
    std::vector<std::string> args;
    auto* classify = app.add_subcommand("classify", "classify diagrams and print their limits");
    auto* evolve = app.add_subcommand("evolve", "symbolic state evolution of a program");
    auto* simulate = app.add_subcommand("simulate", "run a program on sampled matrices");
    auto* verify = app.add_subcommand("verify", "run verification suites");
    auto* report = app.add_subcommand("report", "turn a results directory into CSV tables");
    for (auto* c : {classify, evolve, simulate, verify, report}) add_common(c);
    classify->add_option("files", args, "diagram JSON files");
    evolve->add_option("file", args, "program JSON file");
    verify->add_option("suites", args, "suite names, or 'all'");
    report->add_option("dir", args, "results directory");

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        int code = app.exit(e);
        return code == 0 ? kExitOk : kExitConfig;
    }
    for (auto* c : app.get_subcommands()) {
        if (c->count("--seed")) o.seed = seed;
        if (c->count("--n")) o.n = n;
        if (c->count("--reps")) o.reps = reps;
    }

    try {
        if (*classify) return cmd_classify(o, args);
        if (*evolve) return cmd_evolve(o, args);
        if (*simulate) return cmd_simulate(o);
        if (*verify) return cmd_verify(o, args);
        if (*report) return cmd_report(o, args);
    } catch (const ConfigError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const StructuralError& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const json::exception& e) {
        std::cerr << "config error: " << e.what() << "\n";
        return kExitConfig;
    } catch (const BudgetError& e) {
        std::cerr << "resource limit: " << e.what() << " (reduce n, T or the diagram size)\n";
        return kExitCheckFailed;
    } catch (const NumericError& e) {
        std::cerr << "numeric failure at step " << e.step() << ": " << e.what() << "\n";
        return kExitCheckFailed;
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << "\n";
        return kExitCheckFailed;
    }
    return kExitOk;
}
