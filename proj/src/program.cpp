#include "fdc/program.hpp"

#include "fdc/errors.hpp"

#include <functional>
#include <sstream>

namespace fdc {

using nlohmann::json;

const char* to_string(PresetKind p) {
    switch (p) {
        case PresetKind::none: return "none";
        case PresetKind::debiased_power: return "debiased_power";
        case PresetKind::amp: return "amp";
        case PresetKind::bp: return "bp";
        case PresetKind::iamp: return "iamp";
    }
    return "?";
}

GfomProgram GfomProgram::debiased_power(int T) {
    if (T < 0) throw ConfigError("iteration count must be nonnegative");
    std::vector<HistoryPolynomial> fs;
    for (int t = 0; t < T; ++t) fs.push_back(HistoryPolynomial::variable(t, t + 1));
    GfomProgram p = amp(fs);
    p.preset = PresetKind::debiased_power;
    return p;
}

GfomProgram GfomProgram::amp(std::vector<HistoryPolynomial> fs, std::vector<HistoryPolynomial> outputs) {
    GfomProgram p;
    p.preset = PresetKind::amp;
    for (size_t t = 0; t < fs.size(); ++t) {
        fs[t] = fs[t].widened(int(t) + 1);
        p.steps.push_back({StepOp::amp, fs[t]});
    }
    p.fs = std::move(fs);
    p.outputs = std::move(outputs);
    return p;
}

GfomProgram GfomProgram::bp(std::vector<HistoryPolynomial> fs, std::vector<HistoryPolynomial> outputs) {
    GfomProgram p = amp(std::move(fs), std::move(outputs));
    p.preset = PresetKind::bp;
    return p;
}

GfomProgram GfomProgram::iamp(std::vector<HistoryPolynomial> us) {
    std::vector<HistoryPolynomial> fs;
    int T = int(us.size());
    // f_0 = w_0 and f_t = w_t u_t(w_{t-1}, ..., w_0) for t < T.
    fs.push_back(HistoryPolynomial::variable(0, 1));
    for (int t = 1; t < T; ++t)
        fs.push_back(HistoryPolynomial::variable(t, t + 1) * us[t - 1].widened(t + 1));
    GfomProgram p = amp(fs);
    p.preset = PresetKind::iamp;
    for (int t = 1; t <= T; ++t) us[t - 1] = us[t - 1].widened(t);
    p.us = std::move(us);
    return p;
}

GfomProgram GfomProgram::benchmark() {
    GfomProgram p;
    HistoryPolynomial sq(2);
    sq.add_term({0, 2}, 1);
    HistoryPolynomial sqm(4);
    sqm.add_term({0, 0, 0, 2}, 1);
    sqm.add_term({0, 0, 0, 0}, -1);
    p.steps = {{StepOp::matvec, {}}, {StepOp::pointwise, sq}, {StepOp::matvec, {}},
               {StepOp::pointwise, sqm}, {StepOp::matvec, {}}};
    return p;
}

GfomProgram GfomProgram::square_example() {
    GfomProgram p = benchmark();
    p.steps.resize(3);
    return p;
}

bool GfomProgram::pure_amp() const {
    for (const auto& s : steps)
        if (s.op != StepOp::amp) return false;
    return true;
}

void GfomProgram::validate() const {
    bool any_amp = false;
    for (size_t t = 0; t < steps.size(); ++t) {
        const Step& s = steps[t];
        if (s.op == StepOp::amp) any_amp = true;
        if (s.op == StepOp::matvec) continue;
        if (s.poly.highest_variable() > int(t))
            throw ConfigError("step " + std::to_string(t) + " uses an iterate that does not exist yet");
    }
    if (any_amp && !pure_amp()) throw ConfigError("AMP steps cannot be mixed with other steps");
    if (preset == PresetKind::bp && (outputs.empty() || outputs.size() > fs.size() + 1))
        throw ConfigError("bp needs between 1 and T+1 output polynomials");
    if (outputs.size() > steps.size() + 1) throw ConfigError("more outputs than iterates");
    for (size_t t = 0; t < outputs.size(); ++t)
        if (outputs[t].highest_variable() > int(t))
            throw ConfigError("output " + std::to_string(t) + " uses a future iterate");
}

std::string GfomProgram::hash() const {
    std::string s = program_to_json(*this).dump();
    // FNV-1a, enough for provenance tags.
    std::uint64_t h = 1469598103934665603ull;
    for (unsigned char c : s) {
        h ^= c;
        h *= 1099511628211ull;
    }
    std::ostringstream os;
    os << std::hex << h;
    return os.str();
}

json polynomial_to_json(const HistoryPolynomial& p) {
    json a = json::array();
    for (const auto& [e, c] : p.terms())
        a.push_back(json::array({e, c.get_num().get_str(), c.get_den().get_str()}));
    return a;
}

namespace {

Rational rational_from_json(const json& num, const json& den) {
    auto txt = [](const json& x) {
        if (x.is_number_integer()) return std::to_string(x.get<long long>());
        if (x.is_string()) return x.get<std::string>();
        throw ConfigError("rational parts must be integers or integer strings");
    };
    Rational q;
    try {
        q = Rational(mpz_class(txt(num)), mpz_class(txt(den)));
    } catch (const std::invalid_argument&) {
        throw ConfigError("malformed rational");
    }
    if (q.get_den() == 0) throw ConfigError("zero denominator");
    q.canonicalize();
    return q;
}

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    for (auto it = j.begin(); it != j.end(); ++it) {
        bool ok = false;
        for (const char* a : allowed) ok = ok || it.key() == a;
        if (!ok) throw ConfigError("unknown key '" + it.key() + "' in " + where);
    }
}

}  // namespace

HistoryPolynomial polynomial_from_json(const json& j, int variables) {
    if (!j.is_array()) throw ConfigError("polynomial must be a list of terms");
    HistoryPolynomial p(variables);
    for (const auto& term : j) {
        if (!term.is_array() || term.size() != 3 || !term[0].is_array())
            throw ConfigError("polynomial term must be [[exponents], num, den]");
        std::vector<int> e;
        for (const auto& x : term[0]) {
            if (!x.is_number_integer() || x.get<int>() < 0) throw ConfigError("exponents must be nonnegative integers");
            e.push_back(x.get<int>());
        }
        if (int(e.size()) > variables)
            throw ConfigError("polynomial term refers to " + std::to_string(e.size()) + " iterates, only " +
                              std::to_string(variables) + " available");
        e.resize(variables, 0);
        p.add_term(e, rational_from_json(term[1], term[2]));
    }
    return p;
}

json program_to_json(const GfomProgram& p) {
    json j;
    switch (p.preset) {
        case PresetKind::none: {
            json steps = json::array();
            for (const auto& s : p.steps) {
                if (s.op == StepOp::matvec) steps.push_back({{"op", "matvec"}});
                else steps.push_back({{"op", s.op == StepOp::pointwise ? "pointwise" : "amp"},
                                      {"poly", polynomial_to_json(s.poly)}});
            }
            j["steps"] = steps;
            break;
        }
        case PresetKind::debiased_power:
            j["preset"] = "debiased_power";
            j["iterations"] = p.steps.size();
            break;
        case PresetKind::amp:
        case PresetKind::bp: {
            j["preset"] = to_string(p.preset);
            json fs = json::array(), outs = json::array();
            for (const auto& f : p.fs) fs.push_back(polynomial_to_json(f));
            for (const auto& f : p.outputs) outs.push_back(polynomial_to_json(f));
            j["fs"] = fs;
            if (!p.outputs.empty()) j["outputs"] = outs;
            break;
        }
        case PresetKind::iamp: {
            j["preset"] = "iamp";
            json us = json::array();
            for (const auto& u : p.us) us.push_back(polynomial_to_json(u));
            j["us"] = us;
            break;
        }
    }
    return j;
}

GfomProgram program_from_json(const json& j) {
    if (!j.is_object()) throw ConfigError("program must be a JSON object");
    if (!j.contains("preset")) {
        reject_unknown(j, {"steps"}, "program");
        if (!j.contains("steps") || !j["steps"].is_array()) throw ConfigError("program needs a 'steps' list");
        GfomProgram p;
        int t = 0;
        for (const auto& s : j["steps"]) {
            if (!s.is_object() || !s.contains("op")) throw ConfigError("each step needs an 'op'");
            reject_unknown(s, {"op", "poly"}, "step");
            std::string op = s["op"].get<std::string>();
            if (op == "matvec") p.steps.push_back({StepOp::matvec, {}});
            else if (op == "pointwise" || op == "amp") {
                if (!s.contains("poly")) throw ConfigError(op + " step needs 'poly'");
                p.steps.push_back({op == "amp" ? StepOp::amp : StepOp::pointwise, polynomial_from_json(s["poly"], t + 1)});
            } else throw ConfigError("unknown step op '" + op + "'");
            ++t;
        }
        if (p.pure_amp() && !p.steps.empty()) {
            std::vector<HistoryPolynomial> fs;
            for (const auto& s : p.steps) fs.push_back(s.poly);
            p = GfomProgram::amp(fs);
        }
        p.validate();
        return p;
    }
    std::string preset = j["preset"].get<std::string>();
    auto polys = [&](const char* key, int offset) {
        std::vector<HistoryPolynomial> r;
        if (!j.contains(key)) return r;
        if (!j[key].is_array()) throw ConfigError(std::string("'") + key + "' must be a list");
        int t = 0;
        for (const auto& x : j[key]) r.push_back(polynomial_from_json(x, t++ + offset));
        return r;
    };
    GfomProgram p;
    if (preset == "debiased_power") {
        reject_unknown(j, {"preset", "iterations"}, "program");
        if (!j.contains("iterations")) throw ConfigError("debiased_power needs 'iterations'");
        p = GfomProgram::debiased_power(j["iterations"].get<int>());
    } else if (preset == "amp" || preset == "bp") {
        reject_unknown(j, {"preset", "fs", "outputs"}, "program");
        auto fs = polys("fs", 1);
        if (fs.empty()) throw ConfigError(preset + " needs a nonempty 'fs'");
        auto outs = polys("outputs", 1);
        p = preset == "amp" ? GfomProgram::amp(fs, outs) : GfomProgram::bp(fs, outs);
    } else if (preset == "iamp") {
        reject_unknown(j, {"preset", "us"}, "program");
        auto us = polys("us", 1);
        if (us.empty()) throw ConfigError("iamp needs a nonempty 'us'");
        p = GfomProgram::iamp(us);
    } else if (preset == "benchmark") {
        reject_unknown(j, {"preset"}, "program");
        p = GfomProgram::benchmark();
    } else {
        throw ConfigError("unknown preset '" + preset + "'");
    }
    p.validate();
    return p;
}

}  // namespace fdc
