#pragma once

#include "fdc/polynomial.hpp"

#include <json.hpp>

#include <string>
#include <vector>

namespace fdc {

enum class StepOp { matvec, pointwise, amp };

struct Step {
    StepOp op = StepOp::matvec;
    HistoryPolynomial poly;  // over x_0..x_t for the step that produces x_{t+1}
};

enum class PresetKind { none, debiased_power, amp, bp, iamp };

/**
 * A general first-order method: x_0 = 1, then each step appends an iterate.
 * AMP steps carry the Onsager correction; a program mixing AMP steps with
 * other steps is rejected.
 */
struct GfomProgram {
    std::vector<Step> steps;
    PresetKind preset = PresetKind::none;
    std::vector<HistoryPolynomial> fs;       // amp / bp nonlinearities, fs[t] over w_0..w_t
    std::vector<HistoryPolynomial> outputs;  // outputs[t] = f~_t over w_0..w_t
    std::vector<HistoryPolynomial> us;       // iamp: us[t-1] = u_t over w_0..w_{t-1}

    static GfomProgram debiased_power(int T);
    static GfomProgram amp(std::vector<HistoryPolynomial> fs, std::vector<HistoryPolynomial> outputs = {});
    static GfomProgram bp(std::vector<HistoryPolynomial> fs, std::vector<HistoryPolynomial> outputs);
    static GfomProgram iamp(std::vector<HistoryPolynomial> us);
    // [MatVec, w^2, MatVec, w^2 - 1, MatVec]
    static GfomProgram benchmark();
    // [MatVec, w^2, MatVec]
    static GfomProgram square_example();

    int iterations() const { return int(steps.size()); }
    bool pure_amp() const;
    void validate() const;  // throws ConfigError
    std::string hash() const;
};

const char* to_string(PresetKind p);

// Polynomials as [[[e0, ..., ek], num, den], ...].
nlohmann::json polynomial_to_json(const HistoryPolynomial& p);
HistoryPolynomial polynomial_from_json(const nlohmann::json& j, int variables);

nlohmann::json program_to_json(const GfomProgram& p);
GfomProgram program_from_json(const nlohmann::json& j);

}  // namespace fdc
