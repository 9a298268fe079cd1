#pragma once

#include "fdc/program.hpp"

#include <Eigen/Dense>
#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace fdc {

enum class OffDiagLaw { rademacher, gaussian, uniform_centered };
enum class DiagLaw { zero, same, gaussian };

/** Law of sqrt(n) A_ij off the diagonal (mean 0, variance 1) plus diagonal handling. */
struct MatrixEnsemble {
    int n = 100;
    OffDiagLaw offdiag = OffDiagLaw::rademacher;
    DiagLaw diag = DiagLaw::zero;
    bool rademacher_variant = false;  // scale by 1/sqrt(n-1) instead of 1/sqrt(n)
    std::uint64_t seed = 0;

    void validate() const;  // throws ConfigError
};

nlohmann::json ensemble_to_json(const MatrixEnsemble& e);
// Missing keys keep the defaults; n and seed are taken from the arguments.
MatrixEnsemble ensemble_from_json(const nlohmann::json& j, int n, std::uint64_t seed);

Eigen::MatrixXd sample_wigner(const MatrixEnsemble& ens);

struct RunMetadata {
    std::uint64_t seed = 0;
    nlohmann::json ensemble;
    std::string program_hash;
    double wall_seconds = 0.0;
};

struct RunResult {
    std::vector<Eigen::VectorXd> iterates;  // x_0..x_T (w_0..w_T for AMP-type runs)
    std::vector<Eigen::VectorXd> outputs;   // m_t for AMP / BP runs with outputs
    std::vector<std::vector<double>> onsager;  // b[s][t], AMP-type runs
    std::optional<double> objective;
    RunMetadata meta;

    // Summaries per iterate; deterministic (no timing).
    nlohmann::json summary() const;
};

enum class OnsagerMode { empirical, asymptotic };

RunResult run_gfom(const GfomProgram& program, const Eigen::MatrixXd& A,
                   OnsagerMode mode = OnsagerMode::empirical);
RunResult run_amp(const std::vector<HistoryPolynomial>& fs, const Eigen::MatrixXd& A,
                  OnsagerMode mode = OnsagerMode::empirical, const std::vector<HistoryPolynomial>& outputs = {});
RunResult run_debiased_power(int T, const Eigen::MatrixXd& A);

struct BpResult {
    RunResult run;                             // iterates hold the full fields w_t
    std::vector<Eigen::MatrixXd> messages;     // messages[t](i, j) = m^t_{i->j}, diagonal unused
};
constexpr int kBpMaxDimension = 4000;
// The diagonal of A is ignored.
BpResult run_bp(const std::vector<HistoryPolynomial>& fs, const std::vector<HistoryPolynomial>& outputs,
                const Eigen::MatrixXd& A, bool keep_messages = false);

struct IampRun {
    RunResult run;                     // iterates w_0..w_T
    std::vector<Eigen::VectorXd> u;    // u_1..u_T at index 1..T
    Eigen::VectorXd x;                 // x_T = sum_t w_t u_t
    double objective = 0.0;            // <x_T, A x_T> / n
};
IampRun run_iamp(const std::vector<HistoryPolynomial>& us, const Eigen::MatrixXd& A,
                 OnsagerMode mode = OnsagerMode::empirical);

// Dispatches on the preset.
RunResult run_program(const GfomProgram& program, const Eigen::MatrixXd& A,
                      OnsagerMode mode = OnsagerMode::empirical);

}  // namespace fdc
