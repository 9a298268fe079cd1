#pragma once

#include "fdc/program.hpp"
#include "fdc/rng.hpp"
#include "fdc/tree_state.hpp"

#include <vector>

namespace fdc {

// States X_0..X_T of a program in the Gaussian space.
std::vector<TreeState> gfom_asymptotic_run(const GfomProgram& program);

struct AmpEvolution {
    std::vector<TreeState> states;                    // W_0..W_T
    std::vector<std::vector<Rational>> covariance;    // E[W_s W_t]
};
AmpEvolution amp_state_evolution(const std::vector<HistoryPolynomial>& fs);

// b[s][t] = E[d f_t / d w_s] for 1 <= s <= t; other entries are zero.
std::vector<std::vector<Rational>> onsager_coefficients(const std::vector<HistoryPolynomial>& fs,
                                                        const std::vector<TreeState>& states);

struct IampEvolution {
    std::vector<TreeState> W;       // W_0..W_T
    std::vector<TreeState> U;       // U_0..U_T, U_0 = 1
    std::vector<Rational> mean_u;   // E[U_t]
    std::vector<Rational> second_w; // E[W_t^2]
    Rational value;                 // 2 sum_{t=2}^T E[U_t] E[W_t^2]
    Rational direct_value;          // 2 E[X_T X_T^+]
    TreeState output;               // X_T = sum_t W_t U_t
};
IampEvolution iamp_objective(const std::vector<HistoryPolynomial>& us);

// One draw of each state, sharing Gaussian atoms across states.
std::vector<double> sample_joint(const std::vector<TreeState>& xs, const std::vector<DiagramRef>& atoms,
                                 const CounterRng& rng, std::uint64_t draw);
double sample_state(const TreeState& x, std::uint64_t seed);
// draws x states matrix, row-major: out[d * xs.size() + k]
std::vector<double> sample_states(const std::vector<TreeState>& xs, std::uint64_t seed, int draws);

}  // namespace fdc
