#pragma once

#include "fdc/engine.hpp"
#include "fdc/exact.hpp"
#include "fdc/tree_state.hpp"

#include <json.hpp>

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace fdc {

// ---- statistics ----
double median(std::vector<double> v);
double mean(const std::vector<double>& v);
double standard_error(const std::vector<double>& v);
// Least-squares slope of log(y) against log(x).
double loglog_slope(const std::vector<double>& x, const std::vector<double>& y);
double ks_two_sample(std::vector<double> a, std::vector<double> b);
double ks_standard_normal(std::vector<double> a);

struct CheckRecord {
    std::string check;
    nlohmann::json params = nlohmann::json::object();
    nlohmann::json predicted;
    nlohmann::json observed;
    nlohmann::json tolerance;
    bool pass = false;
    nlohmann::json to_json() const;
};

// ---- Monte Carlo joint moments ----
struct MomentFactor {
    DiagramRef diagram;
    int coordinate = 0;
};
struct MomentSpec {
    std::vector<MomentFactor> factors;  // vector diagrams evaluated at their coordinates
};
struct MomentEstimate {
    double empirical = 0.0;
    double stderr_ = 0.0;
    Rational predicted = 0;
    double z() const;  // standardized discrepancy
};
// Limit state of a vector diagram in the Gaussian space (0 if negligible).
TreeState asymptotic_state_of(const DiagramRef& d);
Rational predicted_moment(const MomentSpec& spec);
MomentEstimate mc_joint_moment(const MomentSpec& spec, const MatrixEnsemble& ens, int reps);

/**
 * Second moments and covariances for a battery of diagrams, pooling the
 * first `coordinates` coordinates of every matrix. Returns a matrix of
 * estimates indexed like `battery`.
 */
struct BatteryMoments {
    std::vector<std::vector<double>> moment;    // E[Z_a Z_b]
    std::vector<std::vector<double>> stderr_;
    std::vector<std::vector<Rational>> predicted;
};
BatteryMoments mc_battery_moments(const std::vector<DiagramRef>& battery, const MatrixEnsemble& ens, int reps,
                                  int coordinates);

// Proper rooted diagrams (no multiedges, loops or labels) with at most max_vertices vertices.
std::vector<DiagramRef> proper_rooted_diagrams(int max_vertices);

// ---- traversals ----
struct Traversal {
    std::vector<std::vector<int>> walks;  // vertex ids, each walk starts at 0
    int vertex_count = 0;
    bool even = false;
    bool non_backtracking = false;
    bool non_full_forward = false;
    bool self_loop_free = false;
    bool in_family() const { return even && non_backtracking && non_full_forward && self_loop_free; }
    Diagram diagram() const;
};
// All (q, t) traversals up to relabeling of non-root vertices, ids by first appearance.
std::vector<Traversal> enumerate_all_traversals(int q, int t);
// Only the even, non-backtracking, non-full-forward, loop-free ones.
std::vector<Traversal> enumerate_traversals(int q, int t);

struct WalkCheck {
    Surd lhs, rhs;
    bool equal = false;
    std::size_t traversal_count = 0;
};
WalkCheck walk_decomposition_check(int q, int t, int n);

// ---- star diagrams ----
mpz_class star_matching_count(int d);
mpz_class star_matching_bruteforce(int d);
struct StarMoments {
    Coefficient m2_exact;      // as a function of n
    Rational m2;               // at the given n
    Rational m4_prediction;    // 3 (d!)^2 + |M(d,d,d,d)| / n
};
StarMoments star_moments(int d, int n);

// ---- long power iteration ----
struct PowerIterationStats {
    int n = 0, T = 0;
    double ks_final = 0.0;             // KS(x_T, N(0,1))
    double max_cross_correlation = 0.0;  // max_{s != t, 1 <= s, t <= T} |<x_s, x_t>| / n
    std::vector<double> second_moments; // <x_t, x_t> / n
};
PowerIterationStats long_run_power_iteration_check(int n, int T, std::uint64_t seed);
// max_i |x_t - Z_{t-path}|_i for the variant Rademacher ensemble.
double power_iteration_path_gap(int n, int t, std::uint64_t seed);

}  // namespace fdc
