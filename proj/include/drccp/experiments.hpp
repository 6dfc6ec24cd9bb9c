#pragma once

#include "drccp/model.hpp"
#include "drccp/solve.hpp"
#include "drccp/transport.hpp"

#include <cstdint>
#include <random>
#include <string>
#include <vector>

namespace drccp {

/// Generator for a named sub-stream of a run seed, e.g. rng_stream(seed, "samples").
std::mt19937_64 rng_stream(std::uint64_t seed, const std::string& name);

struct TransportParams {
    int m = 4;
    int n = 6;
    double L_low = 2.0;
    double L_high = 2.0;
    double cost_cap = 8.0;  // d = cost_cap * e
    double sigma = 2.0;     // standard deviation of every log-cost
};

/** @brief Training and test draws of a transportation instance. */
struct TransportData {
    TransportInstance instance;
    std::vector<Vector> train;
    std::vector<Vector> test;
    /// Fraction of drawn entries moved onto the box [0, d].
    double clip_rate = 0.0;
};

/// Random correlation matrix: normalized Gram matrix of a standard Gaussian square matrix.
Matrix random_correlation(int dim, std::mt19937_64& rng);

/// Instance with mu ~ U[0,1]^{mn} and Sigma = sigma^2 C; costs exp(N(mu, Sigma)) clipped to [0, d].
TransportInstance generate_transport(std::uint64_t seed, const TransportParams& params);

/// Lognormal draws clipped to the box; clipped counts the clipped entries.
std::vector<Vector> draw_transport_costs(const TransportInstance& inst, int count, std::mt19937_64& rng, long* clipped = nullptr);

TransportData generate_transport_data(std::uint64_t seed, const TransportParams& params, int n_train, int n_test);

/** @brief Solved first-stage decision of a transportation model. */
struct TransportSolve {
    Solution solution;
    TransportDecision decision;
    bool usable = false;  // Optimal, or NodeLimit with an incumbent
};

TransportSolve solve_transport_drw(const TransportInstance& inst, const std::vector<Vector>& train, double eps,
                                   double delta, const SolverAdapter& adapter);

/**
 * Sample average model by branch and bound, started from a greedy incumbent that repeatedly
 * drops the active sample with the largest cost. Stops at max_nodes with the incumbent.
 */
TransportSolve solve_transport_saa(const TransportInstance& inst, const std::vector<Vector>& train, double eps,
                                   const SolverAdapter& adapter, long max_nodes);

/** @brief Multidimensional knapsack with uniform random weights. */
struct KnapsackInstance {
    int n = 0;
    int T = 0;
    Vector values;      // c in [1, 10]^n
    Vector capacities;  // b_t
    /// Each sample stacks the T weight vectors: entry t*n + j is the weight of item j in knapsack t.
    std::vector<Vector> samples;
    std::uint64_t seed = 0;
};

/// Values and weights uniform on [1, 10]; capacities all equal to `capacity`.
KnapsackInstance generate_knapsack(std::uint64_t seed, int n, int T, int N, double capacity = 50.0);

/// max c^T x over binary x with rows f_t = b_t - xi_t^T x >= 0, L2 ball, full-space support.
DrccpProblem knapsack_problem(const KnapsackInstance& inst, double eps, double delta);

/// Fraction of test points at which every row f_t(x, xi) >= 0 holds.
double estimate_reliability(const DrccpProblem& p, const Vector& x, const std::vector<Vector>& test);

/// Fraction of test costs with transport_cost(xi, a, b) <= z.
double estimate_reliability(const TransportInstance& inst, const TransportDecision& decision,
                            const std::vector<Vector>& test);

/// Exact binary optimum by enumerating {0,1}^n against the oracle. Refuses n > 20.
struct EnumerationResult {
    bool feasible = false;
    Vector x;
    double objective = 0.0;
    long evaluated = 0;
};
EnumerationResult enumerate_binary_optimum(const DrccpProblem& p);

double gap_metric(double value, double optimum);
double improvement_metric(double lb_approx, double lb_exact);

/// Mean and the 20% / 80% quantiles (linear interpolation between order statistics).
struct Aggregate {
    double mean = 0.0;
    double q20 = 0.0;
    double q80 = 0.0;
    int count = 0;
};
Aggregate aggregate(std::vector<double> values);

/** @brief One solved (instance, cell) pair of a study. */
struct StudyRow {
    std::uint64_t seed = 0;
    double delta = 0.0;
    int n_samples = 0;
    std::string model;
    double objective = 0.0;
    double reliability = 0.0;
    double wall_ms = 0.0;
    std::string status;
    // Knapsack studies only.
    double opt_val = 0.0;
    double gap = 0.0;
};

struct StudyReport {
    std::string kind;
    std::vector<StudyRow> rows;
    /// (cell label, aggregate of reliability or GAP)
    std::vector<std::pair<std::string, Aggregate>> aggregates;
    std::vector<std::string> notes;
};

struct TransportStudyConfig {
    TransportParams params;
    std::vector<double> deltas{0.01, 0.04, 0.07, 0.10, 0.13, 0.16, 0.19};
    std::vector<int> sample_sizes{10, 160};
    double eps = 0.10;
    int instances = 10;
    std::uint64_t seed = 1;
    int test_samples = 2000;
    bool include_saa = false;
    long saa_max_nodes = 400;
    int workers = 1;
};

struct KnapsackStudyConfig {
    int n = 10;
    int T = 5;
    int N = 50;
    double eps = 0.10;
    double delta = 0.01;
    int instances = 20;
    std::uint64_t seed = 1;
    double capacity = 50.0;
    int workers = 1;
};

StudyReport run_transport_study(const TransportStudyConfig& cfg, const SolverAdapter& adapter);
StudyReport run_knapsack_study(const KnapsackStudyConfig& cfg, const SolverAdapter& adapter);

/// Per-row CSV with the columns seed,delta,n_samples,model,objective,reliability,wall_ms,status
/// (knapsack reports add opt_val and gap). Times are written only when with_time is set,
/// so that repeated runs are byte-identical.
std::string report_rows_csv(const StudyReport& r, bool with_time);
std::string report_aggregates_csv(const StudyReport& r);
std::string report_json_lines(const StudyReport& r, bool with_time);

}  // namespace drccp
