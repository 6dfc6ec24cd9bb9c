#pragma once

#include "drccp/conic_ir.hpp"

#include <cstdint>
#include <vector>

namespace drccp {

/**
 * @brief Facility-to-customer transportation instance with random unit costs.
 *
 * Costs xi live in the box [0, d] of dimension m*n; arc (k, j) has index k*n + j.
 * The lognormal law of xi is exp(N(mu, Sigma)).
 */
struct TransportInstance {
    int m = 4;
    int n = 6;
    double L_low = 2.0;
    double L_high = 2.0;
    Vector d;
    Vector mu;
    Matrix Sigma;
    std::uint64_t seed = 0;

    int arcs() const { return m * n; }
    int arc(int k, int j) const { return k * n + j; }
};

/// Throws ValidationError when shapes or bounds are inconsistent.
void validate_transport(const TransportInstance& inst);

/** @brief Variable indices of the transportation CVaR program. */
struct TransportCvarLayout {
    std::vector<int> a;
    std::vector<int> b;
    int z = -1;
    int alpha = -1;
    std::vector<std::vector<int>> x;  // [i] -> arcs
    std::vector<std::vector<int>> y;
    std::vector<std::vector<int>> v;
    std::vector<int> q;
};

struct TransportCvarProgram {
    ConeProgram program;
    TransportCvarLayout layout;
};

/**
 * CVaR approximation of min z s.t. P{cost(xi, a, b) <= z} >= 1 - eps under the L1 Wasserstein
 * ball of the given radius, with per-sample copies of the transport plan. A linear program.
 */
TransportCvarProgram build_transport_cvar_lp(const TransportInstance& inst, const std::vector<Vector>& samples,
                                             double eps, double delta);

/** @brief Variable indices of the transportation sample average program. */
struct TransportSaaLayout {
    std::vector<int> a;
    std::vector<int> b;
    int z = -1;
    std::vector<std::vector<int>> x;
    std::vector<int> s;
    std::vector<double> M;
};

struct TransportSaaProgram {
    ConeProgram program;
    TransportSaaLayout layout;
};

/// Big-M MILP of the sample average model; s_i = 1 marks samples whose cost must stay below z.
TransportSaaProgram build_saa_milp(const TransportInstance& inst, const std::vector<Vector>& samples, double eps);

/// First-stage decision (a, b, z) read from a solved program.
struct TransportDecision {
    Vector a;
    Vector b;
    double z = 0.0;
};

/// Optimal cost of shipping supplies a to demands b at unit costs xi (arc k*n + j).
/// Ships min(sum a, sum b); throws Error when the totals differ by more than 1e-6 relative.
double transport_cost(const TransportInstance& inst, const Vector& xi, const Vector& a, const Vector& b);

}  // namespace drccp
