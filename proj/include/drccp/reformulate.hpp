#pragma once

#include "drccp/conic_ir.hpp"
#include "drccp/model.hpp"

#include <vector>

namespace drccp {

/// Lower bound used for the strictly positive scaling variables alpha_t.
inline constexpr double kAlphaMin = 1e-9;

/** @brief Variable indices of a CVaR-relaxation program. */
struct CvarCertificate {
    std::vector<int> x;
    std::vector<int> alpha;                   // per row t
    std::vector<std::vector<std::vector<int>>> v;  // [i][t] -> m indices; empty when eliminated
    std::vector<std::vector<int>> q;          // [i][t]
    std::vector<std::vector<int>> u;          // [i][t]; -1 when no epigraph variable is needed
    std::vector<std::vector<std::vector<int>>> nu;  // [i][t] -> multipliers
};

struct CvarProgram {
    ConeProgram program;
    CvarCertificate layout;
};

/** @brief Variable indices of the binary CVaR program. */
struct BinaryCvarCertificate {
    std::vector<int> x;
    int lambda = -1;
    std::vector<int> s;
    std::vector<int> alpha;               // -1 for rows exempt from the bound
    std::vector<std::vector<int>> y;      // [t] -> n indices
    std::vector<double> M;
};

struct BinaryCvarProgram {
    ConeProgram program;
    BinaryCvarCertificate layout;
};

/// Variables of x plus the domain rows of the problem (bounds, linear rows, binary marks).
std::vector<int> add_decision_variables(ConeProgram& prog, const DrccpProblem& p);

/// Robust counterpart: every row must hold for every xi in the support.
ConeProgram build_robust_membership(const DrccpProblem& p);

/// Convex relaxation of the CVaR set with per-(sample, row) epigraphs of the inner supremum.
CvarProgram build_cvar_relaxation(const DrccpProblem& p);

/// Handles shared by the epigraph builders for a single (sample i, row t) pair.
struct EpigraphVars {
    std::vector<int> x;
    int alpha = -1;
    std::vector<int> v;  // m indices
    int q = -1;
};

struct LmiEpigraph {
    int u = -1;
    std::vector<int> nu;
    int psd_block = -1;
    int row_block = -1;
};

/**
 * u >= sup over the polyhedron {a_k^T xi <= d_k} of g^T xi - xi^T Q xi, written as
 * [[Q, -(g - sum nu_k a_k)/2], [., u - sum nu_k d_k]] >= 0 with nu >= 0.
 * Returns the new u and nu variables and the PSD block.
 */
LmiEpigraph add_sup_epigraph_polyhedral(ConeProgram& prog, const std::vector<std::vector<AffineExpr>>& Q,
                                        const std::vector<AffineExpr>& g, const Polyhedron& support);

/**
 * u >= sup over the ellipsoid {(xi - c)^T W^{-1} (xi - c) <= 1} of g^T xi - xi^T Q xi, written as
 * [[Q + nu W^{-1}, -(2 nu W^{-1} c + g)/2], [., u + nu c^T W^{-1} c - nu]] >= 0 with nu >= 0.
 */
LmiEpigraph add_sup_epigraph_ellipsoidal(ConeProgram& prog, const std::vector<std::vector<AffineExpr>>& Q,
                                         const std::vector<AffineExpr>& g, const Ellipsoid& support);

/// Quadratic-in-xi row on polyhedral support: LMI plus the row u - (b^T x + h) + alpha - v^T zeta <= q.
LmiEpigraph lmi_epigraph_polyhedral(ConeProgram& prog, const DrccpProblem& p, int i, int t, const EpigraphVars& vars);

/// Quadratic-in-xi row on ellipsoidal support.
LmiEpigraph lmi_epigraph_ellipsoidal(ConeProgram& prog, const DrccpProblem& p, int i, int t, const EpigraphVars& vars);

/// Bilinear-quadratic row on ellipsoidal support; needs x >= 0 from the domain.
LmiEpigraph lmi_epigraph_bilinear(ConeProgram& prog, const DrccpProblem& p, int i, int t, const EpigraphVars& vars);

/**
 * Upper bounds M_t on the scaling variables: M_t = eps / (delta * gamma_t), gamma_t the smallest
 * nonzero dual norm of A^t x + a^t over binary x. Rows whose gradient vanishes for every binary x
 * get +infinity (exempt).
 */
std::vector<double> compute_alpha_bound(const DrccpProblem& p);

/// Largest n for which gamma_t is found by enumerating {0,1}^n.
inline constexpr int kAlphaBoundEnumerationLimit = 20;

/// Mixed-binary conic program for the CVaR approximation with McCormick products.
BinaryCvarProgram build_binary_cvar_mip(const DrccpProblem& p);

/// Sample average approximation at radius zero with big-M indicator rows, for affine rows
/// with a bounded domain.
ConeProgram build_saa_milp(const DrccpProblem& p);

}  // namespace drccp
