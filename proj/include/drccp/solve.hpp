#pragma once

#include "drccp/conic_ir.hpp"

#include <memory>
#include <optional>
#include <set>
#include <string>

namespace drccp {

/** @brief Contract shared by continuous cone-program solvers. */
class SolverAdapter {
  public:
    virtual ~SolverAdapter() = default;
    virtual std::string name() const = 0;
    virtual std::set<ConeKind> capabilities() const = 0;
    /// Solves a program without integrality marks. Must be deterministic.
    virtual Solution solve(const ConeProgram& prog) const = 0;
};

struct IpmSettings {
    int max_iterations = 120;
    double feastol = 1e-9;
    double abstol = 1e-9;
    double reltol = 1e-9;
    /// Accepted at exit when the strict tolerances were not reached.
    double loose_feastol = 1e-7;
    double loose_reltol = 1e-6;
    double step_fraction = 0.99;
    double regularization = 1e-10;
    int refinement_steps = 4;
    int equilibration_passes = 12;
    bool verbose = false;
};

/**
 * @brief Primal-dual interior-point method on the homogeneous self-dual embedding.
 *
 * Handles zero, nonnegative, second-order and PSD cones with Nesterov-Todd scaling and a
 * Mehrotra-type predictor-corrector. The KKT system is factorized by a sparse LDL^T.
 */
class InteriorPointSolver final : public SolverAdapter {
  public:
    explicit InteriorPointSolver(IpmSettings settings = {}) : settings_(settings) {}
    std::string name() const override { return "ipm"; }
    std::set<ConeKind> capabilities() const override;
    Solution solve(const ConeProgram& prog) const override;
    const IpmSettings& settings() const { return settings_; }

  private:
    IpmSettings settings_;
};

/// Environment variable naming the default adapter.
inline constexpr const char* kSolverEnvVar = "DRCCP_SOLVER";

/// Adapter by name ("ipm"); an empty name reads DRCCP_SOLVER, then falls back to "ipm".
std::unique_ptr<SolverAdapter> make_adapter(const std::string& name = {});

/// Throws UnsupportedError naming the first block whose cone the adapter lacks.
void require_capabilities(const ConeProgram& prog, const SolverAdapter& adapter);

Solution solve_continuous(const ConeProgram& prog, const SolverAdapter& adapter);

struct BnbConfig {
    double rel_gap = 1e-6;
    double abs_gap = 1e-9;
    long max_nodes = 200000;
    double integrality_tol = 1e-6;
    /// Nodes popped per round; fixed so results do not depend on the worker count.
    int batch_size = 4;
    int workers = 1;
    /// Optional starting incumbent; used only if it satisfies the program.
    std::optional<Vector> initial_incumbent;
};

/**
 * Best-bound branch and bound over the binary marks. Branches on the most fractional
 * variable (lowest index on ties). Node relaxations add 0 <= x <= 1 for open binaries and
 * substitute fixed ones.
 */
Solution branch_and_bound(const ConeProgram& prog, const SolverAdapter& adapter, const BnbConfig& cfg = {});

/// Program with the given variables replaced by constants and pinned by equality rows.
ConeProgram fix_variables(const ConeProgram& prog, const std::vector<std::pair<int, double>>& fixes);

/// Solves the continuous program obtained by fixing every binary to round(x(j)).
Solution resolve_with_fixed_binaries(const ConeProgram& prog, const Vector& x, const SolverAdapter& adapter);

}  // namespace drccp
