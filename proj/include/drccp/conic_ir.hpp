#pragma once

#include "drccp/model.hpp"

#include <iosfwd>
#include <string>
#include <vector>

namespace drccp {

enum class ConeKind { Zero, Nonnegative, SecondOrder, PositiveSemidefinite };

std::string cone_name(ConeKind kind);

struct Term {
    int var = 0;
    double coef = 0.0;
};

/** @brief Sparse affine expression sum_k coef_k * x[var_k] + constant. */
class AffineExpr {
  public:
    AffineExpr() = default;
    AffineExpr(double constant) : constant_(constant) {}  // NOLINT(google-explicit-constructor)

    static AffineExpr variable(int var, double coef = 1.0);

    AffineExpr& add(int var, double coef);
    AffineExpr& add(const AffineExpr& other, double scale = 1.0);
    AffineExpr& add_constant(double c) {
        constant_ += c;
        return *this;
    }

    const std::vector<Term>& terms() const { return terms_; }
    double constant() const { return constant_; }
    double evaluate(const Vector& x) const;

    /// Merges duplicate variables, drops zero coefficients, sorts by variable.
    AffineExpr& compact();

    AffineExpr& operator+=(const AffineExpr& o) { return add(o, 1.0); }
    AffineExpr& operator-=(const AffineExpr& o) { return add(o, -1.0); }
    AffineExpr& operator*=(double s);

  private:
    std::vector<Term> terms_;
    double constant_ = 0.0;
};

AffineExpr operator+(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a, const AffineExpr& b);
AffineExpr operator-(AffineExpr a);
AffineExpr operator*(double s, AffineExpr a);
AffineExpr operator*(AffineExpr a, double s);

/**
 * @brief One cone constraint: the vector of row values lies in the cone.
 *
 * Zero: all rows equal 0. Nonnegative: all rows >= 0. SecondOrder: row 0 >= ||rows 1..||_2.
 * PositiveSemidefinite of side k: k(k+1)/2 rows holding svec(X), the lower triangle of X
 * stacked column by column, off-diagonal entries multiplied by sqrt(2). With this scaling
 * svec(X)^T svec(Y) = tr(XY).
 */
struct ConeBlock {
    ConeKind kind = ConeKind::Nonnegative;
    int side = 0;  // matrix order for PSD blocks, unused otherwise
    std::vector<AffineExpr> rows;
    std::string label;

    int dim() const { return static_cast<int>(rows.size()); }
};

inline int svec_size(int side) { return side * (side + 1) / 2; }
/// Position of (i, j), i >= j, inside svec of a side-k matrix.
int svec_index(int side, int i, int j);
Vector svec(const Matrix& m);
Matrix smat(const Vector& v, int side);

class ConeProgram {
  public:
    int add_variable(std::string name = {});
    /// Adds count variables named prefix[0], prefix[1], ...; returns the first index.
    int add_variables(int count, const std::string& prefix = {});
    int n_vars() const { return n_vars_; }
    const std::string& variable_name(int var) const { return names_.at(static_cast<size_t>(var)); }
    void rename_variable(int var, std::string name) { names_.at(static_cast<size_t>(var)) = std::move(name); }

    void set_objective(Sense sense, AffineExpr objective);
    Sense sense() const { return sense_; }
    const AffineExpr& objective() const { return objective_; }

    /// Validates and stores a block; zero coefficients are dropped. Returns the block id.
    int add_block(ConeBlock block);
    int add_zero(std::vector<AffineExpr> rows, std::string label = {});
    int add_nonnegative(std::vector<AffineExpr> rows, std::string label = {});
    int add_second_order(std::vector<AffineExpr> rows, std::string label = {});
    /// lower[i][j] for j <= i gives the entries of the symmetric matrix.
    int add_psd(const std::vector<std::vector<AffineExpr>>& lower, std::string label = {});

    void mark_binary(int var);
    const std::vector<int>& binaries() const { return binaries_; }
    bool has_integrality() const { return !binaries_.empty(); }

    const std::vector<ConeBlock>& blocks() const { return blocks_; }
    const ConeBlock& block(int id) const { return blocks_.at(static_cast<size_t>(id)); }
    int n_blocks() const { return static_cast<int>(blocks_.size()); }

    /// Copy without integrality marks.
    ConeProgram relaxed() const;

    double objective_value(const Vector& x) const { return objective_.evaluate(x); }

  private:
    int n_vars_ = 0;
    std::vector<std::string> names_;
    Sense sense_ = Sense::Minimize;
    AffineExpr objective_;
    std::vector<ConeBlock> blocks_;
    std::vector<int> binaries_;
};

/// Signed residual of a single block at x: negative means violated.
double block_residual(const ConeBlock& block, const Vector& x);

/**
 * Per-block signed residuals: Zero -> -max|row|, Nonnegative -> min row,
 * SecondOrder -> t - ||v||_2, PositiveSemidefinite -> minimum eigenvalue.
 */
std::vector<double> check_solution(const ConeProgram& prog, const Vector& x);

/// Largest violation over all blocks and binary marks (0 when feasible).
double max_violation(const ConeProgram& prog, const Vector& x);

inline constexpr double kFeasTol = 1e-7;

/// Line-oriented text format, one record per line; documented in docs/ir_format.md.
void write_program(std::ostream& out, const ConeProgram& prog);
ConeProgram read_program(std::istream& in);
std::string program_to_text(const ConeProgram& prog);
ConeProgram program_from_text(const std::string& text);

enum class SolveStatus { Optimal, Infeasible, Unbounded, NumericalFailure, NodeLimit };

std::string status_name(SolveStatus s);

struct IncumbentEvent {
    long node = 0;
    double objective = 0.0;
};

struct SolveStats {
    int iterations = 0;
    double wall_ms = 0.0;
    long nodes = 0;
    double best_bound = 0.0;
    std::vector<IncumbentEvent> incumbent_trace;
};

struct Solution {
    SolveStatus status = SolveStatus::NumericalFailure;
    Vector primal;
    double objective_value = 0.0;
    /// Per-block dual vectors (Optimal continuous solves only).
    std::vector<Vector> duals;
    SolveStats stats;
};

/// Serializes a solution as JSON with named primal entries.
std::string solution_to_json(const ConeProgram& prog, const Solution& sol);

}  // namespace drccp
