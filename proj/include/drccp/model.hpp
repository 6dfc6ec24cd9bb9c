#pragma once

#include <Eigen/Dense>

#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

namespace drccp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;

/// Base class of all library errors.
class Error : public std::runtime_error {
  public:
    using std::runtime_error::runtime_error;
};

/// Input data violates a structural invariant (bad dimensions, bad values).
class ValidationError : public Error {
  public:
    using Error::Error;
};

/// A combination the library has no reformulation or solver for.
class UnsupportedError : public Error {
  public:
    using Error::Error;
};

/** @brief Empirical points that center the Wasserstein ball. */
struct SampleSet {
    std::vector<Vector> samples;
    int dim = 0;

    int n_samples() const { return static_cast<int>(samples.size()); }
};

/// Ground norm of the transport cost. Dual pairs: L1 <-> Linf, L2 <-> L2.
enum class GroundNorm { L1, L2, Linf };

GroundNorm dual_of(GroundNorm norm);
double norm_value(const Vector& v, GroundNorm norm);

/// Dual norm of v with respect to the ground norm.
double dual_norm(const Vector& v, GroundNorm norm);

struct WassersteinBall {
    double radius = 0.0;
    GroundNorm norm = GroundNorm::L2;
    SampleSet center;
};

struct FullSpace {
    int dim = 0;
};

/// {xi : rows.row(k) * xi <= offsets(k)}
struct Polyhedron {
    Matrix rows;
    Vector offsets;
};

/// {xi : (xi - center)^T shape^{-1} (xi - center) <= 1}
struct Ellipsoid {
    Matrix shape;
    Vector center;
};

struct Box {
    Vector lower;
    Vector upper;
};

using SupportSet = std::variant<FullSpace, Polyhedron, Ellipsoid, Box>;

int support_dim(const SupportSet& support);
std::string support_name(const SupportSet& support);
bool support_contains(const SupportSet& support, const Vector& xi, double tol = 1e-9);

/// f(x, xi) = (A x + a)^T xi + b^T x + h
struct AffineBoth {
    Matrix A;
    Vector a;
    Vector b;
    double h = 0.0;
};

/// f(x, xi) = xi^T x + xi^T A xi + b^T x + h, with xi and x of equal dimension.
struct QuadraticXi {
    Matrix A;
    Vector b;
    double h = 0.0;
};

/// f(x, xi) = sum_j x_j (xi^T W_j xi + r_j^T xi + h_j)
struct BilinearQuadratic {
    std::vector<Matrix> W;
    std::vector<Vector> r;
    Vector h;
};

using ConstraintFunction = std::variant<AffineBoth, QuadraticXi, BilinearQuadratic>;

std::string constraint_name(const ConstraintFunction& f);

enum class Sense { Minimize, Maximize };

/**
 * @brief Feasible region S for the decision x.
 *
 * Binary restricts x to {0,1}^n. Bounds and linear rows apply to every kind;
 * lower/upper may be empty (no bound) or hold +-infinity entries.
 */
struct Domain {
    enum class Kind { Binary, Box, Linear };
    Kind kind = Kind::Box;
    Vector lower;
    Vector upper;
    Matrix ineq_rows;  // ineq_rows * x <= ineq_rhs
    Vector ineq_rhs;
    Matrix eq_rows;  // eq_rows * x == eq_rhs
    Vector eq_rhs;
};

struct DrccpProblem {
    Vector objective;
    Sense sense = Sense::Minimize;
    Domain domain;
    std::vector<ConstraintFunction> constraints;
    double risk = 0.1;
    WassersteinBall ball;
    SupportSet support = FullSpace{};

    int n_vars() const { return static_cast<int>(objective.size()); }
    int n_rows() const { return static_cast<int>(constraints.size()); }
    int xi_dim() const { return support_dim(support); }
    const std::vector<Vector>& samples() const { return ball.center.samples; }
    int n_samples() const { return ball.center.n_samples(); }
};

struct Diagnostic {
    std::string invariant;
    std::string location;
    std::string message;
};

/// Empty iff every structural invariant of the problem holds.
std::vector<Diagnostic> validate_problem(const DrccpProblem& p);

/// Throws ValidationError listing all diagnostics when validation fails.
void require_valid(const DrccpProblem& p);

double evaluate_constraint(const ConstraintFunction& f, const Vector& x, const Vector& xi);

/// Gradient in xi and constant part of an affine row at fixed x.
Vector affine_gradient(const AffineBoth& f, const Vector& x);
double affine_constant(const AffineBoth& f, const Vector& x);

/// Variant shared by every row; throws ValidationError on a mixed family.
std::string common_variant(const DrccpProblem& p);

/// Minimum eigenvalue allowed for matrices declared positive semidefinite.
inline constexpr double kPsdTolerance = -1e-10;

}  // namespace drccp
