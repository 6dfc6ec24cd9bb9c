#include "drccp/reformulate.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

namespace drccp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

std::string idx(int i, int t) { return "[" + std::to_string(i) + "," + std::to_string(t) + "]"; }

/// Validation for builders; robust counterparts need neither rows nor samples, and the
/// sample average model also accepts eps = 0 (every sample kept).
void require_buildable(const DrccpProblem& p, bool needs_samples, bool zero_risk_ok = false) {
    std::vector<Diagnostic> kept;
    for (auto& d : validate_problem(p)) {
        if (d.invariant == "rows-present") continue;
        if (zero_risk_ok && p.risk == 0.0 && d.invariant == "risk-range") continue;
        if (!needs_samples && d.invariant == "samples-present") continue;
        kept.push_back(std::move(d));
    }
    if (kept.empty()) return;
    std::string msg = "invalid problem:";
    for (const auto& d : kept) msg += "\n  " + d.location + ": " + d.message + " [" + d.invariant + "]";
    throw ValidationError(msg);
}

std::vector<AffineExpr> affine_gradient_expr(const AffineBoth& f, const std::vector<int>& x) {
    std::vector<AffineExpr> g(static_cast<size_t>(f.A.rows()));
    for (long r = 0; r < f.A.rows(); ++r) {
        AffineExpr e(f.a(r));
        for (long j = 0; j < f.A.cols(); ++j) e.add(x[static_cast<size_t>(j)], f.A(r, j));
        g[static_cast<size_t>(r)] = std::move(e);
    }
    return g;
}

AffineExpr linear_expr(const Vector& coef, const std::vector<int>& x, double constant) {
    AffineExpr e(constant);
    for (long j = 0; j < coef.size(); ++j) e.add(x[static_cast<size_t>(j)], coef(j));
    return e;
}

AffineExpr dot_expr(const std::vector<AffineExpr>& v, const Vector& w) {
    AffineExpr e;
    for (size_t k = 0; k < v.size(); ++k) e.add(v[k], w(static_cast<long>(k)));
    return e;
}

std::vector<AffineExpr> vars_expr(const std::vector<int>& v) {
    std::vector<AffineExpr> out;
    out.reserve(v.size());
    for (int j : v) out.push_back(AffineExpr::variable(j));
    return out;
}

std::vector<int> add_named(ConeProgram& prog, int count, const std::string& base) {
    std::vector<int> out;
    for (int k = 0; k < count; ++k) out.push_back(prog.add_variable(base + "[" + std::to_string(k) + "]"));
    return out;
}

/**
 * scale * ||w||_* <= rhs for the dual of the ground norm: a second-order cone for L2,
 * componentwise pairs for the Linf dual, absolute-value auxiliaries for the L1 dual.
 */
void add_dual_norm_bound(ConeProgram& prog, const AffineExpr& rhs, const std::vector<AffineExpr>& w, double scale,
                         GroundNorm ground, const std::string& label) {
    if (w.empty() || scale == 0.0) {
        prog.add_nonnegative({rhs}, label);
        return;
    }
    switch (dual_of(ground)) {
    case GroundNorm::L2: {
        std::vector<AffineExpr> rows{rhs};
        for (const auto& e : w) rows.push_back(scale * e);
        prog.add_second_order(std::move(rows), label);
        return;
    }
    case GroundNorm::Linf: {
        std::vector<AffineExpr> rows;
        for (const auto& e : w) {
            rows.push_back(rhs - scale * e);
            rows.push_back(rhs + scale * e);
        }
        prog.add_nonnegative(std::move(rows), label);
        return;
    }
    case GroundNorm::L1: {
        std::vector<int> abs = add_named(prog, static_cast<int>(w.size()), label + "_abs");
        std::vector<AffineExpr> rows;
        AffineExpr total = rhs;
        for (size_t k = 0; k < w.size(); ++k) {
            rows.push_back(AffineExpr::variable(abs[k]) - w[k]);
            rows.push_back(AffineExpr::variable(abs[k]) + w[k]);
            total.add(abs[k], -scale);
        }
        rows.push_back(std::move(total));
        prog.add_nonnegative(std::move(rows), label);
        return;
    }
    }
}

/// Cholesky factor L with shape = L L^T.
Matrix shape_factor(const Ellipsoid& e) {
    Eigen::LLT<Matrix> llt(e.shape);
    if (llt.info() != Eigen::Success) throw ValidationError("ellipsoid shape is not positive definite");
    return llt.matrixL();
}

/**
 * sup over the support of g^T xi, as an expression in fresh multipliers plus the rows tying
 * them to g. Returns the supremum expression; the multipliers are appended to mult.
 */
AffineExpr add_support_function(ConeProgram& prog, const std::vector<AffineExpr>& g, const SupportSet& support,
                                 const std::string& tag, std::vector<int>& mult, int& norm_var) {
    const int m = static_cast<int>(g.size());
    if (const auto* box = std::get_if<Box>(&support)) {
        // sup = min u^T p - l^T r over p - r = g, p, r >= 0 (a multiplier is dropped for an infinite bound).
        AffineExpr value;
        std::vector<AffineExpr> tie(g.begin(), g.end());
        std::vector<AffineExpr> sign;
        for (int k = 0; k < m; ++k) {
            if (std::isfinite(box->upper(k))) {
                int p = prog.add_variable("p" + tag + "[" + std::to_string(k) + "]");
                mult.push_back(p);
                value.add(p, box->upper(k));
                tie[static_cast<size_t>(k)].add(p, -1.0);
                sign.push_back(AffineExpr::variable(p));
            }
            if (std::isfinite(box->lower(k))) {
                int r = prog.add_variable("r" + tag + "[" + std::to_string(k) + "]");
                mult.push_back(r);
                value.add(r, -box->lower(k));
                tie[static_cast<size_t>(k)].add(r, 1.0);
                sign.push_back(AffineExpr::variable(r));
            }
        }
        prog.add_zero(std::move(tie), "support_dual" + tag);
        if (!sign.empty()) prog.add_nonnegative(std::move(sign), "multipliers" + tag);
        return value;
    }
    if (const auto* poly = std::get_if<Polyhedron>(&support)) {
        // sup = min d^T nu over P^T nu = g, nu >= 0.
        const int l = static_cast<int>(poly->rows.rows());
        std::vector<int> nu = add_named(prog, l, "nu" + tag);
        AffineExpr value;
        std::vector<AffineExpr> tie;
        for (int k = 0; k < m; ++k) {
            AffineExpr e = -1.0 * g[static_cast<size_t>(k)];
            for (int r = 0; r < l; ++r) e.add(nu[static_cast<size_t>(r)], poly->rows(r, k));
            tie.push_back(std::move(e));
        }
        for (int r = 0; r < l; ++r) value.add(nu[static_cast<size_t>(r)], poly->offsets(r));
        prog.add_zero(std::move(tie), "support_dual" + tag);
        if (l > 0) prog.add_nonnegative(vars_expr(nu), "multipliers" + tag);
        mult.insert(mult.end(), nu.begin(), nu.end());
        return value;
    }
    if (const auto* ell = std::get_if<Ellipsoid>(&support)) {
        // sup = g^T c + ||L^T g||_2 with shape = L L^T.
        const Matrix L = shape_factor(*ell);
        norm_var = prog.add_variable("u" + tag);
        std::vector<AffineExpr> rows{AffineExpr::variable(norm_var)};
        for (int k = 0; k < m; ++k) {
            AffineExpr e;
            for (int r = 0; r < m; ++r) e.add(g[static_cast<size_t>(r)], L(r, k));
            rows.push_back(std::move(e));
        }
        prog.add_second_order(std::move(rows), "support_norm" + tag);
        return AffineExpr::variable(norm_var) + dot_expr(g, ell->center);
    }
    throw UnsupportedError("support function of the full space is finite only at zero");
}

bool domain_nonnegative(const DrccpProblem& p) {
    if (p.domain.kind == Domain::Kind::Binary) return true;
    if (p.domain.lower.size() != p.n_vars()) return false;
    return (p.domain.lower.array() >= 0.0).all();
}

void set_problem_objective(ConeProgram& prog, const DrccpProblem& p, const std::vector<int>& x) {
    prog.set_objective(p.sense, linear_expr(p.objective, x, 0.0));
}

std::vector<std::vector<AffineExpr>> constant_matrix(const Matrix& A) {
    std::vector<std::vector<AffineExpr>> Q(static_cast<size_t>(A.rows()), std::vector<AffineExpr>(static_cast<size_t>(A.cols())));
    for (long r = 0; r < A.rows(); ++r)
        for (long c = 0; c < A.cols(); ++c) Q[static_cast<size_t>(r)][static_cast<size_t>(c)] = AffineExpr(A(r, c));
    return Q;
}

std::vector<std::vector<AffineExpr>> psd_lower(const std::vector<std::vector<AffineExpr>>& Q,
                                               const std::vector<AffineExpr>& off, const AffineExpr& corner) {
    const size_t m = Q.size();
    std::vector<std::vector<AffineExpr>> lower(m + 1);
    for (size_t r = 0; r < m; ++r)
        for (size_t c = 0; c <= r; ++c) lower[r].push_back(Q[r][c]);
    for (size_t c = 0; c < m; ++c) lower[m].push_back(off[c]);
    lower[m].push_back(corner);
    return lower;
}

/// Row q - u + const - alpha + v^T zeta >= 0 shared by the three LMI builders.
int add_epigraph_row(ConeProgram& prog, const EpigraphVars& vars, int u, const AffineExpr& constant_part,
                     const Vector& zeta, const std::string& tag) {
    AffineExpr row = AffineExpr::variable(vars.q) - AffineExpr::variable(u) + constant_part -
                     AffineExpr::variable(vars.alpha);
    for (size_t k = 0; k < vars.v.size(); ++k) row.add(vars.v[k], zeta(static_cast<long>(k)));
    return prog.add_nonnegative({row}, "epigraph" + tag);
}

std::vector<AffineExpr> diff_expr(const std::vector<int>& v, const std::vector<AffineExpr>& w) {
    std::vector<AffineExpr> out;
    for (size_t k = 0; k < v.size(); ++k) out.push_back(AffineExpr::variable(v[k]) - w[k]);
    return out;
}

}  // namespace

std::vector<int> add_decision_variables(ConeProgram& prog, const DrccpProblem& p) {
    const int n = p.n_vars();
    std::vector<int> x = add_named(prog, n, "x");
    const Domain& d = p.domain;
    if (d.kind == Domain::Kind::Binary)
        for (int j : x) prog.mark_binary(j);
    std::vector<AffineExpr> bounds;
    for (int j = 0; j < n; ++j) {
        if (d.lower.size() == n && std::isfinite(d.lower(j)))
            bounds.push_back(AffineExpr::variable(x[static_cast<size_t>(j)]) - AffineExpr(d.lower(j)));
        if (d.upper.size() == n && std::isfinite(d.upper(j)))
            bounds.push_back(AffineExpr(d.upper(j)) - AffineExpr::variable(x[static_cast<size_t>(j)]));
    }
    if (!bounds.empty()) prog.add_nonnegative(std::move(bounds), "domain_bounds");
    if (d.ineq_rows.rows() > 0) {
        std::vector<AffineExpr> rows;
        for (long k = 0; k < d.ineq_rows.rows(); ++k)
            rows.push_back(AffineExpr(d.ineq_rhs(k)) - linear_expr(d.ineq_rows.row(k).transpose(), x, 0.0));
        prog.add_nonnegative(std::move(rows), "domain_rows");
    }
    if (d.eq_rows.rows() > 0) {
        std::vector<AffineExpr> rows;
        for (long k = 0; k < d.eq_rows.rows(); ++k)
            rows.push_back(linear_expr(d.eq_rows.row(k).transpose(), x, -d.eq_rhs(k)));
        prog.add_zero(std::move(rows), "domain_eq");
    }
    return x;
}

ConeProgram build_robust_membership(const DrccpProblem& p) {
    require_buildable(p, false);
    if (common_variant(p) != "AffineBoth" && !p.constraints.empty())
        throw UnsupportedError("robust counterpart is available for affine rows only; got " + common_variant(p));

    ConeProgram prog;
    std::vector<int> x = add_decision_variables(prog, p);
    set_problem_objective(prog, p, x);
    for (int t = 0; t < p.n_rows(); ++t) {
        const auto& f = std::get<AffineBoth>(p.constraints[static_cast<size_t>(t)]);
        const std::string tag = "[" + std::to_string(t) + "]";
        std::vector<AffineExpr> g = affine_gradient_expr(f, x);
        AffineExpr constant = linear_expr(f.b, x, f.h);
        if (std::holds_alternative<FullSpace>(p.support)) {
            if (!g.empty()) prog.add_zero(std::move(g), "robust_gradient" + tag);
            prog.add_nonnegative({constant}, "robust" + tag);
            continue;
        }
        // min over the support of g^T xi = -sup of (-g)^T xi.
        std::vector<AffineExpr> neg;
        for (const auto& e : g) neg.push_back(-1.0 * e);
        std::vector<int> mult;
        int norm_var = -1;
        AffineExpr sup = add_support_function(prog, neg, p.support, tag, mult, norm_var);
        prog.add_nonnegative({constant - sup}, "robust" + tag);
    }
    return prog;
}

LmiEpigraph add_sup_epigraph_polyhedral(ConeProgram& prog, const std::vector<std::vector<AffineExpr>>& Q,
                                        const std::vector<AffineExpr>& g, const Polyhedron& support) {
    const int m = static_cast<int>(g.size());
    const int l = static_cast<int>(support.rows.rows());
    if (support.rows.cols() != m || static_cast<int>(Q.size()) != m)
        throw ValidationError("polyhedral epigraph: dimension mismatch");
    LmiEpigraph out;
    out.u = prog.add_variable("u");
    for (int k = 0; k < l; ++k) out.nu.push_back(prog.add_variable("nu[" + std::to_string(k) + "]"));
    std::vector<AffineExpr> off;
    for (int r = 0; r < m; ++r) {
        AffineExpr e = -0.5 * g[static_cast<size_t>(r)];
        for (int k = 0; k < l; ++k) e.add(out.nu[static_cast<size_t>(k)], 0.5 * support.rows(k, r));
        off.push_back(std::move(e));
    }
    AffineExpr corner = AffineExpr::variable(out.u);
    for (int k = 0; k < l; ++k) corner.add(out.nu[static_cast<size_t>(k)], -support.offsets(k));
    if (l > 0) prog.add_nonnegative(vars_expr(out.nu), "multipliers");
    out.psd_block = prog.add_psd(psd_lower(Q, off, corner), "lmi");
    return out;
}

LmiEpigraph add_sup_epigraph_ellipsoidal(ConeProgram& prog, const std::vector<std::vector<AffineExpr>>& Q,
                                         const std::vector<AffineExpr>& g, const Ellipsoid& support) {
    const int m = static_cast<int>(g.size());
    if (support.center.size() != m || static_cast<int>(Q.size()) != m)
        throw ValidationError("ellipsoidal epigraph: dimension mismatch");
    const Matrix Winv = support.shape.ldlt().solve(Matrix::Identity(m, m));
    const Vector Wc = Winv * support.center;
    LmiEpigraph out;
    out.u = prog.add_variable("u");
    const int nu = prog.add_variable("nu");
    out.nu.push_back(nu);
    std::vector<std::vector<AffineExpr>> top = Q;
    for (int r = 0; r < m; ++r)
        for (int c = 0; c < m; ++c) top[static_cast<size_t>(r)][static_cast<size_t>(c)].add(nu, Winv(r, c));
    std::vector<AffineExpr> off;
    for (int r = 0; r < m; ++r) off.push_back(-0.5 * g[static_cast<size_t>(r)] + AffineExpr::variable(nu, -Wc(r)));
    AffineExpr corner = AffineExpr::variable(out.u) + AffineExpr::variable(nu, support.center.dot(Wc) - 1.0);
    prog.add_nonnegative({AffineExpr::variable(nu)}, "multipliers");
    out.psd_block = prog.add_psd(psd_lower(top, off, corner), "lmi");
    return out;
}

namespace {

void tag_epigraph(ConeProgram& prog, const LmiEpigraph& e, const std::string& tag) {
    prog.rename_variable(e.u, "u" + tag);
    for (size_t k = 0; k < e.nu.size(); ++k) prog.rename_variable(e.nu[k], "nu" + tag + "[" + std::to_string(k) + "]");
}

const QuadraticXi& quadratic_row(const DrccpProblem& p, int t) {
    const auto* f = std::get_if<QuadraticXi>(&p.constraints.at(static_cast<size_t>(t)));
    if (!f) throw UnsupportedError("LMI epigraph for quadratic rows got a " + constraint_name(p.constraints[static_cast<size_t>(t)]) + " row");
    return *f;
}

}  // namespace

LmiEpigraph lmi_epigraph_polyhedral(ConeProgram& prog, const DrccpProblem& p, int i, int t, const EpigraphVars& vars) {
    const QuadraticXi& f = quadratic_row(p, t);
    const auto* poly = std::get_if<Polyhedron>(&p.support);
    if (!poly) throw UnsupportedError("polyhedral LMI epigraph needs a polyhedral support, got " + support_name(p.support));
    LmiEpigraph e = add_sup_epigraph_polyhedral(prog, constant_matrix(f.A), diff_expr(vars.v, vars_expr(vars.x)), *poly);
    tag_epigraph(prog, e, idx(i, t));
    e.row_block = add_epigraph_row(prog, vars, e.u, linear_expr(f.b, vars.x, f.h), p.samples()[static_cast<size_t>(i)], idx(i, t));
    return e;
}

LmiEpigraph lmi_epigraph_ellipsoidal(ConeProgram& prog, const DrccpProblem& p, int i, int t, const EpigraphVars& vars) {
    const QuadraticXi& f = quadratic_row(p, t);
    const auto* ell = std::get_if<Ellipsoid>(&p.support);
    if (!ell) throw UnsupportedError("ellipsoidal LMI epigraph needs an ellipsoidal support, got " + support_name(p.support));
    LmiEpigraph e = add_sup_epigraph_ellipsoidal(prog, constant_matrix(f.A), diff_expr(vars.v, vars_expr(vars.x)), *ell);
    tag_epigraph(prog, e, idx(i, t));
    e.row_block = add_epigraph_row(prog, vars, e.u, linear_expr(f.b, vars.x, f.h), p.samples()[static_cast<size_t>(i)], idx(i, t));
    return e;
}

LmiEpigraph lmi_epigraph_bilinear(ConeProgram& prog, const DrccpProblem& p, int i, int t, const EpigraphVars& vars) {
    const auto* f = std::get_if<BilinearQuadratic>(&p.constraints.at(static_cast<size_t>(t)));
    if (!f) throw UnsupportedError("bilinear LMI epigraph got a " + constraint_name(p.constraints[static_cast<size_t>(t)]) + " row");
    const auto* ell = std::get_if<Ellipsoid>(&p.support);
    if (!ell) throw UnsupportedError("bilinear LMI epigraph needs an ellipsoidal support, got " + support_name(p.support));
    if (!domain_nonnegative(p))
        throw UnsupportedError("bilinear LMI epigraph needs x >= 0 from the domain so that sum_j x_j W_j stays PSD");
    const int m = p.xi_dim();
    const size_t n = vars.x.size();
    std::vector<std::vector<AffineExpr>> Wx(static_cast<size_t>(m), std::vector<AffineExpr>(static_cast<size_t>(m)));
    std::vector<AffineExpr> Rx(static_cast<size_t>(m));
    AffineExpr Hx;
    for (size_t j = 0; j < n; ++j) {
        const int xj = vars.x[j];
        for (int r = 0; r < m; ++r) {
            for (int c = 0; c < m; ++c) Wx[static_cast<size_t>(r)][static_cast<size_t>(c)].add(xj, f->W[j](r, c));
            Rx[static_cast<size_t>(r)].add(xj, f->r[j](r));
        }
        Hx.add(xj, f->h(static_cast<long>(j)));
    }
    LmiEpigraph e = add_sup_epigraph_ellipsoidal(prog, Wx, diff_expr(vars.v, Rx), *ell);
    tag_epigraph(prog, e, idx(i, t));
    e.row_block = add_epigraph_row(prog, vars, e.u, Hx, p.samples()[static_cast<size_t>(i)], idx(i, t));
    return e;
}

CvarProgram build_cvar_relaxation(const DrccpProblem& p) {
    require_buildable(p, true);
    const std::string variant = common_variant(p);
    const std::string support = support_name(p.support);
    const bool affine = variant == "AffineBoth";
    const bool full = std::holds_alternative<FullSpace>(p.support);
    if (variant == "QuadraticXi" && support != "Polyhedron" && support != "Ellipsoid")
        throw UnsupportedError("no LMI reformulation for quadratic rows on a " + support +
                               " support (available: polyhedral or ellipsoidal support)");
    if (variant == "BilinearQuadratic" && support != "Ellipsoid")
        throw UnsupportedError("no LMI reformulation for bilinear-quadratic rows on a " + support +
                               " support (available: ellipsoidal support)");

    const int N = p.n_samples();
    const int T = p.n_rows();
    const int m = p.xi_dim();
    const double eps = p.risk;
    const double delta = p.ball.radius;

    CvarProgram out;
    ConeProgram& prog = out.program;
    CvarCertificate& L = out.layout;
    L.x = add_decision_variables(prog, p);
    set_problem_objective(prog, p, L.x);
    L.alpha = add_named(prog, T, "alpha");
    std::vector<AffineExpr> alpha_rows;
    for (int a : L.alpha) alpha_rows.push_back(AffineExpr::variable(a) - AffineExpr(kAlphaMin));
    prog.add_nonnegative(std::move(alpha_rows), "alpha_min");

    // With an affine row on the full space the supremum is finite only for v = A x + a,
    // so v is eliminated and the norm row no longer depends on the sample.
    const bool eliminate = affine && full;
    L.v.assign(static_cast<size_t>(N), std::vector<std::vector<int>>(static_cast<size_t>(T)));
    L.q.assign(static_cast<size_t>(N), std::vector<int>(static_cast<size_t>(T), -1));
    L.u.assign(static_cast<size_t>(N), std::vector<int>(static_cast<size_t>(T), -1));
    L.nu.assign(static_cast<size_t>(N), std::vector<std::vector<int>>(static_cast<size_t>(T)));
    for (int i = 0; i < N; ++i)
        for (int t = 0; t < T; ++t) {
            if (!eliminate) L.v[i][t] = add_named(prog, m, "v" + idx(i, t));
            L.q[i][t] = prog.add_variable("q" + idx(i, t));
        }
    std::vector<AffineExpr> q_rows;
    for (int i = 0; i < N; ++i)
        for (int t = 0; t < T; ++t) q_rows.push_back(AffineExpr::variable(L.q[i][t]));
    prog.add_nonnegative(std::move(q_rows), "q_nonneg");

    for (int t = 0; t < T; ++t) {
        // eps alpha_t - (1/N) sum_i q_it, shared by every norm row of t.
        AffineExpr budget = AffineExpr::variable(L.alpha[t], eps);
        for (int i = 0; i < N; ++i) budget.add(L.q[i][t], -1.0 / N);
        if (eliminate) {
            const auto& f = std::get<AffineBoth>(p.constraints[static_cast<size_t>(t)]);
            add_dual_norm_bound(prog, budget, affine_gradient_expr(f, L.x), delta, p.ball.norm,
                                "norm[" + std::to_string(t) + "]");
        } else if (delta == 0.0) {
            prog.add_nonnegative({budget}, "norm[" + std::to_string(t) + "]");
        } else {
            for (int i = 0; i < N; ++i)
                add_dual_norm_bound(prog, budget, vars_expr(L.v[i][t]), delta, p.ball.norm, "norm" + idx(i, t));
        }
    }

    for (int i = 0; i < N; ++i) {
        const Vector& zeta = p.samples()[static_cast<size_t>(i)];
        for (int t = 0; t < T; ++t) {
            const std::string tag = idx(i, t);
            EpigraphVars vars{L.x, L.alpha[t], L.v[i][t], L.q[i][t]};
            const ConstraintFunction& row = p.constraints[static_cast<size_t>(t)];
            if (affine) {
                const auto& f = std::get<AffineBoth>(row);
                AffineExpr constant = linear_expr(f.b, L.x, f.h);
                if (eliminate) {
                    // alpha_t - f_t(x, zeta_i) <= q_it
                    AffineExpr e = AffineExpr::variable(vars.q) + constant - AffineExpr::variable(vars.alpha) +
                                   dot_expr(affine_gradient_expr(f, L.x), zeta);
                    prog.add_nonnegative({e}, "epigraph" + tag);
                    continue;
                }
                std::vector<AffineExpr> g = diff_expr(vars.v, affine_gradient_expr(f, L.x));
                int norm_var = -1;
                AffineExpr sup = add_support_function(prog, g, p.support, tag, L.nu[i][t], norm_var);
                L.u[i][t] = norm_var;
                AffineExpr e = AffineExpr::variable(vars.q) - sup + constant - AffineExpr::variable(vars.alpha);
                for (int k = 0; k < m; ++k) e.add(vars.v[static_cast<size_t>(k)], zeta(k));
                prog.add_nonnegative({e}, "epigraph" + tag);
                continue;
            }
            LmiEpigraph e;
            if (variant == "BilinearQuadratic")
                e = lmi_epigraph_bilinear(prog, p, i, t, vars);
            else if (support == "Polyhedron")
                e = lmi_epigraph_polyhedral(prog, p, i, t, vars);
            else
                e = lmi_epigraph_ellipsoidal(prog, p, i, t, vars);
            L.u[i][t] = e.u;
            L.nu[i][t] = e.nu;
        }
    }
    return out;
}

namespace {

/// Smallest positive dual norm of A x + a over x in {0,1}^n, by Gray-code enumeration.
double enumerate_gamma(const Matrix& A, const Vector& a, GroundNorm ground) {
    const int n = static_cast<int>(A.cols());
    Vector w = a;
    double best = kInf;
    auto consider = [&]() {
        if (w.cwiseAbs().maxCoeff() > 1e-12) best = std::min(best, dual_norm(w, ground));
    };
    if (w.size() > 0) consider();
    std::vector<char> on(static_cast<size_t>(n), 0);
    const unsigned long total = 1UL << n;
    for (unsigned long k = 1; k < total; ++k) {
        const int bit = __builtin_ctzl(k);
        on[static_cast<size_t>(bit)] ^= 1;
        if (on[static_cast<size_t>(bit)])
            w += A.col(bit);
        else
            w -= A.col(bit);
        consider();
    }
    return best;
}

/**
 * Conservative gamma when enumeration is too large: if every row of [A a] has entries of one
 * sign, no cancellation is possible, so any nonzero row value is at least its smallest nonzero
 * entry in magnitude, and every dual norm dominates the max norm.
 */
double sign_consistent_gamma(const Matrix& A, const Vector& a) {
    double best = kInf;
    for (long r = 0; r < A.rows(); ++r) {
        bool pos = false, neg = false;
        double smallest = kInf;
        auto visit = [&](double v) {
            if (v > 0) pos = true;
            if (v < 0) neg = true;
            if (v != 0) smallest = std::min(smallest, std::abs(v));
        };
        for (long j = 0; j < A.cols(); ++j) visit(A(r, j));
        visit(a(r));
        if (pos && neg)
            throw UnsupportedError("alpha bound: more than " + std::to_string(kAlphaBoundEnumerationLimit) +
                                   " active binaries and a row mixing signs; no safe bound is available");
        best = std::min(best, smallest);
    }
    return best;
}

}  // namespace

std::vector<double> compute_alpha_bound(const DrccpProblem& p) {
    if (!(p.ball.radius > 0.0))
        throw ValidationError("alpha bound needs a positive radius; use the sample average model at radius zero");
    if (common_variant(p) != "AffineBoth") throw UnsupportedError("alpha bound is defined for affine rows only");
    std::vector<double> M;
    for (const auto& row : p.constraints) {
        const auto& f = std::get<AffineBoth>(row);
        // Only rows and columns that can be nonzero matter.
        std::vector<long> rows, cols;
        for (long r = 0; r < f.A.rows(); ++r)
            if (f.a(r) != 0.0 || f.A.row(r).cwiseAbs().maxCoeff() > 0.0) rows.push_back(r);
        for (long j = 0; j < f.A.cols(); ++j)
            if (f.A.rows() > 0 && f.A.col(j).cwiseAbs().maxCoeff() > 0.0) cols.push_back(j);
        Matrix A(static_cast<long>(rows.size()), static_cast<long>(cols.size()));
        Vector a(static_cast<long>(rows.size()));
        for (size_t r = 0; r < rows.size(); ++r) {
            a(static_cast<long>(r)) = f.a(rows[r]);
            for (size_t j = 0; j < cols.size(); ++j) A(static_cast<long>(r), static_cast<long>(j)) = f.A(rows[r], cols[j]);
        }
        double gamma = kInf;
        if (!rows.empty()) {
            if (static_cast<int>(cols.size()) <= kAlphaBoundEnumerationLimit) {
                // Rows outside the support are zero, so the reduced dual norm equals the full one.
                gamma = enumerate_gamma(A, a, p.ball.norm);
            } else {
                gamma = sign_consistent_gamma(A, a);
            }
        }
        M.push_back(std::isfinite(gamma) ? p.risk / (p.ball.radius * gamma) : kInf);
    }
    return M;
}

BinaryCvarProgram build_binary_cvar_mip(const DrccpProblem& p) {
    require_buildable(p, true);
    if (p.domain.kind != Domain::Kind::Binary) throw ValidationError("binary CVaR model needs a binary domain");
    if (!std::holds_alternative<FullSpace>(p.support))
        throw UnsupportedError("binary CVaR model is derived for the full-space support; got " + support_name(p.support));
    if (common_variant(p) != "AffineBoth") throw UnsupportedError("binary CVaR model needs affine rows");
    const std::vector<double> M = compute_alpha_bound(p);

    const int n = p.n_vars();
    const int N = p.n_samples();
    const int T = p.n_rows();
    const double eps = p.risk;
    const double delta = p.ball.radius;

    BinaryCvarProgram out;
    ConeProgram& prog = out.program;
    BinaryCvarCertificate& L = out.layout;
    L.M = M;
    L.x = add_decision_variables(prog, p);
    set_problem_objective(prog, p, L.x);
    L.lambda = prog.add_variable("lambda");
    L.alpha.assign(static_cast<size_t>(T), -1);
    L.y.assign(static_cast<size_t>(T), {});
    for (int t = 0; t < T; ++t)
        if (std::isfinite(M[static_cast<size_t>(t)])) L.alpha[t] = prog.add_variable("alpha[" + std::to_string(t) + "]");
    for (int t = 0; t < T; ++t)
        if (L.alpha[t] >= 0) L.y[t] = add_named(prog, n, "y[" + std::to_string(t) + "]");
    L.s = add_named(prog, N, "s");

    // lambda delta + (1/N) sum_i s_i <= eps
    AffineExpr budget(eps);
    budget.add(L.lambda, -delta);
    for (int s : L.s) budget.add(s, -1.0 / N);
    std::vector<AffineExpr> signs{budget, AffineExpr::variable(L.lambda)};
    for (int s : L.s) signs.push_back(AffineExpr::variable(s));
    prog.add_nonnegative(std::move(signs), "budget");

    for (int t = 0; t < T; ++t) {
        const auto& f = std::get<AffineBoth>(p.constraints[static_cast<size_t>(t)]);
        const std::string tag = "[" + std::to_string(t) + "]";
        if (L.alpha[t] < 0) {
            // The gradient vanishes for every binary x: the row is the deterministic b^T x + h >= 0.
            prog.add_nonnegative({linear_expr(f.b, L.x, f.h)}, "deterministic" + tag);
            continue;
        }
        const int alpha = L.alpha[t];
        const std::vector<int>& y = L.y[t];
        const double Mt = M[static_cast<size_t>(t)];
        prog.add_nonnegative({AffineExpr::variable(alpha) - AffineExpr(kAlphaMin)}, "alpha_min" + tag);

        // Gradient of the scaled row: A y + a alpha.
        std::vector<AffineExpr> grad;
        for (long r = 0; r < f.A.rows(); ++r) {
            AffineExpr e = AffineExpr::variable(alpha, f.a(r));
            for (int j = 0; j < n; ++j) e.add(y[static_cast<size_t>(j)], f.A(r, j));
            grad.push_back(std::move(e));
        }
        AffineExpr constant = AffineExpr::variable(alpha, f.h);
        for (int j = 0; j < n; ++j) constant.add(y[static_cast<size_t>(j)], f.b(j));

        // f_hat_t((alpha, y), zeta_i) >= 1 - s_i
        std::vector<AffineExpr> rows;
        for (int i = 0; i < N; ++i) {
            AffineExpr e = dot_expr(grad, p.samples()[static_cast<size_t>(i)]) + constant - AffineExpr(1.0) +
                           AffineExpr::variable(L.s[static_cast<size_t>(i)]);
            rows.push_back(std::move(e));
        }
        prog.add_nonnegative(std::move(rows), "scenario" + tag);

        std::vector<AffineExpr> mc;
        for (int j = 0; j < n; ++j) {
            const int yj = y[static_cast<size_t>(j)];
            const int xj = L.x[static_cast<size_t>(j)];
            mc.push_back(AffineExpr::variable(yj));
            mc.push_back(AffineExpr::variable(xj, Mt) - AffineExpr::variable(yj));
            mc.push_back(AffineExpr::variable(yj) - AffineExpr::variable(alpha) + AffineExpr(Mt) -
                         AffineExpr::variable(xj, Mt));
            mc.push_back(AffineExpr::variable(alpha) - AffineExpr::variable(yj));
        }
        prog.add_nonnegative(std::move(mc), "mccormick" + tag);

        add_dual_norm_bound(prog, AffineExpr::variable(L.lambda), grad, 1.0, p.ball.norm, "dual_norm" + tag);
    }
    return out;
}

ConeProgram build_saa_milp(const DrccpProblem& p) {
    require_buildable(p, true, true);
    if (common_variant(p) != "AffineBoth") throw UnsupportedError("sample average model needs affine rows");
    const int n = p.n_vars();
    const int N = p.n_samples();
    const Domain& d = p.domain;
    Vector lo(n), hi(n);
    for (int j = 0; j < n; ++j) {
        lo(j) = d.kind == Domain::Kind::Binary ? 0.0 : (d.lower.size() == n ? d.lower(j) : -kInf);
        hi(j) = d.kind == Domain::Kind::Binary ? 1.0 : (d.upper.size() == n ? d.upper(j) : kInf);
        if (d.kind == Domain::Kind::Binary) {
            if (d.lower.size() == n) lo(j) = std::max(lo(j), d.lower(j));
            if (d.upper.size() == n) hi(j) = std::min(hi(j), d.upper(j));
        }
        if (!std::isfinite(lo(j)) || !std::isfinite(hi(j)))
            throw ValidationError("sample average model needs finite bounds on every x for its big-M constants");
    }

    ConeProgram prog;
    std::vector<int> x = add_decision_variables(prog, p);
    set_problem_objective(prog, p, x);
    std::vector<int> s = add_named(prog, N, "s");
    for (int v : s) prog.mark_binary(v);

    // (1/N) sum_i s_i >= 1 - eps
    AffineExpr cover(-(1.0 - p.risk));
    for (int v : s) cover.add(v, 1.0 / N);
    prog.add_nonnegative({cover}, "coverage");

    for (int t = 0; t < p.n_rows(); ++t) {
        const auto& f = std::get<AffineBoth>(p.constraints[static_cast<size_t>(t)]);
        std::vector<AffineExpr> rows;
        for (int i = 0; i < N; ++i) {
            const Vector& zeta = p.samples()[static_cast<size_t>(i)];
            // f_t(x, zeta) = c^T x + k, bounded below over the box by interval arithmetic.
            const Vector c = f.A.transpose() * zeta + f.b;
            const double k = f.a.dot(zeta) + f.h;
            double lower = k;
            for (int j = 0; j < n; ++j) lower += std::min(c(j) * lo(j), c(j) * hi(j));
            const double big_m = std::max(0.0, -lower);
            AffineExpr e = linear_expr(c, x, k + big_m);
            e.add(s[static_cast<size_t>(i)], -big_m);
            rows.push_back(std::move(e));
        }
        prog.add_nonnegative(std::move(rows), "indicator[" + std::to_string(t) + "]");
    }
    return prog;
}

}  // namespace drccp
