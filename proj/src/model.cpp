#include "drccp/model.hpp"

#include <Eigen/Eigenvalues>

#include <cmath>
#include <sstream>

namespace drccp {

GroundNorm dual_of(GroundNorm norm) {
    switch (norm) {
    case GroundNorm::L1: return GroundNorm::Linf;
    case GroundNorm::Linf: return GroundNorm::L1;
    default: return GroundNorm::L2;
    }
}

double norm_value(const Vector& v, GroundNorm norm) {
    if (v.size() == 0) return 0.0;
    switch (norm) {
    case GroundNorm::L1: return v.lpNorm<1>();
    case GroundNorm::Linf: return v.lpNorm<Eigen::Infinity>();
    default: return v.norm();
    }
}

double dual_norm(const Vector& v, GroundNorm norm) { return norm_value(v, dual_of(norm)); }

int support_dim(const SupportSet& support) {
    struct Visitor {
        int operator()(const FullSpace& s) const { return s.dim; }
        int operator()(const Polyhedron& s) const { return static_cast<int>(s.rows.cols()); }
        int operator()(const Ellipsoid& s) const { return static_cast<int>(s.center.size()); }
        int operator()(const Box& s) const { return static_cast<int>(s.lower.size()); }
    };
    return std::visit(Visitor{}, support);
}

std::string support_name(const SupportSet& support) {
    static const char* names[] = {"FullSpace", "Polyhedron", "Ellipsoid", "Box"};
    return names[support.index()];
}

bool support_contains(const SupportSet& support, const Vector& xi, double tol) {
    if (xi.size() != support_dim(support)) return false;
    if (const auto* p = std::get_if<Polyhedron>(&support))
        return ((p->rows * xi - p->offsets).array() <= tol).all();
    if (const auto* e = std::get_if<Ellipsoid>(&support)) {
        Vector diff = xi - e->center;
        return diff.dot(e->shape.ldlt().solve(diff)) <= 1.0 + tol;
    }
    if (const auto* b = std::get_if<Box>(&support))
        return ((xi - b->lower).array() >= -tol).all() && ((b->upper - xi).array() >= -tol).all();
    return true;
}

std::string constraint_name(const ConstraintFunction& f) {
    static const char* names[] = {"AffineBoth", "QuadraticXi", "BilinearQuadratic"};
    return names[f.index()];
}

namespace {

double min_eigenvalue(const Matrix& m) {
    if (m.size() == 0) return 0.0;
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

bool symmetric(const Matrix& m) {
    if (m.rows() != m.cols()) return false;
    double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
    return (m - m.transpose()).cwiseAbs().maxCoeff() <= 1e-12 * scale;
}

bool all_finite(const Matrix& m) { return m.allFinite(); }

class Collector {
  public:
    void add(std::string invariant, std::string location, std::string message) {
        out.push_back({std::move(invariant), std::move(location), std::move(message)});
    }
    std::vector<Diagnostic> out;
};

std::string at(const std::string& what, long idx) {
    std::ostringstream os;
    os << what << "[" << idx << "]";
    return os.str();
}

void check_support(const SupportSet& support, Collector& c) {
    if (const auto* f = std::get_if<FullSpace>(&support)) {
        if (f->dim < 1) c.add("support-dimension", "support", "full-space support needs dim >= 1");
    } else if (const auto* p = std::get_if<Polyhedron>(&support)) {
        if (p->rows.rows() != p->offsets.size() || p->rows.rows() == 0)
            c.add("dimension", "support", "polyhedron rows and offsets disagree or are empty");
        for (long k = 0; k < p->offsets.size(); ++k)
            if (!(p->offsets(k) > 0.0))
                c.add("polyhedron-offset-positive", at("support.offsets", k),
                      "polyhedral support requires every offset d_k > 0 (zero must be interior)");
    } else if (const auto* e = std::get_if<Ellipsoid>(&support)) {
        if (e->shape.rows() != e->center.size() || !symmetric(e->shape)) {
            c.add("ellipsoid-shape", "support.shape", "ellipsoid shape must be symmetric and match the center");
        } else if (!(min_eigenvalue(e->shape) > 0.0)) {
            c.add("ellipsoid-shape", "support.shape", "ellipsoid shape must be positive definite");
        }
    } else if (const auto* b = std::get_if<Box>(&support)) {
        if (b->lower.size() != b->upper.size()) {
            c.add("dimension", "support", "box bounds have different lengths");
        } else {
            for (long k = 0; k < b->lower.size(); ++k)
                if (!(b->lower(k) <= b->upper(k)))
                    c.add("box-order", at("support.lower", k), "box requires lower <= upper");
        }
    }
}

void check_constraint(const ConstraintFunction& f, int t, int n, int m, Collector& c) {
    const std::string loc = at("constraints", t);
    if (const auto* a = std::get_if<AffineBoth>(&f)) {
        if (a->A.rows() != m || a->A.cols() != n || a->a.size() != m || a->b.size() != n)
            c.add("dimension", loc, "affine row needs A m-by-n, a in R^m, b in R^n");
        if (!all_finite(a->A) || !all_finite(a->a) || !all_finite(a->b) || !std::isfinite(a->h))
            c.add("finite", loc, "non-finite coefficient");
    } else if (const auto* q = std::get_if<QuadraticXi>(&f)) {
        if (m != n) c.add("quadratic-square", loc, "quadratic-in-xi rows need dim(xi) == dim(x)");
        if (q->A.rows() != m || q->A.cols() != m || q->b.size() != n) {
            c.add("dimension", loc, "quadratic row needs A m-by-m and b in R^n");
        } else if (!symmetric(q->A)) {
            c.add("psd", loc, "quadratic matrix must be symmetric");
        } else if (min_eigenvalue(q->A) < kPsdTolerance) {
            c.add("psd", loc, "quadratic matrix must be positive semidefinite");
        }
    } else if (const auto* bq = std::get_if<BilinearQuadratic>(&f)) {
        if (static_cast<int>(bq->W.size()) != n || static_cast<int>(bq->r.size()) != n || bq->h.size() != n) {
            c.add("dimension", loc, "bilinear row needs one (W_j, r_j, h_j) per decision variable");
            return;
        }
        for (int j = 0; j < n; ++j) {
            if (bq->W[j].rows() != m || bq->W[j].cols() != m || bq->r[j].size() != m) {
                c.add("dimension", at(loc + ".W", j), "W_j must be m-by-m and r_j in R^m");
            } else if (!symmetric(bq->W[j]) || min_eigenvalue(bq->W[j]) < kPsdTolerance) {
                c.add("psd", at(loc + ".W", j), "W_j must be symmetric positive semidefinite");
            }
        }
    }
}

}  // namespace

std::vector<Diagnostic> validate_problem(const DrccpProblem& p) {
    Collector c;
    const int n = p.n_vars();
    const int m = p.xi_dim();
    if (n < 1) c.add("dimension", "objective", "objective must have at least one entry");
    if (!(p.risk > 0.0 && p.risk < 1.0)) c.add("risk-range", "risk", "risk level must lie in (0, 1)");
    if (!(p.ball.radius >= 0.0) || !std::isfinite(p.ball.radius))
        c.add("radius-nonnegative", "ball.radius", "Wasserstein radius must be finite and >= 0");
    if (p.constraints.empty()) c.add("rows-present", "constraints", "at least one uncertain row is required");

    check_support(p.support, c);

    const auto& samples = p.ball.center.samples;
    if (samples.empty()) c.add("samples-present", "ball.center", "at least one sample is required");
    if (p.ball.center.dim != m)
        c.add("dimension", "ball.center.dim", "sample dimension differs from support dimension");
    for (size_t i = 0; i < samples.size(); ++i) {
        if (samples[i].size() != m) {
            c.add("dimension", at("ball.center.samples", static_cast<long>(i)),
                  "sample dimension differs from support dimension");
        } else if (!support_contains(p.support, samples[i])) {
            c.add("sample-in-support", at("ball.center.samples", static_cast<long>(i)),
                  "sample lies outside the support set");
        }
    }

    for (size_t t = 0; t < p.constraints.size(); ++t) {
        if (p.constraints[t].index() != p.constraints.front().index())
            c.add("homogeneous-rows", at("constraints", static_cast<long>(t)),
                  "mixed constraint variants: row is " + constraint_name(p.constraints[t]) + ", row 0 is " +
                      constraint_name(p.constraints.front()));
        check_constraint(p.constraints[t], static_cast<int>(t), n, m, c);
    }

    const Domain& d = p.domain;
    if (d.lower.size() != 0 && d.lower.size() != n) c.add("dimension", "domain.lower", "bound length differs from n");
    if (d.upper.size() != 0 && d.upper.size() != n) c.add("dimension", "domain.upper", "bound length differs from n");
    if (d.lower.size() == n && d.upper.size() == n) {
        for (int j = 0; j < n; ++j)
            if (!(d.lower(j) <= d.upper(j))) c.add("bound-order", at("domain.lower", j), "domain requires lower <= upper");
    }
    if (d.ineq_rows.rows() != d.ineq_rhs.size() || (d.ineq_rows.rows() > 0 && d.ineq_rows.cols() != n))
        c.add("dimension", "domain.ineq_rows", "inequality rows must be k-by-n with k right-hand sides");
    if (d.eq_rows.rows() != d.eq_rhs.size() || (d.eq_rows.rows() > 0 && d.eq_rows.cols() != n))
        c.add("dimension", "domain.eq_rows", "equality rows must be k-by-n with k right-hand sides");
    return c.out;
}

void require_valid(const DrccpProblem& p) {
    auto diags = validate_problem(p);
    if (diags.empty()) return;
    std::ostringstream os;
    os << "invalid problem:";
    for (const auto& d : diags) os << "\n  " << d.location << ": " << d.message << " [" << d.invariant << "]";
    throw ValidationError(os.str());
}

double evaluate_constraint(const ConstraintFunction& f, const Vector& x, const Vector& xi) {
    if (const auto* a = std::get_if<AffineBoth>(&f)) {
        if (a->A.cols() != x.size() || a->A.rows() != xi.size()) throw ValidationError("evaluate_constraint: dimension mismatch");
        return affine_gradient(*a, x).dot(xi) + affine_constant(*a, x);
    }
    if (const auto* q = std::get_if<QuadraticXi>(&f)) {
        if (q->A.rows() != xi.size() || q->b.size() != x.size() || x.size() != xi.size())
            throw ValidationError("evaluate_constraint: dimension mismatch");
        return xi.dot(x) + xi.dot(q->A * xi) + q->b.dot(x) + q->h;
    }
    const auto& bq = std::get<BilinearQuadratic>(f);
    if (static_cast<long>(bq.W.size()) != x.size()) throw ValidationError("evaluate_constraint: dimension mismatch");
    double total = 0.0;
    for (long j = 0; j < x.size(); ++j) {
        if (bq.W[j].rows() != xi.size()) throw ValidationError("evaluate_constraint: dimension mismatch");
        total += x(j) * (xi.dot(bq.W[j] * xi) + bq.r[j].dot(xi) + bq.h(j));
    }
    return total;
}

Vector affine_gradient(const AffineBoth& f, const Vector& x) { return f.A * x + f.a; }

double affine_constant(const AffineBoth& f, const Vector& x) { return f.b.dot(x) + f.h; }

std::string common_variant(const DrccpProblem& p) {
    if (p.constraints.empty()) return "none";
    for (size_t t = 1; t < p.constraints.size(); ++t)
        if (p.constraints[t].index() != p.constraints.front().index())
            throw ValidationError("mixed constraint variants: row " + std::to_string(t) + " is " +
                                  constraint_name(p.constraints[t]) + " but row 0 is " +
                                  constraint_name(p.constraints.front()));
    return constraint_name(p.constraints.front());
}

}  // namespace drccp
