#include "drccp/solve.hpp"

#include "ipm_cones.hpp"

#include <Eigen/OrderingMethods>
#include <Eigen/Sparse>
#include <Eigen/SparseCholesky>

#include <chrono>
#include <cmath>
#include <cstdio>
#include <limits>
#include <map>

namespace drccp {

using ipm::ConeSpec;
using ipm::Scaling;

namespace {

using SpMat = Eigen::SparseMatrix<double>;
using Trip = Eigen::Triplet<double>;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Where an original block row ended up in the standard form.
struct RowSlot {
    bool equality = false;
    int index = -1;  // row of A or G; -1 if presolved away
};

/**
 * min c^T x  s.t.  A x = b,  G x + s = h,  s in K.
 * Built from a ConeProgram: zero rows go to A, cone rows to G (LP rows first, then
 * second-order, then PSD blocks).
 */
struct StandardForm {
    int n = 0;
    int n_user = 0;
    Vector c;
    double sign = 1.0;
    SpMat A, G;
    Vector b, h;
    ConeSpec cones;
    std::vector<std::vector<RowSlot>> slots;
    bool infeasible = false;
};

struct RowData {
    std::vector<Term> terms;
    double rhs = 0.0;  // A: b entry; G: h entry
};

// Long LP rows that repeat the same linear form (e.g. a shared sum over samples) get that
// form replaced by one auxiliary variable, which keeps the KKT factor sparse.
void extract_shared_forms(std::vector<RowData>& eq_rows, std::vector<RowData*> long_rows, int& n) {
    constexpr size_t kLongRow = 24;
    constexpr int kMinCount = 8;
    constexpr size_t kMinForm = 8;
    std::erase_if(long_rows, [](const RowData* r) { return r->terms.size() < kLongRow; });
    if (long_rows.size() < 2) return;
    std::map<int, int> count;
    for (const RowData* r : long_rows)
        for (const auto& t : r->terms) ++count[t.var];
    std::map<std::vector<std::pair<int, double>>, std::vector<RowData*>> groups;
    for (RowData* r : long_rows) {
        std::vector<std::pair<int, double>> form;
        for (const auto& t : r->terms)
            if (count[t.var] >= kMinCount) form.emplace_back(t.var, t.coef);
        if (form.size() >= kMinForm) groups[form].push_back(r);
    }
    for (auto& [form, members] : groups) {
        if (members.size() < 2) continue;
        const int aux = n++;
        RowData def;
        def.terms.push_back({aux, 1.0});
        for (const auto& [var, coef] : form) def.terms.push_back({var, -coef});
        eq_rows.push_back(std::move(def));
        for (RowData* r : members) {
            std::vector<Term> kept{{aux, 1.0}};
            size_t f = 0;
            for (const auto& t : r->terms) {
                if (f < form.size() && form[f].first == t.var) {
                    ++f;
                    continue;
                }
                kept.push_back(t);
            }
            r->terms = std::move(kept);
        }
    }
}

SpMat to_sparse(const std::vector<RowData>& rows, int n) {
    std::vector<Trip> trips;
    for (size_t r = 0; r < rows.size(); ++r)
        for (const auto& t : rows[r].terms) trips.emplace_back(static_cast<int>(r), t.var, t.coef);
    SpMat m(static_cast<int>(rows.size()), n);
    m.setFromTriplets(trips.begin(), trips.end());
    return m;
}

StandardForm build_standard_form(const ConeProgram& prog) {
    StandardForm sf;
    sf.n_user = prog.n_vars();
    int n = sf.n_user;
    sf.sign = prog.sense() == Sense::Maximize ? -1.0 : 1.0;

    std::vector<RowData> eq_rows, lp_rows, soc_rows, psd_rows;
    sf.slots.resize(prog.blocks().size());
    constexpr double kEmptyTol = 1e-12;

    // G row for value v = coef x + const in K: s = v means G = -coef, h = const.
    auto cone_row = [](const AffineExpr& e) {
        RowData r;
        for (const auto& t : e.terms()) r.terms.push_back({t.var, -t.coef});
        r.rhs = e.constant();
        return r;
    };

    for (size_t bi = 0; bi < prog.blocks().size(); ++bi) {
        const ConeBlock& blk = prog.blocks()[bi];
        auto& slots = sf.slots[bi];
        slots.resize(blk.rows.size());
        if (blk.kind == ConeKind::Zero || blk.kind == ConeKind::Nonnegative) {
            for (size_t r = 0; r < blk.rows.size(); ++r) {
                const AffineExpr& e = blk.rows[r];
                if (e.terms().empty()) {
                    const bool ok = blk.kind == ConeKind::Zero ? std::abs(e.constant()) <= kEmptyTol
                                                                : e.constant() >= -kEmptyTol;
                    if (!ok) sf.infeasible = true;
                    continue;
                }
                if (blk.kind == ConeKind::Zero) {
                    RowData d;
                    d.terms = e.terms();
                    d.rhs = -e.constant();
                    slots[r] = {true, static_cast<int>(eq_rows.size())};
                    eq_rows.push_back(std::move(d));
                } else {
                    slots[r] = {false, static_cast<int>(lp_rows.size())};
                    lp_rows.push_back(cone_row(e));
                }
            }
        }
    }
    sf.cones.n_lp = static_cast<int>(lp_rows.size());
    sf.cones.total = sf.cones.n_lp;
    for (size_t bi = 0; bi < prog.blocks().size(); ++bi) {
        const ConeBlock& blk = prog.blocks()[bi];
        if (blk.kind != ConeKind::SecondOrder) continue;
        sf.cones.add_soc(blk.dim());
        for (size_t r = 0; r < blk.rows.size(); ++r) {
            sf.slots[bi][r] = {false, sf.cones.n_lp + static_cast<int>(soc_rows.size())};
            soc_rows.push_back(cone_row(blk.rows[r]));
        }
    }
    for (size_t bi = 0; bi < prog.blocks().size(); ++bi) {
        const ConeBlock& blk = prog.blocks()[bi];
        if (blk.kind != ConeKind::PositiveSemidefinite) continue;
        sf.cones.add_psd(blk.side);
        for (size_t r = 0; r < blk.rows.size(); ++r) {
            sf.slots[bi][r] = {false, sf.cones.n_lp + static_cast<int>(soc_rows.size() + psd_rows.size())};
            psd_rows.push_back(cone_row(blk.rows[r]));
        }
    }

    std::vector<RowData*> candidates;
    for (auto& r : lp_rows) candidates.push_back(&r);
    extract_shared_forms(eq_rows, candidates, n);

    std::vector<RowData> g_rows = std::move(lp_rows);
    for (auto& r : soc_rows) g_rows.push_back(std::move(r));
    for (auto& r : psd_rows) g_rows.push_back(std::move(r));

    sf.n = n;
    sf.A = to_sparse(eq_rows, n);
    sf.G = to_sparse(g_rows, n);
    sf.b.resize(static_cast<long>(eq_rows.size()));
    for (size_t r = 0; r < eq_rows.size(); ++r) sf.b(static_cast<long>(r)) = eq_rows[r].rhs;
    sf.h.resize(static_cast<long>(g_rows.size()));
    for (size_t r = 0; r < g_rows.size(); ++r) sf.h(static_cast<long>(r)) = g_rows[r].rhs;
    sf.c = Vector::Zero(n);
    for (const auto& t : prog.objective().terms()) sf.c(t.var) += sf.sign * t.coef;
    return sf;
}

// Ruiz equilibration of [A; G]; rows of one second-order or PSD cone share a factor.
struct Equilibration {
    Vector col;    // x = col .* x_scaled
    Vector row_a;  // A_scaled = diag(row_a) A diag(col)
    Vector row_g;
};

Equilibration equilibrate(StandardForm& sf, int passes) {
    Equilibration eq{Vector::Ones(sf.n), Vector::Ones(sf.A.rows()), Vector::Ones(sf.G.rows())};
    const ConeSpec& k = sf.cones;
    for (int pass = 0; pass < passes; ++pass) {
        Vector cmax = Vector::Zero(sf.n);
        Vector amax = Vector::Zero(sf.A.rows());
        Vector gmax = Vector::Zero(sf.G.rows());
        for (int j = 0; j < sf.A.outerSize(); ++j)
            for (SpMat::InnerIterator it(sf.A, j); it; ++it) {
                cmax(j) = std::max(cmax(j), std::abs(it.value()));
                amax(it.row()) = std::max(amax(it.row()), std::abs(it.value()));
            }
        for (int j = 0; j < sf.G.outerSize(); ++j)
            for (SpMat::InnerIterator it(sf.G, j); it; ++it) {
                cmax(j) = std::max(cmax(j), std::abs(it.value()));
                gmax(it.row()) = std::max(gmax(it.row()), std::abs(it.value()));
            }
        for (size_t j = 0; j < k.soc_dims.size(); ++j) {
            auto seg = gmax.segment(k.soc_off[j], k.soc_dims[j]);
            seg.setConstant(seg.maxCoeff());
        }
        for (size_t j = 0; j < k.psd_sides.size(); ++j) {
            auto seg = gmax.segment(k.psd_off[j], svec_size(k.psd_sides[j]));
            seg.setConstant(seg.maxCoeff());
        }
        auto factor = [](double m) { return m > 0.0 ? 1.0 / std::sqrt(m) : 1.0; };
        Vector cf = cmax.unaryExpr(factor);
        Vector af = amax.unaryExpr(factor);
        Vector gf = gmax.unaryExpr(factor);
        sf.A = af.asDiagonal() * sf.A * cf.asDiagonal();
        sf.G = gf.asDiagonal() * sf.G * cf.asDiagonal();
        eq.col = eq.col.cwiseProduct(cf);
        eq.row_a = eq.row_a.cwiseProduct(af);
        eq.row_g = eq.row_g.cwiseProduct(gf);
        if ((cf.array() - 1.0).abs().maxCoeff() < 1e-3 && (gf.size() == 0 || (gf.array() - 1.0).abs().maxCoeff() < 1e-3) &&
            (af.size() == 0 || (af.array() - 1.0).abs().maxCoeff() < 1e-3))
            break;
    }
    sf.c = sf.c.cwiseProduct(eq.col);
    sf.b = sf.b.cwiseProduct(eq.row_a);
    sf.h = sf.h.cwiseProduct(eq.row_g);
    return eq;
}

/** Quasi-definite KKT system [[reg, A^T, G^T], [A, -reg, 0], [G, 0, -W^T W - reg]]. */
class Kkt {
  public:
    Kkt(const StandardForm& sf, double reg, int refine) : sf_(sf), reg_(reg), refine_(refine) {
        n_ = sf.n;
        p_ = static_cast<int>(sf.A.rows());
        m_ = static_cast<int>(sf.G.rows());
        At_ = sf.A.transpose();
        Gt_ = sf.G.transpose();
        for (int j = 0; j < sf.A.outerSize(); ++j)
            for (SpMat::InnerIterator it(sf.A, j); it; ++it) fixed_.emplace_back(n_ + it.row(), j, it.value());
        for (int j = 0; j < sf.G.outerSize(); ++j)
            for (SpMat::InnerIterator it(sf.G, j); it; ++it) fixed_.emplace_back(n_ + p_ + it.row(), j, it.value());
    }

    // Retries with a stronger diagonal shift when a pivot vanishes; refinement in solve()
    // works against the unshifted system, so the shift only slows convergence of refinement.
    bool factor(const Scaling& w) {
        for (double shift = reg_; shift <= 1e-4; shift *= 1e3)
            if (factor_with(w, shift)) return true;
        return false;
    }

    bool factor_with(const Scaling& w, double shift) {
        w_ = &w;
        std::vector<Trip> trips = fixed_;
        const int size = n_ + p_ + m_;
        for (int j = 0; j < n_; ++j) trips.emplace_back(j, j, shift);
        for (int j = 0; j < p_; ++j) trips.emplace_back(n_ + j, n_ + j, -shift);
        const ConeSpec& k = sf_.cones;
        const int z0 = n_ + p_;
        for (int i = 0; i < k.n_lp; ++i) trips.emplace_back(z0 + i, z0 + i, -w.lp_d()(i) * w.lp_d()(i) - shift);
        auto dense = [&](int off, const Matrix& M) {
            for (int c = 0; c < M.cols(); ++c)
                for (int r = c; r < M.rows(); ++r)
                    trips.emplace_back(z0 + off + r, z0 + off + c, -M(r, c) - (r == c ? shift : 0.0));
        };
        for (size_t j = 0; j < k.soc_dims.size(); ++j) dense(k.soc_off[j], w.soc()[j].WtW);
        for (size_t j = 0; j < k.psd_sides.size(); ++j) dense(k.psd_off[j], w.psd()[j].WtW);
        K_.resize(size, size);
        K_.setFromTriplets(trips.begin(), trips.end());
        if (!analyzed_) {
            ldl_.analyzePattern(K_);
            analyzed_ = true;
        }
        ldl_.factorize(K_);
        return ldl_.info() == Eigen::Success;
    }

    // Solves the unregularized system for (x, y, z) given right-hand sides.
    void solve(const Vector& bx, const Vector& by, const Vector& bz, Vector& x, Vector& y, Vector& z) const {
        Vector rhs(n_ + p_ + m_);
        rhs << bx, by, bz;
        Vector u = ldl_.solve(rhs);
        const double scale = 1.0 + rhs.lpNorm<Eigen::Infinity>();
        for (int step = 0; step < refine_; ++step) {
            Vector res = rhs - apply(u);
            if (res.lpNorm<Eigen::Infinity>() <= 1e-15 * scale) break;
            u += ldl_.solve(res);
        }
        x = u.head(n_);
        y = u.segment(n_, p_);
        z = u.tail(m_);
    }

  private:
    Vector apply(const Vector& u) const {
        const auto x = u.head(n_);
        const auto y = u.segment(n_, p_);
        const Vector z = u.tail(m_);
        Vector out(n_ + p_ + m_);
        out.head(n_) = At_ * y + Gt_ * z;
        out.segment(n_, p_) = sf_.A * x;
        out.tail(m_) = sf_.G * x - w_->apply_WtW(z);
        return out;
    }

    const StandardForm& sf_;
    double reg_;
    int refine_;
    int n_ = 0, p_ = 0, m_ = 0;
    SpMat At_, Gt_;
    std::vector<Trip> fixed_;
    SpMat K_;
    Eigen::SimplicialLDLT<SpMat, Eigen::Lower, Eigen::AMDOrdering<int>> ldl_;
    bool analyzed_ = false;
    const Scaling* w_ = nullptr;
};

struct Iterate {
    Vector x, y, z, s;
    double tau = 1.0, kappa = 1.0;
};

struct Measures {
    double pres = kInf, dres = kInf, gap = kInf, relgap = kInf, pcost = 0, dcost = 0;
    double pinfres = kInf, dinfres = kInf;
};

enum class Outcome { Optimal, Infeasible, Unbounded, Failed };

class Engine {
  public:
    Engine(const StandardForm& sf, const IpmSettings& st) : sf_(sf), st_(st), kkt_(sf, st.regularization, st.refinement_steps) {}

    Outcome run(Iterate& best, int& iterations) {
        const ConeSpec& k = sf_.cones;
        const Vector e = ipm::identity(k);
        const double nb = std::max(1.0, std::sqrt(sf_.b.squaredNorm() + sf_.h.squaredNorm()));
        const double nc = std::max(1.0, sf_.c.norm());

        Scaling w;
        w.set_identity(k);
        if (!kkt_.factor(w)) return Outcome::Failed;
        Iterate it;
        {
            Vector x, y, z;
            kkt_.solve(Vector::Zero(sf_.n), sf_.b, sf_.h, x, y, z);
            it.x = x;
            it.s = -z;
            kkt_.solve(-sf_.c, Vector::Zero(sf_.b.size()), Vector::Zero(sf_.h.size()), x, y, z);
            it.y = y;
            it.z = z;
        }
        auto shift = [&](Vector& v) {
            const double t = ipm::shift_to_boundary(k, v);
            if (k.total > 0 && t >= -1e-8 * std::max(1.0, v.norm())) v += (1.0 + t) * e;
        };
        shift(it.s);
        shift(it.z);
        it.tau = it.kappa = 1.0;

        double best_score = kInf;
        best = it;
        const int degree = k.degree();
        for (iterations = 0; iterations < st_.max_iterations; ++iterations) {
            const Vector rx = sf_.A.transpose() * it.y + sf_.G.transpose() * it.z + sf_.c * it.tau;
            const Vector ry = sf_.A * it.x - sf_.b * it.tau;
            const Vector rz = sf_.G * it.x + it.s - sf_.h * it.tau;
            const double cx = sf_.c.dot(it.x), by = sf_.b.dot(it.y), hz = sf_.h.dot(it.z);
            const double rt = it.kappa + cx + by + hz;

            Measures ms;
            ms.pres = std::sqrt(ry.squaredNorm() + rz.squaredNorm()) / it.tau / nb;
            ms.dres = rx.norm() / it.tau / nc;
            ms.pcost = cx / it.tau;
            ms.dcost = -(by + hz) / it.tau;
            ms.gap = it.s.dot(it.z) / (it.tau * it.tau);
            if (ms.pcost < 0.0)
                ms.relgap = ms.gap / -ms.pcost;
            else if (ms.dcost > 0.0)
                ms.relgap = ms.gap / ms.dcost;
            if (by + hz < 0.0) ms.pinfres = (sf_.A.transpose() * it.y + sf_.G.transpose() * it.z).norm() / nc / -(by + hz);
            if (cx < 0.0)
                ms.dinfres = std::sqrt((sf_.A * it.x).squaredNorm() + (sf_.G * it.x + it.s).squaredNorm()) / nb / -cx;

            if (st_.verbose)
                std::fprintf(stderr, "%3d pcost %+.8e dcost %+.8e gap %.2e pres %.2e dres %.2e k/t %.2e\n", iterations,
                             ms.pcost, ms.dcost, ms.gap, ms.pres, ms.dres, it.kappa / it.tau);

            const double score = std::max({ms.pres, ms.dres, std::min(ms.gap, ms.relgap)});
            if (score < best_score) {
                best_score = score;
                best = it;
                best_measures_ = ms;
            }
            if (ms.pres <= st_.feastol && ms.dres <= st_.feastol && (ms.gap <= st_.abstol || ms.relgap <= st_.reltol))
                return Outcome::Optimal;
            if (ms.pinfres <= st_.feastol) {
                best = it;
                return Outcome::Infeasible;
            }
            if (ms.dinfres <= st_.feastol) {
                best = it;
                return Outcome::Unbounded;
            }

            if (!w.compute(k, it.s, it.z)) {
                note("scaling lost interiority");
                break;
            }
            if (!kkt_.factor(w)) {
                note("KKT factorization failed");
                break;
            }
            const Vector& lam = w.lambda();
            const double mu = (it.s.dot(it.z) + it.tau * it.kappa) / (degree + 1);

            Vector x2, y2, z2;
            kkt_.solve(-sf_.c, sf_.b, sf_.h, x2, y2, z2);
            const double denom = -w.apply_W(z2).squaredNorm() - it.kappa / it.tau;

            struct Dir {
                Vector dx, dy, dz, ds_scaled, wdz;
                double dtau = 0, dkappa = 0;
            };
            auto direction = [&](double eta, const Vector& rs, double rk) {
                Dir d;
                const Vector lrs = w.lambda_divide(rs);
                Vector x1, y1, z1;
                kkt_.solve(-eta * rx, -eta * ry, -eta * rz - w.apply_Wt(lrs), x1, y1, z1);
                d.dtau = (-eta * rt - rk / it.tau - (sf_.c.dot(x1) + sf_.b.dot(y1) + sf_.h.dot(z1))) / denom;
                d.dx = x1 + d.dtau * x2;
                d.dy = y1 + d.dtau * y2;
                d.dz = z1 + d.dtau * z2;
                d.dkappa = (rk - it.kappa * d.dtau) / it.tau;
                d.wdz = w.apply_W(d.dz);
                d.ds_scaled = lrs - d.wdz;
                return d;
            };
            auto max_step = [&](const Dir& d) {
                double a = std::min(w.step_to_boundary(d.ds_scaled), w.step_to_boundary(d.wdz));
                if (d.dtau < 0.0) a = std::min(a, -it.tau / d.dtau);
                if (d.dkappa < 0.0) a = std::min(a, -it.kappa / d.dkappa);
                return a;
            };

            const Vector lamlam = ipm::jordan(k, lam, lam);
            const Dir aff = direction(1.0, -lamlam, -it.tau * it.kappa);
            const double a_aff = std::min(1.0, max_step(aff));
            const double sigma = std::pow(1.0 - a_aff, 3);
            const Vector rs = -lamlam - ipm::jordan(k, aff.ds_scaled, aff.wdz) + sigma * mu * e;
            const double rk = -it.tau * it.kappa - aff.dtau * aff.dkappa + sigma * mu;
            const Dir cmb = direction(1.0 - sigma, rs, rk);
            const double alpha = std::min(1.0, st_.step_fraction * max_step(cmb));
            if (!(alpha > 1e-12)) {
                note("step length collapsed");
                break;
            }

            it.x += alpha * cmb.dx;
            it.y += alpha * cmb.dy;
            it.z += alpha * cmb.dz;
            it.s += alpha * w.apply_Wt(cmb.ds_scaled);
            it.tau += alpha * cmb.dtau;
            it.kappa += alpha * cmb.dkappa;
            if (!(it.tau > 0.0) || !(it.kappa > 0.0) || !it.x.allFinite()) {
                note("iterate left the cone");
                break;
            }
        }
        const Measures& b = best_measures_;
        if (b.pres <= st_.loose_feastol && b.dres <= st_.loose_feastol &&
            (b.gap <= st_.loose_feastol || b.relgap <= st_.loose_reltol))
            return Outcome::Optimal;
        return Outcome::Failed;
    }

  private:
    void note(const char* why) const {
        if (st_.verbose) std::fprintf(stderr, "stop: %s\n", why);
    }

    const StandardForm& sf_;
    const IpmSettings& st_;
    Kkt kkt_;
    Measures best_measures_;
};

}  // namespace

std::set<ConeKind> InteriorPointSolver::capabilities() const {
    return {ConeKind::Zero, ConeKind::Nonnegative, ConeKind::SecondOrder, ConeKind::PositiveSemidefinite};
}

Solution InteriorPointSolver::solve(const ConeProgram& prog) const {
    const auto start = std::chrono::steady_clock::now();
    Solution sol;
    sol.primal = Vector::Zero(prog.n_vars());
    auto finish = [&]() {
        sol.stats.wall_ms =
            std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - start).count();
        return sol;
    };
    if (prog.has_integrality()) throw ValidationError("interior-point solver got a program with binary marks");

    StandardForm sf = build_standard_form(prog);
    if (sf.infeasible) {
        sol.status = SolveStatus::Infeasible;
        sol.objective_value = std::numeric_limits<double>::quiet_NaN();
        return finish();
    }
    const Equilibration eq = equilibrate(sf, settings_.equilibration_passes);
    // A run that stalls near the optimum is repeated with a stronger KKT shift.
    Iterate it;
    int iterations = 0;
    Outcome out = Outcome::Failed;
    IpmSettings attempt = settings_;
    for (int round = 0; round < 3; ++round) {
        Engine engine(sf, attempt);
        int used = 0;
        out = engine.run(it, used);
        iterations += used;
        if (out != Outcome::Failed) break;
        attempt.regularization *= 100.0;
    }
    sol.stats.iterations = iterations;
    sol.objective_value = std::numeric_limits<double>::quiet_NaN();
    switch (out) {
    case Outcome::Infeasible: sol.status = SolveStatus::Infeasible; return finish();
    case Outcome::Unbounded: sol.status = SolveStatus::Unbounded; return finish();
    case Outcome::Failed: sol.status = SolveStatus::NumericalFailure; break;
    case Outcome::Optimal: sol.status = SolveStatus::Optimal; break;
    }
    const Vector x = eq.col.cwiseProduct(it.x) / it.tau;
    sol.primal = x.head(sf.n_user);
    sol.objective_value = prog.objective_value(sol.primal);
    if (sol.status != SolveStatus::Optimal) return finish();

    const Vector y = eq.row_a.cwiseProduct(it.y) / it.tau;
    const Vector z = eq.row_g.cwiseProduct(it.z) / it.tau;
    sol.duals.resize(prog.blocks().size());
    for (size_t bi = 0; bi < prog.blocks().size(); ++bi) {
        const auto& slots = sf.slots[bi];
        Vector d = Vector::Zero(static_cast<long>(slots.size()));
        for (size_t r = 0; r < slots.size(); ++r) {
            if (slots[r].index < 0) continue;
            d(static_cast<long>(r)) = slots[r].equality ? y(slots[r].index) : z(slots[r].index);
        }
        sol.duals[bi] = d;
    }
    if (max_violation(prog, sol.primal) > kFeasTol) sol.status = SolveStatus::NumericalFailure;
    return finish();
}

}  // namespace drccp
