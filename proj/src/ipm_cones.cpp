#include "ipm_cones.hpp"

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <cmath>
#include <limits>

namespace drccp::ipm {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double soc_det(const Vector& x) {
    const double r = x.tail(x.size() - 1).norm();
    return (x(0) - r) * (x(0) + r);
}

Matrix block_psd(const ConeSpec& k, const Vector& v, size_t j) {
    return smat(v.segment(k.psd_off[j], svec_size(k.psd_sides[j])), k.psd_sides[j]);
}

double min_eig(const Matrix& m) {
    Eigen::SelfAdjointEigenSolver<Matrix> es(m, Eigen::EigenvaluesOnly);
    return es.eigenvalues()(0);
}

// Smallest positive root of a t^2 + 2 b t + c with c > 0, or infinity.
double first_positive_root(double a, double b, double c) {
    if (a == 0.0) return b < 0.0 ? -c / (2.0 * b) : kInf;
    const double disc = b * b - a * c;
    if (disc < 0.0) return kInf;
    const double q = -(b + std::copysign(std::sqrt(disc), b));
    double best = kInf;
    if (q != 0.0) {
        const double r1 = q / a;
        const double r2 = c / q;
        if (r1 > 0.0) best = std::min(best, r1);
        if (r2 > 0.0) best = std::min(best, r2);
    }
    return best;
}

}  // namespace

int ConeSpec::degree() const {
    int d = n_lp + static_cast<int>(soc_dims.size());
    for (int s : psd_sides) d += s;
    return d;
}

void ConeSpec::add_soc(int dim) {
    soc_off.push_back(total);
    soc_dims.push_back(dim);
    total += dim;
}

void ConeSpec::add_psd(int side) {
    psd_off.push_back(total);
    psd_sides.push_back(side);
    total += svec_size(side);
}

Vector identity(const ConeSpec& k) {
    Vector e = Vector::Zero(k.total);
    e.head(k.n_lp).setOnes();
    for (int off : k.soc_off) e(off) = 1.0;
    for (size_t j = 0; j < k.psd_sides.size(); ++j)
        for (int i = 0; i < k.psd_sides[j]; ++i) e(k.psd_off[j] + svec_index(k.psd_sides[j], i, i)) = 1.0;
    return e;
}

double dot(const Vector& u, const Vector& v) { return u.dot(v); }

Vector jordan(const ConeSpec& k, const Vector& u, const Vector& v) {
    Vector w(k.total);
    w.head(k.n_lp) = u.head(k.n_lp).cwiseProduct(v.head(k.n_lp));
    for (size_t j = 0; j < k.soc_dims.size(); ++j) {
        const int off = k.soc_off[j], dim = k.soc_dims[j];
        const auto us = u.segment(off, dim);
        const auto vs = v.segment(off, dim);
        w(off) = us.dot(vs);
        w.segment(off + 1, dim - 1) = us(0) * vs.tail(dim - 1) + vs(0) * us.tail(dim - 1);
    }
    for (size_t j = 0; j < k.psd_sides.size(); ++j) {
        const Matrix U = block_psd(k, u, j);
        const Matrix V = block_psd(k, v, j);
        const Matrix P = U * V;
        w.segment(k.psd_off[j], svec_size(k.psd_sides[j])) = svec(0.5 * (P + P.transpose()));
    }
    return w;
}

double shift_to_boundary(const ConeSpec& k, const Vector& x) {
    double t = -kInf;
    if (k.n_lp > 0) t = std::max(t, -x.head(k.n_lp).minCoeff());
    for (size_t j = 0; j < k.soc_dims.size(); ++j) {
        const auto xs = x.segment(k.soc_off[j], k.soc_dims[j]);
        t = std::max(t, xs.tail(xs.size() - 1).norm() - xs(0));
    }
    for (size_t j = 0; j < k.psd_sides.size(); ++j) t = std::max(t, -min_eig(block_psd(k, x, j)));
    return t;
}

void Scaling::set_identity(const ConeSpec& k) {
    k_ = &k;
    d_ = Vector::Ones(k.n_lp);
    soc_.clear();
    psd_.clear();
    for (int dim : k.soc_dims) soc_.push_back({Matrix::Identity(dim, dim), Matrix::Identity(dim, dim), Matrix::Identity(dim, dim)});
    for (int side : k.psd_sides) {
        const int q = svec_size(side);
        psd_.push_back({Matrix::Identity(side, side), Matrix::Identity(side, side), Vector::Ones(side), Matrix::Identity(q, q)});
    }
    lambda_ = identity(k);
}

bool Scaling::compute(const ConeSpec& k, const Vector& s, const Vector& z) {
    k_ = &k;
    lambda_.resize(k.total);
    const auto sl = s.head(k.n_lp);
    const auto zl = z.head(k.n_lp);
    if (k.n_lp > 0 && (sl.minCoeff() <= 0.0 || zl.minCoeff() <= 0.0)) return false;
    d_ = (sl.array() / zl.array()).sqrt();
    lambda_.head(k.n_lp) = (sl.array() * zl.array()).sqrt();

    soc_.resize(k.soc_dims.size());
    for (size_t j = 0; j < k.soc_dims.size(); ++j) {
        const int off = k.soc_off[j], dim = k.soc_dims[j];
        const Vector ss = s.segment(off, dim);
        const Vector zs = z.segment(off, dim);
        const double sdet = soc_det(ss), zdet = soc_det(zs);
        if (ss(0) <= 0.0 || zs(0) <= 0.0 || sdet <= 0.0 || zdet <= 0.0) return false;
        const double sn = std::sqrt(sdet), zn = std::sqrt(zdet);
        const Vector sb = ss / sn;
        const Vector zb = zs / zn;
        const double gamma = std::sqrt((1.0 + sb.dot(zb)) / 2.0);
        const double w0 = (sb(0) + zb(0)) / (2.0 * gamma);
        const Vector w1 = (sb.tail(dim - 1) - zb.tail(dim - 1)) / (2.0 * gamma);
        const double eta = std::sqrt(sn / zn);
        Matrix Wb(dim, dim);
        Wb(0, 0) = w0;
        Wb.block(0, 1, 1, dim - 1) = w1.transpose();
        Wb.block(1, 0, dim - 1, 1) = w1;
        Wb.block(1, 1, dim - 1, dim - 1) =
            Matrix::Identity(dim - 1, dim - 1) + w1 * w1.transpose() / (1.0 + w0);
        Matrix Jb = Wb;
        Jb.block(0, 1, 1, dim - 1) *= -1.0;
        Jb.block(1, 0, dim - 1, 1) *= -1.0;
        auto& sc = soc_[j];
        sc.W = eta * Wb;
        sc.Winv = Jb / eta;
        sc.WtW = sc.W * sc.W;
        lambda_.segment(off, dim) = sc.W * zs;
    }

    psd_.resize(k.psd_sides.size());
    for (size_t j = 0; j < k.psd_sides.size(); ++j) {
        const int side = k.psd_sides[j];
        Eigen::LLT<Matrix> l1(block_psd(k, s, j));
        Eigen::LLT<Matrix> l2(block_psd(k, z, j));
        if (l1.info() != Eigen::Success || l2.info() != Eigen::Success) return false;
        const Matrix L1 = l1.matrixL();
        const Matrix L2 = l2.matrixL();
        Eigen::JacobiSVD<Matrix> svd(L2.transpose() * L1, Eigen::ComputeFullU | Eigen::ComputeFullV);
        const Vector sv = svd.singularValues();
        if (sv.minCoeff() <= 0.0) return false;
        const Vector isq = sv.array().rsqrt();
        auto& sc = psd_[j];
        sc.R = L1 * svd.matrixV() * isq.asDiagonal();
        sc.Rinv = isq.asDiagonal() * svd.matrixU().transpose() * L2.transpose();
        sc.eig = sv;
        const Matrix P = sc.R * sc.R.transpose();
        const int q = svec_size(side);
        sc.WtW.resize(q, q);
        for (int col = 0; col < q; ++col) {
            Vector e = Vector::Zero(q);
            e(col) = 1.0;
            const Matrix E = smat(e, side);
            sc.WtW.col(col) = svec(P * E * P);
        }
        Vector lam = Vector::Zero(q);
        for (int i = 0; i < side; ++i) lam(svec_index(side, i, i)) = sv(i);
        lambda_.segment(k.psd_off[j], q) = lam;
    }
    return true;
}

namespace {

template <class SocOp, class PsdOp>
Vector apply_generic(const ConeSpec& k, const Vector& v, const Vector& lp_factor, SocOp soc_op, PsdOp psd_op) {
    Vector out(k.total);
    out.head(k.n_lp) = lp_factor.cwiseProduct(v.head(k.n_lp));
    for (size_t j = 0; j < k.soc_dims.size(); ++j)
        out.segment(k.soc_off[j], k.soc_dims[j]) = soc_op(j) * v.segment(k.soc_off[j], k.soc_dims[j]);
    for (size_t j = 0; j < k.psd_sides.size(); ++j)
        out.segment(k.psd_off[j], svec_size(k.psd_sides[j])) = svec(psd_op(j, smat(v.segment(k.psd_off[j], svec_size(k.psd_sides[j])), k.psd_sides[j])));
    return out;
}

}  // namespace

Vector Scaling::apply_W(const Vector& v) const {
    return apply_generic(*k_, v, d_, [&](size_t j) -> const Matrix& { return soc_[j].W; },
                         [&](size_t j, const Matrix& V) -> Matrix { return psd_[j].R.transpose() * V * psd_[j].R; });
}

Vector Scaling::apply_Wt(const Vector& v) const {
    return apply_generic(*k_, v, d_, [&](size_t j) -> const Matrix& { return soc_[j].W; },
                         [&](size_t j, const Matrix& V) -> Matrix { return psd_[j].R * V * psd_[j].R.transpose(); });
}

Vector Scaling::apply_Winv(const Vector& v) const {
    const Vector inv = d_.cwiseInverse();
    return apply_generic(*k_, v, inv, [&](size_t j) -> const Matrix& { return soc_[j].Winv; },
                         [&](size_t j, const Matrix& V) -> Matrix { return psd_[j].Rinv.transpose() * V * psd_[j].Rinv; });
}

Vector Scaling::apply_Winvt(const Vector& v) const {
    const Vector inv = d_.cwiseInverse();
    return apply_generic(*k_, v, inv, [&](size_t j) -> const Matrix& { return soc_[j].Winv; },
                         [&](size_t j, const Matrix& V) -> Matrix { return psd_[j].Rinv * V * psd_[j].Rinv.transpose(); });
}

Vector Scaling::apply_WtW(const Vector& v) const {
    const ConeSpec& k = *k_;
    Vector out(k.total);
    out.head(k.n_lp) = d_.cwiseProduct(d_).cwiseProduct(v.head(k.n_lp));
    for (size_t j = 0; j < k.soc_dims.size(); ++j)
        out.segment(k.soc_off[j], k.soc_dims[j]) = soc_[j].WtW * v.segment(k.soc_off[j], k.soc_dims[j]);
    for (size_t j = 0; j < k.psd_sides.size(); ++j) {
        const int q = svec_size(k.psd_sides[j]);
        out.segment(k.psd_off[j], q) = psd_[j].WtW * v.segment(k.psd_off[j], q);
    }
    return out;
}

Vector Scaling::lambda_divide(const Vector& r) const {
    const ConeSpec& k = *k_;
    Vector x(k.total);
    x.head(k.n_lp) = r.head(k.n_lp).cwiseQuotient(lambda_.head(k.n_lp));
    for (size_t j = 0; j < k.soc_dims.size(); ++j) {
        const int off = k.soc_off[j], dim = k.soc_dims[j];
        const auto l = lambda_.segment(off, dim);
        const auto rr = r.segment(off, dim);
        const double l0 = l(0);
        const double det = soc_det(l);
        const double x0 = (l0 * rr(0) - l.tail(dim - 1).dot(rr.tail(dim - 1))) / det;
        x(off) = x0;
        x.segment(off + 1, dim - 1) = (rr.tail(dim - 1) - x0 * l.tail(dim - 1)) / l0;
    }
    for (size_t j = 0; j < k.psd_sides.size(); ++j) {
        const int side = k.psd_sides[j];
        const auto& eig = psd_[j].eig;
        int pos = k.psd_off[j];
        for (int c = 0; c < side; ++c)
            for (int i = c; i < side; ++i, ++pos) x(pos) = 2.0 * r(pos) / (eig(i) + eig(c));
    }
    return x;
}

double Scaling::step_to_boundary(const Vector& d) const {
    const ConeSpec& k = *k_;
    double alpha = kInf;
    for (int i = 0; i < k.n_lp; ++i)
        if (d(i) < 0.0) alpha = std::min(alpha, -lambda_(i) / d(i));
    for (size_t j = 0; j < k.soc_dims.size(); ++j) {
        const int off = k.soc_off[j], dim = k.soc_dims[j];
        const auto l = lambda_.segment(off, dim);
        const auto dd = d.segment(off, dim);
        const double a = soc_det(dd);
        const double b = l(0) * dd(0) - l.tail(dim - 1).dot(dd.tail(dim - 1));
        const double c = soc_det(l);
        alpha = std::min(alpha, first_positive_root(a, b, c));
    }
    for (size_t j = 0; j < k.psd_sides.size(); ++j) {
        const int side = k.psd_sides[j];
        const Vector isq = psd_[j].eig.array().rsqrt();
        const Matrix D = smat(d.segment(k.psd_off[j], svec_size(side)), side);
        const Matrix M = isq.asDiagonal() * D * isq.asDiagonal();
        const double e = min_eig(M);
        if (e < 0.0) alpha = std::min(alpha, -1.0 / e);
    }
    return alpha;
}

}  // namespace drccp::ipm
