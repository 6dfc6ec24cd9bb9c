#pragma once

// Cone algebra for the interior-point method: Jordan products, Nesterov-Todd scalings,
// and step lengths for products of nonnegative, second-order and PSD cones.

#include "drccp/conic_ir.hpp"

#include <vector>

namespace drccp::ipm {

struct ConeSpec {
    int n_lp = 0;
    std::vector<int> soc_dims;
    std::vector<int> soc_off;
    std::vector<int> psd_sides;
    std::vector<int> psd_off;
    int total = 0;

    int degree() const;
    void add_soc(int dim);
    void add_psd(int side);
};

Vector identity(const ConeSpec& k);
double dot(const Vector& u, const Vector& v);

/// u o v
Vector jordan(const ConeSpec& k, const Vector& u, const Vector& v);

/// Smallest t such that x + t e lies on the cone boundary (negative when x is interior).
double shift_to_boundary(const ConeSpec& k, const Vector& x);

struct SocScale {
    Matrix W;
    Matrix Winv;
    Matrix WtW;
};

struct PsdScale {
    Matrix R;
    Matrix Rinv;
    Vector eig;  // diagonal of the scaled point Lambda
    Matrix WtW;  // svec representation of U -> P U P, P = R R^T
};

/** @brief Nesterov-Todd scaling W with W z = W^{-T} s = lambda. */
class Scaling {
  public:
    /// Returns false when s or z is not strictly inside the cone.
    bool compute(const ConeSpec& k, const Vector& s, const Vector& z);
    /// Identity scaling (used for the starting point).
    void set_identity(const ConeSpec& k);

    const Vector& lambda() const { return lambda_; }

    Vector apply_W(const Vector& v) const;
    Vector apply_Wt(const Vector& v) const;
    Vector apply_Winv(const Vector& v) const;
    Vector apply_Winvt(const Vector& v) const;
    Vector apply_WtW(const Vector& v) const;

    /// Solves lambda o x = r.
    Vector lambda_divide(const Vector& r) const;

    /// Largest alpha with lambda + alpha d in the cone (infinity when unbounded).
    double step_to_boundary(const Vector& d) const;

    const Vector& lp_d() const { return d_; }
    const std::vector<SocScale>& soc() const { return soc_; }
    const std::vector<PsdScale>& psd() const { return psd_; }

  private:
    const ConeSpec* k_ = nullptr;
    Vector d_;
    std::vector<SocScale> soc_;
    std::vector<PsdScale> psd_;
    Vector lambda_;
};

}  // namespace drccp::ipm
