#pragma once

#include "drccp/model.hpp"

#include <optional>
#include <vector>

namespace drccp {

/** @brief Exact worst-case violation probability over the Wasserstein ball at a fixed x. */
struct ViolationEstimate {
    double probability = 0.0;
    double lambda_star = 0.0;
    /// Distance from each sample to the unsafe set; +inf when no row can be violated.
    std::vector<double> distances;
    /// eta[i][t] = lambda_star / ||grad_t||_* where f_t(x, zeta_i) >= 0 and the gradient is nonzero, else 0.
    std::optional<std::vector<std::vector<double>>> eta_certificate;
};

/**
 * Distance (in the ground norm) from zeta to {xi : some row f_t(x, xi) <= 0}.
 * Rows with zero gradient and f >= 0 are never violable and contribute +inf.
 */
double distance_to_unsafe(const Vector& x, const Vector& zeta, const std::vector<ConstraintFunction>& rows,
                          GroundNorm norm);

/// min over lambda >= 0 of lambda*delta + mean_i (1 - lambda d_i)_+, by scanning breakpoints.
ViolationEstimate probability_from_distances(const std::vector<double>& distances, double radius);

ViolationEstimate worst_case_violation_probability(const Vector& x, const DrccpProblem& problem);

struct MembershipResult {
    bool member = false;
    ViolationEstimate estimate;
};

/// Membership test with absolute tolerance 1e-9 on the probability.
MembershipResult check_zd_membership(const Vector& x, const DrccpProblem& problem);

inline constexpr double kMembershipTolerance = 1e-9;

}  // namespace drccp
