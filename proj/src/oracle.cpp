#include "drccp/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

namespace drccp {

namespace {

void require_oracle_input(const DrccpProblem& problem) {
    if (!std::holds_alternative<FullSpace>(problem.support))
        throw UnsupportedError("oracle needs full-space support, got " + support_name(problem.support));
    for (const auto& f : problem.constraints)
        if (!std::holds_alternative<AffineBoth>(f))
            throw UnsupportedError("oracle needs affine rows, got " + constraint_name(f));
}

}  // namespace

double distance_to_unsafe(const Vector& x, const Vector& zeta, const std::vector<ConstraintFunction>& rows,
                          GroundNorm norm) {
    double best = std::numeric_limits<double>::infinity();
    for (const auto& row : rows) {
        const auto* f = std::get_if<AffineBoth>(&row);
        if (!f) throw UnsupportedError("distance_to_unsafe needs affine rows, got " + constraint_name(row));
        if (f->A.rows() != zeta.size() || f->A.cols() != x.size())
            throw ValidationError("distance_to_unsafe: dimension mismatch");
        const Vector g = affine_gradient(*f, x);
        const double value = g.dot(zeta) + affine_constant(*f, x);
        if (value < 0.0) return 0.0;
        const double gnorm = dual_norm(g, norm);
        if (gnorm > 0.0) best = std::min(best, value / gnorm);
    }
    return best;
}

ViolationEstimate probability_from_distances(const std::vector<double>& distances, double radius) {
    ViolationEstimate est;
    est.distances = distances;
    const double n = static_cast<double>(distances.size());
    auto h = [&](double lambda) {
        double total = 0.0;
        for (double d : distances) {
            if (d == 0.0)
                total += 1.0;
            else if (std::isfinite(d))
                total += std::max(0.0, 1.0 - lambda * d);
        }
        return lambda * radius + total / n;
    };
    std::vector<double> candidates{0.0};
    for (double d : distances)
        if (d > 0.0 && std::isfinite(d)) candidates.push_back(1.0 / d);
    std::sort(candidates.begin(), candidates.end());
    double best = h(0.0);
    double best_lambda = 0.0;
    for (double lambda : candidates) {
        const double value = h(lambda);
        if (value < best) {
            best = value;
            best_lambda = lambda;
        }
    }
    est.probability = std::clamp(best, 0.0, 1.0);
    est.lambda_star = best_lambda;
    return est;
}

ViolationEstimate worst_case_violation_probability(const Vector& x, const DrccpProblem& problem) {
    require_oracle_input(problem);
    const auto& samples = problem.samples();
    std::vector<double> d;
    d.reserve(samples.size());
    for (const auto& zeta : samples) d.push_back(distance_to_unsafe(x, zeta, problem.constraints, problem.ball.norm));
    ViolationEstimate est = probability_from_distances(d, problem.ball.radius);

    std::vector<std::vector<double>> eta(samples.size(), std::vector<double>(problem.constraints.size(), 0.0));
    for (size_t t = 0; t < problem.constraints.size(); ++t) {
        const auto& f = std::get<AffineBoth>(problem.constraints[t]);
        const double gnorm = dual_norm(affine_gradient(f, x), problem.ball.norm);
        if (gnorm == 0.0) continue;
        for (size_t i = 0; i < samples.size(); ++i)
            if (evaluate_constraint(f, x, samples[i]) >= 0.0) eta[i][t] = est.lambda_star / gnorm;
    }
    est.eta_certificate = std::move(eta);
    return est;
}

MembershipResult check_zd_membership(const Vector& x, const DrccpProblem& problem) {
    MembershipResult r;
    r.estimate = worst_case_violation_probability(x, problem);
    r.member = r.estimate.probability <= problem.risk + kMembershipTolerance;
    return r;
}

}  // namespace drccp
