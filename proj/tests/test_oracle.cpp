#include "drccp/oracle.hpp"

#include "fixtures.hpp"

#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

using namespace drccp;

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

double h_value(const std::vector<double>& d, double radius, double lambda) {
    double s = lambda * radius;
    for (double di : d) s += std::max(0.0, 1.0 - lambda * di) / static_cast<double>(d.size());
    return s;
}

/// Scalar row f(x, xi) = xi on R^1.
DrccpProblem scalar_problem(std::vector<double> samples, double radius, double eps = 0.1) {
    DrccpProblem p;
    p.objective = Vector::Zero(1);
    p.risk = eps;
    p.ball.radius = radius;
    p.ball.norm = GroundNorm::L1;
    p.ball.center.dim = 1;
    for (double s : samples) p.ball.center.samples.push_back(Vector::Constant(1, s));
    p.support = FullSpace{1};
    p.constraints.emplace_back(AffineBoth{Matrix::Zero(1, 1), Vector::Ones(1), Vector::Zero(1), 0.0});
    return p;
}

}  // namespace

TEST_SUITE("oracle") {

TEST_CASE("distance to the unsafe set") {
    DrccpProblem p = scalar_problem({3.0}, 0.0);
    Vector x = Vector::Zero(1);
    CHECK(distance_to_unsafe(x, Vector::Constant(1, 3.0), p.constraints, GroundNorm::L1) == doctest::Approx(3.0));
    CHECK(distance_to_unsafe(x, Vector::Constant(1, -1.0), p.constraints, GroundNorm::L1) == 0.0);

    std::vector<ConstraintFunction> never{AffineBoth{Matrix::Zero(1, 1), Vector::Zero(1), Vector::Zero(1), 2.0}};
    CHECK(distance_to_unsafe(x, Vector::Constant(1, 3.0), never, GroundNorm::L2) == kInf);
}

TEST_CASE("radius zero gives the empirical frequency") {
    std::vector<double> s(10, 1.0);
    s[2] = -1.0;
    s[7] = -0.5;
    auto est = worst_case_violation_probability(Vector::Zero(1), scalar_problem(s, 0.0));
    CHECK(est.probability == doctest::Approx(0.2));
}

TEST_CASE("two-sample breakpoint example") {
    auto est = probability_from_distances({1.0, 3.0}, 0.5);
    CHECK(est.probability == doctest::Approx(0.5));
    CHECK(est.lambda_star == doctest::Approx(1.0 / 3.0));
    double grid = 1.0;
    for (int k = 0; k <= 1000000; ++k) grid = std::min(grid, h_value({1.0, 3.0}, 0.5, k * 1e-5));
    CHECK(std::abs(grid - est.probability) < 1e-4);
}

TEST_CASE("all samples inside the unsafe set") {
    CHECK(probability_from_distances({0.0, 0.0, 0.0}, 0.3).probability == 1.0);
}

TEST_CASE("membership examples") {
    // Single sample at distance 1 on L1; radius 0.05 gives probability 0.05, radius 0.5 gives 0.5.
    CHECK(check_zd_membership(Vector::Zero(1), scalar_problem({1.0}, 0.05)).member);
    CHECK_FALSE(check_zd_membership(Vector::Zero(1), scalar_problem({1.0}, 0.5)).member);

    DrccpProblem knap = fixtures::knapsack(4, 2, 5, 3);
    auto r = check_zd_membership(Vector::Zero(4), knap);
    CHECK(r.member);
    CHECK(r.estimate.probability == 0.0);
}

TEST_CASE("breakpoint scan matches a dense grid") {
    std::mt19937_64 rng(17);
    std::uniform_real_distribution<double> u(0.0, 1.0);
    for (int trial = 0; trial < 200; ++trial) {
        const int N = 1 + static_cast<int>(u(rng) * 20);
        std::vector<double> d;
        for (int i = 0; i < N; ++i) {
            const double r = u(rng);
            d.push_back(r < 0.15 ? 0.0 : r < 0.25 ? kInf : 3.0 * u(rng));
        }
        const double radius = 0.5 * u(rng);
        auto est = probability_from_distances(d, radius);
        // h is piecewise linear with kinks at 1/d_i; the grid below includes a fine sweep
        // and the kinks themselves.
        double best = h_value(d, radius, 0.0);
        double top = 0.0;
        for (double di : d)
            if (di > 0 && std::isfinite(di)) {
                best = std::min(best, h_value(d, radius, 1.0 / di));
                top = std::max(top, 1.0 / di);
            }
        for (int k = 0; k <= 20000; ++k) best = std::min(best, h_value(d, radius, (top + 1.0) * k / 20000.0));
        CHECK(std::abs(est.probability - best) < 1e-6);
        CHECK(est.probability >= 0.0);
        CHECK(est.probability <= 1.0);
    }
}

TEST_CASE("probability is monotone in radius and distances") {
    std::vector<double> d{0.2, 0.5, 1.0, 2.0, kInf, 0.0};
    double prev = -1.0;
    for (double radius : {0.0, 0.01, 0.05, 0.1, 0.3, 1.0}) {
        const double p = probability_from_distances(d, radius).probability;
        CHECK(p >= prev - 1e-15);
        prev = p;
    }
    auto far = d;
    far[0] = 0.4;
    CHECK(probability_from_distances(far, 0.1).probability <= probability_from_distances(d, 0.1).probability + 1e-15);
}

TEST_CASE("non-affine rows are rejected") {
    DrccpProblem p = fixtures::quadratic_polyhedral(2, 1, 2);
    CHECK_THROWS_AS(worst_case_violation_probability(Vector::Zero(2), p), Error);
}

}
