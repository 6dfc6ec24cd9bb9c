#pragma once

#include "drccp/experiments.hpp"
#include "drccp/model.hpp"

#include <random>

namespace drccp::fixtures {

inline Vector gaussian(int k, std::mt19937_64& rng) {
    std::normal_distribution<double> g(0.0, 1.0);
    Vector v(k);
    for (int i = 0; i < k; ++i) v(i) = g(rng);
    return v;
}

inline Matrix random_psd(int k, std::mt19937_64& rng, double shift = 0.0) {
    Matrix B = gaussian(k * k, rng).reshaped(k, k);
    return B * B.transpose() / k + shift * Matrix::Identity(k, k);
}

/// Knapsack instance; capacity defaults to a level that makes the budget bind.
inline DrccpProblem knapsack(int n, int T, int N, std::uint64_t seed, double eps = 0.1, double delta = 0.01,
                             double capacity = -1.0) {
    if (capacity < 0.0) capacity = 5.5 * n * 0.6;
    return knapsack_problem(generate_knapsack(seed, n, T, N, capacity), eps, delta);
}

/// Quadratic-in-xi rows (m = n) on a polyhedron around the origin; x in [-1, 1]^n.
inline DrccpProblem quadratic_polyhedral(int m, int T, int N, std::uint64_t seed = 1, int l = 3) {
    std::mt19937_64 rng(seed);
    std::uniform_real_distribution<double> u(0.5, 2.0);
    DrccpProblem p;
    p.objective = gaussian(m, rng);
    p.domain.kind = Domain::Kind::Box;
    p.domain.lower = Vector::Constant(m, -1.0);
    p.domain.upper = Vector::Constant(m, 1.0);
    p.risk = 0.2;
    p.ball.radius = 0.05;
    p.ball.norm = GroundNorm::L2;
    p.ball.center.dim = m;
    Polyhedron poly;
    poly.rows = gaussian(l * m, rng).reshaped(l, m);
    poly.offsets.resize(l);
    for (int k = 0; k < l; ++k) poly.offsets(k) = u(rng);
    // Keep the support bounded along the coordinate axes.
    Matrix rows(l + 2 * m, m);
    Vector offs(l + 2 * m);
    rows << poly.rows, Matrix::Identity(m, m), -Matrix::Identity(m, m);
    offs << poly.offsets, Vector::Constant(2 * m, 1.5);
    poly.rows = rows;
    poly.offsets = offs;
    p.support = poly;
    for (int t = 0; t < T; ++t) p.constraints.emplace_back(QuadraticXi{random_psd(m, rng), gaussian(m, rng), 2.0});
    for (int i = 0; i < N; ++i) {
        Vector s = 0.1 * gaussian(m, rng);
        while (!support_contains(p.support, s)) s *= 0.5;
        p.ball.center.samples.push_back(s);
    }
    return p;
}

}  // namespace drccp::fixtures
