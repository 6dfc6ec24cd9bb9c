#include "drccp/solve.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace drccp;

namespace {

AffineExpr var(int j, double c = 1.0) { return AffineExpr::variable(j, c); }

}  // namespace

TEST_SUITE("solve") {

TEST_CASE("min x subject to x >= 1") {
    ConeProgram p;
    int x = p.add_variable("x");
    p.set_objective(Sense::Minimize, var(x));
    p.add_nonnegative({var(x) - 1.0});
    InteriorPointSolver ipm;
    Solution s = solve_continuous(p, ipm);
    CHECK(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(1.0).epsilon(1e-8));
}

TEST_CASE("contradictory bounds are infeasible") {
    ConeProgram p;
    int x = p.add_variable("x");
    p.set_objective(Sense::Minimize, AffineExpr(0.0));
    p.add_nonnegative({var(x) - 1.0, -var(x)});
    Solution s = solve_continuous(p, InteriorPointSolver{});
    CHECK(s.status == SolveStatus::Infeasible);
}

TEST_CASE("unbounded direction is reported") {
    ConeProgram p;
    int x = p.add_variable("x");
    p.set_objective(Sense::Minimize, var(x, -1.0));
    p.add_nonnegative({var(x)});
    Solution s = solve_continuous(p, InteriorPointSolver{});
    CHECK(s.status == SolveStatus::Unbounded);
}

TEST_CASE("second-order cone: min t subject to ||(x-3, y+4)|| <= t") {
    ConeProgram p;
    int t = p.add_variable("t");
    int x = p.add_variable("x");
    int y = p.add_variable("y");
    p.set_objective(Sense::Minimize, var(t) + var(x, 0.0));
    p.add_second_order({var(t), var(x) - 3.0, var(y) + 4.0});
    p.add_nonnegative({var(x) - 6.0, -var(y)});
    Solution s = solve_continuous(p, InteriorPointSolver{});
    REQUIRE(s.status == SolveStatus::Optimal);
    CHECK(s.objective_value == doctest::Approx(3.0).epsilon(1e-7));  // x = 6, y = -4
}

TEST_CASE("PSD cone: minimum eigenvalue as an SDP") {
    // max t s.t. M - t I >= 0 gives lambda_min(M).
    Matrix M(3, 3);
    M << 2, 1, 0, 1, 3, 1, 0, 1, 4;
    ConeProgram p;
    int t = p.add_variable("t");
    p.set_objective(Sense::Maximize, var(t));
    std::vector<std::vector<AffineExpr>> L(3);
    for (int i = 0; i < 3; ++i)
        for (int j = 0; j <= i; ++j) {
            AffineExpr e(M(i, j));
            if (i == j) e.add(t, -1.0);
            L[i].push_back(e);
        }
    p.add_psd(L);
    Solution s = solve_continuous(p, InteriorPointSolver{});
    REQUIRE(s.status == SolveStatus::Optimal);
    Eigen::SelfAdjointEigenSolver<Matrix> es(M);
    CHECK(s.objective_value == doctest::Approx(es.eigenvalues()(0)).epsilon(1e-8));
}

TEST_CASE("random LPs agree with their duals") {
    std::mt19937_64 rng(5);
    std::normal_distribution<double> nd;
    for (int rep = 0; rep < 20; ++rep) {
        const int n = 6, m = 10;
        Matrix A(m, n);
        for (int i = 0; i < m; ++i)
            for (int j = 0; j < n; ++j) A(i, j) = nd(rng);
        Vector x0 = Vector::Random(n);
        Vector slack = Vector::Random(m).cwiseAbs() + Vector::Constant(m, 0.1);
        Vector b = A * x0 + slack;  // A x <= b feasible at x0
        Vector yd = Vector::Random(m).cwiseAbs();
        Vector c = -A.transpose() * yd;  // bounded: c = -A^T y with y >= 0
        ConeProgram p;
        p.add_variables(n, "x");
        AffineExpr obj;
        for (int j = 0; j < n; ++j) obj.add(j, c(j));
        p.set_objective(Sense::Minimize, obj);
        std::vector<AffineExpr> rows;
        for (int i = 0; i < m; ++i) {
            AffineExpr r(b(i));
            for (int j = 0; j < n; ++j) r.add(j, -A(i, j));
            rows.push_back(r);
        }
        p.add_nonnegative(rows);
        Solution s = solve_continuous(p, InteriorPointSolver{});
        REQUIRE(s.status == SolveStatus::Optimal);
        // dual objective: max -b^T z s.t. A^T z = -c... check strong duality through the returned duals
        const Vector& z = s.duals[0];
        CHECK((A.transpose() * z + c).norm() < 1e-6);
        CHECK(s.objective_value == doctest::Approx(-b.dot(z)).epsilon(1e-7));
    }
}

}
