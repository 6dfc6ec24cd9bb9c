#include "drccp/conic_ir.hpp"

#include <doctest.h>

#include <cmath>
#include <random>

using namespace drccp;

namespace {

AffineExpr var(int j, double c = 1.0) { return AffineExpr::variable(j, c); }

}  // namespace

TEST_SUITE("conic_ir") {

TEST_CASE("nonnegative residual at the boundary") {
    ConeProgram p;
    int x = p.add_variable("x");
    p.add_nonnegative({var(x) - 1.0});
    CHECK(check_solution(p, Vector::Ones(1))[0] == doctest::Approx(0.0));
}

TEST_CASE("PSD residual is the minimum eigenvalue") {
    ConeProgram p;
    int a = p.add_variable("a");
    p.add_psd({{var(a)}, {AffineExpr(0.0), var(a)}});
    CHECK(check_solution(p, Vector::Ones(1))[0] == doctest::Approx(1.0));
}

TEST_CASE("second-order residual on the boundary") {
    ConeProgram p;
    int t = p.add_variable("t"), u = p.add_variable("u"), v = p.add_variable("v");
    p.add_second_order({var(t), var(u), var(v)});
    CHECK(check_solution(p, Vector{{1.0, 0.6, 0.8}})[0] == doctest::Approx(0.0).epsilon(1e-15));
}

TEST_CASE("svec scaling gives the trace inner product") {
    Matrix X{{2.0, 1.0, 0.5}, {1.0, 3.0, -1.0}, {0.5, -1.0, 1.0}};
    Matrix Y{{1.0, -2.0, 0.0}, {-2.0, 0.5, 4.0}, {0.0, 4.0, 2.0}};
    CHECK(svec(X).dot(svec(Y)) == doctest::Approx((X * Y).trace()));
    CHECK((smat(svec(X), 3) - X).norm() < 1e-15);
}

TEST_CASE("text round trip preserves residuals") {
    std::mt19937_64 rng(2);
    std::normal_distribution<double> g(0.0, 1.0);
    ConeProgram p;
    for (int j = 0; j < 4; ++j) p.add_variable("x[" + std::to_string(j) + "]");
    p.set_objective(Sense::Maximize, var(0, 0.1) + var(3, -2.5) + 1.0 / 3.0);
    p.add_zero({var(0) + var(1) - 1.0}, "eq");
    p.add_nonnegative({var(2, g(rng)) + g(rng), var(3)}, "nn");
    p.add_second_order({var(0), var(1, std::sqrt(2.0)), var(2) - 0.1}, "soc");
    p.add_psd({{var(0)}, {var(1, 0.3), var(3) + 1.0}}, "lmi");
    p.mark_binary(3);
    const std::string text = program_to_text(p);
    ConeProgram q = program_from_text(text);
    CHECK(program_to_text(q) == text);
    REQUIRE(q.binaries() == p.binaries());
    for (int k = 0; k < 20; ++k) {
        Vector x(4);
        for (int j = 0; j < 4; ++j) x(j) = g(rng);
        auto a = check_solution(p, x), b = check_solution(q, x);
        REQUIRE(a.size() == b.size());
        for (size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
        CHECK(p.objective_value(x) == q.objective_value(x));
    }
}

TEST_CASE("rows must reference declared variables") {
    ConeProgram p;
    p.add_variable();
    CHECK_THROWS_AS(p.add_nonnegative({var(3)}), Error);
    CHECK_THROWS_AS(p.add_nonnegative({}), Error);
    CHECK_THROWS_AS(p.mark_binary(4), Error);
}

TEST_CASE("explicit zeros are dropped") {
    ConeProgram p;
    int x = p.add_variable(), y = p.add_variable();
    p.add_nonnegative({var(x) + var(y, 0.0)});
    CHECK(p.block(0).rows[0].terms().size() == 1);
}

}
