#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hzreach/lp.hpp"

#include "generators.hpp"
#include "oracle.hpp"

#include <cmath>

using namespace hz;

namespace
{

// Strictly feasible bounded LP: z in [0,u], R z = R z0, slacks s = u - z.
struct BoxLp
{
    StandardFormLp lp;
    Index nz = 0;
};

BoxLp make_box_lp(std::mt19937_64& g, Index nz, Index nrows, double mu)
{
    Matrix R = testgen::random_matrix(g, nrows, nz);
    Vector u = (testgen::random_vector(g, nz).array().abs() + 1.0).matrix();
    Vector z0 = 0.5 * u;
    Matrix A = Matrix::Zero(nrows + nz, 2 * nz);
    A.topLeftCorner(nrows, nz) = R;
    A.bottomLeftCorner(nz, nz).setIdentity();
    A.bottomRightCorner(nz, nz).setIdentity();
    Vector b(nrows + nz);
    b.head(nrows) = R * z0;
    b.tail(nz) = u;
    Vector c = Vector::Zero(2 * nz);
    c.head(nz) = testgen::random_vector(g, nz);
    return {StandardFormLp{A, b, c, mu}, nz};
}

} // namespace

TEST_CASE("one-dimensional barrier center matches the analytic root")
{
    // min x - mu ln x - mu ln(1-x) over x + s = 1. Stationarity gives
    // x^2 - (1+2mu)x + mu = 0; the root in (0,1) is the center.
    const double mu = 0.1;
    Matrix A(1, 2);
    A << 1, 1;
    Vector b(1);
    b << 1;
    Vector c(2);
    c << 1, 0;
    LpSolution sol = lp_solve_barrier({A, b, c, mu});
    REQUIRE(sol.converged);

    // Independent root solve of f(x) = 1 - mu/x + mu/(1-x) on (0, 1/2);
    // f is increasing there with a sign change, so bisection is exact.
    double xlo = 1e-12, xhi = 0.5;
    for (int it = 0; it < 200; ++it)
    {
        const double xm = 0.5 * (xlo + xhi);
        const double f = 1.0 - mu / xm + mu / (1.0 - xm);
        (f < 0.0 ? xlo : xhi) = xm;
    }
    const double x = 0.5 * (xlo + xhi);
    CHECK(sol.x(0) == doctest::Approx(x).epsilon(1e-8));
    CHECK(sol.kkt_residual <= 1e-8);
    CHECK(sol.x.minCoeff() > 0.0);
}

TEST_CASE("tiny mu approaches the vertex optimum from enumeration")
{
    auto g = testgen::rng(11);
    for (int trial = 0; trial < 10; ++trial)
    {
        BoxLp p = make_box_lp(g, 3, 1, 1e-8);
        LpSolution sol = lp_solve_barrier(p.lp);
        REQUIRE(sol.converged);
        Vector lo = Vector::Zero(3);
        Vector hi = p.lp.b.tail(3);
        auto ve = oracle::vertex_enum_min(p.lp.A.topLeftCorner(1, 3), p.lp.b.head(1),
                                          p.lp.c.head(3), lo, hi);
        REQUIRE(ve.has_value());
        CHECK(std::abs(sol.objective - *ve) <= 1e-6 * (1.0 + std::abs(*ve)));
    }
}

TEST_CASE("analytic center of a symmetric box is its midpoint")
{
    // c = 0, x_i + s_i = 2: center at x = s = 1.
    const Index n = 4;
    Matrix A = Matrix::Zero(n, 2 * n);
    A.leftCols(n).setIdentity();
    A.rightCols(n).setIdentity();
    Vector b = Vector::Constant(n, 2.0);
    LpSolution sol = lp_solve_barrier({A, b, Vector::Zero(2 * n), 0.05});
    REQUIRE(sol.converged);
    for (Index i = 0; i < 2 * n; ++i)
        CHECK(sol.x(i) == doctest::Approx(1.0).epsilon(1e-7));
}

TEST_CASE("infeasible and unbounded problems surface as errors")
{
    Matrix A(2, 1);
    A << 1, 1;
    Vector b(2);
    b << 1, 2;
    CHECK_THROWS_AS(lp_solve_barrier({A, b, Vector::Zero(1), 0.1}), SolverError);

    // min -x with only x >= 0: barrier objective unbounded below.
    Matrix A2(0, 1);
    Vector b2(0);
    Vector c2(1);
    c2 << -1;
    CHECK_THROWS_AS(lp_solve_barrier({A2, b2, c2, 0.1}), SolverError);
}

TEST_CASE("lp_solve_optimal classifies infeasibility without throwing")
{
    Matrix A(2, 1);
    A << 1, 1;
    Vector b(2);
    b << 1, 2;
    LpResult r = lp_solve_optimal(A, b, Vector::Zero(1));
    CHECK(r.status == LpStatus::infeasible);
}

TEST_CASE("kkt gradients match central finite differences in b")
{
    auto g = testgen::rng(23);
    const double mu = 0.05;
    int checked = 0;
    for (int trial = 0; trial < 20; ++trial)
    {
        BoxLp p = make_box_lp(g, 3 + (trial % 3), 2, mu);
        LpSolution sol = lp_solve_barrier(p.lp);
        REQUIRE(sol.converged);
        LpGradients grad = kkt_gradients(sol, p.lp);

        const double h = 1e-5;
        for (Index i = 0; i < p.lp.b.size(); ++i)
        {
            StandardFormLp lp_p = p.lp;
            StandardFormLp lp_m = p.lp;
            lp_p.b(i) += h;
            lp_m.b(i) -= h;
            const double vp = lp_solve_barrier(lp_p).objective;
            const double vm = lp_solve_barrier(lp_m).objective;
            const double fd = (vp - vm) / (2.0 * h);
            if (std::abs(fd) > 1e-6)
            {
                CHECK(grad.db(i) == doctest::Approx(fd).epsilon(1e-3));
                ++checked;
            }
        }
    }
    CHECK(checked > 20);
}

TEST_CASE("kkt gradients match central finite differences in A entries")
{
    auto g = testgen::rng(29);
    const double mu = 0.08;
    BoxLp p = make_box_lp(g, 4, 2, mu);
    LpSolution sol = lp_solve_barrier(p.lp);
    REQUIRE(sol.converged);
    LpGradients grad = kkt_gradients(sol, p.lp);

    const double h = 1e-5;
    for (Index i = 0; i < 2; ++i)
    {
        for (Index j = 0; j < p.lp.A.cols(); ++j)
        {
            StandardFormLp lp_p = p.lp;
            StandardFormLp lp_m = p.lp;
            lp_p.A(i, j) += h;
            lp_m.A(i, j) -= h;
            const double vp = lp_solve_barrier(lp_p).objective;
            const double vm = lp_solve_barrier(lp_m).objective;
            const double fd = (vp - vm) / (2.0 * h);
            if (std::abs(fd) > 1e-6)
                CHECK(grad.dA(i, j) == doctest::Approx(fd).epsilon(1e-3));
        }
    }
}

TEST_CASE("gradient in c approaches the primal solution as mu shrinks")
{
    auto g = testgen::rng(31);
    BoxLp p = make_box_lp(g, 3, 1, 1e-7);
    LpSolution sol = lp_solve_barrier(p.lp);
    REQUIRE(sol.converged);
    LpGradients grad = kkt_gradients(sol, p.lp);
    // Envelope theorem: d(c'x*)/dc -> x* for the LP.
    CHECK((grad.dc - sol.x).cwiseAbs().maxCoeff() <= 1e-3 * (1.0 + sol.x.cwiseAbs().maxCoeff()));
}

TEST_CASE("joint row scaling leaves the optimum unchanged")
{
    auto g = testgen::rng(37);
    const double mu = 0.05;
    BoxLp p = make_box_lp(g, 3, 2, mu);
    LpSolution sol = lp_solve_barrier(p.lp);
    REQUIRE(sol.converged);
    LpGradients grad = kkt_gradients(sol, p.lp);

    // Directional derivative along (dA, db) = (A_row0, b_0) (the scaling
    // direction of row 0) must vanish.
    double dd = grad.db(0) * p.lp.b(0);
    for (Index j = 0; j < p.lp.A.cols(); ++j)
        dd += grad.dA(0, j) * p.lp.A(0, j);
    CHECK(std::abs(dd) <= 1e-6 * (1.0 + std::abs(sol.objective)));
}
