#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "hzreach/hybzono.hpp"
#include "hzreach/json_io.hpp"

#include "generators.hpp"
#include "oracle.hpp"

#include <functional>
#include <string>

using namespace hz;

namespace
{

bool throws_mentioning(const std::function<void()>& f, const std::string& needle)
{
    try
    {
        f();
    }
    catch (const DimensionError& e)
    {
        return std::string(e.what()).find(needle) != std::string::npos;
    }
    return false;
}

} // namespace

TEST_CASE("construction validates dimensions and names the offending pair")
{
    CHECK(throws_mentioning(
        [] {
            HybridZonotope(Matrix::Zero(2, 1), Matrix::Zero(3, 1), Vector::Zero(2), Matrix(0, 1),
                           Matrix(0, 1), Vector(0));
        },
        "Gb rows"));
    CHECK(throws_mentioning(
        [] {
            HybridZonotope(Matrix::Zero(2, 3), Matrix(2, 0), Vector::Zero(2), Matrix::Zero(1, 2),
                           Matrix::Zero(1, 0), Vector::Zero(1));
        },
        "Ac cols"));
    CHECK(throws_mentioning(
        [] {
            HybridZonotope(Matrix::Zero(2, 1), Matrix(2, 0), Vector::Zero(2), Matrix::Zero(2, 1),
                           Matrix::Zero(2, 0), Vector::Zero(1));
        },
        "Ac rows"));
}

TEST_CASE("factories produce the expected boxes and singletons")
{
    HybridZonotope unit = HybridZonotope::unit_box(2);
    CHECK(unit.num_gc() == 2);
    CHECK(unit.num_gb() == 0);
    CHECK(unit.num_con() == 0);
    CHECK(contains_point(unit, Vector{{0.7, -0.7}}));
    CHECK_FALSE(contains_point(unit, Vector{{2.0, 0.0}}));

    HybridZonotope hot = HybridZonotope::box(Vector::Constant(2, 1.5), Vector::Constant(2, 0.5));
    CHECK(contains_point(hot, Vector{{1.0, 2.0}}));
    CHECK_FALSE(contains_point(hot, Vector{{0.9, 1.5}}));

    HybridZonotope point = HybridZonotope::singleton(Vector{{3.0, -4.0}});
    CHECK(point.num_gc() == 0);
    CHECK(contains_point(point, Vector{{3.0, -4.0}}));
    CHECK_FALSE(contains_point(point, Vector{{3.0, -3.9}}));
}

TEST_CASE("affine map: identity, scaling, and sampled membership under a random map")
{
    auto g = testgen::rng(101);
    HybridZonotope P = testgen::random_hz(g, 2, 4, 2, 2, true);

    HybridZonotope same = affine_map(Matrix::Identity(2, 2), Vector::Zero(2), P);
    CHECK((same.Gc() - P.Gc()).cwiseAbs().maxCoeff() == 0.0);

    HybridZonotope twice =
        affine_map(2.0 * Matrix::Identity(2, 2), Vector::Zero(2), HybridZonotope::unit_box(2));
    CHECK(contains_point(twice, Vector{{2.0, -2.0}}));
    CHECK_FALSE(contains_point(twice, Vector{{2.1, 0.0}}));

    Matrix W = testgen::random_matrix(g, 3, 2);
    Vector w = testgen::random_vector(g, 3);
    HybridZonotope image = affine_map(W, w, P);
    // Constraints unchanged.
    CHECK((image.Ac() - P.Ac()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((image.Ab() - P.Ab()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((image.b() - P.b()).cwiseAbs().maxCoeff() == 0.0);

    int ok = 0;
    for (const Vector& x : sample_points(P, 100, 5))
        ok += contains_point(image, W * x + w) ? 1 : 0;
    CHECK(ok == 100);
}

TEST_CASE("cartesian product stacks blocks and adds counts")
{
    auto g = testgen::rng(103);
    HybridZonotope P1 = testgen::random_hz(g, 2, 3, 1, 1, true);
    HybridZonotope P2 = testgen::random_hz(g, 1, 2, 2, 1, true);
    HybridZonotope prod = cartesian_product(P1, P2);
    CHECK(prod.dim() == 3);
    CHECK(prod.num_gc() == P1.num_gc() + P2.num_gc());
    CHECK(prod.num_gb() == P1.num_gb() + P2.num_gb());
    CHECK(prod.num_con() == P1.num_con() + P2.num_con());

    HybridZonotope s1 = HybridZonotope::singleton(Vector{{1.0}});
    HybridZonotope s2 = HybridZonotope::singleton(Vector{{2.0}});
    CHECK(contains_point(cartesian_product(s1, s2), Vector{{1.0, 2.0}}));

    HybridZonotope b1 = HybridZonotope::unit_box(1);
    HybridZonotope square = cartesian_product(b1, b1);
    CHECK(contains_point(square, Vector{{0.9, -0.9}}));
    CHECK_FALSE(contains_point(square, Vector{{1.1, 0.0}}));

    // Membership factorizes.
    for (const Vector& x : sample_points(prod, 60, 7))
    {
        CHECK(contains_point(P1, x.head(2)));
        CHECK(contains_point(P2, x.tail(1)));
    }
}

TEST_CASE("generalized intersection: counts, idempotence, disjointness, membership")
{
    auto g = testgen::rng(107);
    HybridZonotope P = testgen::random_hz(g, 2, 3, 1, 1, true);
    HybridZonotope self = generalized_intersection(P, P);
    CHECK(self.num_gc() == 2 * P.num_gc());
    CHECK(self.num_con() == 2 * P.num_con() + P.dim());
    for (const Vector& x : sample_points(self, 50, 9))
        CHECK(contains_point(P, x));
    for (const Vector& x : sample_points(P, 50, 11))
        CHECK(contains_point(self, x));

    CHECK(is_empty(generalized_intersection(HybridZonotope::interval(0, 1),
                                            HybridZonotope::interval(2, 3))));

    HybridZonotope A = HybridZonotope::unit_box(2);
    HybridZonotope B = HybridZonotope::box(Vector::Constant(2, 1.5), Vector::Constant(2, 0.75));
    HybridZonotope inter = generalized_intersection(A, B);
    CHECK_FALSE(is_empty(inter));
    for (const Vector& x : sample_points(inter, 80, 13))
    {
        CHECK(contains_point(A, x));
        CHECK(contains_point(B, x));
    }
}

TEST_CASE("hyperplane intersection: slice, vacuous plane, missed plane")
{
    HybridZonotope box = HybridZonotope::unit_box(2);
    Matrix H(1, 2);
    H << 1, 0;
    HybridZonotope slice = intersect_hyperplane(box, Hyperplane(H, Vector::Zero(1)));
    CHECK(slice.num_con() == 1);
    for (const Vector& x : sample_points(slice, 60, 15))
    {
        CHECK(std::abs(x(0)) <= 1e-7);
        CHECK(x(1) <= 1.0 + 1e-9);
        CHECK(x(1) >= -1.0 - 1e-9);
    }

    HybridZonotope same =
        intersect_hyperplane(box, Hyperplane(Matrix::Zero(1, 2), Vector::Zero(1)));
    for (const Vector& x : sample_points(box, 40, 17))
        CHECK(contains_point(same, x));

    HybridZonotope missed = intersect_hyperplane(
        HybridZonotope::unit_box(1), Hyperplane(Matrix::Identity(1, 1), Vector::Constant(1, 2.0)));
    CHECK(is_empty(missed));
}

TEST_CASE("minkowski sum: identity element, intervals, sampled sums")
{
    auto g = testgen::rng(109);
    HybridZonotope P = testgen::random_hz(g, 2, 3, 1, 1, true);
    HybridZonotope zero = HybridZonotope::singleton(Vector::Zero(2));
    HybridZonotope same = minkowski_sum(P, zero);
    for (const Vector& x : sample_points(P, 40, 19))
        CHECK(contains_point(same, x));

    HybridZonotope widened =
        minkowski_sum(HybridZonotope::interval(-1, 1), HybridZonotope::interval(-0.25, 0.25));
    CHECK(contains_point(widened, Vector{{1.2}}));
    CHECK_FALSE(contains_point(widened, Vector{{1.3}}));

    HybridZonotope Q = testgen::random_hz(g, 2, 2, 1, 1, true);
    HybridZonotope sum = minkowski_sum(P, Q);
    auto xs = sample_points(P, 50, 21);
    auto ys = sample_points(Q, 50, 23);
    for (size_t i = 0; i < xs.size(); ++i)
        CHECK(contains_point(sum, xs[i] + ys[i]));
}

TEST_CASE("union: membership on split intervals and operand coverage")
{
    HybridZonotope a = HybridZonotope::interval(0, 1);
    HybridZonotope b = HybridZonotope::interval(2, 3);
    HybridZonotope u = set_union(a, b);
    CHECK(u.num_gb() == 1);
    CHECK(contains_point(u, Vector{{0.5}}));
    CHECK(contains_point(u, Vector{{2.5}}));
    CHECK_FALSE(contains_point(u, Vector{{1.5}}));
    CHECK_FALSE(contains_point(u, Vector{{-0.2}}));
    CHECK_FALSE(contains_point(u, Vector{{3.2}}));

    auto g = testgen::rng(113);
    HybridZonotope P = testgen::random_hz(g, 2, 3, 1, 1, true);
    HybridZonotope self = set_union(P, P);
    for (const Vector& x : sample_points(P, 40, 25))
        CHECK(contains_point(self, x));
    for (const Vector& x : sample_points(self, 40, 27))
        CHECK(contains_point(P, x));

    HybridZonotope A = HybridZonotope::unit_box(2);
    HybridZonotope B = HybridZonotope::box(Vector::Constant(2, 0.5), Vector::Constant(2, 1.0));
    HybridZonotope ab = set_union(A, B);
    for (const Vector& x : sample_points(A, 50, 29))
        CHECK(contains_point(ab, x));
    for (const Vector& x : sample_points(B, 50, 31))
        CHECK(contains_point(ab, x));
    for (const Vector& x : sample_points(ab, 80, 33))
        CHECK((contains_point(A, x) || contains_point(B, x)));
}

TEST_CASE("set difference: empty subtrahend, interval cut, grid semantics")
{
    HybridZonotope box = HybridZonotope::unit_box(2);
    // Empty subtrahend (contradictory constraint).
    Matrix Ac(1, 1);
    Ac << 1;
    HybridZonotope empty(Matrix::Zero(2, 1), Matrix(2, 0), Vector::Zero(2), Ac, Matrix(1, 0),
                         Vector::Constant(1, 5.0));
    HybridZonotope same = set_difference(box, empty);
    for (const Vector& x : sample_points(box, 40, 35))
        CHECK(contains_point(same, x));

    HybridZonotope line = HybridZonotope::interval(0, 3);
    HybridZonotope cut = set_difference(line, HybridZonotope::interval(1, 2));
    CHECK(contains_point(cut, Vector{{0.5}}));
    CHECK_FALSE(contains_point(cut, Vector{{1.5}}));
    CHECK(contains_point(cut, Vector{{2.5}}));
    CHECK(contains_point(cut, Vector{{1.0}})); // boundary stays

    HybridZonotope big = HybridZonotope::box(Vector::Zero(2), Vector::Constant(2, 2.0));
    HybridZonotope hole = HybridZonotope::box(Vector::Zero(2), Vector::Constant(2, 1.0));
    HybridZonotope ring = set_difference(big, hole);
    for (int i = 0; i < 12; ++i)
    {
        for (int j = 0; j < 12; ++j)
        {
            Vector p(2);
            p << -2.0 + 4.0 * (i + 0.5) / 12.0, -2.0 + 4.0 * (j + 0.5) / 12.0;
            const bool expect = (std::abs(p(0)) > 1.0 || std::abs(p(1)) > 1.0);
            CHECK(contains_point(ring, p) == expect);
        }
    }
}

TEST_CASE("set difference subtracting a two-piece set")
{
    HybridZonotope two =
        set_union(HybridZonotope::interval(-2, -1), HybridZonotope::interval(1, 2));
    HybridZonotope line = HybridZonotope::interval(-3, 3);
    HybridZonotope diff = set_difference(line, two);
    CHECK(contains_point(diff, Vector{{0.0}}));
    CHECK(contains_point(diff, Vector{{-2.8}}));
    CHECK(contains_point(diff, Vector{{2.8}}));
    CHECK_FALSE(contains_point(diff, Vector{{-1.5}}));
    CHECK_FALSE(contains_point(diff, Vector{{1.5}}));
}

TEST_CASE("is_empty agrees with the enumeration oracle on random instances")
{
    auto g = testgen::rng(127);
    int empty_count = 0;
    for (int trial = 0; trial < 100; ++trial)
    {
        const Index ng = 1 + static_cast<Index>(trial % 6);
        const Index nb = static_cast<Index>(trial % 5);
        const Index nc = 1 + static_cast<Index>(trial % 3);
        HybridZonotope P = testgen::random_hz(g, 2, ng, nb, nc, trial % 3 != 2);
        const bool expect = oracle::enum_is_empty(P);
        CHECK(is_empty(P) == expect);
        empty_count += expect ? 1 : 0;
    }
    CHECK(empty_count > 5);
    CHECK(empty_count < 95);
}

TEST_CASE("contains_point agrees with the enumeration oracle")
{
    auto g = testgen::rng(131);
    for (int trial = 0; trial < 40; ++trial)
    {
        HybridZonotope P = testgen::random_hz(g, 2, 3, 2, 1, true);
        Vector x = testgen::random_vector(g, 2, 1.5);
        CHECK(contains_point(P, x) == oracle::enum_contains(P, x));
    }
}

TEST_CASE("sampling: box bounds, singleton, self-consistency")
{
    HybridZonotope box = HybridZonotope::unit_box(3);
    for (const Vector& x : sample_points(box, 50, 37))
        CHECK(x.cwiseAbs().maxCoeff() <= 1.0 + 1e-9);

    HybridZonotope pt = HybridZonotope::singleton(Vector{{1.0, 2.0}});
    for (const Vector& x : sample_points(pt, 5, 39))
        CHECK((x - Vector{{1.0, 2.0}}).cwiseAbs().maxCoeff() <= 1e-12);

    auto g = testgen::rng(137);
    HybridZonotope P = testgen::random_hz(g, 2, 4, 3, 2, true);
    for (const Vector& x : sample_points(P, 60, 41))
        CHECK(contains_point(P, x));

    // Emptiness surfaces as an error.
    HybridZonotope emptyset =
        generalized_intersection(HybridZonotope::interval(0, 1), HybridZonotope::interval(2, 3));
    CHECK_THROWS_AS((void)sample_points(emptyset, 3, 43), SolverError);
}

TEST_CASE("json round trip is exact and deterministic")
{
    auto g = testgen::rng(139);
    HybridZonotope P = testgen::random_hz(g, 3, 4, 2, 2, true);
    Json j = set_to_json(P);
    HybridZonotope Q = set_from_json(j);
    CHECK((P.Gc() - Q.Gc()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((P.Gb() - Q.Gb()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((P.c() - Q.c()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((P.Ac() - Q.Ac()).cwiseAbs().maxCoeff() == 0.0);
    CHECK((P.b() - Q.b()).cwiseAbs().maxCoeff() == 0.0);
    CHECK(set_to_json(Q).dump() == j.dump());

    // Empty blocks serialize as [] and come back with the right shapes.
    HybridZonotope box = HybridZonotope::unit_box(2);
    Json jb = set_to_json(box);
    CHECK(jb["Gb"].is_array());
    CHECK(jb["Gb"].empty());
    HybridZonotope back = set_from_json(jb);
    CHECK(back.num_gb() == 0);
    CHECK(back.dim() == 2);
}
