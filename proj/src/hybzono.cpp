#include "hzreach/hybzono.hpp"

#include <cmath>
#include <random>
#include <string>

namespace hz
{

HybridZonotope::HybridZonotope(Matrix Gc, Matrix Gb, Vector c, Matrix Ac, Matrix Ab, Vector b)
    : Gc_(std::move(Gc)), Gb_(std::move(Gb)), c_(std::move(c)), Ac_(std::move(Ac)),
      Ab_(std::move(Ab)), b_(std::move(b))
{
    // Reshape 0x0 empties onto the right degenerate shapes so that block
    // code never special-cases them. Only shapes with a zero dimension are
    // legal here; anything else stays 0x0 and fails the checks below.
    auto reshape_empty = [](Matrix& M, Index rows, Index cols)
    {
        if (M.size() == 0 && (rows == 0 || cols == 0))
            M.resize(rows, cols);
    };
    reshape_empty(Gc_, c_.size(), Gc_.cols());
    reshape_empty(Gb_, c_.size(), Gb_.cols());
    reshape_empty(Ac_, b_.size(), Gc_.cols());
    reshape_empty(Ab_, b_.size(), Gb_.cols());

    require(Gc_.rows() == c_.size(), "hybrid zonotope: Gc rows (" + std::to_string(Gc_.rows()) +
                                         ") vs c length (" + std::to_string(c_.size()) + ")");
    require(Gb_.rows() == c_.size(), "hybrid zonotope: Gb rows (" + std::to_string(Gb_.rows()) +
                                         ") vs c length (" + std::to_string(c_.size()) + ")");
    require(Ac_.cols() == Gc_.cols(), "hybrid zonotope: Ac cols (" + std::to_string(Ac_.cols()) +
                                          ") vs Gc cols (" + std::to_string(Gc_.cols()) + ")");
    require(Ab_.cols() == Gb_.cols(), "hybrid zonotope: Ab cols (" + std::to_string(Ab_.cols()) +
                                          ") vs Gb cols (" + std::to_string(Gb_.cols()) + ")");
    require(Ac_.rows() == b_.size(), "hybrid zonotope: Ac rows (" + std::to_string(Ac_.rows()) +
                                         ") vs b length (" + std::to_string(b_.size()) + ")");
    require(Ab_.rows() == b_.size(), "hybrid zonotope: Ab rows (" + std::to_string(Ab_.rows()) +
                                         ") vs b length (" + std::to_string(b_.size()) + ")");
}

HybridZonotope HybridZonotope::singleton(const Vector& c)
{
    const Index n = c.size();
    return HybridZonotope(Matrix(n, 0), Matrix(n, 0), c, Matrix(0, 0), Matrix(0, 0), Vector(0));
}

HybridZonotope HybridZonotope::box(const Vector& center, const Vector& half)
{
    require(center.size() == half.size(), "box: center vs half length");
    const Index n = center.size();
    Matrix Gc = half.asDiagonal();
    return HybridZonotope(Gc, Matrix(n, 0), center, Matrix(0, n), Matrix(0, 0), Vector(0));
}

HybridZonotope HybridZonotope::unit_box(Index n)
{
    return box(Vector::Zero(n), Vector::Ones(n));
}

HybridZonotope HybridZonotope::interval(double lo, double hi)
{
    Vector c(1), h(1);
    c(0) = 0.5 * (lo + hi);
    h(0) = 0.5 * (hi - lo);
    return box(c, h);
}

Vector HybridZonotope::point(const Vector& zc, const Vector& zb) const
{
    require(zc.size() == num_gc() && zb.size() == num_gb(), "point: coefficient lengths");
    return Gc_ * zc + Gb_ * zb + c_;
}

Hyperplane::Hyperplane(Matrix H_in, Vector h_in) : H(std::move(H_in)), h(std::move(h_in))
{
    require(H.rows() == h.size(), "hyperplane: H rows vs h length");
}

IntervalHull generator_hull(const HybridZonotope& P)
{
    IntervalHull hull;
    hull.center = P.c();
    hull.half = rowwise_abs_sum(P.Gc()) + rowwise_abs_sum(P.Gb());
    return hull;
}

HybridZonotope affine_map(const Matrix& W, const Vector& w, const HybridZonotope& P)
{
    require(W.cols() == P.dim(), "affine_map: W cols (" + std::to_string(W.cols()) +
                                     ") vs set dimension (" + std::to_string(P.dim()) + ")");
    require(W.rows() == w.size(), "affine_map: W rows vs w length");
    return HybridZonotope(W * P.Gc(), W * P.Gb(), W * P.c() + w, P.Ac(), P.Ab(), P.b());
}

HybridZonotope cartesian_product(const HybridZonotope& P1, const HybridZonotope& P2)
{
    const Index n1 = P1.dim(), n2 = P2.dim();
    Matrix Gc = Matrix::Zero(n1 + n2, P1.num_gc() + P2.num_gc());
    Gc.topLeftCorner(n1, P1.num_gc()) = P1.Gc();
    Gc.bottomRightCorner(n2, P2.num_gc()) = P2.Gc();
    Matrix Gb = Matrix::Zero(n1 + n2, P1.num_gb() + P2.num_gb());
    Gb.topLeftCorner(n1, P1.num_gb()) = P1.Gb();
    Gb.bottomRightCorner(n2, P2.num_gb()) = P2.Gb();
    Vector c(n1 + n2);
    c << P1.c(), P2.c();

    const Index m1 = P1.num_con(), m2 = P2.num_con();
    Matrix Ac = Matrix::Zero(m1 + m2, Gc.cols());
    Ac.topLeftCorner(m1, P1.num_gc()) = P1.Ac();
    Ac.bottomRightCorner(m2, P2.num_gc()) = P2.Ac();
    Matrix Ab = Matrix::Zero(m1 + m2, Gb.cols());
    Ab.topLeftCorner(m1, P1.num_gb()) = P1.Ab();
    Ab.bottomRightCorner(m2, P2.num_gb()) = P2.Ab();
    Vector b(m1 + m2);
    b << P1.b(), P2.b();
    return HybridZonotope(Gc, Gb, c, Ac, Ab, b);
}

HybridZonotope intersection_under_map(const HybridZonotope& P1, const Matrix& M, const Vector& m,
                                      const HybridZonotope& P2)
{
    require(M.cols() == P1.dim(), "intersection_under_map: M cols vs dim(P1)");
    require(M.rows() == P2.dim(), "intersection_under_map: M rows vs dim(P2)");
    require(m.size() == P2.dim(), "intersection_under_map: m length vs dim(P2)");

    const Index g1 = P1.num_gc(), g2 = P2.num_gc();
    const Index b1 = P1.num_gb(), b2 = P2.num_gb();
    const Index m1 = P1.num_con(), m2 = P2.num_con();
    const Index k = P2.dim();

    Matrix Gc = Matrix::Zero(P1.dim(), g1 + g2);
    Gc.leftCols(g1) = P1.Gc();
    Matrix Gb = Matrix::Zero(P1.dim(), b1 + b2);
    Gb.leftCols(b1) = P1.Gb();

    Matrix Ac = Matrix::Zero(m1 + m2 + k, g1 + g2);
    Ac.topLeftCorner(m1, g1) = P1.Ac();
    Ac.block(m1, g1, m2, g2) = P2.Ac();
    Ac.block(m1 + m2, 0, k, g1) = M * P1.Gc();
    Ac.block(m1 + m2, g1, k, g2) = -P2.Gc();

    Matrix Ab = Matrix::Zero(m1 + m2 + k, b1 + b2);
    Ab.topLeftCorner(m1, b1) = P1.Ab();
    Ab.block(m1, b1, m2, b2) = P2.Ab();
    Ab.block(m1 + m2, 0, k, b1) = M * P1.Gb();
    Ab.block(m1 + m2, b1, k, b2) = -P2.Gb();

    Vector b(m1 + m2 + k);
    b.head(m1) = P1.b();
    b.segment(m1, m2) = P2.b();
    b.tail(k) = P2.c() - M * P1.c() - m;

    return HybridZonotope(Gc, Gb, P1.c(), Ac, Ab, b);
}

HybridZonotope generalized_intersection(const HybridZonotope& P1, const HybridZonotope& P2)
{
    require(P1.dim() == P2.dim(), "generalized_intersection: dimensions (" +
                                      std::to_string(P1.dim()) + " vs " +
                                      std::to_string(P2.dim()) + ")");
    return intersection_under_map(P1, Matrix::Identity(P1.dim(), P1.dim()),
                                  Vector::Zero(P1.dim()), P2);
}

HybridZonotope intersect_hyperplane(const HybridZonotope& P, const Hyperplane& H)
{
    require(H.dim() == P.dim(), "intersect_hyperplane: hyperplane dim (" +
                                    std::to_string(H.dim()) + ") vs set dim (" +
                                    std::to_string(P.dim()) + ")");
    const Index k = H.H.rows();
    Matrix Ac(P.num_con() + k, P.num_gc());
    Ac << P.Ac(), H.H * P.Gc();
    Matrix Ab(P.num_con() + k, P.num_gb());
    Ab << P.Ab(), H.H * P.Gb();
    Vector b(P.num_con() + k);
    b << P.b(), H.h - H.H * P.c();
    return HybridZonotope(P.Gc(), P.Gb(), P.c(), Ac, Ab, b);
}

HybridZonotope minkowski_sum(const HybridZonotope& P1, const HybridZonotope& P2)
{
    require(P1.dim() == P2.dim(), "minkowski_sum: dimensions (" + std::to_string(P1.dim()) +
                                      " vs " + std::to_string(P2.dim()) + ")");
    const Index n = P1.dim();
    Matrix Gc(n, P1.num_gc() + P2.num_gc());
    Gc << P1.Gc(), P2.Gc();
    Matrix Gb(n, P1.num_gb() + P2.num_gb());
    Gb << P1.Gb(), P2.Gb();
    Vector c = P1.c() + P2.c();

    const Index m1 = P1.num_con(), m2 = P2.num_con();
    Matrix Ac = Matrix::Zero(m1 + m2, Gc.cols());
    Ac.topLeftCorner(m1, P1.num_gc()) = P1.Ac();
    Ac.bottomRightCorner(m2, P2.num_gc()) = P2.Ac();
    Matrix Ab = Matrix::Zero(m1 + m2, Gb.cols());
    Ab.topLeftCorner(m1, P1.num_gb()) = P1.Ab();
    Ab.bottomRightCorner(m2, P2.num_gb()) = P2.Ab();
    Vector b(m1 + m2);
    b << P1.b(), P2.b();
    return HybridZonotope(Gc, Gb, c, Ac, Ab, b);
}

MilpProblem membership_problem(const HybridZonotope& P, const Vector& x)
{
    require(x.size() == P.dim(), "contains_point: point dim (" + std::to_string(x.size()) +
                                     ") vs set dim (" + std::to_string(P.dim()) + ")");
    Matrix Ac(P.num_con() + P.dim(), P.num_gc());
    Ac << P.Ac(), P.Gc();
    Matrix Ab(P.num_con() + P.dim(), P.num_gb());
    Ab << P.Ab(), P.Gb();
    Vector b(P.num_con() + P.dim());
    b << P.b(), x - P.c();
    return MilpProblem::feasibility_problem(Ac, Ab, b, Vector::Constant(P.num_gc(), -1.0),
                                            Vector::Constant(P.num_gc(), 1.0));
}

bool contains_point(const HybridZonotope& P, const Vector& x, const SolverOptions& opts)
{
    return milp_feasible(membership_problem(P, x), opts);
}

bool contains_point_hinted(const HybridZonotope& P, const Vector& x, const Vector& zb_hint,
                           const SolverOptions& opts)
{
    return milp_feasible_hinted(membership_problem(P, x), zb_hint, opts);
}

bool is_empty(const HybridZonotope& P, const SolverOptions& opts)
{
    MilpProblem p = MilpProblem::feasibility_problem(
        P.Ac(), P.Ab(), P.b(), Vector::Constant(P.num_gc(), -1.0),
        Vector::Constant(P.num_gc(), 1.0));
    return !milp_feasible(p, opts);
}

namespace
{

// Alternating-projection polish of a near-feasible slice point between the
// equality subspace (min-norm correction) and the coefficient box.
// Interior-point exits leave ~1e-7-level equality slack, which generator
// matrices would amplify past the exactness budget of downstream checks.
// Returns the final equality residual (inf norm, scaled).
double polish_slice(const Matrix& Ac, const Vector& beff, const Vector& lo, const Vector& hi,
                    Vector& zc)
{
    const double scale = 1.0 + max_abs(beff);
    if (Ac.rows() == 0)
        return 0.0;
    const auto cod = Ac.completeOrthogonalDecomposition();
    double res = max_abs(Vector(beff - Ac * zc)) / scale;
    for (int round = 0; round < 60 && res > 1e-12; ++round)
    {
        zc += cod.solve(Vector(beff - Ac * zc));
        zc = zc.cwiseMax(lo).cwiseMin(hi);
        res = max_abs(Vector(beff - Ac * zc)) / scale;
    }
    return res;
}

// Feasibility of the continuous slice at a fixed binary assignment, with an
// optional random objective to spread the returned points.
bool slice_point(const HybridZonotope& P, const Vector& lo, const Vector& hi, const Vector& zb,
                 const Vector* objective, Vector& zc, const SolverOptions& opts)
{
    const Index ng = P.num_gc();
    const Index nc = P.num_con();
    Vector beff = P.b() - P.Ab() * zb;
    // Standard form: zc = lo + t, t in [0, hi-lo] with slack rows.
    Matrix A = Matrix::Zero(nc + ng, 2 * ng);
    Vector b(nc + ng);
    A.topLeftCorner(nc, ng) = P.Ac();
    b.head(nc) = beff - P.Ac() * lo;
    for (Index i = 0; i < ng; ++i)
    {
        A(nc + i, i) = 1.0;
        A(nc + i, ng + i) = 1.0;
        b(nc + i) = hi(i) - lo(i);
    }
    if (objective)
    {
        Vector cobj = Vector::Zero(2 * ng);
        cobj.head(ng) = *objective;
        LpResult r = lp_solve_optimal(A, b, cobj, opts);
        if (r.status == LpStatus::optimal)
        {
            zc = r.sol.x.head(ng) + lo;
            if (polish_slice(P.Ac(), beff, lo, hi, zc) <= 1e-10)
                return true;
        }
        else if (r.status == LpStatus::infeasible)
        {
            return false;
        }
        // Degenerate slice or unpolishable vertex: any feasible point serves
        // the sampler; fall through to the phase-1 point.
    }
    Vector x;
    if (!lp_feasible_point(A, b, x, opts))
        return false;
    zc = x.head(ng) + lo;
    return polish_slice(P.Ac(), beff, lo, hi, zc) <= 1e-10;
}

} // namespace

std::vector<Vector> sample_points_bounded(const HybridZonotope& P, const Vector& lo,
                                          const Vector& hi, int count, std::uint64_t seed,
                                          const SolverOptions& opts)
{
    require(lo.size() == P.num_gc() && hi.size() == P.num_gc(),
            "sample_points_bounded: bound lengths");
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    std::normal_distribution<double> gauss(0.0, 1.0);

    const Index nb = P.num_gb();
    const Index ng = P.num_gc();

    std::vector<Vector> pool; // feasible binary assignments
    {
        MilpProblem base = MilpProblem::feasibility_problem(P.Ac(), P.Ab(), P.b(), lo, hi);
        MilpResult r = milp_solve(base, opts);
        if (r.status != MilpStatus::optimal)
            throw SolverError(SolverError::Kind::empty_set, "sample_points: set is empty");
        pool.push_back(r.zb);
    }
    // Grow the pool with random assignments / single flips.
    const int attempts = nb > 0 ? std::max(16, 3 * count) : 0;
    for (int a = 0; a < attempts && static_cast<int>(pool.size()) < std::max(4, count / 4); ++a)
    {
        Vector zb(nb);
        if (a % 2 == 0)
        {
            for (Index j = 0; j < nb; ++j)
                zb(j) = unit(rng) < 0.5 ? -1.0 : 1.0;
        }
        else
        {
            zb = pool[static_cast<size_t>(a / 2) % pool.size()];
            zb(static_cast<Index>(rng() % static_cast<std::uint64_t>(nb))) *= -1.0;
        }
        bool known = false;
        for (const auto& q : pool)
            if (max_abs(Vector(q - zb)) < 0.5)
                known = true;
        if (known)
            continue;
        Vector zc;
        if (slice_point(P, lo, hi, zb, nullptr, zc, opts))
            pool.push_back(zb);
    }

    std::vector<Vector> points;
    points.reserve(static_cast<size_t>(count));
    Vector prev_zc;
    Vector prev_zb;
    int consecutive_failures = 0;
    while (static_cast<int>(points.size()) < count)
    {
        const Vector& zb = pool[rng() % pool.size()];
        Vector obj(ng);
        for (Index i = 0; i < ng; ++i)
            obj(i) = gauss(rng);
        Vector zc;
        if (!slice_point(P, lo, hi, zb, &obj, zc, opts))
        {
            // Pool entries were verified feasible; retry with a fresh
            // objective before declaring a numeric failure.
            if (++consecutive_failures > 50)
                throw SolverError(SolverError::Kind::numerical,
                                  "sample_points: slice solves failing on a feasible assignment");
            continue;
        }
        consecutive_failures = 0;
        // Blend with the previous point of the same slice for interior coverage.
        if (prev_zc.size() == zc.size() && prev_zb.size() == zb.size() &&
            max_abs(Vector(prev_zb - zb)) < 0.5 && unit(rng) < 0.5)
        {
            const double t = unit(rng);
            zc = t * zc + (1.0 - t) * prev_zc;
        }
        zc = zc.cwiseMax(lo).cwiseMin(hi);
        points.push_back(P.point(zc, zb));
        prev_zc = zc;
        prev_zb = zb;
    }
    return points;
}

std::vector<Vector> sample_points(const HybridZonotope& P, int count, std::uint64_t seed,
                                  const SolverOptions& opts)
{
    return sample_points_bounded(P, Vector::Constant(P.num_gc(), -1.0),
                                 Vector::Constant(P.num_gc(), 1.0), count, seed, opts);
}

} // namespace hz
