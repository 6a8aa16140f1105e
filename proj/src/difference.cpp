#include "hzreach/hybzono.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <vector>

namespace hz
{

HybridZonotope set_union(const HybridZonotope& P1, const HybridZonotope& P2)
{
    require(P1.dim() == P2.dim(), "set_union: dimensions (" + std::to_string(P1.dim()) + " vs " +
                                      std::to_string(P2.dim()) + ")");
    const Index n = P1.dim();
    const Index g1 = P1.num_gc(), g2 = P2.num_gc();
    const Index b1 = P1.num_gb(), b2 = P2.num_gb();
    const Index m1 = P1.num_con(), m2 = P2.num_con();

    // Continuous columns: gated coefficients of both operands, gated binary
    // contributions (continuous carriers), then slacks. Binary columns: the
    // operands' own binaries plus one switch (sigma = +1 selects P1).
    const Index col_z1 = 0;
    const Index col_z2 = col_z1 + g1;
    const Index col_w1 = col_z2 + g2;  // omega1
    const Index col_w2 = col_w1 + b1;  // omega2
    const Index col_slack = col_w2 + b2;
    const Index n_slack = 2 * (g1 + g2) + 4 * (b1 + b2);
    const Index ngc = col_slack + n_slack;

    const Index bin_w1 = 0;
    const Index bin_w2 = bin_w1 + b1;
    const Index bin_sigma = bin_w2 + b2;
    const Index ngb = b1 + b2 + 1;

    const Index ncon = m1 + m2 + n_slack;

    Matrix Gc = Matrix::Zero(n, ngc);
    Gc.block(0, col_z1, n, g1) = P1.Gc();
    Gc.block(0, col_z2, n, g2) = P2.Gc();
    Gc.block(0, col_w1, n, b1) = P1.Gb();
    Gc.block(0, col_w2, n, b2) = P2.Gb();
    Matrix Gb = Matrix::Zero(n, ngb);
    Gb.col(bin_sigma) = 0.5 * (P1.c() - P2.c());
    Vector c = 0.5 * (P1.c() + P2.c());

    Matrix Ac = Matrix::Zero(ncon, ngc);
    Matrix Ab = Matrix::Zero(ncon, ngb);
    Vector b = Vector::Zero(ncon);

    // Original constraints, active only on the selected branch:
    //   Ac1 z1 + Ab1 w1 = b1 * (1+sigma)/2, and the mirrored P2 row.
    Ac.block(0, col_z1, m1, g1) = P1.Ac();
    Ac.block(0, col_w1, m1, b1) = P1.Ab();
    Ab.block(0, bin_sigma, m1, 1) = -0.5 * P1.b();
    b.head(m1) = 0.5 * P1.b();

    Ac.block(m1, col_z2, m2, g2) = P2.Ac();
    Ac.block(m1, col_w2, m2, b2) = P2.Ab();
    Ab.block(m1, bin_sigma, m2, 1) = 0.5 * P2.b();
    b.segment(m1, m2) = 0.5 * P2.b();

    Index row = m1 + m2;
    Index slack = col_slack;
    // Gating |z_k,i| <= lambda_k with lambda = (1 +- sigma)/2: inactive
    // coefficients collapse to zero, active ones recover the full box.
    auto gate_continuous = [&](Index col, Index count, double sigma_sign)
    {
        for (Index i = 0; i < count; ++i)
        {
            // z - lambda <= 0 encoded over a [-2, 0] range
            Ac(row, col + i) = 1.0;
            Ab(row, bin_sigma) = -0.5 * sigma_sign;
            Ac(row, slack++) = 1.0;
            b(row) = -0.5;
            ++row;
            // -z - lambda <= 0
            Ac(row, col + i) = -1.0;
            Ab(row, bin_sigma) = -0.5 * sigma_sign;
            Ac(row, slack++) = 1.0;
            b(row) = -0.5;
            ++row;
        }
    };
    // Gating omega = w on the active branch, omega = 0 on the inactive one.
    auto gate_binary = [&](Index col, Index bin, Index count, double sigma_sign)
    {
        for (Index i = 0; i < count; ++i)
        {
            // omega - w + sigma_sign*sigma <= 1  (range lower bound -3)
            Ac(row, col + i) = 1.0;
            Ab(row, bin + i) = -1.0;
            Ab(row, bin_sigma) = sigma_sign;
            Ac(row, slack++) = 2.0;
            b(row) = -1.0;
            ++row;
            // w - omega + sigma_sign*sigma <= 1
            Ac(row, col + i) = -1.0;
            Ab(row, bin + i) = 1.0;
            Ab(row, bin_sigma) = sigma_sign;
            Ac(row, slack++) = 2.0;
            b(row) = -1.0;
            ++row;
            // omega - lambda <= 0
            Ac(row, col + i) = 1.0;
            Ab(row, bin_sigma) = -0.5 * sigma_sign;
            Ac(row, slack++) = 1.0;
            b(row) = -0.5;
            ++row;
            // -omega - lambda <= 0
            Ac(row, col + i) = -1.0;
            Ab(row, bin_sigma) = -0.5 * sigma_sign;
            Ac(row, slack++) = 1.0;
            b(row) = -0.5;
            ++row;
        }
    };
    gate_continuous(col_z1, g1, 1.0);
    gate_continuous(col_z2, g2, -1.0);
    gate_binary(col_w1, bin_w1, b1, 1.0);
    gate_binary(col_w2, bin_w2, b2, -1.0);

    return HybridZonotope(Gc, Gb, c, Ac, Ab, b);
}

HybridZonotope union_over_halfspaces(const HybridZonotope& P, const std::vector<Vector>& normals,
                                     const std::vector<double>& offsets)
{
    require(normals.size() == offsets.size(), "union_over_halfspaces: facet list lengths");
    require(!normals.empty(), "union_over_halfspaces: needs at least one halfspace");
    const Index m = static_cast<Index>(normals.size());
    const Index n = P.dim();
    for (const auto& h : normals)
        require(h.size() == n, "union_over_halfspaces: normal dimension");

    const Index g = P.num_gc();
    const Index nb = P.num_gb();

    const Index ngc = g + m + 1; // slack per facet + cover slack
    const Index ngb = nb + m;
    const Index ncon = P.num_con() + m + 1;

    Matrix Gc = Matrix::Zero(n, ngc);
    Gc.leftCols(g) = P.Gc();
    Matrix Gb = Matrix::Zero(n, ngb);
    Gb.leftCols(nb) = P.Gb();

    Matrix Ac = Matrix::Zero(ncon, ngc);
    Matrix Ab = Matrix::Zero(ncon, ngb);
    Vector b = Vector::Zero(ncon);
    Ac.topLeftCorner(P.num_con(), g) = P.Ac();
    Ab.topLeftCorner(P.num_con(), nb) = P.Ab();
    b.head(P.num_con()) = P.b();

    Index row = P.num_con();
    for (Index j = 0; j < m; ++j)
    {
        const Vector& hN = normals[static_cast<size_t>(j)];
        const double f = offsets[static_cast<size_t>(j)];
        const Vector ac = (hN.transpose() * P.Gc()).transpose();
        const Vector ab = (hN.transpose() * P.Gb()).transpose();
        const double g0 = hN.dot(P.c());
        const double hw = sum_abs(ac) + sum_abs(ab);
        const double bigM = std::max(0.0, f - (g0 - hw)) + 1.0;

        // delta_j = +1 enforces hN'x >= f:
        //   -hN'(x - c) + (M/2) delta <= -f + g0 + M/2, range low -hw - M/2.
        const double beta = -f + g0 + 0.5 * bigM;
        const double lo = -hw - 0.5 * bigM;
        Ac.block(row, 0, 1, g) = -ac.transpose();
        Ab.block(row, 0, 1, nb) = -ab.transpose();
        Ab(row, nb + j) = 0.5 * bigM;
        Ac(row, g + j) = 0.5 * (beta - lo);
        b(row) = 0.5 * (beta + lo);
        ++row;
    }
    // Cover: sum delta_j >= 2 - m.
    {
        const double beta = static_cast<double>(m) - 2.0;
        const double lo = -static_cast<double>(m);
        for (Index j = 0; j < m; ++j)
            Ab(row, nb + j) = -1.0;
        Ac(row, g + m) = 0.5 * (beta - lo);
        b(row) = 0.5 * (beta + lo);
        ++row;
    }

    return HybridZonotope(Gc, Gb, P.c(), Ac, Ab, b);
}

namespace
{

// Support value of a binary-free hybrid zonotope in direction d.
double support_value(const HybridZonotope& P, const Vector& d, const SolverOptions& opts,
                     bool* feasible)
{
    const Index g = P.num_gc();
    const Index nc = P.num_con();
    if (g == 0)
    {
        if (feasible)
            *feasible = max_abs(P.b()) <= 1e-12;
        return d.dot(P.c());
    }
    // max d'Gc z s.t. Ac z = b, |z| <= 1; shift z = t - 1.
    Matrix A = Matrix::Zero(nc + g, 2 * g);
    Vector b(nc + g);
    A.topLeftCorner(nc, g) = P.Ac();
    b.head(nc) = P.b() + P.Ac() * Vector::Ones(g);
    for (Index i = 0; i < g; ++i)
    {
        A(nc + i, i) = 1.0;
        A(nc + i, g + i) = 1.0;
        b(nc + i) = 2.0;
    }
    Vector c = Vector::Zero(2 * g);
    c.head(g) = -(P.Gc().transpose() * d);
    LpResult r = lp_solve_optimal(A, b, c, opts);
    if (r.status == LpStatus::infeasible)
    {
        if (feasible)
            *feasible = false;
        return 0.0;
    }
    if (r.status != LpStatus::optimal)
        throw SolverError(SolverError::Kind::numerical, "support_value: LP did not solve");
    if (feasible)
        *feasible = true;
    Vector z = r.sol.x.head(g).array() - 1.0;
    return d.dot(P.Gc() * z + P.c());
}

bool is_axis_box(const HybridZonotope& P)
{
    if (P.num_con() != 0 || P.num_gb() != 0)
        return false;
    for (Index j = 0; j < P.num_gc(); ++j)
    {
        int nz = 0;
        for (Index i = 0; i < P.dim(); ++i)
            if (P.Gc()(i, j) != 0.0)
                ++nz;
        if (nz > 1)
            return false;
    }
    return true;
}

Halfspaces planar_halfspaces(const HybridZonotope& P, const SolverOptions& opts)
{
    auto dir = [](double a) { return Vector{{std::cos(a), std::sin(a)}}; };

    const IntervalHull hull = generator_hull(P);
    const double scale = 1.0 + hull.half.cwiseAbs().maxCoeff() + hull.center.cwiseAbs().maxCoeff();
    const double tol = 1e-7 * scale;
    const double min_gap = 2e-4;

    Halfspaces hs;
    // Subdivide each angular interval until the corner implied by its two
    // supporting lines lies on the boundary; polygons terminate with every
    // facet normal discovered.
    auto refine = [&](auto&& self, double a1, double h1, double a2, double h2, int depth) -> void
    {
        hs.normals.push_back(dir(a1));
        hs.offsets.push_back(h1);
        const double gap = a2 - a1;
        if (gap < min_gap || depth > 24)
            return;
        const Vector d1 = dir(a1), d2 = dir(a2);
        Eigen::Matrix2d D;
        D << d1(0), d1(1), d2(0), d2(1);
        if (std::abs(D.determinant()) < 1e-12)
            return;
        const Eigen::Vector2d v = D.inverse() * Eigen::Vector2d(h1, h2);
        const double am = 0.5 * (a1 + a2);
        const Vector dm = dir(am);
        const double hm = support_value(P, dm, opts, nullptr);
        if (dm.dot(Vector(v)) - hm > tol)
        {
            self(self, a1, h1, am, hm, depth + 1);
            self(self, am, hm, a2, h2, depth + 1);
        }
    };

    constexpr int kSeeds = 8;
    double angles[kSeeds + 1];
    double supports[kSeeds + 1];
    for (int k = 0; k <= kSeeds; ++k)
    {
        angles[k] = 2.0 * std::numbers::pi * k / kSeeds;
        bool feas = true;
        supports[k] = support_value(P, dir(angles[k]), opts, k == 0 ? &feas : nullptr);
        if (k == 0 && !feas)
            throw SolverError(SolverError::Kind::empty_set, "planar_halfspaces: empty set");
    }
    for (int k = 0; k < kSeeds; ++k)
        refine(refine, angles[k], supports[k], angles[k + 1], supports[k + 1], 0);
    return hs;
}

} // namespace

Halfspaces convex_to_halfspaces(const HybridZonotope& P, const SolverOptions& opts)
{
    if (P.num_gb() != 0)
        throw SolverError(SolverError::Kind::unsupported_shape,
                          "convex_to_halfspaces: set has binary generators");
    Halfspaces hs;
    if (P.dim() == 1)
    {
        bool feas = true;
        const double hi = support_value(P, Vector::Ones(1), opts, &feas);
        if (!feas)
            throw SolverError(SolverError::Kind::empty_set, "convex_to_halfspaces: empty set");
        const double lo = -support_value(P, -Vector::Ones(1), opts, nullptr);
        hs.normals.push_back(Vector::Ones(1));
        hs.offsets.push_back(hi);
        hs.normals.push_back(-Vector::Ones(1));
        hs.offsets.push_back(-lo);
        return hs;
    }
    if (is_axis_box(P))
    {
        const IntervalHull hull = generator_hull(P);
        for (Index i = 0; i < P.dim(); ++i)
        {
            Vector e = Vector::Zero(P.dim());
            e(i) = 1.0;
            hs.normals.push_back(e);
            hs.offsets.push_back(hull.center(i) + hull.half(i));
            hs.normals.push_back(-e);
            hs.offsets.push_back(-(hull.center(i) - hull.half(i)));
        }
        return hs;
    }
    if (P.dim() == 2)
        return planar_halfspaces(P, opts);
    throw SolverError(SolverError::Kind::unsupported_shape,
                      "convex_to_halfspaces: only intervals, axis boxes and planar sets");
}

HybridZonotope set_difference(const HybridZonotope& P1, const HybridZonotope& P2,
                              const SolverOptions& opts)
{
    require(P1.dim() == P2.dim(), "set_difference: dimensions (" + std::to_string(P1.dim()) +
                                      " vs " + std::to_string(P2.dim()) + ")");

    // Decompose P2 into convex pieces (one per feasible binary assignment).
    std::vector<HybridZonotope> pieces;
    const Index nb = P2.num_gb();
    if (nb > 14)
        throw SolverError(SolverError::Kind::unsupported_shape,
                          "set_difference: too many binary generators in the subtrahend");
    const long total = 1L << nb;
    for (long m = 0; m < total; ++m)
    {
        Vector zb(nb);
        for (Index j = 0; j < nb; ++j)
            zb(j) = (m >> j) & 1 ? 1.0 : -1.0;
        HybridZonotope leaf(P2.Gc(), Matrix(P2.dim(), 0), P2.c() + P2.Gb() * zb, P2.Ac(),
                            Matrix(P2.num_con(), 0), P2.b() - P2.Ab() * zb);
        if (!is_empty(leaf, opts))
            pieces.push_back(std::move(leaf));
    }

    HybridZonotope result = P1;
    for (const HybridZonotope& piece : pieces)
    {
        Halfspaces hs = convex_to_halfspaces(piece, opts);
        // Complement of the interior: at least one facet inequality reversed.
        result = union_over_halfspaces(result, hs.normals, hs.offsets);
    }
    return result;
}

} // namespace hz
