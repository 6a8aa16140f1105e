#include "hzreach/scaled.hpp"

#include <algorithm>
#include <set>

namespace hz
{

namespace
{

Vector scaled_lo(const ScaledHybridZonotope& S)
{
    Vector lo = Vector::Constant(S.base.num_gc(), -1.0);
    lo.head(S.n_scaled).setConstant(-S.r);
    return lo;
}

Vector scaled_hi(const ScaledHybridZonotope& S)
{
    Vector hi = Vector::Constant(S.base.num_gc(), 1.0);
    hi.head(S.n_scaled).setConstant(S.r);
    return hi;
}

} // namespace

ScaledHybridZonotope scale(const HybridZonotope& P, double r, int n_scaled)
{
    if (n_scaled < 0 || n_scaled > P.num_gc())
        throw DimensionError("scale: n_scaled out of range [0, " + std::to_string(P.num_gc()) +
                             "]");
    if (r < 0.0)
        throw DimensionError("scale: r must be nonnegative");
    return ScaledHybridZonotope{P, r, n_scaled};
}

bool shz_contains_point(const ScaledHybridZonotope& S, const Vector& x, const SolverOptions& opts)
{
    require(x.size() == S.dim(), "shz_contains_point: point dim vs set dim");
    const HybridZonotope& P = S.base;
    Matrix Ac(P.num_con() + P.dim(), P.num_gc());
    Ac << P.Ac(), P.Gc();
    Matrix Ab(P.num_con() + P.dim(), P.num_gb());
    Ab << P.Ab(), P.Gb();
    Vector b(P.num_con() + P.dim());
    b << P.b(), x - P.c();
    MilpProblem prob = MilpProblem::feasibility_problem(Ac, Ab, b, scaled_lo(S), scaled_hi(S));
    return milp_feasible(prob, opts);
}

bool shz_is_empty(const ScaledHybridZonotope& S, const SolverOptions& opts)
{
    const HybridZonotope& P = S.base;
    MilpProblem prob =
        MilpProblem::feasibility_problem(P.Ac(), P.Ab(), P.b(), scaled_lo(S), scaled_hi(S));
    return !milp_feasible(prob, opts);
}

std::vector<Vector> shz_sample_points(const ScaledHybridZonotope& S, int count,
                                      std::uint64_t seed, const SolverOptions& opts)
{
    return sample_points_bounded(S.base, scaled_lo(S), scaled_hi(S), count, seed, opts);
}

HybridZonotope reorder_scaled_columns(const HybridZonotope& P, const std::vector<Index>& index_set)
{
    const Index ng = P.num_gc();
    std::set<Index> seen;
    for (Index i : index_set)
    {
        if (i < 0 || i >= ng)
            throw DimensionError("reorder_scaled_columns: index " + std::to_string(i) +
                                 " out of range");
        if (!seen.insert(i).second)
            throw DimensionError("reorder_scaled_columns: duplicate index " + std::to_string(i));
    }

    std::vector<Index> order(index_set);
    for (Index i = 0; i < ng; ++i)
    {
        if (!seen.count(i))
            order.push_back(i);
    }

    Matrix Gc(P.dim(), ng), Ac(P.num_con(), ng);
    for (Index k = 0; k < ng; ++k)
    {
        Gc.col(k) = P.Gc().col(order[static_cast<size_t>(k)]);
        Ac.col(k) = P.Ac().col(order[static_cast<size_t>(k)]);
    }
    return HybridZonotope(Gc, P.Gb(), P.c(), Ac, P.Ab(), P.b());
}

} // namespace hz
