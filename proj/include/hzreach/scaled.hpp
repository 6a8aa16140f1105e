#ifndef HZREACH_SCALED_HPP_
#define HZREACH_SCALED_HPP_

#include "hzreach/hybzono.hpp"

namespace hz
{

/// Hybrid zonotope whose first n_scaled continuous coefficients obey
/// |zc_i| <= r instead of |zc_i| <= 1. The matrices are untouched: r lives
/// next to the base set and is injected into solver bounds at solve time,
/// which is what makes it an optimizable quantity later.
struct ScaledHybridZonotope
{
    HybridZonotope base;
    double r = 1.0;
    int n_scaled = 0;

    Index dim() const { return base.dim(); }
};

/// n_scaled = 0 makes scaling a no-op.
ScaledHybridZonotope scale(const HybridZonotope& P, double r, int n_scaled);

bool shz_contains_point(const ScaledHybridZonotope& S, const Vector& x,
                        const SolverOptions& opts = {});
bool shz_is_empty(const ScaledHybridZonotope& S, const SolverOptions& opts = {});
std::vector<Vector> shz_sample_points(const ScaledHybridZonotope& S, int count,
                                      std::uint64_t seed = 0, const SolverOptions& opts = {});

/// Permute the columns of Gc/Ac so that index_set (0-based, distinct) occupies
/// the leading positions, preserving set semantics.
HybridZonotope reorder_scaled_columns(const HybridZonotope& P, const std::vector<Index>& index_set);

} // namespace hz

#endif
