#ifndef HZREACH_HYBZONO_HPP_
#define HZREACH_HYBZONO_HPP_

#include "hzreach/milp.hpp"
#include "hzreach/types.hpp"

#include <cstdint>
#include <vector>

namespace hz
{

/// Non-convex polytopic set
///   { Gc zc + Gb zb + c : Ac zc + Ab zb = b, |zc|_inf <= 1, zb in {-1,1}^nb }.
/// Empty generator/constraint blocks are 0-column / 0-row matrices, never
/// absent fields. Values are immutable after construction; all operations
/// are pure functions.
class HybridZonotope
{
public:
    /// Zero-dimensional empty value (assignment target).
    HybridZonotope() = default;
    HybridZonotope(Matrix Gc, Matrix Gb, Vector c, Matrix Ac, Matrix Ab, Vector b);

    /// Set with no constraints and no generators: the singleton {c}.
    static HybridZonotope singleton(const Vector& c);
    /// Axis-aligned box center +- half (half >= 0 elementwise).
    static HybridZonotope box(const Vector& center, const Vector& half);
    static HybridZonotope unit_box(Index n);
    static HybridZonotope interval(double lo, double hi);

    Index dim() const { return c_.size(); }
    Index num_gc() const { return Gc_.cols(); }
    Index num_gb() const { return Gb_.cols(); }
    Index num_con() const { return Ac_.rows(); }

    const Matrix& Gc() const { return Gc_; }
    const Matrix& Gb() const { return Gb_; }
    const Vector& c() const { return c_; }
    const Matrix& Ac() const { return Ac_; }
    const Matrix& Ab() const { return Ab_; }
    const Vector& b() const { return b_; }

    /// Point for a coefficient assignment (no feasibility check).
    Vector point(const Vector& zc, const Vector& zb) const;

private:
    Matrix Gc_, Gb_;
    Vector c_;
    Matrix Ac_, Ab_;
    Vector b_;
};

struct Hyperplane
{
    Matrix H; // k x n
    Vector h; // k

    Hyperplane(Matrix H_in, Vector h_in);
    Index dim() const { return H.cols(); }
};

/// Loose axis-aligned interval hull read off the generator magnitudes
/// (always a superset of the set).
struct IntervalHull
{
    Vector center;
    Vector half;
};
IntervalHull generator_hull(const HybridZonotope& P);

// Closed-form set operations (constraints of the operands are preserved
// verbatim inside the results).
HybridZonotope affine_map(const Matrix& W, const Vector& w, const HybridZonotope& P);
HybridZonotope cartesian_product(const HybridZonotope& P1, const HybridZonotope& P2);
HybridZonotope generalized_intersection(const HybridZonotope& P1, const HybridZonotope& P2);
/// {x in P1 : M x + m in P2}
HybridZonotope intersection_under_map(const HybridZonotope& P1, const Matrix& M, const Vector& m,
                                      const HybridZonotope& P2);
HybridZonotope intersect_hyperplane(const HybridZonotope& P, const Hyperplane& H);
HybridZonotope minkowski_sum(const HybridZonotope& P1, const HybridZonotope& P2);

/// Exact union through one added switch binary; the inactive operand's
/// coefficients are pinned to zero by slack-encoded inequalities.
HybridZonotope set_union(const HybridZonotope& P1, const HybridZonotope& P2);

/// { x in P1 : x not in interior(P2) }. P2 must decompose into convex pieces
/// with recoverable halfspace descriptions (axis boxes, intervals, or planar
/// sets); otherwise SolverError(unsupported_shape).
HybridZonotope set_difference(const HybridZonotope& P1, const HybridZonotope& P2,
                              const SolverOptions& opts = {});

/// {x in P : for at least one j, normals[j]'x >= offsets[j]}. Building block
/// of set_difference; one switch binary per halfspace, big-M values from the
/// interval hull.
HybridZonotope union_over_halfspaces(const HybridZonotope& P,
                                     const std::vector<Vector>& normals,
                                     const std::vector<double>& offsets);

// Queries (MILP-backed; solver failures throw, they never become verdicts).
MilpProblem membership_problem(const HybridZonotope& P, const Vector& x);
bool contains_point(const HybridZonotope& P, const Vector& x, const SolverOptions& opts = {});
/// Same, first trying a known-good binary assignment (sound fast path).
bool contains_point_hinted(const HybridZonotope& P, const Vector& x, const Vector& zb_hint,
                           const SolverOptions& opts = {});
bool is_empty(const HybridZonotope& P, const SolverOptions& opts = {});

/// Coverage sampler: random MILP-feasible binary assignments, then random
/// linear objectives over the continuous slice (plus convex blends within a
/// slice). Not a uniform sampler. Deterministic for a fixed seed.
std::vector<Vector> sample_points(const HybridZonotope& P, int count, std::uint64_t seed = 0,
                                  const SolverOptions& opts = {});

/// Sampler with explicit per-coefficient bounds on zc (scaled-set support).
std::vector<Vector> sample_points_bounded(const HybridZonotope& P, const Vector& lo,
                                          const Vector& hi, int count, std::uint64_t seed = 0,
                                          const SolverOptions& opts = {});

/// Halfspace description of one convex piece (used by set_difference).
struct Halfspaces
{
    std::vector<Vector> normals;
    std::vector<double> offsets;
};

/// Exact-within-tolerance halfspace description of a convex (binary-free)
/// hybrid zonotope. Supported: 1-d sets, axis boxes, and planar sets (via
/// adaptive support-function refinement). Throws unsupported_shape otherwise.
Halfspaces convex_to_halfspaces(const HybridZonotope& P, const SolverOptions& opts = {});

} // namespace hz

#endif
