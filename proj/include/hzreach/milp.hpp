#ifndef HZREACH_MILP_HPP_
#define HZREACH_MILP_HPP_

#include "hzreach/lp.hpp"
#include "hzreach/types.hpp"

#include <optional>

namespace hz
{

/// Mixed-integer feasibility/minimization problem over the coefficient
/// space of a hybrid zonotope:
///   Ac zc + Ab zb = b,  zb in {-1,1}^nb,
///   |zc_i| <= scale for i < n_scaled (min_scale goal only),
///   lo_i <= zc_i <= hi_i otherwise.
struct MilpProblem
{
    Matrix Ac; // n_c x n_g
    Matrix Ab; // n_c x n_b
    Vector b;  // n_c
    Vector lo; // n_g (entries below n_scaled ignored in min_scale goal)
    Vector hi; // n_g
    int n_scaled = 0;

    enum class Goal
    {
        feasibility,
        min_scale
    };
    Goal goal = Goal::feasibility;

    static MilpProblem feasibility_problem(const Matrix& Ac, const Matrix& Ab, const Vector& b,
                                           const Vector& lo, const Vector& hi);
    static MilpProblem min_scale_problem(const Matrix& Ac, const Matrix& Ab, const Vector& b,
                                         int n_scaled);
};

enum class MilpStatus
{
    optimal,
    infeasible
};

struct MilpResult
{
    MilpStatus status = MilpStatus::infeasible;
    double value = 0.0; // optimal scale (min_scale) or 0 (feasibility)
    Vector zc;
    Vector zb;
    long nodes = 0;
};

/// Branch and bound over the binary coefficients with LP-relaxation bounds.
/// Branching: most fractional binary, ties by lowest index; depth-first with
/// a best-bound reorder of the open list every 100 nodes. Hitting a resource
/// cap throws SolverError(node_limit), never returns a verdict.
/// In min_scale mode an adaptive upper bound on the scale variable starts at
/// opts.scale_cap_start and doubles whenever the optimum presses against it;
/// past opts.scale_cap_max the problem is declared infeasible-at-any-scale
/// and value is +infinity.
MilpResult milp_solve(const MilpProblem& p, const SolverOptions& opts = {});

/// Feasibility verdict (goal forced to feasibility). Early exit on the first
/// integral solution.
bool milp_feasible(const MilpProblem& p, const SolverOptions& opts = {});

/// Optional hint: check a specific binary assignment first (sound: a feasible
/// hint proves feasibility; an infeasible one falls back to the full search).
bool milp_feasible_hinted(const MilpProblem& p, const Vector& zb_hint,
                          const SolverOptions& opts = {});

} // namespace hz

#endif
