#ifndef HZREACH_LP_HPP_
#define HZREACH_LP_HPP_

#include "hzreach/types.hpp"

namespace hz
{

/// Equality-form LP: minimize c'x subject to Ax = b, x >= 0, with a
/// log-barrier weight mu on every variable.
struct StandardFormLp
{
    Matrix A; // m x n
    Vector b; // m
    Vector c; // n
    double mu = 0.1;
};

struct LpSolution
{
    Vector x; // primal, strictly positive at a barrier center
    Vector y; // equality duals
    Vector s; // dual slack c - A'y
    double objective = 0.0; // c'x
    bool converged = false;
    int iterations = 0;
    double kkt_residual = 0.0; // max of |Ax-b|, |x.*s - mu|
};

/// Sensitivities of the optimal objective c'x*(A,b,c) of the barrier
/// problem with respect to the problem data.
struct LpGradients
{
    Matrix dA;
    Vector db;
    Vector dc;
};

/// Solve for the barrier center at lp.mu: the unique minimizer of
/// c'x - mu*sum(ln x) subject to Ax = b. Throws SolverError on
/// infeasible/unbounded problems or iteration exhaustion.
LpSolution lp_solve_barrier(const StandardFormLp& lp, const SolverOptions& opts = {});

enum class LpStatus
{
    optimal,
    infeasible,
    unbounded,
    iteration_limit
};

struct LpResult
{
    LpStatus status = LpStatus::iteration_limit;
    LpSolution sol;
};

/// Drive the barrier parameter to (near) zero and return the LP optimum.
/// Non-throwing on infeasible/unbounded: reports through status.
LpResult lp_solve_optimal(const Matrix& A, const Vector& b, const Vector& c,
                          const SolverOptions& opts = {});

/// Feasibility of {x >= 0 : Ax = b} decided through the phase-1 problem.
bool lp_feasible(const Matrix& A, const Vector& b, const SolverOptions& opts = {});

/// Same verdict; additionally returns the interior phase-1 point (feasible up
/// to the phase-1 optimum) for callers that want a relaxed point cheaply.
bool lp_feasible_point(const Matrix& A, const Vector& b, Vector& x,
                       const SolverOptions& opts = {});

/// Implicit differentiation of the barrier-center optimality conditions.
/// sol must be a converged output of lp_solve_barrier for lp.
LpGradients kkt_gradients(const LpSolution& sol, const StandardFormLp& lp,
                          const SolverOptions& opts = {});

} // namespace hz

#endif
