#ifndef HZREACH_APPS_HPP_
#define HZREACH_APPS_HPP_

#include "hzreach/collision.hpp"
#include "hzreach/train.hpp"

#include <functional>

namespace hz
{

// ---------------------------------------------------------------------------
// Image-vs-unsafe benchmark scenario

struct BenchmarkScenario
{
    ReluNetwork net; // pretrained on the benchmark target
    HybridZonotope Z;
    HybridZonotope U;
    double pretrain_mse = 0.0; // held-out MSE after pretraining
};

/// Target the benchmark networks approximate.
Vector benchmark_target(const Vector& x);

/// Pretrain a network with the given hidden widths on the benchmark target
/// over the unit box; returns it with the benchmark input/unsafe sets.
BenchmarkScenario build_benchmark_scenario(const std::vector<Index>& hidden_widths,
                                           std::uint64_t seed = 1);

// ---------------------------------------------------------------------------
// Forward invariance for an affine system x+ = C [x; u] + d

struct AffineDynamics
{
    Matrix C; // n_x x (n_x + n_u)
    Vector d; // n_x

    AffineDynamics(Matrix C_in, Vector d_in);
};

struct FiProblem
{
    HybridZonotope Z;        // the safe set (network input set)
    HybridZonotope U;        // complement region used by the loss
    HybridZonotope U_verify; // eps-shrunk complement used by the exact check
    Matrix M;                // output map: graph (x, u) -> next state
    Vector m;
};

/// U = X \ safe_set for training, U_verify = X \ (safe_set + eps box) for
/// verification (necessity recovery).
FiProblem build_fi_problem(const AffineDynamics& dyn, const HybridZonotope& safe_set,
                           const HybridZonotope& workspace, double eps,
                           const SolverOptions& opts = {});

/// The non-convex planar safe set used by the double-integrator demo
/// (union of two convex pieces, one binary generator).
HybridZonotope double_integrator_safe_set();
AffineDynamics double_integrator_dynamics();

/// Controller pretrained toward u = K x over the safe set's hull.
ReluNetwork pretrain_linear_policy(const HybridZonotope& domain, const Matrix& K,
                                   const std::vector<Index>& hidden, std::uint64_t seed);

// ---------------------------------------------------------------------------
// Reach-avoid for a black-box trajectory family

/// Synthetic stand-in for the black-box system: planar trajectories,
/// polynomial in t with coefficients affine in the parameters k, plus a
/// bounded sinusoidal disturbance s in [-1,1]^2. Translation-invariant
/// (g(k,s,0) = 0).
Vector synthetic_trajectory(const Vector& k, const Vector& s, double t);

struct ReachAvoidSpec
{
    HybridZonotope K;  // trajectory-parameter box
    double t_final = 1.0;
    HybridZonotope X0; // initial positions
    HybridZonotope G;  // goal box
    std::vector<HybridZonotope> obstacles;
    HybridZonotope workspace;
    Vector body_half;  // robot body box half-widths
    Vector e;          // elementwise model-error bound
    ReluNetwork traj_net; // frozen trajectory model (k, t) -> displacement
    ReluNetwork policy;   // trainable x0 -> k
    double radius = 40.0;
};

/// Elementwise max |traj_net(k, t) - g(k, s, t)| over uniform samples.
Vector estimate_error_bound(
    const std::function<Vector(const Vector&, const Vector&, double)>& g_true,
    const ReluNetwork& traj_net, const IntervalHull& param_hull, double t_final, int samples,
    std::uint64_t seed);

struct ReachAvoidProblem
{
    CollisionProblem cp; // composite pipeline; only the policy is trainable
    HybridZonotope U;    // time-stamped unsafe union
};

/// Forward-reachable-tube pipeline: policy graph over X0, product with the
/// time interval, frozen trajectory-model graph, then (t, x0 + displacement)
/// intersected with U = (T x inflated obstacles) union ({t_f} x (X \ G) + E).
ReachAvoidProblem build_reach_avoid_problem(const ReachAvoidSpec& spec, int n_scaled,
                                            const SolverOptions& opts = {});

/// Fully-built default scenario: pretrains the trajectory model on the
/// synthetic family and the policy toward a colliding parameter choice.
ReachAvoidSpec make_default_reach_avoid_spec(std::uint64_t seed = 5);

} // namespace hz

#endif
