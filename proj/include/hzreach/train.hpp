#ifndef HZREACH_TRAIN_HPP_
#define HZREACH_TRAIN_HPP_

#include "hzreach/collision.hpp"
#include "hzreach/network.hpp"

#include <optional>

namespace hz
{

struct AdamState
{
    Vector m;
    Vector v;
    long t = 0;

    explicit AdamState(Index n) : m(Vector::Zero(n)), v(Vector::Zero(n)) {}
};

/// Standard bias-corrected Adam update (in place).
void adam_step(Vector& params, const Vector& grad, AdamState& state, double rate,
               double beta1 = 0.9, double beta2 = 0.999, double eps = 1e-8);

struct TrainConfig
{
    double learning_rate = 0.02;
    double mu = 0.1;
    int n_scaled = 2;
    double radius = 50.0;
    int verify_every = 5;
    int max_iters = 200;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
    std::uint64_t seed = 0;
    SolverOptions solver;
};

struct IterationRecord
{
    int iter = 0;
    double loss = 0.0;   // surrogate loss
    double rtilde = 0.0; // relaxed emptiness measure
    double t_loss_ms = 0.0;
    double t_grad_ms = 0.0;
    double t_update_ms = 0.0;
};

struct VerificationRecord
{
    int iter = 0;
    bool empty = false;
    double t_ms = 0.0;
};

struct TrainReport
{
    std::vector<IterationRecord> iterations;
    std::vector<VerificationRecord> verifications;
    bool success = false;
    bool cap_hit = false;
    int total_iterations = 0;
    double total_seconds = 0.0;
};

/// Exact safety check: the collision system of (net, Z, U) is empty.
bool verify(const ReluNetwork& net, const HybridZonotope& Z, const HybridZonotope& U,
            const Matrix& M, const Vector& m, double radius, const SolverOptions& opts = {});

/// Gradient descent on the surrogate loss with exact MILP verification every
/// cfg.verify_every iterations (including before the first update). The MILP
/// is the only stop signal for success; a negative surrogate loss never is.
/// When U_verify is given the exact checks run against it instead of U
/// (training keeps pulling on U).
TrainReport train_to_safety(ReluNetwork& net, const HybridZonotope& Z, const HybridZonotope& U,
                            const Matrix& M, const Vector& m, const TrainConfig& cfg,
                            const HybridZonotope* U_verify = nullptr);

/// Same loop over prebuilt collision problems (cp's trainable parameters must
/// mirror net's layout). Used directly by composite pipelines.
TrainReport train_collision(CollisionProblem& cp, CollisionProblem* cp_verify, ReluNetwork& net,
                            const TrainConfig& cfg);

} // namespace hz

#endif
