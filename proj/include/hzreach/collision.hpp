#ifndef HZREACH_COLLISION_HPP_
#define HZREACH_COLLISION_HPP_

#include "hzreach/lp.hpp"
#include "hzreach/milp.hpp"
#include "hzreach/reach.hpp"
#include "hzreach/tape.hpp"

#include <limits>

namespace hz
{

/// Taped mirror of a hybrid zonotope (vectors as n x 1 nodes).
struct TapedSet
{
    Tape::NodeId Gc, Gb, c, Ac, Ab, b;
};

/// Replays the reach/intersection construction over a Tape so that every
/// entry of the collision set's constraint data stays differentiable in the
/// trainable network parameters.
class CollisionPipeline
{
public:
    struct NetNodes
    {
        std::vector<Tape::NodeId> W;
        std::vector<Tape::NodeId> w;
        std::vector<Index> widths;
        bool trainable = false;
    };

    TapedSet lift(const HybridZonotope& S);
    NetNodes add_network(const ReluNetwork& net, bool trainable);

    /// Graph of the network over Z, following the reach construction: ReLU
    /// blocks appended by Cartesian product, one hyperplane bundle per hidden
    /// layer, a final affine map onto (input, output) coordinates.
    TapedSet network_graph(const TapedSet& Z, const NetNodes& nn, double radius);

    TapedSet product(const TapedSet& A, const TapedSet& B);
    TapedSet affine(const Matrix& M, const Vector& m, const TapedSet& A);
    /// {x in A : M x + m in B}
    TapedSet intersect_with(const TapedSet& A, const Matrix& M, const Vector& m,
                            const TapedSet& B);

    HybridZonotope materialize(const TapedSet& S) const;

    Tape& tape() { return tape_; }
    const Tape& tape() const { return tape_; }

    /// Trainable parameter nodes in flatten_parameters() order.
    const std::vector<Tape::NodeId>& trainable_weights() const { return train_W_; }
    const std::vector<Tape::NodeId>& trainable_biases() const { return train_w_; }

private:
    Tape tape_;
    std::vector<Tape::NodeId> train_W_;
    std::vector<Tape::NodeId> train_w_;
};

/// Collision system Q = (M.graph + m) intersected with U, kept in graph-space
/// coordinates (input coordinates ride along, boxed by a loose hull so the
/// extra rows are semantically vacuous). The leading n_scaled continuous
/// columns of Q belong to the input set, which is what the scale variable
/// acts on.
struct CollisionProblem
{
    CollisionPipeline pipe;
    TapedSet q{};
    int n_scaled = 0;
    Index input_generators = 0;

    /// Push fresh trainable parameters and recompute the tape.
    void set_parameters(const ReluNetwork& net);

    HybridZonotope collision_set() const { return pipe.materialize(q); }
    const Matrix& Acq() const { return pipe.tape().value(q.Ac); }
    const Matrix& Abq() const { return pipe.tape().value(q.Ab); }
    Vector bq() const { return pipe.tape().value(q.b).col(0); }
};

/// Default output map [0 I]: collide the network image with U.
CollisionProblem build_collision(const ReluNetwork& net, const HybridZonotope& Z,
                                 const HybridZonotope& U, double radius, int n_scaled);
/// General output map (M, m) from graph coordinates into dim(U).
CollisionProblem build_collision(const ReluNetwork& net, const HybridZonotope& Z,
                                 const HybridZonotope& U, const Matrix& M, const Vector& m,
                                 double radius, int n_scaled);

/// Exact emptiness measure: the minimum scale keeping the collision system
/// feasible; +infinity when no finite scale does.
double exact_min_scale(const CollisionProblem& cp, const SolverOptions& opts = {});

/// Exact emptiness of Q itself (all coefficients at their unit bounds).
bool collision_empty(const CollisionProblem& cp, const SolverOptions& opts = {});

struct SurrogateResult
{
    bool feasible = false; // false: empty at every scale (distinguished outcome)
    double rtilde = 0.0;
    LpSolution lp;

    // Standard-form data kept for implicit differentiation.
    StandardFormLp std_lp;
    Index col_u = 0, col_v = 0, col_z3 = 0, col_zb = 0, col_r = 0;
    Index n_eq = 0;
};

/// Barrier relaxation of the emptiness measure: binaries relaxed to [-1,1],
/// every variable shifted nonnegative and barriered with weight mu, scaled
/// coefficients carried by their margins u = r - z, v = r + z (u + v = 2r).
SurrogateResult surrogate_min_scale(const CollisionProblem& cp, double mu,
                                    const SolverOptions& opts = {});

struct LossValue
{
    double surrogate_loss = 0.0; // 1 - rtilde
    double rtilde = 0.0;
    bool structurally_empty = false;
    Vector grad; // d(surrogate_loss)/d(theta), flatten_parameters() order
    LpSolution lp;
    double exact_loss = std::numeric_limits<double>::quiet_NaN();
    double exact_scale = std::numeric_limits<double>::quiet_NaN();
    double t_solve_ms = 0.0; // barrier LP share of the evaluation
};

/// Surrogate loss 1 - rtilde and its gradient in the trainable parameters,
/// via implicit differentiation of the barrier optimum pulled back through
/// the tape. When the relaxation is infeasible at every scale the loss is a
/// fixed -1 with zero gradient.
LossValue loss_and_grad(CollisionProblem& cp, double mu, const SolverOptions& opts = {},
                        bool include_exact = false);

} // namespace hz

#endif
