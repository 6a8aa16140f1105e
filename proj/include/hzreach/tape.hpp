#ifndef HZREACH_TAPE_HPP_
#define HZREACH_TAPE_HPP_

#include "hzreach/types.hpp"

#include <vector>

namespace hz
{

/// Reverse-mode accumulation over matrix expressions. Nodes are appended in
/// topological order (arguments always precede results), values are matrices
/// (vectors as n x 1). The structure is built once; parameter leaves take
/// fresh values each iteration and forward()/backward() replay the graph.
class Tape
{
public:
    using NodeId = int;

    NodeId constant(const Matrix& value);
    NodeId parameter(const Matrix& initial);
    NodeId add(NodeId a, NodeId b);
    NodeId sub(NodeId a, NodeId b);
    NodeId neg(NodeId a);
    NodeId mul(NodeId a, NodeId b);
    NodeId scale_by(double k, NodeId a);
    NodeId hcat(const std::vector<NodeId>& parts);
    NodeId vcat(const std::vector<NodeId>& parts);

    void set_parameter(NodeId id, const Matrix& value);
    const Matrix& value(NodeId id) const;
    const Matrix& adjoint(NodeId id) const;

    /// Recompute all node values from the leaves.
    void forward();
    /// Clear adjoints; callers then seed_adjoint on outputs and backward().
    void zero_adjoints();
    void seed_adjoint(NodeId id, const Matrix& adj);
    void backward();

    const std::vector<NodeId>& parameters() const { return params_; }

private:
    enum class Op
    {
        constant,
        parameter,
        add,
        sub,
        neg,
        mul,
        scale,
        hcat,
        vcat
    };

    struct Node
    {
        Op op;
        std::vector<NodeId> args;
        double k = 1.0;
        Matrix value;
        Matrix adjoint;
    };

    NodeId push(Node n);
    std::vector<Node> nodes_;
    std::vector<NodeId> params_;
};

} // namespace hz

#endif
