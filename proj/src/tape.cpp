#include "hzreach/tape.hpp"

namespace hz
{

Tape::NodeId Tape::push(Node n)
{
    nodes_.push_back(std::move(n));
    return static_cast<NodeId>(nodes_.size() - 1);
}

Tape::NodeId Tape::constant(const Matrix& value)
{
    Node n;
    n.op = Op::constant;
    n.value = value;
    return push(std::move(n));
}

Tape::NodeId Tape::parameter(const Matrix& initial)
{
    Node n;
    n.op = Op::parameter;
    n.value = initial;
    NodeId id = push(std::move(n));
    params_.push_back(id);
    return id;
}

Tape::NodeId Tape::add(NodeId a, NodeId b)
{
    require(nodes_[a].value.rows() == nodes_[b].value.rows() &&
                nodes_[a].value.cols() == nodes_[b].value.cols(),
            "tape add: shapes");
    Node n;
    n.op = Op::add;
    n.args = {a, b};
    n.value = nodes_[a].value + nodes_[b].value;
    return push(std::move(n));
}

Tape::NodeId Tape::sub(NodeId a, NodeId b)
{
    require(nodes_[a].value.rows() == nodes_[b].value.rows() &&
                nodes_[a].value.cols() == nodes_[b].value.cols(),
            "tape sub: shapes");
    Node n;
    n.op = Op::sub;
    n.args = {a, b};
    n.value = nodes_[a].value - nodes_[b].value;
    return push(std::move(n));
}

Tape::NodeId Tape::neg(NodeId a)
{
    Node n;
    n.op = Op::neg;
    n.args = {a};
    n.value = -nodes_[a].value;
    return push(std::move(n));
}

Tape::NodeId Tape::mul(NodeId a, NodeId b)
{
    require(nodes_[a].value.cols() == nodes_[b].value.rows(), "tape mul: inner dims");
    Node n;
    n.op = Op::mul;
    n.args = {a, b};
    n.value = nodes_[a].value * nodes_[b].value;
    return push(std::move(n));
}

Tape::NodeId Tape::scale_by(double k, NodeId a)
{
    Node n;
    n.op = Op::scale;
    n.args = {a};
    n.k = k;
    n.value = k * nodes_[a].value;
    return push(std::move(n));
}

Tape::NodeId Tape::hcat(const std::vector<NodeId>& parts)
{
    require(!parts.empty(), "tape hcat: empty");
    Index rows = nodes_[parts[0]].value.rows();
    Index cols = 0;
    for (NodeId p : parts)
    {
        require(nodes_[p].value.rows() == rows, "tape hcat: row counts");
        cols += nodes_[p].value.cols();
    }
    Node n;
    n.op = Op::hcat;
    n.args = parts;
    n.value.resize(rows, cols);
    Index at = 0;
    for (NodeId p : parts)
    {
        n.value.middleCols(at, nodes_[p].value.cols()) = nodes_[p].value;
        at += nodes_[p].value.cols();
    }
    return push(std::move(n));
}

Tape::NodeId Tape::vcat(const std::vector<NodeId>& parts)
{
    require(!parts.empty(), "tape vcat: empty");
    Index cols = nodes_[parts[0]].value.cols();
    Index rows = 0;
    for (NodeId p : parts)
    {
        require(nodes_[p].value.cols() == cols, "tape vcat: column counts");
        rows += nodes_[p].value.rows();
    }
    Node n;
    n.op = Op::vcat;
    n.args = parts;
    n.value.resize(rows, cols);
    Index at = 0;
    for (NodeId p : parts)
    {
        n.value.middleRows(at, nodes_[p].value.rows()) = nodes_[p].value;
        at += nodes_[p].value.rows();
    }
    return push(std::move(n));
}

void Tape::set_parameter(NodeId id, const Matrix& value)
{
    require(nodes_[id].op == Op::parameter, "tape set_parameter: not a parameter node");
    require(nodes_[id].value.rows() == value.rows() && nodes_[id].value.cols() == value.cols(),
            "tape set_parameter: shape");
    nodes_[id].value = value;
}

const Matrix& Tape::value(NodeId id) const { return nodes_[id].value; }
const Matrix& Tape::adjoint(NodeId id) const { return nodes_[id].adjoint; }

void Tape::forward()
{
    for (Node& n : nodes_)
    {
        switch (n.op)
        {
        case Op::constant:
        case Op::parameter:
            break;
        case Op::add:
            n.value = nodes_[n.args[0]].value + nodes_[n.args[1]].value;
            break;
        case Op::sub:
            n.value = nodes_[n.args[0]].value - nodes_[n.args[1]].value;
            break;
        case Op::neg:
            n.value = -nodes_[n.args[0]].value;
            break;
        case Op::mul:
            n.value = nodes_[n.args[0]].value * nodes_[n.args[1]].value;
            break;
        case Op::scale:
            n.value = n.k * nodes_[n.args[0]].value;
            break;
        case Op::hcat:
        {
            Index at = 0;
            for (NodeId p : n.args)
            {
                n.value.middleCols(at, nodes_[p].value.cols()) = nodes_[p].value;
                at += nodes_[p].value.cols();
            }
            break;
        }
        case Op::vcat:
        {
            Index at = 0;
            for (NodeId p : n.args)
            {
                n.value.middleRows(at, nodes_[p].value.rows()) = nodes_[p].value;
                at += nodes_[p].value.rows();
            }
            break;
        }
        }
    }
}

void Tape::zero_adjoints()
{
    for (Node& n : nodes_)
        n.adjoint = Matrix::Zero(n.value.rows(), n.value.cols());
}

void Tape::seed_adjoint(NodeId id, const Matrix& adj)
{
    require(adj.rows() == nodes_[id].value.rows() && adj.cols() == nodes_[id].value.cols(),
            "tape seed_adjoint: shape");
    nodes_[id].adjoint += adj;
}

void Tape::backward()
{
    for (auto it = nodes_.rbegin(); it != nodes_.rend(); ++it)
    {
        Node& n = *it;
        if (n.adjoint.size() == 0 || n.adjoint.isZero(0.0))
            continue;
        switch (n.op)
        {
        case Op::constant:
        case Op::parameter:
            break;
        case Op::add:
            nodes_[n.args[0]].adjoint += n.adjoint;
            nodes_[n.args[1]].adjoint += n.adjoint;
            break;
        case Op::sub:
            nodes_[n.args[0]].adjoint += n.adjoint;
            nodes_[n.args[1]].adjoint -= n.adjoint;
            break;
        case Op::neg:
            nodes_[n.args[0]].adjoint -= n.adjoint;
            break;
        case Op::mul:
            nodes_[n.args[0]].adjoint += n.adjoint * nodes_[n.args[1]].value.transpose();
            nodes_[n.args[1]].adjoint += nodes_[n.args[0]].value.transpose() * n.adjoint;
            break;
        case Op::scale:
            nodes_[n.args[0]].adjoint += n.k * n.adjoint;
            break;
        case Op::hcat:
        {
            Index at = 0;
            for (NodeId p : n.args)
            {
                nodes_[p].adjoint += n.adjoint.middleCols(at, nodes_[p].value.cols());
                at += nodes_[p].value.cols();
            }
            break;
        }
        case Op::vcat:
        {
            Index at = 0;
            for (NodeId p : n.args)
            {
                nodes_[p].adjoint += n.adjoint.middleRows(at, nodes_[p].value.rows());
                at += nodes_[p].value.rows();
            }
            break;
        }
        }
    }
}

} // namespace hz
