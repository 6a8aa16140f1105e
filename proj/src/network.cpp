#include "hzreach/network.hpp"

#include <cmath>
#include <random>

namespace hz
{

ReluNetwork::ReluNetwork(std::vector<Matrix> W, std::vector<Vector> w)
    : weights(std::move(W)), biases(std::move(w))
{
    require(!weights.empty(), "network: depth must be >= 1");
    require(weights.size() == biases.size(), "network: weight/bias layer counts");
    for (size_t i = 0; i < weights.size(); ++i)
    {
        require(weights[i].rows() == biases[i].size(),
                "network: layer " + std::to_string(i + 1) + " bias length");
        if (i > 0)
            require(weights[i].cols() == weights[i - 1].rows(),
                    "network: layer " + std::to_string(i + 1) + " input width");
    }
}

std::vector<Index> ReluNetwork::widths() const
{
    std::vector<Index> w;
    w.push_back(input_dim());
    for (const auto& W : weights)
        w.push_back(W.rows());
    return w;
}

Index ReluNetwork::neuron_count() const
{
    Index n = 0;
    for (size_t i = 0; i + 1 < weights.size(); ++i)
        n += weights[i].rows();
    return n;
}

Index ReluNetwork::parameter_count() const
{
    Index n = 0;
    for (size_t i = 0; i < weights.size(); ++i)
        n += weights[i].size() + biases[i].size();
    return n;
}

Vector ReluNetwork::flatten_parameters() const
{
    Vector theta(parameter_count());
    Index at = 0;
    for (size_t i = 0; i < weights.size(); ++i)
    {
        for (Index cI = 0; cI < weights[i].cols(); ++cI)
            for (Index rI = 0; rI < weights[i].rows(); ++rI)
                theta(at++) = weights[i](rI, cI);
        theta.segment(at, biases[i].size()) = biases[i];
        at += biases[i].size();
    }
    return theta;
}

void ReluNetwork::set_parameters(const Vector& theta)
{
    require(theta.size() == parameter_count(), "set_parameters: length");
    Index at = 0;
    for (size_t i = 0; i < weights.size(); ++i)
    {
        for (Index cI = 0; cI < weights[i].cols(); ++cI)
            for (Index rI = 0; rI < weights[i].rows(); ++rI)
                weights[i](rI, cI) = theta(at++);
        biases[i] = theta.segment(at, biases[i].size());
        at += biases[i].size();
    }
}

ReluNetwork make_network(const std::vector<Index>& widths, std::uint64_t seed)
{
    require(widths.size() >= 2, "make_network: need at least input and output widths");
    std::mt19937_64 rng(seed ^ 0xd1b54a32d192ed03ull);
    std::normal_distribution<double> gauss(0.0, 1.0);
    std::vector<Matrix> W;
    std::vector<Vector> w;
    for (size_t i = 0; i + 1 < widths.size(); ++i)
    {
        const double sigma = std::sqrt(2.0 / static_cast<double>(widths[i]));
        Matrix Wi(widths[i + 1], widths[i]);
        for (Index cI = 0; cI < Wi.cols(); ++cI)
            for (Index rI = 0; rI < Wi.rows(); ++rI)
                Wi(rI, cI) = sigma * gauss(rng);
        W.push_back(Wi);
        w.push_back(Vector::Zero(widths[i + 1]));
    }
    return ReluNetwork(std::move(W), std::move(w));
}

Vector forward_eval(const ReluNetwork& net, const Vector& x0)
{
    require(x0.size() == net.input_dim(), "forward_eval: input dim (" +
                                              std::to_string(x0.size()) + ") vs network (" +
                                              std::to_string(net.input_dim()) + ")");
    Vector x = x0;
    const int d = net.depth();
    for (int i = 0; i < d; ++i)
    {
        Vector v = net.weights[static_cast<size_t>(i)] * x + net.biases[static_cast<size_t>(i)];
        x = (i + 1 < d) ? v.cwiseMax(0.0) : v;
    }
    return x;
}

std::vector<Vector> hidden_preactivations(const ReluNetwork& net, const Vector& x0)
{
    std::vector<Vector> vs;
    Vector x = x0;
    const int d = net.depth();
    for (int i = 0; i + 1 < d; ++i)
    {
        Vector v = net.weights[static_cast<size_t>(i)] * x + net.biases[static_cast<size_t>(i)];
        vs.push_back(v);
        x = v.cwiseMax(0.0);
    }
    return vs;
}

NetGrad::NetGrad(const ReluNetwork& net)
{
    for (size_t i = 0; i < net.weights.size(); ++i)
    {
        dW.push_back(Matrix::Zero(net.weights[i].rows(), net.weights[i].cols()));
        db.push_back(Vector::Zero(net.biases[i].size()));
    }
}

Vector NetGrad::flatten() const
{
    Index n = 0;
    for (size_t i = 0; i < dW.size(); ++i)
        n += dW[i].size() + db[i].size();
    Vector g(n);
    Index at = 0;
    for (size_t i = 0; i < dW.size(); ++i)
    {
        for (Index cI = 0; cI < dW[i].cols(); ++cI)
            for (Index rI = 0; rI < dW[i].rows(); ++rI)
                g(at++) = dW[i](rI, cI);
        g.segment(at, db[i].size()) = db[i];
        at += db[i].size();
    }
    return g;
}

double mse_and_grad(const ReluNetwork& net, const std::vector<Vector>& xs,
                    const std::vector<Vector>& ys, NetGrad& grad)
{
    require(xs.size() == ys.size() && !xs.empty(), "mse_and_grad: batch sizes");
    const int d = net.depth();
    const double inv = 1.0 / static_cast<double>(xs.size());
    double loss = 0.0;

    for (size_t i = 0; i < grad.dW.size(); ++i)
    {
        grad.dW[i].setZero();
        grad.db[i].setZero();
    }

    std::vector<Vector> acts(static_cast<size_t>(d) + 1);
    std::vector<Vector> pre(static_cast<size_t>(d));
    for (size_t s = 0; s < xs.size(); ++s)
    {
        acts[0] = xs[s];
        for (int i = 0; i < d; ++i)
        {
            pre[static_cast<size_t>(i)] =
                net.weights[static_cast<size_t>(i)] * acts[static_cast<size_t>(i)] +
                net.biases[static_cast<size_t>(i)];
            acts[static_cast<size_t>(i) + 1] = (i + 1 < d)
                                                   ? pre[static_cast<size_t>(i)].cwiseMax(0.0)
                                                   : pre[static_cast<size_t>(i)];
        }
        const Vector err = acts[static_cast<size_t>(d)] - ys[s];
        loss += inv * err.squaredNorm() / static_cast<double>(err.size());

        Vector delta = (2.0 * inv / static_cast<double>(err.size())) * err;
        for (int i = d - 1; i >= 0; --i)
        {
            grad.dW[static_cast<size_t>(i)] += delta * acts[static_cast<size_t>(i)].transpose();
            grad.db[static_cast<size_t>(i)] += delta;
            if (i > 0)
            {
                delta = net.weights[static_cast<size_t>(i)].transpose() * delta;
                for (Index k = 0; k < delta.size(); ++k)
                    if (pre[static_cast<size_t>(i) - 1](k) <= 0.0)
                        delta(k) = 0.0;
            }
        }
    }
    return loss;
}

} // namespace hz
