#ifndef HZREACH_NETWORK_HPP_
#define HZREACH_NETWORK_HPP_

#include "hzreach/types.hpp"

#include <cstdint>
#include <vector>

namespace hz
{

/// Fully-connected ReLU network: hidden layers apply max(.,0) elementwise,
/// the final layer is affine.
struct ReluNetwork
{
    std::vector<Matrix> weights; // W_1..W_d
    std::vector<Vector> biases;  // w_1..w_d

    ReluNetwork() = default;
    ReluNetwork(std::vector<Matrix> W, std::vector<Vector> w);

    int depth() const { return static_cast<int>(weights.size()); }
    Index input_dim() const { return weights.front().cols(); }
    Index output_dim() const { return weights.back().rows(); }
    std::vector<Index> widths() const; // n_0..n_d
    Index neuron_count() const;        // n_1 + ... + n_{d-1}

    Index parameter_count() const;
    Vector flatten_parameters() const;
    void set_parameters(const Vector& theta);
};

/// He-style random initialization, deterministic in the seed.
ReluNetwork make_network(const std::vector<Index>& widths, std::uint64_t seed);

Vector forward_eval(const ReluNetwork& net, const Vector& x0);

/// Hidden pre-activations v_1..v_{d-1} for one input (soundness checks).
std::vector<Vector> hidden_preactivations(const ReluNetwork& net, const Vector& x0);

struct NetGrad
{
    std::vector<Matrix> dW;
    std::vector<Vector> db;

    explicit NetGrad(const ReluNetwork& net);
    Vector flatten() const;
};

/// Mean squared error over a batch plus its parameter gradient.
double mse_and_grad(const ReluNetwork& net, const std::vector<Vector>& xs,
                    const std::vector<Vector>& ys, NetGrad& grad);

} // namespace hz

#endif
