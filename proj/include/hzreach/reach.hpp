#ifndef HZREACH_REACH_HPP_
#define HZREACH_REACH_HPP_

#include "hzreach/hybzono.hpp"
#include "hzreach/network.hpp"
#include "hzreach/scaled.hpp"

namespace hz
{

/// Graph of the n-dimensional ReLU over the box [-radius, radius]^n as a
/// hybrid zonotope in R^{2n}: {(x, max(x,0))}. Kronecker-structured layout,
/// 4n continuous generators, n binaries, 2n constraints.
HybridZonotope relu_graph_hz(Index n, double radius);

struct ReachResult
{
    HybridZonotope graph; // {(x0, xi(x0)) : x0 in Z}  in R^{n0+nd}
    HybridZonotope image; // {xi(x0) : x0 in Z}        in R^{nd}
    Matrix graph_map;     // final affine selection applied to the lifted set
    Vector graph_offset;
    Index input_generators = 0; // n_{g,Z}: leading continuous columns owned by Z
    bool radius_warning = false;
    double max_preactivation = 0.0; // largest |v| over the sampled soundness check
};

/// Exact image/graph of Z through the network. The lifted set is the product
/// of Z with one ReLU-graph block per hidden layer, cut by one hyperplane
/// bundle per layer, then mapped to (input, output) coordinates. Z's
/// continuous coefficients stay in the leading columns, which downstream
/// scaling relies on.
/// radius must cover every hidden pre-activation over Z; a sampled check on
/// the interval hull flags violations of 90% of radius via radius_warning.
ReachResult reach(const ReluNetwork& net, const HybridZonotope& Z, double radius,
                  int soundness_samples = 10000, std::uint64_t seed = 0);

struct ScaledReachResult
{
    ScaledHybridZonotope graph;
    ScaledHybridZonotope image;
};

/// Scaled image/graph by reusing a precomputed reach: only the bound changes,
/// no set reconstruction.
ScaledReachResult reach_scaled(const ReachResult& pre, double r, int n_scaled);

} // namespace hz

#endif
