#include "hzreach/reach.hpp"

#include <cmath>
#include <random>

namespace hz
{

HybridZonotope relu_graph_hz(Index n, double radius)
{
    require(n >= 1, "relu_graph_hz: dimension must be >= 1");
    if (!(radius > 0.0))
        throw DimensionError("relu_graph_hz: radius must be positive");

    const double ah = 0.5 * radius;
    Matrix Gc = Matrix::Zero(2 * n, 4 * n);
    Matrix Gb = Matrix::Zero(2 * n, n);
    Vector c = Vector::Constant(2 * n, ah);
    Matrix Ac = Matrix::Zero(2 * n, 4 * n);
    Matrix Ab = Matrix::Zero(2 * n, n);
    Vector b = Vector::Ones(2 * n);

    for (Index j = 0; j < n; ++j)
    {
        // x_j = -a/2 z1 - a/2 z2 - a/2 w_j + a/2,  y_j = -a/2 z2 + a/2
        Gc(j, 4 * j) = -ah;
        Gc(j, 4 * j + 1) = -ah;
        Gc(n + j, 4 * j + 1) = -ah;
        Gb(j, j) = -ah;

        // z1 + z3 + w = 1,  z2 + z4 - w = 1
        Ac(2 * j, 4 * j) = 1.0;
        Ac(2 * j, 4 * j + 2) = 1.0;
        Ab(2 * j, j) = 1.0;
        Ac(2 * j + 1, 4 * j + 1) = 1.0;
        Ac(2 * j + 1, 4 * j + 3) = 1.0;
        Ab(2 * j + 1, j) = -1.0;
    }
    return HybridZonotope(Gc, Gb, c, Ac, Ab, b);
}

namespace
{

// Selection matrix picking [offset, offset+count) out of width coordinates.
Matrix selector(Index width, Index offset, Index count)
{
    Matrix R = Matrix::Zero(count, width);
    R.block(0, offset, count, count).setIdentity();
    return R;
}

} // namespace

ReachResult reach(const ReluNetwork& net, const HybridZonotope& Z, double radius,
                  int soundness_samples, std::uint64_t seed)
{
    require(Z.dim() == net.input_dim(), "reach: set dim (" + std::to_string(Z.dim()) +
                                            ") vs network input (" +
                                            std::to_string(net.input_dim()) + ")");
    if (!(radius > 0.0))
        throw DimensionError("reach: radius must be positive");

    const int d = net.depth();
    const std::vector<Index> widths = net.widths();
    const Index n0 = widths[0];
    Index lifted = n0;
    for (int i = 1; i < d; ++i)
        lifted += 2 * widths[static_cast<size_t>(i)];

    // Product of Z with one ReLU-graph block per hidden layer.
    HybridZonotope Y = Z;
    for (int i = 1; i < d; ++i)
        Y = cartesian_product(Y, relu_graph_hz(widths[static_cast<size_t>(i)], radius));

    // One hyperplane bundle per hidden layer ties each block's first half to
    // the previous layer's activations.
    Index offset = n0;
    Index prev_offset = 0; // activations of layer i-1 live here
    for (int i = 1; i < d; ++i)
    {
        const Index ni = widths[static_cast<size_t>(i)];
        const Index nprev = widths[static_cast<size_t>(i) - 1];
        const Matrix Rv = selector(lifted, offset, ni);
        const Matrix Rx_prev =
            (i == 1) ? selector(lifted, 0, n0) : selector(lifted, prev_offset, nprev);
        const Matrix H = Rv - net.weights[static_cast<size_t>(i) - 1] * Rx_prev;
        Y = intersect_hyperplane(Y, Hyperplane(H, net.biases[static_cast<size_t>(i) - 1]));
        prev_offset = offset + ni; // activations are the block's second half
        offset += 2 * ni;
    }

    // Map the lifted set onto (input, output).
    const Index nd = widths[static_cast<size_t>(d)];
    const Matrix Rx_last =
        (d == 1) ? selector(lifted, 0, n0) : selector(lifted, prev_offset, widths[static_cast<size_t>(d) - 1]);
    Matrix M(n0 + nd, lifted);
    M << selector(lifted, 0, n0), net.weights[static_cast<size_t>(d) - 1] * Rx_last;
    Vector m(n0 + nd);
    m << Vector::Zero(n0), net.biases[static_cast<size_t>(d) - 1];

    ReachResult out;
    out.graph = affine_map(M, m, Y);
    Matrix Pimg = Matrix::Zero(nd, n0 + nd);
    Pimg.rightCols(nd).setIdentity();
    out.image = affine_map(Pimg, Vector::Zero(nd), out.graph);
    out.graph_map = M;
    out.graph_offset = m;
    out.input_generators = Z.num_gc();

    // Sampled soundness check over the interval hull of Z (a superset, so a
    // clean pass is conservative).
    if (soundness_samples > 0 && d > 1)
    {
        const IntervalHull hull = generator_hull(Z);
        std::mt19937_64 rng(seed ^ 0xa0761d6478bd642full);
        std::uniform_real_distribution<double> u(-1.0, 1.0);
        double worst = 0.0;
        for (int s = 0; s < soundness_samples; ++s)
        {
            Vector x(Z.dim());
            for (Index k = 0; k < Z.dim(); ++k)
                x(k) = hull.center(k) + hull.half(k) * u(rng);
            for (const Vector& v : hidden_preactivations(net, x))
                worst = std::max(worst, v.cwiseAbs().maxCoeff());
        }
        out.max_preactivation = worst;
        out.radius_warning = worst > 0.9 * radius;
    }
    return out;
}

ScaledReachResult reach_scaled(const ReachResult& pre, double r, int n_scaled)
{
    if (n_scaled < 0 || n_scaled > pre.input_generators)
        throw DimensionError("reach_scaled: n_scaled exceeds the input set's generator count");
    return ScaledReachResult{scale(pre.graph, r, n_scaled), scale(pre.image, r, n_scaled)};
}

} // namespace hz
