#include "hzreach/apps.hpp"

#include <cmath>
#include <random>

namespace hz
{

// ---------------------------------------------------------------------------
// Benchmark scenario

Vector benchmark_target(const Vector& x)
{
    Vector y(2);
    y(0) = x(0) * x(0) + std::sin(x(1));
    y(1) = x(1) * x(1) + std::sin(x(0));
    return y;
}

BenchmarkScenario build_benchmark_scenario(const std::vector<Index>& hidden_widths,
                                           std::uint64_t seed)
{
    std::vector<Index> widths;
    widths.push_back(2);
    for (Index w : hidden_widths)
        widths.push_back(w);
    widths.push_back(2);

    BenchmarkScenario sc;
    sc.net = make_network(widths, seed);
    sc.Z = HybridZonotope::unit_box(2);
    sc.U = HybridZonotope::box(Vector::Constant(2, 1.5), Vector::Constant(2, 0.5));

    // Full-batch Adam on uniform samples of the target.
    std::mt19937_64 rng(seed ^ 0x94d049bb133111ebull);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    const int n_train = 1024, n_test = 256;
    std::vector<Vector> xs, ys, xst, yst;
    for (int i = 0; i < n_train + n_test; ++i)
    {
        Vector x(2);
        x << u(rng), u(rng);
        if (i < n_train)
        {
            xs.push_back(x);
            ys.push_back(benchmark_target(x));
        }
        else
        {
            xst.push_back(x);
            yst.push_back(benchmark_target(x));
        }
    }

    Vector theta = sc.net.flatten_parameters();
    AdamState state(theta.size());
    NetGrad grad(sc.net);
    for (int step = 0; step < 3000; ++step)
    {
        const double mse = mse_and_grad(sc.net, xs, ys, grad);
        if (mse < 5e-4)
            break;
        adam_step(theta, grad.flatten(), state, 0.01);
        sc.net.set_parameters(theta);
    }
    NetGrad unused(sc.net);
    sc.pretrain_mse = mse_and_grad(sc.net, xst, yst, unused);
    return sc;
}

// ---------------------------------------------------------------------------
// Forward invariance

AffineDynamics::AffineDynamics(Matrix C_in, Vector d_in) : C(std::move(C_in)), d(std::move(d_in))
{
    require(C.rows() == d.size(), "AffineDynamics: C rows vs d length");
}

FiProblem build_fi_problem(const AffineDynamics& dyn, const HybridZonotope& safe_set,
                           const HybridZonotope& workspace, double eps, const SolverOptions& opts)
{
    require(eps > 0.0, "build_fi_problem: eps must be positive");
    require(safe_set.dim() == workspace.dim(), "build_fi_problem: set dimensions");
    require(dyn.C.rows() == safe_set.dim(), "build_fi_problem: dynamics output dimension");

    FiProblem fp;
    fp.Z = safe_set;
    fp.U = set_difference(workspace, safe_set, opts);
    HybridZonotope grown = minkowski_sum(
        safe_set, HybridZonotope::box(Vector::Zero(safe_set.dim()),
                                      Vector::Constant(safe_set.dim(), eps)));
    fp.U_verify = set_difference(workspace, grown, opts);
    fp.M = dyn.C;
    fp.m = dyn.d;
    return fp;
}

HybridZonotope double_integrator_safe_set()
{
    Matrix Gc(2, 9);
    Gc << 0, -1, 0, 0, 0, -1, -0.75, 0, 0,
        -1, 1, 0, 0, 0, 1, 1.5, 0, 0;
    Matrix Gb(2, 1);
    Gb << 0.75, -1.5;
    Vector c(2);
    c << 1, -1;
    Matrix Ac(5, 9);
    Ac << 0, 0, 0, 0, 0, 1, 0, 1, 0,
        0, 0, 0, 0, 0, 0, 0.75, 0, 0.75,
        -1, 1, 1, 0, 0, 0, 0, 0, 0,
        0, 1, 0, 1, 0, 0, 0, 0, 0,
        1, -1, 0, 0, 1, 0, 0, 0, 0;
    Matrix Ab(5, 1);
    Ab << -1.5, -1, 0.75, 1, 0.25;
    Vector b(5);
    b << 0.5, 0.5, 0.75, 1, 0.25;
    return HybridZonotope(Gc, Gb, c, Ac, Ab, b);
}

AffineDynamics double_integrator_dynamics()
{
    Matrix C(2, 3);
    C << 1, 0.1, 0,
        0, 1, 0.1;
    return AffineDynamics(C, Vector::Zero(2));
}

ReluNetwork pretrain_linear_policy(const HybridZonotope& domain, const Matrix& K,
                                   const std::vector<Index>& hidden, std::uint64_t seed)
{
    std::vector<Index> widths;
    widths.push_back(domain.dim());
    for (Index w : hidden)
        widths.push_back(w);
    widths.push_back(K.rows());
    ReluNetwork net = make_network(widths, seed);

    const IntervalHull hull = generator_hull(domain);
    std::mt19937_64 rng(seed ^ 0xbf58476d1ce4e5b9ull);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::vector<Vector> xs, ys;
    for (int i = 0; i < 512; ++i)
    {
        Vector x(domain.dim());
        for (Index k = 0; k < x.size(); ++k)
            x(k) = hull.center(k) + hull.half(k) * u(rng);
        xs.push_back(x);
        ys.push_back(K * x);
    }

    Vector theta = net.flatten_parameters();
    AdamState state(theta.size());
    NetGrad grad(net);
    for (int step = 0; step < 4000; ++step)
    {
        const double mse = mse_and_grad(net, xs, ys, grad);
        if (mse < 1e-5)
            break;
        adam_step(theta, grad.flatten(), state, 0.01);
        net.set_parameters(theta);
    }
    return net;
}

// ---------------------------------------------------------------------------
// Reach-avoid

Vector synthetic_trajectory(const Vector& k, const Vector& s, double t)
{
    // Displacement from the start: polynomial in t with coefficients affine
    // in k, plus a bounded sinusoidal disturbance vanishing at t = 0.
    Vector x(2);
    x(0) = (1.6 + 0.3 * k(0)) * t + 0.03 * s(0) * std::sin(2.7 * t);
    x(1) = 0.9 * k(1) * t - 0.1 * k(0) * t * t + 0.03 * s(1) * std::sin(3.1 * t);
    return x;
}

Vector estimate_error_bound(
    const std::function<Vector(const Vector&, const Vector&, double)>& g_true,
    const ReluNetwork& traj_net, const IntervalHull& param_hull, double t_final, int samples,
    std::uint64_t seed)
{
    require(samples >= 1, "estimate_error_bound: need at least one sample");
    std::mt19937_64 rng(seed ^ 0x2545f4914f6cdd1dull);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, t_final);
    const Index nk = param_hull.center.size();
    Vector e = Vector::Zero(traj_net.output_dim());
    for (int i = 0; i < samples; ++i)
    {
        Vector k(nk);
        for (Index j = 0; j < nk; ++j)
            k(j) = param_hull.center(j) + param_hull.half(j) * u(rng);
        Vector s(2);
        s << u(rng), u(rng);
        const double t = ut(rng);
        Vector in(nk + 1);
        in << k, t;
        e = e.cwiseMax((forward_eval(traj_net, in) - g_true(k, s, t)).cwiseAbs());
    }
    return e;
}

namespace
{

// Lift a (k, t) network to (x0, k, t) inputs by zero-padding the first layer.
ReluNetwork lift_trajectory_net(const ReluNetwork& net, Index nx)
{
    std::vector<Matrix> W = net.weights;
    std::vector<Vector> w = net.biases;
    Matrix W1 = Matrix::Zero(W[0].rows(), nx + W[0].cols());
    W1.rightCols(W[0].cols()) = W[0];
    W[0] = W1;
    return ReluNetwork(std::move(W), std::move(w));
}

} // namespace

ReachAvoidProblem build_reach_avoid_problem(const ReachAvoidSpec& spec, int n_scaled,
                                            const SolverOptions& opts)
{
    const Index nx = spec.X0.dim();
    const Index nk = spec.K.dim();
    require(spec.policy.input_dim() == nx && spec.policy.output_dim() == nk,
            "reach_avoid: policy dimensions");
    require(spec.traj_net.input_dim() == nk + 1 && spec.traj_net.output_dim() == nx,
            "reach_avoid: trajectory model dimensions");
    require(spec.e.size() == nx && (spec.e.array() >= 0.0).all(),
            "reach_avoid: error bound must be nonnegative");

    // Unsafe set: obstacles inflated by body and model error, stamped with
    // the whole time interval; the goal complement inflated by model error,
    // stamped with the final time.
    const HybridZonotope T =
        HybridZonotope::interval(0.0, spec.t_final);
    const HybridZonotope E = HybridZonotope::box(Vector::Zero(nx), spec.e);
    const HybridZonotope B = HybridZonotope::box(Vector::Zero(nx), spec.body_half);

    require(!spec.obstacles.empty(), "reach_avoid: needs at least one obstacle");
    HybridZonotope inflated =
        minkowski_sum(minkowski_sum(spec.obstacles[0], B), E);
    for (size_t i = 1; i < spec.obstacles.size(); ++i)
        inflated = set_union(inflated, minkowski_sum(minkowski_sum(spec.obstacles[i], B), E));
    HybridZonotope U_t = cartesian_product(T, inflated);

    HybridZonotope goal_comp = set_difference(spec.workspace, spec.G, opts);
    HybridZonotope U_tf = cartesian_product(
        HybridZonotope::singleton(Vector::Constant(1, spec.t_final)),
        minkowski_sum(goal_comp, E));
    HybridZonotope U = set_union(U_t, U_tf);

    // Forward reachable tube pipeline.
    ReachAvoidProblem rap;
    CollisionPipeline& pipe = rap.cp.pipe;
    TapedSet X0t = pipe.lift(spec.X0);
    CollisionPipeline::NetNodes pol = pipe.add_network(spec.policy, true);
    TapedSet g1 = pipe.network_graph(X0t, pol, spec.radius); // {(x0, k)}
    TapedSet yk = pipe.product(g1, pipe.lift(T));            // {(x0, k, t)}
    CollisionPipeline::NetNodes traj =
        pipe.add_network(lift_trajectory_net(spec.traj_net, nx), false);
    TapedSet g2 = pipe.network_graph(yk, traj, spec.radius); // {(x0, k, t, disp)}

    // (t, x0 + disp)
    Matrix S = Matrix::Zero(1 + nx, nx + nk + 1 + nx);
    S(0, nx + nk) = 1.0;
    S.block(1, 0, nx, nx).setIdentity();
    S.block(1, nx + nk + 1, nx, nx).setIdentity();
    TapedSet frt = pipe.affine(S, Vector::Zero(1 + nx), g2);

    rap.cp.q = pipe.intersect_with(frt, Matrix::Identity(1 + nx, 1 + nx), Vector::Zero(1 + nx),
                                   pipe.lift(U));
    rap.cp.n_scaled = n_scaled;
    rap.cp.input_generators = spec.X0.num_gc();
    rap.U = U;
    require(n_scaled >= 0 && n_scaled <= spec.X0.num_gc(),
            "reach_avoid: n_scaled vs initial-set generators");
    return rap;
}

ReachAvoidSpec make_default_reach_avoid_spec(std::uint64_t seed)
{
    ReachAvoidSpec spec;
    spec.K = HybridZonotope::unit_box(2);
    spec.t_final = 1.0;
    spec.X0 = HybridZonotope::box(Vector::Zero(2), Vector::Constant(2, 0.1));
    spec.G = HybridZonotope::box(Vector{{1.6, -0.45}}, Vector{{0.4, 0.35}});
    spec.obstacles = {HybridZonotope::box(Vector{{0.8, 0.45}}, Vector{{0.12, 0.12}})};
    spec.workspace = HybridZonotope::box(Vector::Zero(2), Vector::Constant(2, 50.0));
    spec.body_half = Vector::Constant(2, 0.05);
    spec.radius = 40.0;

    // Trajectory model: (k, t) -> displacement, four hidden layers of six.
    std::mt19937_64 rng(seed ^ 0x9e3779b97f4a7c15ull);
    std::uniform_real_distribution<double> u(-1.0, 1.0);
    std::uniform_real_distribution<double> ut(0.0, spec.t_final);
    ReluNetwork traj = make_network({3, 6, 6, 6, 6, 2}, seed + 1);
    {
        std::vector<Vector> xs, ys;
        for (int i = 0; i < 3000; ++i)
        {
            Vector k(2), s(2);
            k << 1.25 * u(rng), 1.25 * u(rng); // cover beyond K for policy drift
            s << u(rng), u(rng);
            const double t = ut(rng);
            Vector in(3);
            in << k, t;
            xs.push_back(in);
            ys.push_back(synthetic_trajectory(k, s, t));
        }
        Vector theta = traj.flatten_parameters();
        AdamState st(theta.size());
        NetGrad grad(traj);
        for (int step = 0; step < 6000; ++step)
        {
            const double mse = mse_and_grad(traj, xs, ys, grad);
            if (mse < 2e-4)
                break;
            adam_step(theta, grad.flatten(), st, 0.01);
            traj.set_parameters(theta);
        }
    }
    spec.traj_net = traj;

    // Model error over the padded parameter hull (policies may drift outside
    // the nominal box a little).
    IntervalHull padded;
    padded.center = Vector::Zero(2);
    padded.half = Vector::Constant(2, 1.25);
    spec.e = estimate_error_bound(synthetic_trajectory, spec.traj_net, padded, spec.t_final,
                                  4000, seed + 2);

    // Policy pretrained toward a colliding straight shot.
    ReluNetwork pol = make_network({2, 20, 2}, seed + 3);
    {
        Vector bad(2);
        bad << 0.0, 0.55;
        std::vector<Vector> xs, ys;
        for (int i = 0; i < 256; ++i)
        {
            Vector x(2);
            x << 0.1 * u(rng), 0.1 * u(rng);
            xs.push_back(x);
            ys.push_back(bad);
        }
        Vector theta = pol.flatten_parameters();
        AdamState st(theta.size());
        NetGrad grad(pol);
        for (int step = 0; step < 3000; ++step)
        {
            const double mse = mse_and_grad(pol, xs, ys, grad);
            if (mse < 1e-6)
                break;
            adam_step(theta, grad.flatten(), st, 0.01);
            pol.set_parameters(theta);
        }
    }
    spec.policy = pol;
    return spec;
}

} // namespace hz
