#include "hzreach/collision.hpp"

#include <chrono>
#include <cmath>

namespace hz
{

namespace
{

Matrix selector(Index width, Index offset, Index count)
{
    Matrix R = Matrix::Zero(count, width);
    R.block(0, offset, count, count).setIdentity();
    return R;
}

} // namespace

TapedSet CollisionPipeline::lift(const HybridZonotope& S)
{
    TapedSet t;
    t.Gc = tape_.constant(S.Gc());
    t.Gb = tape_.constant(S.Gb());
    t.c = tape_.constant(S.c());
    t.Ac = tape_.constant(S.Ac());
    t.Ab = tape_.constant(S.Ab());
    t.b = tape_.constant(S.b());
    return t;
}

CollisionPipeline::NetNodes CollisionPipeline::add_network(const ReluNetwork& net, bool trainable)
{
    NetNodes nn;
    nn.widths = net.widths();
    nn.trainable = trainable;
    for (size_t i = 0; i < net.weights.size(); ++i)
    {
        Tape::NodeId W =
            trainable ? tape_.parameter(net.weights[i]) : tape_.constant(net.weights[i]);
        Tape::NodeId w = trainable ? tape_.parameter(net.biases[i]) : tape_.constant(net.biases[i]);
        nn.W.push_back(W);
        nn.w.push_back(w);
        if (trainable)
        {
            train_W_.push_back(W);
            train_w_.push_back(w);
        }
    }
    return nn;
}

TapedSet CollisionPipeline::product(const TapedSet& A, const TapedSet& B)
{
    // Note: pushing nodes invalidates references into the tape, so only
    // copied dimensions are kept here.
    const Index nA = tape_.value(A.c).rows(), nB = tape_.value(B.c).rows();
    const Index gA = tape_.value(A.Gc).cols(), gB = tape_.value(B.Gc).cols();
    const Index bA = tape_.value(A.Gb).cols(), bB = tape_.value(B.Gb).cols();
    const Index cA = tape_.value(A.Ac).rows(), cB = tape_.value(B.Ac).rows();

    auto z = [&](Index r, Index c) { return tape_.constant(Matrix::Zero(r, c)); };

    TapedSet t;
    t.Gc = tape_.vcat({tape_.hcat({A.Gc, z(nA, gB)}), tape_.hcat({z(nB, gA), B.Gc})});
    t.Gb = tape_.vcat({tape_.hcat({A.Gb, z(nA, bB)}), tape_.hcat({z(nB, bA), B.Gb})});
    t.c = tape_.vcat({A.c, B.c});
    t.Ac = tape_.vcat({tape_.hcat({A.Ac, z(cA, gB)}), tape_.hcat({z(cB, gA), B.Ac})});
    t.Ab = tape_.vcat({tape_.hcat({A.Ab, z(cA, bB)}), tape_.hcat({z(cB, bA), B.Ab})});
    t.b = tape_.vcat({A.b, B.b});
    return t;
}

TapedSet CollisionPipeline::affine(const Matrix& M, const Vector& m, const TapedSet& A)
{
    Tape::NodeId Mn = tape_.constant(M);
    Tape::NodeId mn = tape_.constant(m);
    TapedSet t;
    t.Gc = tape_.mul(Mn, A.Gc);
    t.Gb = tape_.mul(Mn, A.Gb);
    t.c = tape_.add(tape_.mul(Mn, A.c), mn);
    t.Ac = A.Ac;
    t.Ab = A.Ab;
    t.b = A.b;
    return t;
}

TapedSet CollisionPipeline::intersect_with(const TapedSet& A, const Matrix& M, const Vector& m,
                                           const TapedSet& B)
{
    const Index gA = tape_.value(A.Gc).cols();
    const Index gB = tape_.value(B.Gc).cols();
    const Index bA = tape_.value(A.Gb).cols();
    const Index bB = tape_.value(B.Gb).cols();
    const Index cA = tape_.value(A.Ac).rows();
    const Index cB = tape_.value(B.Ac).rows();
    const Index k = tape_.value(B.c).rows();
    const Index n = tape_.value(A.c).rows();
    require(M.rows() == k && M.cols() == n && m.size() == k,
            "intersect_with: map shape vs operand dims");

    auto z = [&](Index r, Index c) { return tape_.constant(Matrix::Zero(r, c)); };
    Tape::NodeId Mn = tape_.constant(M);
    Tape::NodeId mn = tape_.constant(m);

    TapedSet t;
    t.Gc = tape_.hcat({A.Gc, z(n, gB)});
    t.Gb = tape_.hcat({A.Gb, z(n, bB)});
    t.c = A.c;
    t.Ac = tape_.vcat({tape_.hcat({A.Ac, z(cA, gB)}), tape_.hcat({z(cB, gA), B.Ac}),
                       tape_.hcat({tape_.mul(Mn, A.Gc), tape_.neg(B.Gc)})});
    t.Ab = tape_.vcat({tape_.hcat({A.Ab, z(cA, bB)}), tape_.hcat({z(cB, bA), B.Ab}),
                       tape_.hcat({tape_.mul(Mn, A.Gb), tape_.neg(B.Gb)})});
    t.b = tape_.vcat({A.b, B.b, tape_.sub(B.c, tape_.add(tape_.mul(Mn, A.c), mn))});
    return t;
}

TapedSet CollisionPipeline::network_graph(const TapedSet& Z, const NetNodes& nn, double radius)
{
    const int d = static_cast<int>(nn.W.size());
    const std::vector<Index>& widths = nn.widths;
    const Index n0 = widths[0];
    require(tape_.value(Z.c).rows() == n0, "network_graph: set dim vs network input");

    Index lifted = n0;
    for (int i = 1; i < d; ++i)
        lifted += 2 * widths[static_cast<size_t>(i)];

    TapedSet Y = Z;
    for (int i = 1; i < d; ++i)
        Y = product(Y, lift(relu_graph_hz(widths[static_cast<size_t>(i)], radius)));

    Index offset = n0;
    Index prev_offset = 0;
    for (int i = 1; i < d; ++i)
    {
        const Index ni = widths[static_cast<size_t>(i)];
        const Index nprev = widths[static_cast<size_t>(i) - 1];
        Tape::NodeId Rv = tape_.constant(selector(lifted, offset, ni));
        Tape::NodeId Rx =
            tape_.constant((i == 1) ? selector(lifted, 0, n0) : selector(lifted, prev_offset, nprev));
        Tape::NodeId H = tape_.sub(Rv, tape_.mul(nn.W[static_cast<size_t>(i) - 1], Rx));
        // Append hyperplane rows H x = w_i.
        TapedSet cut;
        cut.Gc = Y.Gc;
        cut.Gb = Y.Gb;
        cut.c = Y.c;
        cut.Ac = tape_.vcat({Y.Ac, tape_.mul(H, Y.Gc)});
        cut.Ab = tape_.vcat({Y.Ab, tape_.mul(H, Y.Gb)});
        cut.b = tape_.vcat(
            {Y.b, tape_.sub(nn.w[static_cast<size_t>(i) - 1], tape_.mul(H, Y.c))});
        Y = cut;
        prev_offset = offset + ni;
        offset += 2 * ni;
    }

    const Index nd = widths[static_cast<size_t>(d)];
    Tape::NodeId Rx0 = tape_.constant(selector(lifted, 0, n0));
    Tape::NodeId RxLast = tape_.constant(
        (d == 1) ? selector(lifted, 0, n0)
                 : selector(lifted, prev_offset, widths[static_cast<size_t>(d) - 1]));
    Tape::NodeId Mtop = Rx0;
    Tape::NodeId Mbot = tape_.mul(nn.W[static_cast<size_t>(d) - 1], RxLast);
    Tape::NodeId M = tape_.vcat({Mtop, Mbot});
    Tape::NodeId m =
        tape_.vcat({tape_.constant(Matrix::Zero(n0, 1)), nn.w[static_cast<size_t>(d) - 1]});

    TapedSet g;
    g.Gc = tape_.mul(M, Y.Gc);
    g.Gb = tape_.mul(M, Y.Gb);
    g.c = tape_.add(tape_.mul(M, Y.c), m);
    g.Ac = Y.Ac;
    g.Ab = Y.Ab;
    g.b = Y.b;
    (void)nd;
    return g;
}

HybridZonotope CollisionPipeline::materialize(const TapedSet& S) const
{
    return HybridZonotope(tape_.value(S.Gc), tape_.value(S.Gb), tape_.value(S.c).col(0),
                          tape_.value(S.Ac), tape_.value(S.Ab), tape_.value(S.b).col(0));
}

void CollisionProblem::set_parameters(const ReluNetwork& net)
{
    const auto& Wn = pipe.trainable_weights();
    const auto& wn = pipe.trainable_biases();
    require(Wn.size() == net.weights.size(), "set_parameters: layer count");
    for (size_t i = 0; i < Wn.size(); ++i)
    {
        pipe.tape().set_parameter(Wn[i], net.weights[i]);
        pipe.tape().set_parameter(wn[i], net.biases[i]);
    }
    pipe.tape().forward();
}

CollisionProblem build_collision(const ReluNetwork& net, const HybridZonotope& Z,
                                 const HybridZonotope& U, double radius, int n_scaled)
{
    const Index n0 = net.input_dim();
    const Index nd = net.output_dim();
    Matrix M = Matrix::Zero(nd, n0 + nd);
    M.rightCols(nd).setIdentity();
    return build_collision(net, Z, U, M, Vector::Zero(nd), radius, n_scaled);
}

CollisionProblem build_collision(const ReluNetwork& net, const HybridZonotope& Z,
                                 const HybridZonotope& U, const Matrix& M, const Vector& m,
                                 double radius, int n_scaled)
{
    require(M.cols() == net.input_dim() + net.output_dim(),
            "build_collision: output map columns vs graph dimension");
    require(M.rows() == U.dim() && m.size() == U.dim(),
            "build_collision: output map rows vs dim(U)");
    require(n_scaled >= 0 && n_scaled <= Z.num_gc(),
            "build_collision: n_scaled vs input generators");

    CollisionProblem cp;
    TapedSet Zt = cp.pipe.lift(Z);
    CollisionPipeline::NetNodes nn = cp.pipe.add_network(net, true);
    TapedSet graph = cp.pipe.network_graph(Zt, nn, radius);

    // Keep the input coordinates alongside the mapped output.
    const Index n0 = net.input_dim();
    Matrix Maug = Matrix::Zero(n0 + U.dim(), M.cols());
    Maug.topLeftCorner(n0, n0).setIdentity();
    Maug.bottomRows(U.dim()) = M;
    Vector maug = Vector::Zero(n0 + U.dim());
    maug.tail(U.dim()) = m;
    TapedSet aug = cp.pipe.affine(Maug, maug, graph);

    // Vacuous box over the input coordinates (generous hull) times U; the
    // intersection then constrains only the output coordinates.
    const IntervalHull hull = generator_hull(Z);
    HybridZonotope box =
        HybridZonotope::box(hull.center, hull.half * 1.5 + Vector::Ones(hull.half.size()));
    TapedSet boxU = cp.pipe.product(cp.pipe.lift(box), cp.pipe.lift(U));

    const Index qdim = n0 + U.dim();
    cp.q = cp.pipe.intersect_with(aug, Matrix::Identity(qdim, qdim), Vector::Zero(qdim), boxU);
    cp.n_scaled = n_scaled;
    cp.input_generators = Z.num_gc();
    return cp;
}

double exact_min_scale(const CollisionProblem& cp, const SolverOptions& opts)
{
    MilpProblem p =
        MilpProblem::min_scale_problem(cp.Acq(), cp.Abq(), cp.bq(), cp.n_scaled);
    MilpResult r = milp_solve(p, opts);
    if (r.status == MilpStatus::optimal)
        return r.value;
    return std::numeric_limits<double>::infinity();
}

bool collision_empty(const CollisionProblem& cp, const SolverOptions& opts)
{
    const Index ng = cp.Acq().cols();
    MilpProblem p = MilpProblem::feasibility_problem(cp.Acq(), cp.Abq(), cp.bq(),
                                                     Vector::Constant(ng, -1.0),
                                                     Vector::Constant(ng, 1.0));
    return !milp_feasible(p, opts);
}

SurrogateResult surrogate_min_scale(const CollisionProblem& cp, double mu,
                                    const SolverOptions& opts)
{
    if (!(mu > 0.0))
        throw SolverError(SolverError::Kind::numerical, "surrogate_min_scale: mu must be > 0");

    const Matrix& Ac = cp.Acq();
    const Matrix& Ab = cp.Abq();
    const Vector b = cp.bq();
    const Index ng = Ac.cols();
    const Index nb = Ab.cols();
    const Index nc = Ac.rows();
    const Index nr = cp.n_scaled;
    const Index n3 = ng - nr;

    SurrogateResult out;
    out.col_u = 0;
    out.col_v = nr;
    out.col_z3 = 2 * nr;
    out.col_zb = 2 * nr + n3;
    out.col_r = 2 * nr + n3 + nb;
    const Index col_s3 = out.col_r + 1;
    const Index col_s4 = col_s3 + n3;
    const Index N = col_s4 + nb;
    const Index rows = nc + nr + n3 + nb;
    out.n_eq = nc;

    Matrix A = Matrix::Zero(rows, N);
    Vector bstd = Vector::Zero(rows);
    Vector cstd = Vector::Zero(N);
    cstd(out.col_r) = 1.0;

    const Matrix Ac1 = Ac.leftCols(nr);
    const Matrix Ac3 = Ac.rightCols(n3);

    // Equality block with z(1:nr) = (v - u)/2, z(nr+1:) = 2 z3 - 1, zb = 2 t - 1.
    A.block(0, out.col_u, nc, nr) = -0.5 * Ac1;
    A.block(0, out.col_v, nc, nr) = 0.5 * Ac1;
    A.block(0, out.col_z3, nc, n3) = 2.0 * Ac3;
    A.block(0, out.col_zb, nc, nb) = 2.0 * Ab;
    bstd.head(nc) = b + Ac3 * Vector::Ones(n3) + Ab * Vector::Ones(nb);

    Index row = nc;
    for (Index i = 0; i < nr; ++i)
    {
        A(row, out.col_u + i) = 1.0;
        A(row, out.col_v + i) = 1.0;
        A(row, out.col_r) = -2.0;
        ++row;
    }
    for (Index i = 0; i < n3; ++i)
    {
        A(row, out.col_z3 + i) = 1.0;
        A(row, col_s3 + i) = 1.0;
        bstd(row) = 1.0;
        ++row;
    }
    for (Index j = 0; j < nb; ++j)
    {
        A(row, out.col_zb + j) = 1.0;
        A(row, col_s4 + j) = 1.0;
        bstd(row) = 1.0;
        ++row;
    }

    out.std_lp = StandardFormLp{A, bstd, cstd, mu};
    try
    {
        out.lp = lp_solve_barrier(out.std_lp, opts);
    }
    catch (const SolverError& e)
    {
        if (e.kind() == SolverError::Kind::infeasible)
        {
            out.feasible = false;
            return out;
        }
        throw;
    }
    out.feasible = true;
    out.rtilde = out.lp.x(out.col_r);
    return out;
}

LossValue loss_and_grad(CollisionProblem& cp, double mu, const SolverOptions& opts,
                        bool include_exact)
{
    LossValue lv;
    const auto t0 = std::chrono::steady_clock::now();
    SurrogateResult sr = surrogate_min_scale(cp, mu, opts);
    lv.t_solve_ms =
        std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
    if (!sr.feasible)
    {
        // Empty at every scale: training has nothing left to push on.
        lv.structurally_empty = true;
        lv.surrogate_loss = -1.0;
        lv.rtilde = std::numeric_limits<double>::infinity();
        Index nparam = 0;
        for (Tape::NodeId id : cp.pipe.trainable_weights())
            nparam += cp.pipe.tape().value(id).size();
        for (Tape::NodeId id : cp.pipe.trainable_biases())
            nparam += cp.pipe.tape().value(id).size();
        lv.grad = Vector::Zero(nparam);
        if (include_exact)
        {
            lv.exact_scale = exact_min_scale(cp, opts);
            lv.exact_loss = 1.0 - lv.exact_scale;
        }
        return lv;
    }

    lv.rtilde = sr.rtilde;
    lv.surrogate_loss = 1.0 - sr.rtilde;
    lv.lp = sr.lp;

    // d(rtilde)/d(standard-form data): the objective is c'x with c = e_r.
    LpGradients g = kkt_gradients(sr.lp, sr.std_lp, opts);

    // Pull the standard-form sensitivities back onto (Ac, Ab, b) of Q.
    const Index ng = cp.Acq().cols();
    const Index nb = cp.Abq().cols();
    const Index nc = cp.Acq().rows();
    const Index nr = cp.n_scaled;
    const Index n3 = ng - nr;

    Matrix dAc = Matrix::Zero(nc, ng);
    Matrix dAb = Matrix::Zero(nc, nb);
    Vector db = g.db.head(nc);
    for (Index i = 0; i < nc; ++i)
    {
        for (Index j = 0; j < nr; ++j)
            dAc(i, j) = -0.5 * g.dA(i, sr.col_u + j) + 0.5 * g.dA(i, sr.col_v + j);
        for (Index j = 0; j < n3; ++j)
            dAc(i, nr + j) = 2.0 * g.dA(i, sr.col_z3 + j) + g.db(i);
        for (Index j = 0; j < nb; ++j)
            dAb(i, j) = 2.0 * g.dA(i, sr.col_zb + j) + g.db(i);
    }

    // Seed the tape with d(loss) = -d(rtilde) and accumulate into parameters.
    Tape& tape = cp.pipe.tape();
    tape.zero_adjoints();
    tape.seed_adjoint(cp.q.Ac, -dAc);
    tape.seed_adjoint(cp.q.Ab, -dAb);
    tape.seed_adjoint(cp.q.b, -db);
    tape.backward();

    const auto& Wn = cp.pipe.trainable_weights();
    const auto& wn = cp.pipe.trainable_biases();
    Index nparam = 0;
    for (size_t i = 0; i < Wn.size(); ++i)
        nparam += tape.value(Wn[i]).size() + tape.value(wn[i]).size();
    lv.grad = Vector::Zero(nparam);
    Index at = 0;
    for (size_t i = 0; i < Wn.size(); ++i)
    {
        const Matrix& gW = tape.adjoint(Wn[i]);
        for (Index cI = 0; cI < gW.cols(); ++cI)
            for (Index rI = 0; rI < gW.rows(); ++rI)
                lv.grad(at++) = gW(rI, cI);
        const Matrix& gw = tape.adjoint(wn[i]);
        for (Index rI = 0; rI < gw.rows(); ++rI)
            lv.grad(at++) = gw(rI, 0);
    }

    if (include_exact)
    {
        lv.exact_scale = exact_min_scale(cp, opts);
        lv.exact_loss = 1.0 - lv.exact_scale;
    }
    return lv;
}

} // namespace hz
