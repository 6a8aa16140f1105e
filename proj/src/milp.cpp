#include "hzreach/milp.hpp"

#include <fstream>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>
#include <vector>

namespace hz
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();
constexpr double kBoundSlack = 1e-7; // trust radius for LP-relaxation bounds

// Standard-form lowering of one branch-and-bound node. Fixed binaries are
// substituted into the right-hand side; free binaries and bounded continuous
// coefficients are shifted to [0, width] with a slack row per upper bound.
// A scaled coefficient z_i (|z_i| <= r) is parameterized by its two margins
// u_i = r - z_i, v_i = r + z_i tied by u_i + v_i = 2r; a direct split of z_i
// into positive parts would put exactly opposite columns into A, which has
// no barrier center.
struct NodeLp
{
    Matrix A;
    Vector b;
    Vector c;
    std::vector<Index> zc_u;     // margin columns for scaled coefficients
    std::vector<Index> zc_v;
    std::vector<Index> zc_col;   // shifted column for plain coefficients
    std::vector<double> zc_shift;
    std::vector<Index> zb_col;   // standard-form column of free binary j, or -1 if fixed
    Index r_col = -1;
};

NodeLp build_node_lp(const MilpProblem& p, const std::vector<int>& fix, double scale_cap)
{
    const Index ng = p.Ac.cols();
    const Index nb = p.Ab.cols();
    const Index nc = p.Ac.rows();
    const bool min_scale = p.goal == MilpProblem::Goal::min_scale;
    const Index nr = min_scale ? p.n_scaled : 0;

    Index col = 0;
    NodeLp lp;
    lp.zc_u.assign(ng, -1);
    lp.zc_v.assign(ng, -1);
    lp.zc_col.assign(ng, -1);
    lp.zc_shift.assign(ng, 0.0);
    lp.zb_col.assign(nb, -1);

    for (Index i = 0; i < nr; ++i)
    {
        lp.zc_u[i] = col++;
        lp.zc_v[i] = col++;
    }
    for (Index i = nr; i < ng; ++i)
    {
        lp.zc_col[i] = col++;
        lp.zc_shift[i] = p.lo(i);
    }
    Index n_free_b = 0;
    for (Index j = 0; j < nb; ++j)
    {
        if (fix[static_cast<size_t>(j)] == 0)
        {
            lp.zb_col[j] = col++;
            ++n_free_b;
        }
    }
    if (min_scale)
        lp.r_col = col++;

    const Index slack_zc = ng - nr;
    Index sc = col; // first slack column
    col += slack_zc + n_free_b + (min_scale ? 1 : 0);

    const Index rows = nc + nr + slack_zc + n_free_b + (min_scale ? 1 : 0);
    lp.A = Matrix::Zero(rows, col);
    lp.b = Vector::Zero(rows);
    lp.c = Vector::Zero(col);
    if (min_scale)
        lp.c(lp.r_col) = 1.0;

    // Equality block: Ac zc + Ab zb = b with substitutions.
    Vector beff = p.b;
    for (Index j = 0; j < nb; ++j)
    {
        const int f = fix[static_cast<size_t>(j)];
        if (f != 0)
            beff -= p.Ab.col(j) * static_cast<double>(f);
    }
    for (Index i = 0; i < ng; ++i)
    {
        if (i < nr)
        {
            // z_i = (v_i - u_i)/2
            lp.A.block(0, lp.zc_u[i], nc, 1) = -0.5 * p.Ac.col(i);
            lp.A.block(0, lp.zc_v[i], nc, 1) = 0.5 * p.Ac.col(i);
        }
        else
        {
            lp.A.block(0, lp.zc_col[i], nc, 1) = p.Ac.col(i);
            beff -= p.Ac.col(i) * lp.zc_shift[i];
        }
    }
    for (Index j = 0; j < nb; ++j)
    {
        if (lp.zb_col[j] >= 0)
        {
            lp.A.block(0, lp.zb_col[j], nc, 1) = p.Ab.col(j);
            beff += p.Ab.col(j); // shift from [-1,1] to [0,2]
        }
    }
    lp.b.head(nc) = beff;

    Index row = nc;
    // Margin coupling rows: u_i + v_i = 2r.
    for (Index i = 0; i < nr; ++i)
    {
        lp.A(row, lp.zc_u[i]) = 1.0;
        lp.A(row, lp.zc_v[i]) = 1.0;
        lp.A(row, lp.r_col) = -2.0;
        ++row;
    }
    // Upper-bound slack rows.
    for (Index i = nr; i < ng; ++i)
    {
        lp.A(row, lp.zc_col[i]) = 1.0;
        lp.A(row, sc++) = 1.0;
        lp.b(row) = p.hi(i) - p.lo(i);
        ++row;
    }
    for (Index j = 0; j < nb; ++j)
    {
        if (lp.zb_col[j] >= 0)
        {
            lp.A(row, lp.zb_col[j]) = 1.0;
            lp.A(row, sc++) = 1.0;
            lp.b(row) = 2.0;
            ++row;
        }
    }
    if (min_scale)
    {
        lp.A(row, lp.r_col) = 1.0;
        lp.A(row, sc++) = 1.0;
        lp.b(row) = scale_cap;
        ++row;
    }
    return lp;
}

void recover_point(const MilpProblem& p, const NodeLp& lp, const Vector& x,
                   const std::vector<int>& fix, Vector& zc, Vector& zb)
{
    const Index ng = p.Ac.cols();
    const Index nb = p.Ab.cols();
    zc.resize(ng);
    zb.resize(nb);
    const Index nr = (p.goal == MilpProblem::Goal::min_scale) ? p.n_scaled : 0;
    for (Index i = 0; i < ng; ++i)
    {
        if (i < nr)
            zc(i) = 0.5 * (x(lp.zc_v[i]) - x(lp.zc_u[i]));
        else
            zc(i) = x(lp.zc_col[i]) + lp.zc_shift[i];
    }
    for (Index j = 0; j < nb; ++j)
    {
        if (fix[static_cast<size_t>(j)] != 0)
            zb(j) = fix[static_cast<size_t>(j)];
        else
            zb(j) = x(lp.zb_col[j]) - 1.0;
    }
}

struct Node
{
    std::vector<int> fix;
    double bound = -kInf;
    long id = 0;
};

struct BnbOutcome
{
    bool cap_pressed = false;
    MilpResult result;
};

BnbOutcome branch_and_bound(const MilpProblem& p, double scale_cap, const SolverOptions& opts)
{
    const Index nb = p.Ab.cols();
    const bool min_scale = p.goal == MilpProblem::Goal::min_scale;

    BnbOutcome out;
    out.result.status = MilpStatus::infeasible;
    double incumbent = kInf;
    Vector best_zc, best_zb;

    std::deque<Node> open;
    long next_id = 0;
    open.push_back({std::vector<int>(static_cast<size_t>(nb), 0), -kInf, next_id++});

    long processed = 0;
    while (!open.empty())
    {
        if (processed >= opts.max_nodes)
            throw SolverError(SolverError::Kind::node_limit,
                              "milp_solve: node cap reached (" + std::to_string(processed) + ")");
        if (processed > 0 && processed % 100 == 0)
        {
            std::stable_sort(open.begin(), open.end(),
                             [](const Node& a, const Node& b) { return a.bound > b.bound; });
        }
        Node node = std::move(open.back());
        open.pop_back();
        ++processed;

        if (min_scale && node.bound >= incumbent - opts.milp_gap + kBoundSlack)
            continue;

        NodeLp lp = build_node_lp(p, node.fix, scale_cap);
        double node_value = 0.0;
        Vector zc, zb;
        if (min_scale)
        {
            LpResult r = lp_solve_optimal(lp.A, lp.b, lp.c, opts);
            if (r.status == LpStatus::infeasible)
                continue;
            if (r.status == LpStatus::optimal)
            {
                node_value = r.sol.objective;
                recover_point(p, lp, r.sol.x, node.fix, zc, zb);
            }
            else
            {
                // Relaxation stalled: keep the parent's bound (no pruning
                // from an unproven value) and branch on the phase-1 point.
                Vector xrel;
                if (!lp_feasible_point(lp.A, lp.b, xrel, opts))
                    continue;
                node_value = std::max(node.bound, 0.0);
                recover_point(p, lp, xrel, node.fix, zc, zb);
            }
        }
        else
        {
            Vector xrel;
            if (!lp_feasible_point(lp.A, lp.b, xrel, opts))
                continue;
            recover_point(p, lp, xrel, node.fix, zc, zb);
        }

        if (node_value < node.bound - 1e-6 * (1.0 + std::abs(node.bound)))
            throw SolverError(SolverError::Kind::numerical,
                              "milp_solve: child relaxation below parent bound");
        if (min_scale && node_value >= incumbent - opts.milp_gap + kBoundSlack)
            continue;

        // Fractionality of the free binaries.
        Index branch_j = -1;
        double best_frac = opts.integrality_tol;
        Index first_free = -1;
        for (Index j = 0; j < nb; ++j)
        {
            if (node.fix[static_cast<size_t>(j)] != 0)
                continue;
            if (first_free < 0)
                first_free = j;
            const double frac = 1.0 - std::min(1.0, std::abs(zb(j)));
            if (frac > best_frac)
            {
                best_frac = frac;
                branch_j = j;
            }
        }

        if (branch_j < 0)
        {
            // All binaries (near) integral. Verify exactly with the rounded
            // assignment substituted; rounding alone must not produce a
            // verdict.
            std::vector<int> leaf_fix = node.fix;
            for (Index j = 0; j < nb; ++j)
            {
                if (leaf_fix[static_cast<size_t>(j)] == 0)
                    leaf_fix[static_cast<size_t>(j)] = (zb(j) >= 0.0) ? 1 : -1;
            }
            NodeLp leaf = build_node_lp(p, leaf_fix, scale_cap);
            bool leaf_ok = false;
            double leaf_value = 0.0;
            Vector leaf_zc, leaf_zb;
            if (min_scale)
            {
                LpResult r = lp_solve_optimal(leaf.A, leaf.b, leaf.c, opts);
                if (r.status == LpStatus::optimal)
                {
                    leaf_ok = true;
                    leaf_value = r.sol.objective;
                    recover_point(p, leaf, r.sol.x, leaf_fix, leaf_zc, leaf_zb);
                }
                else if (r.status != LpStatus::infeasible)
                {
                    Vector xleaf;
                    if (lp_feasible_point(leaf.A, leaf.b, xleaf, opts))
                    {
#ifdef HZ_DUMP_LEAF
                        {
                            std::ofstream f("/tmp/leaf_dump.txt");
                            f.precision(17);
                            f << leaf.A.rows() << " " << leaf.A.cols() << "\n" << leaf.A << "\n" << leaf.b.transpose() << "\n" << leaf.c.transpose() << "\n";
                        }
#endif
                        throw SolverError(SolverError::Kind::numerical,
                                          "milp_solve: feasible leaf value did not resolve");
                    }
                }
            }
            else
            {
                Vector xleaf;
                if (lp_feasible_point(leaf.A, leaf.b, xleaf, opts))
                {
                    leaf_ok = true;
                    recover_point(p, leaf, xleaf, leaf_fix, leaf_zc, leaf_zb);
                }
            }

            if (leaf_ok)
            {
                if (!min_scale)
                {
                    out.result.status = MilpStatus::optimal;
                    out.result.value = 0.0;
                    out.result.zc = leaf_zc;
                    out.result.zb = leaf_zb;
                    out.result.nodes = processed;
                    return out;
                }
                if (leaf_value < incumbent)
                {
                    incumbent = leaf_value;
                    best_zc = leaf_zc;
                    best_zb = leaf_zb;
                }
                continue;
            }
            // The rounded leaf is infeasible; keep searching unless the node
            // had no freedom left.
            if (first_free < 0)
                continue;
            branch_j = first_free;
        }

        Node closer = node;
        Node farther = node;
        const int sign = (zb(branch_j) >= 0.0) ? 1 : -1;
        closer.fix[static_cast<size_t>(branch_j)] = sign;
        farther.fix[static_cast<size_t>(branch_j)] = -sign;
        closer.bound = node_value;
        farther.bound = node_value;
        closer.id = next_id++;
        farther.id = next_id++;
        open.push_back(std::move(farther));
        open.push_back(std::move(closer)); // explored first (LIFO)
    }

    if (min_scale && incumbent < kInf)
    {
        out.result.status = MilpStatus::optimal;
        out.result.value = incumbent;
        out.result.zc = best_zc;
        out.result.zb = best_zb;
        out.cap_pressed = incumbent >= scale_cap - 1e-6 * (1.0 + scale_cap);
    }
    out.result.nodes = processed;
    return out;
}

} // namespace

MilpProblem MilpProblem::feasibility_problem(const Matrix& Ac, const Matrix& Ab, const Vector& b,
                                             const Vector& lo, const Vector& hi)
{
    require(Ac.rows() == Ab.rows() && Ac.rows() == b.size(), "MilpProblem: row counts disagree");
    require(lo.size() == Ac.cols() && hi.size() == Ac.cols(), "MilpProblem: bound lengths");
    MilpProblem p;
    p.Ac = Ac;
    p.Ab = Ab;
    p.b = b;
    p.lo = lo;
    p.hi = hi;
    p.goal = Goal::feasibility;
    return p;
}

MilpProblem MilpProblem::min_scale_problem(const Matrix& Ac, const Matrix& Ab, const Vector& b,
                                           int n_scaled)
{
    require(Ac.rows() == Ab.rows() && Ac.rows() == b.size(), "MilpProblem: row counts disagree");
    require(n_scaled >= 0 && n_scaled <= Ac.cols(), "MilpProblem: n_scaled out of range");
    MilpProblem p;
    p.Ac = Ac;
    p.Ab = Ab;
    p.b = b;
    p.lo = Vector::Constant(Ac.cols(), -1.0);
    p.hi = Vector::Constant(Ac.cols(), 1.0);
    p.n_scaled = n_scaled;
    p.goal = Goal::min_scale;
    return p;
}

MilpResult milp_solve(const MilpProblem& p, const SolverOptions& opts)
{
    if (p.goal == MilpProblem::Goal::feasibility)
        return branch_and_bound(p, 0.0, opts).result;

    double cap = opts.scale_cap_start;
    while (true)
    {
        BnbOutcome out = branch_and_bound(p, cap, opts);
        if (out.result.status == MilpStatus::optimal && !out.cap_pressed)
            return out.result;
        if (cap >= opts.scale_cap_max)
        {
            MilpResult r;
            r.status = MilpStatus::infeasible;
            r.value = kInf; // no finite scale makes the system feasible
            r.nodes = out.result.nodes;
            return r;
        }
        cap *= 2.0;
    }
}

bool milp_feasible(const MilpProblem& p, const SolverOptions& opts)
{
    MilpProblem q = p;
    q.goal = MilpProblem::Goal::feasibility;
    q.n_scaled = 0;
    return milp_solve(q, opts).status == MilpStatus::optimal;
}

bool milp_feasible_hinted(const MilpProblem& p, const Vector& zb_hint, const SolverOptions& opts)
{
    if (zb_hint.size() == p.Ab.cols())
    {
        Vector beff = p.b;
        for (Index j = 0; j < p.Ab.cols(); ++j)
            beff -= p.Ab.col(j) * (zb_hint(j) >= 0.0 ? 1.0 : -1.0);
        // Continuous-only feasibility at the hinted assignment.
        const Index ng = p.Ac.cols();
        const Index nc = p.Ac.rows();
        Matrix A = Matrix::Zero(nc + ng, 2 * ng);
        Vector b(nc + ng);
        for (Index i = 0; i < ng; ++i)
        {
            A.block(0, i, nc, 1) = p.Ac.col(i);
            beff -= p.Ac.col(i) * p.lo(i);
            A(nc + i, i) = 1.0;
            A(nc + i, ng + i) = 1.0;
            b(nc + i) = p.hi(i) - p.lo(i);
        }
        b.head(nc) = beff;
        if (lp_feasible(A, b, opts))
            return true;
    }
    return milp_feasible(p, opts);
}

} // namespace hz
