#include "hzreach/lp.hpp"

#include <Eigen/Cholesky>
#include <fstream>
#include <algorithm>
#include <cmath>
#include <limits>

namespace hz
{

namespace
{

constexpr double kInf = std::numeric_limits<double>::infinity();

struct PathResult
{
    LpStatus status;
    Vector x, y, s;
    int iterations = 0;
};

// Factor M + ridge*I, escalating the ridge until the factorization holds.
// Solves run one or two rounds of iterative refinement: near mu ~ 0 the
// scaling matrix is extreme and the raw solve error would cap the attainable
// primal residual.
class NormalSolver
{
public:
    explicit NormalSolver(const Matrix& M) : M_(M)
    {
        double ridge = 0.0;
        const double base = std::max(1.0, max_abs(Vector(M.diagonal())));
        for (int attempt = 0; attempt < 12; ++attempt)
        {
            Matrix Mr = M;
            if (ridge > 0.0)
                Mr.diagonal().array() += ridge;
            ldlt_.compute(Mr);
            if (ldlt_.info() == Eigen::Success && (ldlt_.vectorD().array() > 0).all())
                return;
            ridge = (ridge == 0.0) ? 1e-14 * base : ridge * 100.0;
        }
        ok_ = false;
    }

    bool ok() const { return ok_; }

    Vector solve(const Vector& r) const
    {
        Vector x = ldlt_.solve(r);
        for (int round = 0; round < 2; ++round)
        {
            Vector res = r - M_ * x;
            if (max_abs(res) <= 1e-14 * (1.0 + max_abs(r)))
                break;
            x += ldlt_.solve(res);
        }
        return x;
    }

private:
    Matrix M_;
    Eigen::LDLT<Matrix> ldlt_;
    bool ok_ = true;
};

double step_to_boundary(const Vector& v, const Vector& dv, double frac)
{
    double alpha = 1.0;
    for (Index i = 0; i < v.size(); ++i)
    {
        if (dv(i) < 0.0)
            alpha = std::min(alpha, -frac * v(i) / dv(i));
    }
    return alpha;
}

// Mehrotra-style starting point.
void starting_point(const Matrix& A, const Vector& b, const Vector& c, Vector& x, Vector& y,
                    Vector& s)
{
    const Index n = A.cols();
    const Index m = A.rows();
    Matrix AAt = A * A.transpose();
    AAt.diagonal().array() += 1e-12 * std::max(1.0, AAt.diagonal().cwiseAbs().maxCoeff());
    Eigen::LDLT<Matrix> ldlt(AAt);
    if (ldlt.info() != Eigen::Success)
    {
        x = Vector::Ones(n);
        y = Vector::Zero(m);
        s = Vector::Ones(n);
        return;
    }
    x = A.transpose() * ldlt.solve(b);
    y = ldlt.solve(A * c);
    s = c - A.transpose() * y;

    const double dx = std::max(0.0, -1.5 * (x.size() ? x.minCoeff() : 0.0));
    const double ds = std::max(0.0, -1.5 * (s.size() ? s.minCoeff() : 0.0));
    x.array() += dx;
    s.array() += ds;
    const double xs = x.dot(s);
    const double sx = x.sum();
    const double ss = s.sum();
    x.array() += (ss > 0.0) ? 0.5 * xs / ss : 1.0;
    s.array() += (sx > 0.0) ? 0.5 * xs / sx : 1.0;
    if (!(x.minCoeff() > 0.0))
        x = Vector::Ones(n);
    if (!(s.minCoeff() > 0.0))
        s = Vector::Ones(n);
}

// Infeasible-start primal-dual path following. Drives the complementarity
// products toward mu_target (mu_target ~ 0 for optimize mode, in which case
// termination is on feasibility + small mean complementarity). A finite
// value_target lets callers that only need "objective below tau" (phase 1)
// exit before the degenerate-face crawl.
PathResult path_follow(const Matrix& A_in, const Vector& b_in, const Vector& c, double mu_target,
                       bool center_mode, const SolverOptions& opts,
                       double value_target = -kInf, const Vector* primal_start = nullptr)
{
    const Index n = A_in.cols();
    const Index m = A_in.rows();
    PathResult out;
    out.status = LpStatus::iteration_limit;

    if (n == 0)
    {
        out.status = (b_in.size() == 0 || b_in.cwiseAbs().maxCoeff() <= opts.feas_tol)
                         ? LpStatus::optimal
                         : LpStatus::infeasible;
        out.x = Vector(0);
        out.y = Vector::Zero(m);
        out.s = Vector(0);
        return out;
    }
    if (m == 0)
    {
        // Separable over x >= 0. The barrier problem needs c > 0 strictly;
        // the plain LP only needs c >= 0.
        out.x = Vector(n);
        for (Index i = 0; i < n; ++i)
        {
            if (c(i) < 0.0 || (center_mode && c(i) == 0.0))
            {
                out.status = LpStatus::unbounded;
                return out;
            }
            out.x(i) = c(i) > 0.0 ? mu_target / c(i) : 0.0;
        }
        out.y = Vector(0);
        out.s = c;
        out.status = LpStatus::optimal;
        return out;
    }

    // Row equilibration: mixed constraint scales (activation-domain rows vs
    // unit slack rows) otherwise wreck the normal equations. The iterate y
    // lives in the scaled system and is mapped back on exit; the dual
    // residual c - A'y - s is scale-invariant under that mapping.
    Vector rowscale = Vector::Ones(m);
    for (Index i = 0; i < m; ++i)
    {
        const double rn = std::max(max_abs(Vector(A_in.row(i))), std::abs(b_in(i)));
        if (rn > 1e-8)
            rowscale(i) = 1.0 / rn;
    }
    const Matrix A = rowscale.asDiagonal() * A_in;
    const Vector b = rowscale.cwiseProduct(b_in);

    Vector x, y, s;
    if (primal_start && primal_start->size() == n && primal_start->minCoeff() > 0.0)
    {
        // Caller-provided strictly feasible start (phase-1): keep the primal
        // residual at zero from the first iterate.
        x = *primal_start;
        y = Vector::Zero(m);
        s = Vector::Ones(n);
    }
    else
    {
        starting_point(A, b, c, x, y, s);
    }

    const double bnorm = 1.0 + b_in.cwiseAbs().maxCoeff();
    const double cnorm = 1.0 + (n ? c.cwiseAbs().maxCoeff() : 0.0);
    const double mu_floor = center_mode ? mu_target : std::max(opts.opt_tol * 1e-2, 1e-14);

    double best_infeas = kInf;
    int stall = 0;

    for (int iter = 0; iter < opts.max_ipm_iters; ++iter)
    {
        out.iterations = iter;
        Vector rp = b - A * x;
        Vector rd = c - A.transpose() * y - s;
        const double mu_cur = x.dot(s) / static_cast<double>(n);
        const double pinf = max_abs(Vector(rp.cwiseQuotient(rowscale)));
        const double dinf = rd.cwiseAbs().maxCoeff();

        if (center_mode)
        {
            const double comp = (x.array() * s.array() - mu_target).abs().maxCoeff();
            if (pinf <= opts.kkt_tol && dinf <= opts.kkt_tol && comp <= opts.kkt_tol)
            {
                out.status = LpStatus::optimal;
                out.x = x;
                out.y = rowscale.cwiseProduct(y);
                out.s = s;
                return out;
            }
        }
        else
        {
            // The value-target exit only needs classification-level primal
            // feasibility, not solver-level.
            const bool value_hit =
                c.dot(x) <= value_target && pinf / bnorm <= std::max(opts.feas_tol, 1e-6);
            if (value_hit || (pinf / bnorm <= opts.feas_tol && dinf / cnorm <= opts.feas_tol &&
                              mu_cur <= opts.opt_tol * (1.0 + std::abs(c.dot(x)))))
            {
                out.status = LpStatus::optimal;
                out.x = x;
                out.y = rowscale.cwiseProduct(y);
                out.s = s;
                return out;
            }
        }

        // Divergence checks.
        const double xmax = x.maxCoeff();
        if (xmax > 1e13 * bnorm && pinf / bnorm <= 1e-6)
        {
            out.status = LpStatus::unbounded;
            out.x = x;
            out.y = rowscale.cwiseProduct(y);
            out.s = s;
            return out;
        }
        const double comp_err =
            center_mode ? (x.array() * s.array() - mu_target).abs().maxCoeff() /
                              (1.0 + mu_target)
                        : mu_cur / (1.0 + std::abs(c.dot(x)));
        const double infeas_score = pinf / bnorm + dinf / cnorm + comp_err;
        if (infeas_score < best_infeas * 0.9999)
        {
            best_infeas = infeas_score;
            stall = 0;
        }
        else if (++stall > 30)
        {
            // Numerical floor reached. In optimize mode a matched
            // primal/dual pair still certifies the value; accept it with the
            // looser residuals (bound consumers carry matching slack).
            const double gap = std::abs(c.dot(x) - b.dot(y));
            if (!center_mode && pinf / bnorm <= 1e-6 && dinf / cnorm <= 1e-6 &&
                gap <= 1e-6 * (1.0 + std::abs(c.dot(x))))
            {
                out.status = LpStatus::optimal;
                out.x = x;
                out.y = rowscale.cwiseProduct(y);
                out.s = s;
                return out;
            }
            break;
        }

        Vector d = x.array() / s.array();
        Matrix M = A * d.asDiagonal() * A.transpose();
        NormalSolver solver(M);
        if (!solver.ok())
            break;

        auto newton = [&](const Vector& rc) -> std::pair<Vector, Vector>
        {
            // Solve for (dx, dy); ds recovered by the caller.
            Vector rhs = rp + A * (d.asDiagonal() * rd - rc.cwiseQuotient(s));
            Vector dy = solver.solve(rhs);
            Vector dx =
                d.asDiagonal() * (A.transpose() * dy - rd) + rc.cwiseQuotient(s);
            return {dx, dy};
        };

        // Predictor (affine scaling).
        Vector rc_aff = -(x.array() * s.array()).matrix();
        auto [dx_aff, dy_aff] = newton(rc_aff);
        Vector ds_aff = (rc_aff - s.asDiagonal() * dx_aff).cwiseQuotient(x);
        const double ap_aff = step_to_boundary(x, dx_aff, 1.0);
        const double ad_aff = step_to_boundary(s, ds_aff, 1.0);
        const double mu_aff =
            (x + ap_aff * dx_aff).dot(s + ad_aff * ds_aff) / static_cast<double>(n);

        double tau;
        bool corrector = true;
        if (center_mode)
        {
            // Head toward mu_target; pure Newton centering once close (the
            // second-order corrector has spurious fixed points when the
            // target is pinned).
            if (mu_cur > 4.0 * mu_target)
            {
                tau = std::max(mu_target, mu_cur * std::pow(mu_aff / mu_cur, 2.0));
            }
            else
            {
                tau = mu_target;
                corrector = false;
            }
        }
        else
        {
            double sigma = std::pow(std::max(mu_aff, 0.0) / mu_cur, 3.0);
            sigma = std::clamp(sigma, 1e-8, 0.9);
            tau = std::max(sigma * mu_cur, mu_floor);
        }

        Vector rc = (tau - (x.array() * s.array())).matrix();
        if (corrector)
            rc -= (dx_aff.array() * ds_aff.array()).matrix();
        auto [dx, dy] = newton(rc);
        Vector ds = (rc - s.asDiagonal() * dx).cwiseQuotient(x);

        const double frac = (center_mode && mu_cur <= 4.0 * mu_target) ? 0.9995 : 0.995;
        double ap = std::min(1.0, step_to_boundary(x, dx, frac));
        double ad = std::min(1.0, step_to_boundary(s, ds, frac));

        x += ap * dx;
        y += ad * dy;
        s += ad * ds;
    }

    out.x = x;
    out.y = rowscale.cwiseProduct(y);
    out.s = s;
    return out;
}

// Phase-1: min t subject to Ax + t*(b - A*1) = b, x >= 0, t >= 0.
// (x, t) = (1, 1) is strictly feasible; t ~ 0 iff Ax = b admits x >= 0.
// The returned value is in residual units, t* scaled by the artificial
// column's magnitude, so thresholds mean "allowed constraint violation".
// The solve exits early once the value falls below half the classification
// threshold; on a stall with near-feasible duals, the dual objective bounds
// t* from below, which still classifies clearly-infeasible systems.
double phase1_value(const Matrix& A, const Vector& b, const SolverOptions& opts, Vector* x_out)
{
    const Index n = A.cols();
    const Index m = A.rows();
    Matrix A1(m, n + 1);
    A1.leftCols(n) = A;
    A1.col(n) = b - A * Vector::Ones(n);
    const double xi_scale = std::max(1.0, max_abs(Vector(A1.col(n))));
    Vector c1 = Vector::Zero(n + 1);
    c1(n) = 1.0;
    SolverOptions o = opts;
    o.max_ipm_iters = std::max(opts.max_ipm_iters, 200);
    const double threshold = 1e-7 * (1.0 + max_abs(b));
    const Vector ones_start = Vector::Ones(n + 1);
    PathResult r =
        path_follow(A1, b, c1, 0.0, false, o, 0.45 * threshold / xi_scale, &ones_start);
    if (r.status != LpStatus::optimal)
    {
        if (r.x.size() == n + 1)
        {
            const Vector rd = c1 - A1.transpose() * r.y - r.s;
            const double dinf = max_abs(rd);
            const double dual_bound = b.dot(r.y) * xi_scale;
            if (dinf <= 1e-8 && dual_bound > 2.0 * threshold)
                return dual_bound; // certified above threshold
            const double pinf = max_abs(Vector(b - A1 * r.x));
            if (pinf <= 100.0 * threshold)
            {
                // Near-feasible iterate upper-bounds t* (the residual slack
                // only blurs the value estimate, not the classification).
                if (x_out)
                    *x_out = r.x.head(n);
                return r.x(n) * xi_scale + pinf;
            }
        }
#ifdef HZ_DUMP_PHASE1
        {
            std::ofstream f("/tmp/phase1_dump.txt");
            f.precision(17);
            f << m << " " << n << "\n" << A << "\n" << b.transpose() << "\n";
        }
#endif
        return kInf;
    }
    if (x_out)
        *x_out = r.x.head(n);
    return r.x(n) * xi_scale;
}

} // namespace

LpSolution lp_solve_barrier(const StandardFormLp& lp, const SolverOptions& opts)
{
    require(lp.A.rows() == lp.b.size(), "lp_solve_barrier: A rows vs b");
    require(lp.A.cols() == lp.c.size(), "lp_solve_barrier: A cols vs c");
    if (!(lp.mu > 0.0))
        throw SolverError(SolverError::Kind::numerical, "lp_solve_barrier: mu must be positive");

    PathResult r = path_follow(lp.A, lp.b, lp.c, lp.mu, true, opts);
    if (r.status != LpStatus::optimal)
    {
        const double t = phase1_value(lp.A, lp.b, opts, nullptr);
        if (!(t <= 1e-7 * (1.0 + max_abs(lp.b))))
            throw SolverError(SolverError::Kind::infeasible,
                              "lp_solve_barrier: problem has no strictly feasible point");
        if (r.status == LpStatus::unbounded)
            throw SolverError(SolverError::Kind::unbounded,
                              "lp_solve_barrier: barrier objective unbounded below");
        throw SolverError(SolverError::Kind::iteration_limit,
                          "lp_solve_barrier: iteration limit before reaching the center");
    }

    LpSolution sol;
    sol.x = r.x;
    sol.y = r.y;
    sol.s = lp.c - lp.A.transpose() * r.y;
    sol.objective = lp.c.dot(r.x);
    sol.iterations = r.iterations;
    const double pres = max_abs(Vector(lp.A * r.x - lp.b));
    const double cres =
        sol.s.size() ? (r.x.array() * sol.s.array() - lp.mu).abs().maxCoeff() : 0.0;
    sol.kkt_residual = std::max(pres, cres);
    sol.converged = true;
    return sol;
}

LpResult lp_solve_optimal(const Matrix& A, const Vector& b, const Vector& c,
                          const SolverOptions& opts)
{
    require(A.rows() == b.size(), "lp_solve_optimal: A rows vs b");
    require(A.cols() == c.size(), "lp_solve_optimal: A cols vs c");

    LpResult result;
    PathResult r = path_follow(A, b, c, 0.0, false, opts);
    if (r.status != LpStatus::optimal && r.status != LpStatus::unbounded)
    {
        // Stalled: classify feasibility through phase 1.
        const double t = phase1_value(A, b, opts, nullptr);
        const double scale = 1.0 + max_abs(b);
        if (!(t <= 1e-7 * scale))
        {
            result.status = LpStatus::infeasible;
            return result;
        }
    }
    result.status = r.status;
    result.sol.x = r.x;
    result.sol.y = r.y;
    result.sol.s = r.s;
    result.sol.iterations = r.iterations;
    if (r.status == LpStatus::optimal)
    {
        result.sol.objective = c.dot(r.x);
        result.sol.converged = true;
        result.sol.kkt_residual = max_abs(Vector(A * r.x - b));
    }
    return result;
}

bool lp_feasible(const Matrix& A, const Vector& b, const SolverOptions& opts)
{
    require(A.rows() == b.size(), "lp_feasible: A rows vs b");
    const double t = phase1_value(A, b, opts, nullptr);
    if (t == kInf)
        throw SolverError(SolverError::Kind::numerical, "lp_feasible: phase-1 did not converge");
    return t <= 1e-7 * (1.0 + max_abs(b));
}

bool lp_feasible_point(const Matrix& A, const Vector& b, Vector& x, const SolverOptions& opts)
{
    require(A.rows() == b.size(), "lp_feasible_point: A rows vs b");
    const double t = phase1_value(A, b, opts, &x);
    if (t == kInf)
        throw SolverError(SolverError::Kind::numerical,
                          "lp_feasible_point: phase-1 did not converge");
    return t <= 1e-7 * (1.0 + max_abs(b));
}

LpGradients kkt_gradients(const LpSolution& sol, const StandardFormLp& lp,
                          const SolverOptions& opts)
{
    (void)opts;
    if (!sol.converged)
        throw SolverError(SolverError::Kind::numerical, "kkt_gradients: solution not converged");
    const Index n = lp.A.cols();
    const Index m = lp.A.rows();
    require(sol.x.size() == n && sol.y.size() == m, "kkt_gradients: solution/problem mismatch");

    // At the center: A'y + mu*X^{-1}1 = c, Ax = b. Implicit differentiation
    // gives the symmetric system K = [-mu X^{-2}, A'; A, 0]. With K[u;w] = [c;0],
    //   d(c'x*) = (x+u)'dc + w'db - sum_ij (y u' + w x')_ij dA_ij.
    Vector d2 = sol.x.array().square() / lp.mu; // inverse of the (1,1) block
    Matrix M = lp.A * d2.asDiagonal() * lp.A.transpose();
    const double base = std::max(1.0, max_abs(Vector(M.diagonal())));
    M.diagonal().array() += 1e-14 * base;
    Eigen::LDLT<Matrix> ldlt(M);
    if (ldlt.info() != Eigen::Success || !(ldlt.vectorD().array() > 0).all())
    {
        const double dmin = ldlt.vectorD().size() ? ldlt.vectorD().minCoeff() : 0.0;
        throw SolverError(SolverError::Kind::numerical,
                          "kkt_gradients: singular KKT system (min pivot " +
                              std::to_string(dmin) + "); retry with larger mu");
    }
    Vector w = ldlt.solve(lp.A * (d2.asDiagonal() * lp.c));
    Vector u = d2.asDiagonal() * (lp.A.transpose() * w - lp.c);

    LpGradients g;
    g.dc = sol.x + u;
    g.db = w;
    g.dA = -(sol.y * u.transpose()) - (w * sol.x.transpose());
    return g;
}

} // namespace hz
