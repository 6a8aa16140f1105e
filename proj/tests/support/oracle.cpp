#include "oracle.hpp"

#include <Eigen/LU>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

namespace hz::oracle
{

namespace
{

constexpr double kTol = 1e-9;
constexpr double kInf = std::numeric_limits<double>::infinity();

// Bounded-variable simplex with an explicit basis refactorization each
// iteration (problems here are tiny) and Bland's rule against cycling.
class BoundedSimplex
{
public:
    BoundedSimplex(const Matrix& A, const Vector& b, Vector c, Vector lo, Vector hi)
        : A_(A), b_(b), c_(std::move(c)), lo_(std::move(lo)), hi_(std::move(hi)),
          n_(A.cols()), m_(A.rows())
    {
    }

    // Phase 1 + phase 2. Returns false on infeasible.
    bool solve()
    {
        // Structurals start at the bound closest to zero.
        at_upper_.assign(static_cast<size_t>(n_ + m_), false);
        Vector x0(n_);
        for (Index j = 0; j < n_; ++j)
        {
            x0(j) = (std::abs(lo_(j)) <= std::abs(hi_(j))) ? lo_(j) : hi_(j);
            at_upper_[static_cast<size_t>(j)] = x0(j) == hi_(j) && lo_(j) != hi_(j);
        }
        const Vector r = b_ - A_ * x0;

        // Artificial block: one column per row carrying the start residual.
        Matrix Afull(m_, n_ + m_);
        Afull.leftCols(n_) = A_;
        Afull.rightCols(m_).setZero();
        lo_.conservativeResize(n_ + m_);
        hi_.conservativeResize(n_ + m_);
        for (Index i = 0; i < m_; ++i)
        {
            Afull(i, n_ + i) = (r(i) >= 0.0) ? 1.0 : -1.0;
            lo_(n_ + i) = 0.0;
            hi_(n_ + i) = std::abs(r(i)) + 1.0;
        }
        A_ = Afull;

        basis_.clear();
        for (Index i = 0; i < m_; ++i)
            basis_.push_back(n_ + i);
        x_ = Vector::Zero(n_ + m_);
        x_.head(n_) = x0;
        for (Index i = 0; i < m_; ++i)
            x_(n_ + i) = std::abs(r(i));

        // Phase 1: drive the artificials to zero.
        Vector c1 = Vector::Zero(n_ + m_);
        c1.tail(m_).setOnes();
        run(c1);
        if (x_.tail(m_).sum() > 1e-7 * (1.0 + (b_.size() ? b_.cwiseAbs().maxCoeff() : 0.0)))
            return false;

        // Lock artificials at zero and optimize the real objective.
        for (Index i = 0; i < m_; ++i)
        {
            lo_(n_ + i) = 0.0;
            hi_(n_ + i) = 0.0;
            x_(n_ + i) = 0.0;
        }
        Vector c2 = Vector::Zero(n_ + m_);
        c2.head(n_) = c_;
        run(c2);
        return true;
    }

    double objective() const { return c_.dot(x_.head(n_)); }
    Vector solution() const { return x_.head(n_); }

private:
    void run(const Vector& cost)
    {
        for (int iter = 0; iter < 50000; ++iter)
        {
            // Basis inverse by dense LU (sizes are tiny).
            Matrix B(m_, m_);
            for (Index i = 0; i < m_; ++i)
                B.col(i) = A_.col(basis_[static_cast<size_t>(i)]);
            Eigen::FullPivLU<Matrix> lu(B);
            if (!lu.isInvertible())
                throw std::runtime_error("oracle simplex: singular basis");

            Vector cB(m_);
            for (Index i = 0; i < m_; ++i)
                cB(i) = cost(basis_[static_cast<size_t>(i)]);
            Vector y = lu.transpose().solve(cB);

            // Bland: smallest-index improving nonbasic variable.
            Index enter = -1;
            double dir = 0.0;
            for (Index j = 0; j < n_ + m_; ++j)
            {
                if (is_basic(j) || lo_(j) == hi_(j))
                    continue;
                const double d = cost(j) - y.dot(A_.col(j));
                if (!at_upper_[static_cast<size_t>(j)] && d < -kTol)
                {
                    enter = j;
                    dir = 1.0;
                    break;
                }
                if (at_upper_[static_cast<size_t>(j)] && d > kTol)
                {
                    enter = j;
                    dir = -1.0;
                    break;
                }
            }
            if (enter < 0)
                return; // optimal

            const Vector dB = lu.solve(A_.col(enter));
            // Largest step keeping everything inside its bounds. Ties go to
            // the blocking basic with the smallest variable index (Bland).
            double tmax = hi_(enter) - lo_(enter);
            Index leave = -1; // -1: bound flip of the entering variable
            for (Index i = 0; i < m_; ++i)
            {
                const Index bi = basis_[static_cast<size_t>(i)];
                const double delta = -dir * dB(i); // dx_Bi per unit step
                double t = kInf;
                if (delta > kTol)
                    t = (hi_(bi) - x_(bi)) / delta;
                else if (delta < -kTol)
                    t = (lo_(bi) - x_(bi)) / delta;
                if (t == kInf)
                    continue;
                t = std::max(t, 0.0);
                if (t < tmax - 1e-12)
                {
                    tmax = t;
                    leave = i;
                }
                else if (t <= tmax + 1e-12 && leave >= 0 &&
                         bi < basis_[static_cast<size_t>(leave)])
                {
                    leave = i;
                }
            }
            if (tmax >= kInf)
                throw std::runtime_error("oracle simplex: unbounded");

            // Apply the step.
            x_(enter) += dir * tmax;
            for (Index i = 0; i < m_; ++i)
                x_(basis_[static_cast<size_t>(i)]) -= dir * tmax * dB(i);

            if (leave < 0)
            {
                at_upper_[static_cast<size_t>(enter)] = !at_upper_[static_cast<size_t>(enter)];
                continue;
            }
            const Index out = basis_[static_cast<size_t>(leave)];
            const double delta = -dir * dB(leave);
            at_upper_[static_cast<size_t>(out)] = delta > 0.0; // left at its upper bound
            x_(out) = at_upper_[static_cast<size_t>(out)] ? hi_(out) : lo_(out);
            basis_[static_cast<size_t>(leave)] = enter;
        }
        throw std::runtime_error("oracle simplex: iteration cap");
    }

    bool is_basic(Index j) const
    {
        for (Index bi : basis_)
            if (bi == j)
                return true;
        return false;
    }

    Matrix A_;
    Vector b_, c_, lo_, hi_;
    Index n_, m_;
    std::vector<Index> basis_;
    std::vector<bool> at_upper_;
    Vector x_;
};

} // namespace

SimplexResult simplex_solve(const Matrix& A, const Vector& b, const Vector& c, const Vector& lo,
                            const Vector& hi)
{
    SimplexResult out;
    if (A.cols() == 0)
    {
        out.feasible = b.size() == 0 || b.cwiseAbs().maxCoeff() <= 1e-9;
        out.value = 0.0;
        out.x = Vector(0);
        return out;
    }
    if (A.rows() == 0)
    {
        // Box-only: minimize separably.
        out.feasible = true;
        out.x = Vector(A.cols());
        for (Index i = 0; i < A.cols(); ++i)
            out.x(i) = c(i) >= 0.0 ? lo(i) : hi(i);
        out.value = c.dot(out.x);
        return out;
    }
    BoundedSimplex s(A, b, c, lo, hi);
    if (!s.solve())
        return out;
    out.feasible = true;
    out.value = s.objective();
    out.x = s.solution();
    return out;
}

bool simplex_feasible(const Matrix& A, const Vector& b, const Vector& lo, const Vector& hi)
{
    return simplex_solve(A, b, Vector::Zero(A.cols()), lo, hi).feasible;
}

bool enum_is_empty(const HybridZonotope& P)
{
    const Index nb = P.num_gb();
    const Index ng = P.num_gc();
    const long total = 1L << nb;
    for (long m = 0; m < total; ++m)
    {
        Vector zb(nb);
        for (Index j = 0; j < nb; ++j)
            zb(j) = (m >> j) & 1 ? 1.0 : -1.0;
        const Vector beff = P.b() - P.Ab() * zb;
        if (simplex_feasible(P.Ac(), beff, Vector::Constant(ng, -1.0), Vector::Constant(ng, 1.0)))
            return false;
    }
    return true;
}

bool enum_contains(const HybridZonotope& P, const Vector& x)
{
    Matrix Ac(P.num_con() + P.dim(), P.num_gc());
    Ac << P.Ac(), P.Gc();
    Matrix Ab(P.num_con() + P.dim(), P.num_gb());
    Ab << P.Ab(), P.Gb();
    Vector b(P.num_con() + P.dim());
    b << P.b(), x - P.c();
    return !enum_is_empty(HybridZonotope(Matrix::Zero(1, P.num_gc()), Matrix::Zero(1, P.num_gb()),
                                         Vector::Zero(1), Ac, Ab, b));
}

double enum_min_scale(const Matrix& Ac, const Matrix& Ab, const Vector& b, int n_scaled)
{
    const Index ng = Ac.cols();
    const Index nb = Ab.cols();
    const Index nc = Ac.rows();
    const double big = 1e6;

    // LP over (zc, r, slacks): |zc_i| <= r via zc_i - r + s = 0 rows.
    const Index nvar = ng + 1 + 2 * n_scaled;
    Matrix A = Matrix::Zero(nc + 2 * n_scaled, nvar);
    A.topLeftCorner(nc, ng) = Ac;
    Vector lo(nvar), hi(nvar);
    for (Index i = 0; i < ng; ++i)
    {
        lo(i) = (i < n_scaled) ? -big : -1.0;
        hi(i) = (i < n_scaled) ? big : 1.0;
    }
    const Index col_r = ng;
    lo(col_r) = 0.0;
    hi(col_r) = big;
    for (Index k = 0; k < 2 * n_scaled; ++k)
    {
        lo(ng + 1 + k) = 0.0;
        hi(ng + 1 + k) = 2 * big;
    }
    for (Index i = 0; i < n_scaled; ++i)
    {
        // zc_i - r + s1 = 0 ; -zc_i - r + s2 = 0
        A(nc + 2 * i, i) = 1.0;
        A(nc + 2 * i, col_r) = -1.0;
        A(nc + 2 * i, ng + 1 + 2 * i) = 1.0;
        A(nc + 2 * i + 1, i) = -1.0;
        A(nc + 2 * i + 1, col_r) = -1.0;
        A(nc + 2 * i + 1, ng + 1 + 2 * i + 1) = 1.0;
    }
    Vector c = Vector::Zero(nvar);
    c(col_r) = 1.0;

    double best = kInf;
    const long total = 1L << nb;
    for (long m = 0; m < total; ++m)
    {
        Vector zb(nb);
        for (Index j = 0; j < nb; ++j)
            zb(j) = (m >> j) & 1 ? 1.0 : -1.0;
        Vector beff(nc + 2 * n_scaled);
        beff.head(nc) = b - Ab * zb;
        beff.tail(2 * n_scaled).setZero();
        SimplexResult r = simplex_solve(A, beff, c, lo, hi);
        if (r.feasible)
            best = std::min(best, r.value);
    }
    return best;
}

std::optional<double> vertex_enum_min(const Matrix& A, const Vector& b, const Vector& c,
                                      const Vector& lo, const Vector& hi)
{
    const Index n = A.cols();
    const Index m = A.rows();
    if (n > 16)
        return std::nullopt;

    double best = kInf;
    bool found = false;
    // Every subset of basic variables of size m; the rest at each bound
    // pattern. Candidate is a vertex iff the basic solve lands in bounds.
    std::vector<Index> idx(static_cast<size_t>(n));
    for (Index i = 0; i < n; ++i)
        idx[static_cast<size_t>(i)] = i;

    std::vector<Index> comb;
    auto visit = [&](const std::vector<Index>& basic)
    {
        std::vector<Index> nonbasic;
        for (Index i = 0; i < n; ++i)
            if (std::find(basic.begin(), basic.end(), i) == basic.end())
                nonbasic.push_back(i);
        const Index nn = static_cast<Index>(nonbasic.size());
        for (long pat = 0; pat < (1L << nn); ++pat)
        {
            Vector x(n);
            for (Index k = 0; k < nn; ++k)
                x(nonbasic[static_cast<size_t>(k)]) =
                    (pat >> k) & 1 ? hi(nonbasic[static_cast<size_t>(k)])
                                   : lo(nonbasic[static_cast<size_t>(k)]);
            if (!basic.empty())
            {
                Matrix B(m, static_cast<Index>(basic.size()));
                for (size_t i = 0; i < basic.size(); ++i)
                    B.col(static_cast<Index>(i)) = A.col(basic[i]);
                Vector rhs = b;
                for (Index k = 0; k < nn; ++k)
                    rhs -= A.col(nonbasic[static_cast<size_t>(k)]) *
                           x(nonbasic[static_cast<size_t>(k)]);
                Eigen::FullPivLU<Matrix> lu(B);
                if (lu.rank() < static_cast<Index>(basic.size()))
                    continue;
                Vector xb = lu.solve(rhs);
                if ((B * xb - rhs).cwiseAbs().maxCoeff() > 1e-7)
                    continue;
                for (size_t i = 0; i < basic.size(); ++i)
                    x(basic[i]) = xb(static_cast<Index>(i));
            }
            else if ((A * x - b).cwiseAbs().maxCoeff() > 1e-7)
            {
                continue;
            }
            bool ok = (A * x - b).cwiseAbs().maxCoeff() <= 1e-7;
            for (Index i = 0; ok && i < n; ++i)
                ok = x(i) >= lo(i) - 1e-9 && x(i) <= hi(i) + 1e-9;
            if (ok)
            {
                found = true;
                best = std::min(best, c.dot(x));
            }
        }
    };

    const Index bsize = std::min(n, m);
    std::vector<Index> sel;
    auto rec = [&](auto&& self, Index start, Index left) -> void
    {
        if (left == 0)
        {
            visit(sel);
            return;
        }
        for (Index i = start; i + left <= n; ++i)
        {
            sel.push_back(i);
            self(self, i + 1, left - 1);
            sel.pop_back();
        }
    };
    rec(rec, 0, bsize);
    if (!found)
        return std::nullopt;
    return best;
}

} // namespace hz::oracle
