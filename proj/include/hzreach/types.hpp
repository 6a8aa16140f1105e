#ifndef HZREACH_TYPES_HPP_
#define HZREACH_TYPES_HPP_

#include <Eigen/Dense>
#include <stdexcept>
#include <string>

namespace hz
{

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using Index = Eigen::Index;

/// Thrown when matrix/vector dimensions of an operation's inputs disagree.
class DimensionError : public std::invalid_argument
{
public:
    explicit DimensionError(const std::string& msg) : std::invalid_argument(msg) {}
};

/// Thrown when an optimization routine cannot produce an answer
/// (infeasible start, divergence, resource cap). Never encodes a
/// feasibility verdict: those are returned values, not exceptions.
class SolverError : public std::runtime_error
{
public:
    enum class Kind
    {
        infeasible,
        unbounded,
        iteration_limit,
        node_limit,
        numerical,
        empty_set,
        unsupported_shape,
    };

    SolverError(Kind kind, const std::string& msg) : std::runtime_error(msg), kind_(kind) {}
    Kind kind() const { return kind_; }

private:
    Kind kind_;
};

/// Central tolerance/limit record shared by the LP and MILP layers.
struct SolverOptions
{
    double kkt_tol = 1e-8;         // barrier-center KKT residual (inf norm)
    double feas_tol = 1e-9;        // primal feasibility for optimize-mode solves
    double opt_tol = 1e-9;         // mean complementarity at optimize-mode exit
    double milp_gap = 1e-6;        // absolute branch-and-bound gap
    double integrality_tol = 1e-6; // |z| within this of +-1 counts as integral
    int max_ipm_iters = 300;
    long max_nodes = 500000;       // branch-and-bound node cap
    double scale_cap_start = 10.0; // adaptive upper bound for the scale variable
    double scale_cap_max = 1048576.0;
};

inline void require(bool cond, const std::string& msg)
{
    if (!cond)
        throw DimensionError(msg);
}

// Empty-safe reductions (Eigen asserts on empty redux).
inline double max_abs(const Vector& v) { return v.size() ? v.cwiseAbs().maxCoeff() : 0.0; }
inline double max_abs(const Matrix& M) { return M.size() ? M.cwiseAbs().maxCoeff() : 0.0; }
inline double sum_abs(const Vector& v) { return v.size() ? v.cwiseAbs().sum() : 0.0; }
inline Vector rowwise_abs_sum(const Matrix& M)
{
    return M.cols() ? Vector(M.cwiseAbs().rowwise().sum()) : Vector(Vector::Zero(M.rows()));
}

} // namespace hz

#endif
