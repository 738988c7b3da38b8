#pragma once

#include "gnrd/types.hpp"

namespace gnrd {

inline constexpr double kFeasibilityTol = 1e-9;
inline constexpr double kOptimalityTol = 1e-6;
inline constexpr double kSimplexTol = 1e-12;

/// Probability vector on m states. Construction validates nonnegativity and
/// unit total mass (within kSimplexTol).
class DiscreteDistribution {
public:
    explicit DiscreteDistribution(Vector mass);

    static DiscreteDistribution uniform(Index m);

    const Vector& mass() const noexcept { return mass_; }
    Index size() const noexcept { return mass_.size(); }
    double operator[](Index i) const { return mass_[i]; }

private:
    Vector mass_;
};

/// Square matrix of nonnegative per-unit transport costs. When constructed
/// with `is_metric = true` the matrix is checked for a zero diagonal,
/// symmetry and the triangle inequality.
class CostMatrix {
public:
    explicit CostMatrix(Matrix c, bool is_metric = false);

    const Matrix& values() const noexcept { return c_; }
    bool is_metric() const noexcept { return is_metric_; }
    Index size() const noexcept { return c_.rows(); }
    double operator()(Index i, Index j) const { return c_(i, j); }

private:
    Matrix c_;
    bool is_metric_;
};

struct TransportPlan {
    Matrix pi;
    double value = 0.0;
};

struct DualSolution {
    Vector gamma;   // potential on the source marginal p
    Vector lambda;  // potential on the target marginal q
    double value = 0.0;
};

/// Single potential for the metric case, feasible for |f_i - f_j| <= c_ij.
struct RestrictedDual {
    Vector lambda;
    double value = 0.0;
};

/// Exact transport plan minimizing sum c_ij pi_ij with row sums p and column
/// sums q (successive shortest paths on the bipartite transportation graph).
TransportPlan solve_ot_primal(const CostMatrix& c, const DiscreteDistribution& p,
                              const DiscreteDistribution& q);

/// Optimal potentials (gamma, lambda) read from the terminal node potentials
/// of the same flow computation.
DualSolution solve_ot_dual(const CostMatrix& c, const DiscreteDistribution& p,
                           const DiscreteDistribution& q);

/// Both sides of the transport LP from one flow solve.
std::pair<TransportPlan, DualSolution> solve_ot(const CostMatrix& c, const DiscreteDistribution& p,
                                                const DiscreteDistribution& q);

/// max sum_j lambda_j (q_j - p_j) over |lambda_i - lambda_j| <= c_ij, i.e. the
/// dual with gamma = -lambda. Solved as an uncapacitated transshipment on
/// the complete graph. Requires a metric cost.
RestrictedDual metric_dual_potentials(const CostMatrix& c, const DiscreteDistribution& p,
                                      const DiscreteDistribution& q);

double metric_dual_restricted(const CostMatrix& c, const DiscreteDistribution& p,
                              const DiscreteDistribution& q);

double duality_gap(const TransportPlan& plan, const DualSolution& dual) noexcept;

double transport_cost(const CostMatrix& c, const MatrixRef& pi);

// Feasibility checks used by tests and by callers that build plans by hand.
bool is_feasible_plan(const TransportPlan& plan, const CostMatrix& c, const DiscreteDistribution& p,
                      const DiscreteDistribution& q, double tol = kFeasibilityTol);
bool is_feasible_dual(const DualSolution& dual, const CostMatrix& c, double tol = kFeasibilityTol);

/// Floyd-Warshall closure of a nonnegative symmetric matrix; the result is a
/// metric on the index set whenever the diagonal is zeroed.
Matrix shortest_path_closure(const MatrixRef& c);

}  // namespace gnrd
