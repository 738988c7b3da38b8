#include "gnrd/ot_core.hpp"

#include "gnrd/error.hpp"
#include "min_cost_flow.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace gnrd {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void check_instance(const CostMatrix& c, const DiscreteDistribution& p, const DiscreteDistribution& q) {
    if (p.size() != c.size() || q.size() != c.size()) {
        throw ConfigError("transport instance: cost is " + std::to_string(c.size()) + "x" +
                          std::to_string(c.size()) + " but marginals have lengths " +
                          std::to_string(p.size()) + " and " + std::to_string(q.size()));
    }
}

detail::DenseMinCostFlow bipartite_flow(const CostMatrix& c, const DiscreteDistribution& p,
                                        const DiscreteDistribution& q) {
    check_instance(c, p, q);
    const Index m = c.size();
    Matrix arcs = Matrix::Constant(2 * m, 2 * m, kInf);
    arcs.topRightCorner(m, m) = c.values();
    Vector supply(2 * m);
    supply << p.mass(), -q.mass();
    detail::DenseMinCostFlow flow(std::move(arcs), std::move(supply));
    flow.solve();
    return flow;
}

}  // namespace

DiscreteDistribution::DiscreteDistribution(Vector mass) : mass_(std::move(mass)) {
    if (mass_.size() == 0) throw ConfigError("distribution: empty mass vector");
    for (Index i = 0; i < mass_.size(); ++i) {
        if (!std::isfinite(mass_[i]) || mass_[i] < 0.0) {
            throw ConfigError("distribution: entry " + std::to_string(i) + " is negative or not finite");
        }
    }
    if (std::abs(mass_.sum() - 1.0) > kSimplexTol) {
        throw ConfigError("distribution: total mass " + std::to_string(mass_.sum()) + " differs from 1");
    }
}

DiscreteDistribution DiscreteDistribution::uniform(Index m) {
    return DiscreteDistribution(Vector::Constant(m, 1.0 / static_cast<double>(m)));
}

CostMatrix::CostMatrix(Matrix c, bool is_metric) : c_(std::move(c)), is_metric_(is_metric) {
    if (c_.rows() != c_.cols()) throw ConfigError("cost matrix must be square");
    if (c_.size() == 0) throw ConfigError("cost matrix is empty");
    if (!c_.allFinite()) throw ConfigError("cost matrix has non-finite entries");
    if ((c_.array() < 0.0).any()) throw ConfigError("cost matrix has negative entries");
    if (!is_metric_) return;

    const Index m = c_.rows();
    const double tol = kSimplexTol * std::max(1.0, c_.maxCoeff());
    for (Index i = 0; i < m; ++i) {
        if (c_(i, i) > tol) throw ConfigError("metric cost: nonzero diagonal at " + std::to_string(i));
        for (Index j = 0; j < m; ++j) {
            if (std::abs(c_(i, j) - c_(j, i)) > tol) throw ConfigError("metric cost: not symmetric");
            for (Index k = 0; k < m; ++k) {
                if (c_(i, j) > c_(i, k) + c_(k, j) + tol) {
                    throw ConfigError("metric cost: triangle inequality fails at (" + std::to_string(i) +
                                      "," + std::to_string(j) + ") via " + std::to_string(k));
                }
            }
        }
    }
}

double transport_cost(const CostMatrix& c, const MatrixRef& pi) {
    return (c.values().array() * pi.array()).sum();
}

std::pair<TransportPlan, DualSolution> solve_ot(const CostMatrix& c, const DiscreteDistribution& p,
                                                const DiscreteDistribution& q) {
    const auto flow = bipartite_flow(c, p, q);
    const Index m = c.size();

    TransportPlan plan;
    plan.pi = flow.flow().topRightCorner(m, m);
    plan.value = transport_cost(c, plan.pi);

    DualSolution dual;
    dual.gamma = flow.potential().head(m);
    dual.lambda = -flow.potential().tail(m);
    dual.value = dual.gamma.dot(p.mass()) + dual.lambda.dot(q.mass());
    return {std::move(plan), std::move(dual)};
}

TransportPlan solve_ot_primal(const CostMatrix& c, const DiscreteDistribution& p,
                              const DiscreteDistribution& q) {
    return solve_ot(c, p, q).first;
}

DualSolution solve_ot_dual(const CostMatrix& c, const DiscreteDistribution& p,
                           const DiscreteDistribution& q) {
    return solve_ot(c, p, q).second;
}

RestrictedDual metric_dual_potentials(const CostMatrix& c, const DiscreteDistribution& p,
                                      const DiscreteDistribution& q) {
    if (!c.is_metric()) throw ConfigError("restricted dual requires a metric cost");
    check_instance(c, p, q);
    // Transshipment: route the signed excess p - q across the complete graph.
    Matrix arcs = c.values();
    arcs.diagonal().setConstant(kInf);
    detail::DenseMinCostFlow flow(std::move(arcs), p.mass() - q.mass());
    flow.solve();

    RestrictedDual dual;
    dual.lambda = -flow.potential();
    dual.value = dual.lambda.dot(q.mass() - p.mass());
    return dual;
}

double metric_dual_restricted(const CostMatrix& c, const DiscreteDistribution& p,
                              const DiscreteDistribution& q) {
    return metric_dual_potentials(c, p, q).value;
}

double duality_gap(const TransportPlan& plan, const DualSolution& dual) noexcept {
    return plan.value - dual.value;
}

bool is_feasible_plan(const TransportPlan& plan, const CostMatrix& c, const DiscreteDistribution& p,
                      const DiscreteDistribution& q, double tol) {
    const Index m = c.size();
    if (plan.pi.rows() != m || plan.pi.cols() != m) return false;
    if ((plan.pi.array() < 0.0).any()) return false;
    if ((plan.pi.rowwise().sum() - p.mass()).cwiseAbs().maxCoeff() > tol) return false;
    if ((plan.pi.colwise().sum().transpose() - q.mass()).cwiseAbs().maxCoeff() > tol) return false;
    return std::abs(transport_cost(c, plan.pi) - plan.value) <= tol;
}

bool is_feasible_dual(const DualSolution& dual, const CostMatrix& c, double tol) {
    const Index m = c.size();
    if (dual.gamma.size() != m || dual.lambda.size() != m) return false;
    const Matrix slack = c.values() - dual.gamma.replicate(1, m) - dual.lambda.transpose().replicate(m, 1);
    return slack.minCoeff() >= -tol;
}

Matrix shortest_path_closure(const MatrixRef& c) {
    Matrix d = c;
    const Index m = d.rows();
    for (Index k = 0; k < m; ++k) {
        for (Index i = 0; i < m; ++i) {
            for (Index j = 0; j < m; ++j) d(i, j) = std::min(d(i, j), d(i, k) + d(k, j));
        }
    }
    return d;
}

}  // namespace gnrd
