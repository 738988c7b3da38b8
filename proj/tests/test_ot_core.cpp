#include "gnrd/assignment.hpp"
#include "gnrd/error.hpp"
#include "gnrd/ot_core.hpp"
#include "test_util.hpp"

#include <gtest/gtest.h>

using namespace gnrd;
using gnrd::test::random_matrix;
using gnrd::test::random_metric;
using gnrd::test::random_simplex;

namespace {

DiscreteDistribution dist(std::initializer_list<double> v) {
    Vector m(static_cast<Index>(v.size()));
    Index i = 0;
    for (double x : v) m[i++] = x;
    return DiscreteDistribution(m);
}

Matrix abs_diff_cost(Index m) {
    Matrix c(m, m);
    for (Index i = 0; i < m; ++i)
        for (Index j = 0; j < m; ++j) c(i, j) = std::abs(static_cast<double>(i - j));
    return c;
}

// 2x2 plans form a segment parameterized by t = pi(0,0); the optimum sits at
// one of its two endpoints.
double two_by_two_oracle(const Matrix& c, const Vector& p, const Vector& q) {
    const double lo = std::max(0.0, p[0] - q[1]);
    const double hi = std::min(p[0], q[0]);
    auto cost = [&](double t) {
        return c(0, 0) * t + c(0, 1) * (p[0] - t) + c(1, 0) * (q[0] - t) + c(1, 1) * (q[1] - p[0] + t);
    };
    return std::min(cost(lo), cost(hi));
}

// Marginals with integer counts over N: OT equals the assignment value of the
// cost matrix with each state replicated by its count, divided by N.
double replicated_assignment_oracle(const Matrix& c, const std::vector<int>& pc, const std::vector<int>& qc) {
    std::vector<Index> rows, cols;
    for (std::size_t i = 0; i < pc.size(); ++i) rows.insert(rows.end(), pc[i], static_cast<Index>(i));
    for (std::size_t j = 0; j < qc.size(); ++j) cols.insert(cols.end(), qc[j], static_cast<Index>(j));
    const Index n = static_cast<Index>(rows.size());
    Matrix big(n, n);
    for (Index a = 0; a < n; ++a)
        for (Index b = 0; b < n; ++b) big(a, b) = c(rows[a], cols[b]);
    return brute_force_assign(big).cost / static_cast<double>(n);
}

}  // namespace

TEST(DiscreteDistribution, RejectsNonSimplex) {
    EXPECT_THROW(dist({0.5, 0.6}), ConfigError);
    EXPECT_THROW(dist({1.5, -0.5}), ConfigError);
    EXPECT_THROW(DiscreteDistribution{Vector()}, ConfigError);
    EXPECT_NO_THROW(dist({1.0, 0.0}));
}

TEST(CostMatrix, MetricFlagIsChecked) {
    EXPECT_NO_THROW(CostMatrix(abs_diff_cost(4), true));
    Matrix bad = abs_diff_cost(3);
    bad(0, 2) = bad(2, 0) = 5.0;  // 5 > 1 + 1
    EXPECT_THROW(CostMatrix(bad, true), ConfigError);
    EXPECT_NO_THROW(CostMatrix(bad, false));
    Matrix asym = abs_diff_cost(2);
    asym(0, 1) = 2.0;
    EXPECT_THROW(CostMatrix(asym, true), ConfigError);
    Matrix neg = Matrix::Zero(2, 2);
    neg(0, 1) = -1.0;
    EXPECT_THROW(CostMatrix(neg, false), ConfigError);
}

TEST(SolveOtPrimal, IdentityTransport) {
    Matrix c(2, 2);
    c << 0, 1, 1, 0;
    const auto plan = solve_ot_primal(CostMatrix(c), dist({0.5, 0.5}), dist({0.5, 0.5}));
    EXPECT_NEAR(plan.value, 0.0, 1e-12);
    EXPECT_NEAR(plan.pi(0, 0), 0.5, 1e-12);
    EXPECT_NEAR(plan.pi(1, 1), 0.5, 1e-12);
}

TEST(SolveOtPrimal, ForcedByMarginals) {
    Matrix c(2, 2);
    c << 0, 3, 2, 0;
    const auto plan = solve_ot_primal(CostMatrix(c), dist({1.0, 0.0}), dist({0.0, 1.0}));
    EXPECT_NEAR(plan.value, 3.0, 1e-12);
}

TEST(SolveOtPrimal, TwoByTwoVertexEnumeration) {
    const Matrix c = abs_diff_cost(2);
    Vector p(2), q(2);
    p << 0.5, 0.5;
    q << 0.25, 0.75;
    const double oracle = two_by_two_oracle(c, p, q);
    ASSERT_NEAR(oracle, 0.25, 1e-15);
    EXPECT_NEAR(solve_ot_primal(CostMatrix(c), DiscreteDistribution(p), DiscreteDistribution(q)).value, oracle, 1e-12);

    Rng rng(7);
    for (int t = 0; t < 50; ++t) {
        const Matrix rc = random_matrix(2, 2, rng, 0.0, 3.0);
        const Vector rp = random_simplex(2, rng), rq = random_simplex(2, rng);
        EXPECT_NEAR(solve_ot_primal(CostMatrix(rc), DiscreteDistribution(rp), DiscreteDistribution(rq)).value,
                    two_by_two_oracle(rc, rp, rq), 1e-12);
    }
}

TEST(SolveOtPrimal, MatchesReplicatedAssignment) {
    Rng rng(11);
    for (int t = 0; t < 60; ++t) {
        const Index m = 2 + static_cast<Index>(rng.below(3));
        const int total = 4 + static_cast<int>(rng.below(4));  // N in [4, 7]
        auto counts = [&] {
            std::vector<int> c(m, 0);
            for (int k = 0; k < total; ++k) ++c[rng.below(m)];
            return c;
        };
        const auto pc = counts(), qc = counts();
        Vector p(m), q(m);
        for (Index i = 0; i < m; ++i) {
            p[i] = pc[i] / static_cast<double>(total);
            q[i] = qc[i] / static_cast<double>(total);
        }
        const Matrix c = random_matrix(m, m, rng, 0.0, 10.0);
        const auto plan = solve_ot_primal(CostMatrix(c), DiscreteDistribution(p), DiscreteDistribution(q));
        EXPECT_NEAR(plan.value, replicated_assignment_oracle(c, pc, qc), 1e-9);
    }
}

TEST(SolveOtPrimal, ZeroMassStatesGetNoPlanMass) {
    Matrix c = abs_diff_cost(3);
    const auto p = dist({0.5, 0.0, 0.5});
    const auto q = dist({0.0, 1.0, 0.0});
    const auto plan = solve_ot_primal(CostMatrix(c), p, q);
    EXPECT_NEAR(plan.value, 1.0, 1e-12);
    EXPECT_DOUBLE_EQ(plan.pi.row(1).sum(), 0.0);
    EXPECT_DOUBLE_EQ(plan.pi.col(0).sum(), 0.0);
    const auto dual = solve_ot_dual(CostMatrix(c), p, q);
    EXPECT_TRUE(dual.gamma.allFinite());
    EXPECT_TRUE(dual.lambda.allFinite());
}

TEST(SolveOtPrimal, DimensionMismatch) {
    EXPECT_THROW(solve_ot_primal(CostMatrix(abs_diff_cost(3)), dist({0.5, 0.5}), dist({0.5, 0.5})), ConfigError);
}

TEST(SolveOtDual, ZeroDistanceToSelf) {
    const auto p = dist({0.2, 0.3, 0.5});
    const auto dual = solve_ot_dual(CostMatrix(abs_diff_cost(3), true), p, p);
    EXPECT_NEAR(dual.value, 0.0, 1e-12);
    DualSolution zero{Vector::Zero(3), Vector::Zero(3), 0.0};
    EXPECT_TRUE(is_feasible_dual(zero, CostMatrix(abs_diff_cost(3))));
}

TEST(SolveOtDual, ForcedInstance) {
    Matrix c(2, 2);
    c << 0, 3, 2, 0;
    const auto [plan, dual] = solve_ot(CostMatrix(c), dist({1.0, 0.0}), dist({0.0, 1.0}));
    EXPECT_NEAR(dual.value, 3.0, 1e-9);
    EXPECT_LE(std::abs(duality_gap(plan, dual)), 1e-9);
    EXPECT_TRUE(is_feasible_dual(dual, CostMatrix(c)));
}

TEST(SolveOtDual, RandomInstancesCertifyOptimality) {
    Rng rng(3);
    for (int t = 0; t < 100; ++t) {
        const Index m = 1 + static_cast<Index>(rng.below(20));
        const CostMatrix c(random_matrix(m, m, rng, 0.0, 10.0));
        const DiscreteDistribution p(random_simplex(m, rng)), q(random_simplex(m, rng));
        const auto [plan, dual] = solve_ot(c, p, q);
        EXPECT_TRUE(is_feasible_plan(plan, c, p, q));
        EXPECT_TRUE(is_feasible_dual(dual, c));
        EXPECT_NEAR(plan.value, dual.value, kOptimalityTol);
        EXPECT_NEAR(dual.value, dual.gamma.dot(p.mass()) + dual.lambda.dot(q.mass()), 1e-9);
    }
}

TEST(SolveOtDual, WeakDualityAgainstFeasiblePlans) {
    Rng rng(5);
    for (int t = 0; t < 30; ++t) {
        const Index m = 2 + static_cast<Index>(rng.below(6));
        const CostMatrix c(random_matrix(m, m, rng, 0.0, 4.0));
        const DiscreteDistribution p(random_simplex(m, rng)), q(random_simplex(m, rng));
        const auto dual = solve_ot_dual(c, p, q);
        // The independent coupling p q^T is always feasible.
        const Matrix product = p.mass() * q.mass().transpose();
        EXPECT_LE(dual.value, transport_cost(c, product) + 1e-9);
        // Scaled-down optimal potentials stay feasible and give a smaller dual value.
        DualSolution shrunk{0.5 * dual.gamma, 0.5 * dual.lambda, 0.0};
        if (is_feasible_dual(shrunk, c)) {
            shrunk.value = shrunk.gamma.dot(p.mass()) + shrunk.lambda.dot(q.mass());
            EXPECT_LE(shrunk.value, solve_ot_primal(c, p, q).value + 1e-9);
        }
    }
}

TEST(MetricDualRestricted, BasicCases) {
    const auto p = dist({0.3, 0.7});
    Matrix c(2, 2);
    c << 0, 1, 1, 0;
    EXPECT_NEAR(metric_dual_restricted(CostMatrix(c, true), p, p), 0.0, 1e-12);
    EXPECT_NEAR(metric_dual_restricted(CostMatrix(c, true), dist({1, 0}), dist({0, 1})), 1.0, 1e-12);
    EXPECT_THROW(metric_dual_restricted(CostMatrix(c, false), p, p), ConfigError);
}

TEST(MetricDualRestricted, MatchesPrimalOnRandomMetrics) {
    Rng rng(17);
    for (int t = 0; t < 50; ++t) {
        const Index m = 2 + static_cast<Index>(rng.below(9));
        const CostMatrix c(random_metric(m, rng), true);
        const DiscreteDistribution p(random_simplex(m, rng)), q(random_simplex(m, rng));
        const auto restricted = metric_dual_potentials(c, p, q);
        EXPECT_NEAR(restricted.value, solve_ot_primal(c, p, q).value, kOptimalityTol);
        // |lambda_i - lambda_j| <= c_ij
        for (Index i = 0; i < m; ++i)
            for (Index j = 0; j < m; ++j)
                EXPECT_LE(std::abs(restricted.lambda[i] - restricted.lambda[j]), c(i, j) + 1e-9);
    }
}

TEST(DualityGap, Cases) {
    Rng rng(23);
    const Index m = 4;
    const CostMatrix c(random_matrix(m, m, rng, 0.5, 3.0));
    const DiscreteDistribution p(random_simplex(m, rng)), q(random_simplex(m, rng));
    const auto [plan, dual] = solve_ot(c, p, q);
    EXPECT_LE(std::abs(duality_gap(plan, dual)), 1e-6);

    const DualSolution zero{Vector::Zero(m), Vector::Zero(m), 0.0};
    EXPECT_DOUBLE_EQ(duality_gap(plan, zero), plan.value);

    // Shift mass around a 2x2 cycle of positive entries: marginals are kept
    // and the gap equals the change in primal cost.
    for (Index a = 0; a < m; ++a)
        for (Index b = 0; b < m; ++b)
            for (Index i2 = 0; i2 < m; ++i2)
                for (Index j2 = 0; j2 < m; ++j2) {
                    if (a == i2 || b == j2 || plan.pi(a, b) <= 1e-6 || plan.pi(i2, j2) <= 1e-6) continue;
                    const double delta = std::min(plan.pi(a, b), plan.pi(i2, j2));
                    TransportPlan worse = plan;
                    worse.pi(a, b) -= delta;
                    worse.pi(i2, j2) -= delta;
                    worse.pi(a, j2) += delta;
                    worse.pi(i2, b) += delta;
                    worse.value = transport_cost(c, worse.pi);
                    ASSERT_TRUE(is_feasible_plan(worse, c, p, q));
                    const double change = delta * (c(a, j2) + c(i2, b) - c(a, b) - c(i2, j2));
                    EXPECT_GE(duality_gap(worse, dual), -1e-9);
                    EXPECT_NEAR(duality_gap(worse, dual), duality_gap(plan, dual) + change, 1e-9);
                }
}

TEST(DualityGap, StrictlyPositiveForSuboptimalSwap) {
    Matrix c(2, 2);
    c << 0, 1, 1, 0;
    const auto p = dist({0.5, 0.5});
    const auto [plan, dual] = solve_ot(CostMatrix(c), p, p);
    TransportPlan swapped = plan;
    swapped.pi << 0.25, 0.25, 0.25, 0.25;  // shift 0.25 off each diagonal entry
    swapped.value = transport_cost(CostMatrix(c), swapped.pi);
    EXPECT_NEAR(duality_gap(swapped, dual), 0.5, 1e-12);
}

TEST(OtProperties, SymmetryIdentityTriangle) {
    Rng rng(29);
    for (int t = 0; t < 40; ++t) {
        const Index m = 2 + static_cast<Index>(rng.below(5));
        const CostMatrix c(random_metric(m, rng), true);
        const DiscreteDistribution a(random_simplex(m, rng)), b(random_simplex(m, rng)), d(random_simplex(m, rng));
        const double ab = solve_ot_primal(c, a, b).value;
        EXPECT_NEAR(ab, solve_ot_primal(c, b, a).value, 1e-9);
        EXPECT_NEAR(solve_ot_primal(c, a, a).value, 0.0, 1e-9);
        EXPECT_LE(ab, solve_ot_primal(c, a, d).value + solve_ot_primal(c, d, b).value + 1e-9);
    }
}
