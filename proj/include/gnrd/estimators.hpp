#pragma once

#include "gnrd/ot_core.hpp"
#include "gnrd/rng.hpp"

#include <vector>

namespace gnrd {

/// Sample mean of n one-hot encoded draws on m states.
struct EmpiricalDistribution {
    std::vector<Index> counts;
    Index n = 0;
    Vector mass;

    DiscreteDistribution as_distribution() const;
};

/// Monte-Carlo estimate of E[dist(p_hat^n, q_hat^n)] for each n.
struct Lemma1Report {
    std::vector<Index> n_values;
    std::vector<double> mean_dist;
    std::vector<double> std_err;
    double true_dist = 0.0;
    Index trials = 0;
};

inline constexpr Index kMinLemma1Trials = 100;

std::vector<Index> sample_categorical(const DiscreteDistribution& p, Index n, Rng& rng);

EmpiricalDistribution empirical_onehot(const std::vector<Index>& samples, Index m);

struct Lemma1Options {
    Index trials = 10000;
    unsigned threads = 1;
};

/// Replication r at sample size index k draws from rng.split(k).split(r), so
/// the report does not depend on the thread count.
Lemma1Report lemma1_experiment(const DiscreteDistribution& p, const DiscreteDistribution& q,
                               const CostMatrix& c, const std::vector<Index>& n_values,
                               const Lemma1Options& options, const Rng& rng);

}  // namespace gnrd
