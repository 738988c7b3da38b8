#include "gnrd/estimators.hpp"

#include "gnrd/error.hpp"

#include <algorithm>
#include <cmath>
#include <string>
#include <thread>

namespace gnrd {

DiscreteDistribution EmpiricalDistribution::as_distribution() const {
    return DiscreteDistribution(mass);
}

std::vector<Index> sample_categorical(const DiscreteDistribution& p, Index n, Rng& rng) {
    if (n < 1) throw ConfigError("sample_categorical: n must be at least 1");
    const Index m = p.size();
    std::vector<double> cdf(m);
    double running = 0.0;
    for (Index i = 0; i < m; ++i) {
        running += p[i];
        cdf[i] = running;
    }
    std::vector<Index> out(n);
    for (auto& s : out) {
        const double u = rng.uniform() * running;
        // First state whose cumulative mass exceeds u; never a zero-mass state.
        const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
        Index state = std::min<Index>(static_cast<Index>(it - cdf.begin()), m - 1);
        while (p[state] == 0.0 && state > 0) --state;
        s = state;
    }
    return out;
}

EmpiricalDistribution empirical_onehot(const std::vector<Index>& samples, Index m) {
    if (m < 1) throw ConfigError("empirical_onehot: state count must be positive");
    if (samples.empty()) throw ConfigError("empirical_onehot: no samples");
    EmpiricalDistribution e;
    e.counts.assign(m, 0);
    for (Index s : samples) {
        if (s < 0 || s >= m) {
            throw ConfigError("empirical_onehot: state " + std::to_string(s) + " outside [0, " +
                              std::to_string(m) + ")");
        }
        ++e.counts[s];
    }
    e.n = static_cast<Index>(samples.size());
    e.mass.resize(m);
    for (Index i = 0; i < m; ++i) e.mass[i] = static_cast<double>(e.counts[i]) / static_cast<double>(e.n);
    return e;
}

namespace {

double plug_in_distance(const DiscreteDistribution& p, const DiscreteDistribution& q, const CostMatrix& c,
                        Index n, Rng rng) {
    Rng rng_p = rng.split("p");
    Rng rng_q = rng.split("q");
    const auto p_hat = empirical_onehot(sample_categorical(p, n, rng_p), p.size());
    const auto q_hat = empirical_onehot(sample_categorical(q, n, rng_q), q.size());
    return solve_ot_primal(c, p_hat.as_distribution(), q_hat.as_distribution()).value;
}

}  // namespace

Lemma1Report lemma1_experiment(const DiscreteDistribution& p, const DiscreteDistribution& q,
                               const CostMatrix& c, const std::vector<Index>& n_values,
                               const Lemma1Options& options, const Rng& rng) {
    if (options.trials < kMinLemma1Trials) {
        throw ConfigError("lemma1_experiment: trials must be at least " + std::to_string(kMinLemma1Trials));
    }
    if (n_values.empty()) throw ConfigError("lemma1_experiment: no sample sizes");
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        if (n_values[k] < 1 || (k > 0 && n_values[k] <= n_values[k - 1])) {
            throw ConfigError("lemma1_experiment: sample sizes must be positive and strictly increasing");
        }
    }

    Lemma1Report report;
    report.n_values = n_values;
    report.trials = options.trials;
    report.true_dist = solve_ot_primal(c, p, q).value;

    const unsigned threads = std::max(1u, options.threads);
    std::vector<double> dist(options.trials);
    for (std::size_t k = 0; k < n_values.size(); ++k) {
        const Rng size_rng = rng.split(static_cast<std::uint64_t>(k));
        auto run_range = [&](Index begin, Index end) {
            for (Index r = begin; r < end; ++r) {
                dist[r] = plug_in_distance(p, q, c, n_values[k], size_rng.split(static_cast<std::uint64_t>(r)));
            }
        };
        if (threads == 1) {
            run_range(0, options.trials);
        } else {
            std::vector<std::jthread> pool;
            const Index chunk = (options.trials + threads - 1) / threads;
            for (unsigned t = 0; t < threads; ++t) {
                const Index begin = std::min<Index>(options.trials, t * chunk);
                const Index end = std::min<Index>(options.trials, begin + chunk);
                pool.emplace_back(run_range, begin, end);
            }
        }

        // Fixed-order reduction keeps results bitwise stable across thread counts.
        double sum = 0.0;
        for (double d : dist) sum += d;
        const double mean = sum / static_cast<double>(options.trials);
        double sq = 0.0;
        for (double d : dist) sq += (d - mean) * (d - mean);
        const double variance = sq / static_cast<double>(options.trials - 1);
        report.mean_dist.push_back(mean);
        report.std_err.push_back(std::sqrt(variance / static_cast<double>(options.trials)));
    }
    return report;
}

}  // namespace gnrd
