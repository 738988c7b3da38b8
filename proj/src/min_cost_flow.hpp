#pragma once

#include "gnrd/types.hpp"

namespace gnrd::detail {

/// Successive shortest paths for uncapacitated min-cost flow on a dense
/// graph. `cost(u, v)` is the per-unit arc cost, +inf where no arc exists.
/// Positive supply marks sources, negative supply marks sinks.
///
/// On return every residual arc has nonnegative reduced cost
/// cost(u, v) - potential(u) + potential(v), so potential(u) - potential(v)
/// <= cost(u, v) for every arc, with equality wherever flow(u, v) > 0.
class DenseMinCostFlow {
public:
    DenseMinCostFlow(Matrix cost, Vector supply);

    void solve();

    const Matrix& flow() const noexcept { return flow_; }
    const Vector& potential() const noexcept { return potential_; }
    const Vector& excess() const noexcept { return excess_; }

private:
    bool augment_once();

    Matrix cost_;
    Matrix flow_;
    Vector potential_;
    Vector excess_;
};

}  // namespace gnrd::detail
