#include "min_cost_flow.hpp"

#include "gnrd/error.hpp"

#include <cmath>
#include <limits>

namespace gnrd::detail {

namespace {
constexpr double kInf = std::numeric_limits<double>::infinity();
// Flows and excesses at or below this are treated as zero.
constexpr double kMassTol = 1e-15;
}  // namespace

DenseMinCostFlow::DenseMinCostFlow(Matrix cost, Vector supply)
    : cost_(std::move(cost)),
      flow_(Matrix::Zero(cost_.rows(), cost_.cols())),
      potential_(Vector::Zero(cost_.rows())),
      excess_(std::move(supply)) {
    if (cost_.rows() != cost_.cols() || cost_.rows() != excess_.size()) {
        throw ConfigError("min-cost flow: cost must be V x V with V supplies");
    }
    for (Index u = 0; u < cost_.rows(); ++u) {
        for (Index v = 0; v < cost_.cols(); ++v) {
            const double c = cost_(u, v);
            if (std::isnan(c) || c < 0.0 || c == -kInf) {
                throw ConfigError("min-cost flow: arc costs must be nonnegative");
            }
        }
    }
}

void DenseMinCostFlow::solve() {
    const Index nodes = cost_.rows();
    // Every augmentation exhausts an excess, a deficit, or a reverse arc.
    const Index max_rounds = 64 * (nodes + 1) * (nodes + 1) + 1024;
    for (Index round = 0; round < max_rounds; ++round) {
        if (!augment_once()) return;
    }
    throw NumericError("min-cost flow: no convergence within iteration budget");
}

bool DenseMinCostFlow::augment_once() {
    const Index nodes = cost_.rows();
    Index source = -1;
    for (Index u = 0; u < nodes; ++u) {
        if (excess_[u] > kMassTol) {
            source = u;
            break;
        }
    }
    if (source < 0) return false;
    bool has_deficit = false;
    for (Index u = 0; u < nodes; ++u) has_deficit = has_deficit || excess_[u] < -kMassTol;
    if (!has_deficit) return false;

    // Dijkstra on reduced costs. pred_backward marks arcs that cancel
    // existing flow v -> u rather than push along u -> v.
    Vector dist = Vector::Constant(nodes, kInf);
    std::vector<Index> pred(nodes, -1);
    std::vector<bool> pred_backward(nodes, false);
    std::vector<bool> done(nodes, false);
    dist[source] = 0.0;

    for (Index iter = 0; iter < nodes; ++iter) {
        Index u = -1;
        for (Index v = 0; v < nodes; ++v) {
            if (!done[v] && dist[v] < kInf && (u < 0 || dist[v] < dist[u])) u = v;
        }
        if (u < 0) break;
        done[u] = true;
        for (Index v = 0; v < nodes; ++v) {
            if (v == u || done[v]) continue;
            double best = kInf;
            bool backward = false;
            if (flow_(v, u) > kMassTol) {
                best = -cost_(v, u);
                backward = true;
            }
            if (cost_(u, v) < best) {
                best = cost_(u, v);
                backward = false;
            }
            if (best == kInf) continue;
            const double reduced = std::max(0.0, best - potential_[u] + potential_[v]);
            if (dist[u] + reduced < dist[v]) {
                dist[v] = dist[u] + reduced;
                pred[v] = u;
                pred_backward[v] = backward;
            }
        }
    }

    Index sink = -1;
    for (Index v = 0; v < nodes; ++v) {
        if (excess_[v] < -kMassTol && dist[v] < kInf && (sink < 0 || dist[v] < dist[sink])) sink = v;
    }
    if (sink < 0) {
        throw NumericError("min-cost flow: deficit nodes unreachable from remaining supply");
    }

    const double horizon = dist[sink];
    for (Index v = 0; v < nodes; ++v) potential_[v] -= std::min(dist[v], horizon);

    double delta = std::min(excess_[source], -excess_[sink]);
    for (Index v = sink; v != source; v = pred[v]) {
        if (pred_backward[v]) delta = std::min(delta, flow_(v, pred[v]));
    }
    for (Index v = sink; v != source; v = pred[v]) {
        const Index u = pred[v];
        if (pred_backward[v]) {
            flow_(v, u) -= delta;
            if (flow_(v, u) <= kMassTol) flow_(v, u) = 0.0;
        } else {
            flow_(u, v) += delta;
        }
    }
    excess_[source] -= delta;
    excess_[sink] += delta;
    return true;
}

}  // namespace gnrd::detail
