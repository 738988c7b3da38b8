#pragma once

#include "gnrd/rng.hpp"
#include "gnrd/types.hpp"

#include <optional>
#include <string_view>
#include <vector>

namespace gnrd {

enum class DiscriminatorKind { identity, gaussian_linear, random_mlp };

DiscriminatorKind parse_discriminator_kind(std::string_view name);
std::string_view to_string(DiscriminatorKind kind) noexcept;

struct DiscriminatorSpec {
    DiscriminatorKind kind = DiscriminatorKind::identity;
    Index input_dim = 0;
    Index output_dim = 0;             // ignored for identity
    std::vector<Index> hidden_dims;   // random_mlp only
    double leaky_slope = 0.2;
    std::optional<double> weight_std; // default 1/sqrt(fan_in) per layer

    void validate() const;
    Index feature_dim() const noexcept { return kind == DiscriminatorKind::identity ? input_dim : output_dim; }
};

struct AffineLayer {
    Matrix weight;  // out x in
    Vector bias;    // out
};

/// Activations recorded by a forward pass, consumed by the matching VJP.
struct DiscriminatorCache {
    std::uint64_t map_id = 0;
    std::vector<Matrix> pre_activations;  // per hidden layer
    Index batch = 0;
};

/// A sampled feature map D: R^d -> R^d'. Weights are fixed at construction;
/// a training step samples a new map instead of modifying an old one.
class RandomFeatureMap {
public:
    /// Build from explicit layers (tests force weights through this).
    RandomFeatureMap(DiscriminatorSpec spec, std::vector<AffineLayer> layers);

    const DiscriminatorSpec& spec() const noexcept { return spec_; }
    const std::vector<AffineLayer>& layers() const noexcept { return layers_; }
    std::uint64_t id() const noexcept { return id_; }

    Index input_dim() const noexcept { return spec_.input_dim; }
    Index output_dim() const noexcept { return spec_.feature_dim(); }

    /// x is d x n, one sample per column.
    Matrix forward(const MatrixRef& x, DiscriminatorCache* cache = nullptr) const;

    /// J^T upstream for the Jacobian J of forward at the cached input.
    Matrix vjp(const DiscriminatorCache& cache, const MatrixRef& upstream) const;

private:
    DiscriminatorSpec spec_;
    std::vector<AffineLayer> layers_;
    std::uint64_t id_;
};

/// Weights i.i.d. N(0, weight_std^2), biases zero.
RandomFeatureMap sample_discriminator(const DiscriminatorSpec& spec, Rng& rng);

inline Matrix disc_forward(const RandomFeatureMap& d, const MatrixRef& x, DiscriminatorCache* cache = nullptr) {
    return d.forward(x, cache);
}

inline Matrix disc_vjp(const RandomFeatureMap& d, const DiscriminatorCache& cache, const MatrixRef& upstream) {
    return d.vjp(cache, upstream);
}

// Leaky ReLU and its derivative; the derivative at exactly 0 uses the slope.
inline double leaky_relu(double x, double slope) noexcept { return x > 0.0 ? x : slope * x; }
inline double leaky_relu_grad(double x, double slope) noexcept { return x > 0.0 ? 1.0 : slope; }

}  // namespace gnrd
