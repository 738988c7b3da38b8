#include "gnrd/random_discriminator.hpp"

#include "gnrd/error.hpp"

#include <atomic>
#include <cmath>
#include <string>

namespace gnrd {

namespace {

std::uint64_t next_map_id() {
    static std::atomic<std::uint64_t> counter{1};
    return counter.fetch_add(1, std::memory_order_relaxed);
}

std::vector<Index> layer_dims(const DiscriminatorSpec& spec) {
    std::vector<Index> dims{spec.input_dim};
    if (spec.kind == DiscriminatorKind::random_mlp) {
        dims.insert(dims.end(), spec.hidden_dims.begin(), spec.hidden_dims.end());
    }
    if (spec.kind != DiscriminatorKind::identity) dims.push_back(spec.output_dim);
    return dims;
}

}  // namespace

DiscriminatorKind parse_discriminator_kind(std::string_view name) {
    if (name == "identity") return DiscriminatorKind::identity;
    if (name == "gaussian_linear") return DiscriminatorKind::gaussian_linear;
    if (name == "random_mlp") return DiscriminatorKind::random_mlp;
    throw ConfigError("unknown discriminator kind '" + std::string(name) + "'");
}

std::string_view to_string(DiscriminatorKind kind) noexcept {
    switch (kind) {
        case DiscriminatorKind::identity: return "identity";
        case DiscriminatorKind::gaussian_linear: return "gaussian_linear";
        case DiscriminatorKind::random_mlp: return "random_mlp";
    }
    return "unknown";
}

void DiscriminatorSpec::validate() const {
    if (input_dim <= 0) throw ConfigError("discriminator: input_dim must be positive");
    if (kind != DiscriminatorKind::identity && output_dim <= 0) {
        throw ConfigError("discriminator: output_dim must be positive");
    }
    for (Index h : hidden_dims) {
        if (h <= 0) throw ConfigError("discriminator: hidden dims must be positive");
    }
    if (!(leaky_slope > 0.0 && leaky_slope < 1.0)) throw ConfigError("discriminator: leaky_slope must lie in (0, 1)");
    if (weight_std && !(*weight_std > 0.0)) throw ConfigError("discriminator: weight_std must be positive");
}

RandomFeatureMap::RandomFeatureMap(DiscriminatorSpec spec, std::vector<AffineLayer> layers)
    : spec_(std::move(spec)), layers_(std::move(layers)), id_(next_map_id()) {
    spec_.validate();
    const auto dims = layer_dims(spec_);
    if (layers_.size() + 1 != dims.size()) throw ConfigError("discriminator: layer count does not match spec");
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        if (layers_[l].weight.rows() != dims[l + 1] || layers_[l].weight.cols() != dims[l] ||
            layers_[l].bias.size() != dims[l + 1]) {
            throw ConfigError("discriminator: layer " + std::to_string(l) + " has the wrong shape");
        }
    }
}

RandomFeatureMap sample_discriminator(const DiscriminatorSpec& spec, Rng& rng) {
    spec.validate();
    const auto dims = layer_dims(spec);
    std::vector<AffineLayer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        const double stddev = spec.weight_std.value_or(1.0 / std::sqrt(static_cast<double>(dims[l])));
        AffineLayer layer{Matrix(dims[l + 1], dims[l]), Vector::Zero(dims[l + 1])};
        // Column-major fill order is part of the determinism contract.
        for (Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = rng.normal(0.0, stddev);
        layers.push_back(std::move(layer));
    }
    return RandomFeatureMap(spec, std::move(layers));
}

Matrix RandomFeatureMap::forward(const MatrixRef& x, DiscriminatorCache* cache) const {
    if (x.rows() != spec_.input_dim) {
        throw ConfigError("discriminator: input has " + std::to_string(x.rows()) + " rows, expected " +
                          std::to_string(spec_.input_dim));
    }
    if (cache) {
        cache->map_id = id_;
        cache->batch = x.cols();
        cache->pre_activations.clear();
    }
    if (layers_.empty()) return x;

    const double slope = spec_.leaky_slope;
    Matrix h = x;
    for (std::size_t l = 0; l < layers_.size(); ++l) {
        Matrix z = layers_[l].weight * h;
        z.colwise() += layers_[l].bias;
        if (l + 1 == layers_.size()) return z;
        h = z.unaryExpr([slope](double v) { return leaky_relu(v, slope); });
        if (cache) cache->pre_activations.push_back(std::move(z));
    }
    return h;
}

Matrix RandomFeatureMap::vjp(const DiscriminatorCache& cache, const MatrixRef& upstream) const {
    if (cache.map_id != id_) throw ConfigError("discriminator: cache belongs to a different map");
    if (upstream.cols() != cache.batch || upstream.rows() != output_dim()) {
        throw ConfigError("discriminator: upstream shape does not match the cached forward pass");
    }
    if (!layers_.empty() && cache.pre_activations.size() + 1 != layers_.size()) {
        throw ConfigError("discriminator: stale cache");
    }
    if (layers_.empty()) return upstream;

    const double slope = spec_.leaky_slope;
    Matrix g = upstream;
    for (std::size_t l = layers_.size(); l-- > 0;) {
        g = layers_[l].weight.transpose() * g;
        if (l == 0) break;
        g.array() *= cache.pre_activations[l - 1].unaryExpr([slope](double v) { return leaky_relu_grad(v, slope); }).array();
    }
    return g;
}

}  // namespace gnrd
