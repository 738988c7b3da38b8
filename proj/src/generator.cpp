#include "gnrd/generator.hpp"

#include "gnrd/error.hpp"

#include <cmath>
#include <string>

namespace gnrd {

namespace {

double sigmoid(double x) noexcept {
    if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
    const double e = std::exp(x);
    return e / (1.0 + e);
}

}  // namespace

OutputActivation parse_output_activation(std::string_view name) {
    if (name == "identity") return OutputActivation::identity;
    if (name == "sigmoid") return OutputActivation::sigmoid;
    throw ConfigError("unknown output activation '" + std::string(name) + "'");
}

std::string_view to_string(OutputActivation act) noexcept {
    return act == OutputActivation::sigmoid ? "sigmoid" : "identity";
}

bool GeneratorNet::all_finite() const {
    for (const auto& layer : layers) {
        if (!layer.weight.allFinite() || !layer.bias.allFinite()) return false;
    }
    return true;
}

GeneratorNet make_generator(const std::vector<Index>& layer_dims, OutputActivation output, Rng& rng) {
    if (layer_dims.size() < 2) throw ConfigError("generator: need at least input and output dims");
    for (Index d : layer_dims) {
        if (d <= 0) throw ConfigError("generator: layer dims must be positive");
    }
    GeneratorNet g;
    g.layer_dims = layer_dims;
    g.output = output;
    for (std::size_t l = 0; l + 1 < layer_dims.size(); ++l) {
        const double stddev = 1.0 / std::sqrt(static_cast<double>(layer_dims[l]));
        AffineLayer layer{Matrix(layer_dims[l + 1], layer_dims[l]), Vector::Zero(layer_dims[l + 1])};
        for (Index k = 0; k < layer.weight.size(); ++k) layer.weight.data()[k] = rng.normal(0.0, stddev);
        g.layers.push_back(std::move(layer));
    }
    return g;
}

GeneratorNet zero_like(const GeneratorNet& g) {
    GeneratorNet z = g;
    for (auto& layer : z.layers) {
        layer.weight.setZero();
        layer.bias.setZero();
    }
    return z;
}

Matrix gen_forward(const GeneratorNet& g, const MatrixRef& z, GeneratorCache* cache) {
    if (z.rows() != g.noise_dim()) {
        throw ConfigError("generator: noise has " + std::to_string(z.rows()) + " rows, expected " +
                          std::to_string(g.noise_dim()));
    }
    const double slope = g.leaky_slope;
    if (cache) {
        cache->inputs.clear();
        cache->pre_activations.clear();
    }
    Matrix h = z;
    for (std::size_t l = 0; l < g.layers.size(); ++l) {
        Matrix a = g.layers[l].weight * h;
        a.colwise() += g.layers[l].bias;
        Matrix next;
        if (l + 1 < g.layers.size()) {
            next = a.unaryExpr([slope](double v) { return leaky_relu(v, slope); });
        } else if (g.output == OutputActivation::sigmoid) {
            next = a.unaryExpr([](double v) { return sigmoid(v); });
        } else {
            next = a;
        }
        if (cache) {
            cache->inputs.push_back(std::move(h));
            cache->pre_activations.push_back(std::move(a));
        }
        h = std::move(next);
    }
    if (cache) cache->output = h;
    return h;
}

GeneratorGrads gen_backward(const GeneratorNet& g, const GeneratorCache& cache, const MatrixRef& grad_output) {
    if (cache.inputs.size() != g.layers.size() || cache.pre_activations.size() != g.layers.size()) {
        throw ConfigError("generator: cache does not match network depth");
    }
    if (grad_output.rows() != cache.output.rows() || grad_output.cols() != cache.output.cols()) {
        throw ConfigError("generator: grad_output shape does not match the cached forward pass");
    }
    const double slope = g.leaky_slope;
    GeneratorGrads grads(g.layers.size());

    Matrix delta = grad_output;
    if (g.output == OutputActivation::sigmoid) {
        delta.array() *= cache.output.array() * (1.0 - cache.output.array());
    }
    for (std::size_t l = g.layers.size(); l-- > 0;) {
        grads[l].weight = delta * cache.inputs[l].transpose();
        grads[l].bias = delta.rowwise().sum();
        if (l == 0) break;
        delta = g.layers[l].weight.transpose() * delta;
        delta.array() *=
            cache.pre_activations[l - 1].unaryExpr([slope](double v) { return leaky_relu_grad(v, slope); }).array();
    }
    return grads;
}

Matrix sample_noise(Index noise_dim, Index n, Rng& rng) {
    Matrix z(noise_dim, n);
    for (Index k = 0; k < z.size(); ++k) z.data()[k] = rng.normal();
    return z;
}

AdamState make_adam(const GeneratorNet& g, double lr, double beta1, double beta2, double eps) {
    if (!(lr > 0.0)) throw ConfigError("adam: lr must be positive");
    if (!(beta1 >= 0.0 && beta1 < 1.0) || !(beta2 >= 0.0 && beta2 < 1.0)) {
        throw ConfigError("adam: betas must lie in [0, 1)");
    }
    if (!(eps > 0.0)) throw ConfigError("adam: eps must be positive");
    AdamState s;
    s.lr = lr;
    s.beta1 = beta1;
    s.beta2 = beta2;
    s.eps = eps;
    s.m = zero_like(g).layers;
    s.v = s.m;
    return s;
}

void adam_step(AdamState& state, const GeneratorGrads& grads, GeneratorNet& g) {
    if (grads.size() != g.layers.size() || state.m.size() != g.layers.size() || state.v.size() != g.layers.size()) {
        throw ConfigError("adam: gradient, moment, and weight layer counts differ");
    }
    for (std::size_t l = 0; l < grads.size(); ++l) {
        if (grads[l].weight.rows() != g.layers[l].weight.rows() || grads[l].weight.cols() != g.layers[l].weight.cols() ||
            grads[l].bias.size() != g.layers[l].bias.size()) {
            throw ConfigError("adam: gradient shape mismatch at layer " + std::to_string(l));
        }
        if (!grads[l].weight.allFinite()) {
            throw NumericError("adam: non-finite gradient in layer " + std::to_string(l) + " weight");
        }
        if (!grads[l].bias.allFinite()) {
            throw NumericError("adam: non-finite gradient in layer " + std::to_string(l) + " bias");
        }
    }

    ++state.t;
    const double b1 = state.beta1;
    const double b2 = state.beta2;
    const double c1 = 1.0 - std::pow(b1, static_cast<double>(state.t));
    const double c2 = 1.0 - std::pow(b2, static_cast<double>(state.t));
    const double lr = state.lr;
    const double eps = state.eps;

    auto update = [&](auto& w, auto& m, auto& v, const auto& grad) {
        m = b1 * m + (1.0 - b1) * grad;
        v = b2 * v + (1.0 - b2) * grad.cwiseAbs2();
        w.array() -= lr * (m.array() / c1) / ((v.array() / c2).sqrt() + eps);
    };
    for (std::size_t l = 0; l < grads.size(); ++l) {
        update(g.layers[l].weight, state.m[l].weight, state.v[l].weight, grads[l].weight);
        update(g.layers[l].bias, state.m[l].bias, state.v[l].bias, grads[l].bias);
    }
    if (!g.all_finite()) throw NumericError("adam: weights became non-finite");
}

}  // namespace gnrd
