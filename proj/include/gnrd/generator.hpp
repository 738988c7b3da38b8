#pragma once

#include "gnrd/random_discriminator.hpp"
#include "gnrd/rng.hpp"
#include "gnrd/types.hpp"

#include <string_view>
#include <vector>

namespace gnrd {

enum class OutputActivation { identity, sigmoid };

OutputActivation parse_output_activation(std::string_view name);
std::string_view to_string(OutputActivation act) noexcept;

/// MLP h(w, z): affine layers with leaky ReLU between them and the chosen
/// activation on the output. layer_dims runs from noise dim to data dim.
struct GeneratorNet {
    std::vector<Index> layer_dims;
    std::vector<AffineLayer> layers;
    OutputActivation output = OutputActivation::identity;
    double leaky_slope = 0.2;

    Index noise_dim() const { return layer_dims.front(); }
    Index data_dim() const { return layer_dims.back(); }
    bool all_finite() const;
};

/// Normal(0, 1/fan_in) weights, zero biases.
GeneratorNet make_generator(const std::vector<Index>& layer_dims, OutputActivation output, Rng& rng);

/// Same architecture, every weight and bias zero.
GeneratorNet zero_like(const GeneratorNet& g);

using GeneratorGrads = std::vector<AffineLayer>;

struct GeneratorCache {
    std::vector<Matrix> inputs;          // input to each layer
    std::vector<Matrix> pre_activations; // affine output of each layer
    Matrix output;
};

/// z is noise_dim x n; returns data_dim x n.
Matrix gen_forward(const GeneratorNet& g, const MatrixRef& z, GeneratorCache* cache = nullptr);

/// Gradient of <grad_output, gen_forward(z)> with respect to every weight.
GeneratorGrads gen_backward(const GeneratorNet& g, const GeneratorCache& cache, const MatrixRef& grad_output);

Matrix sample_noise(Index noise_dim, Index n, Rng& rng);

struct AdamState {
    double lr = 0.001;
    double beta1 = 0.5;
    double beta2 = 0.9;
    double eps = 1e-8;
    std::int64_t t = 0;
    std::vector<AffineLayer> m;
    std::vector<AffineLayer> v;
};

AdamState make_adam(const GeneratorNet& g, double lr, double beta1, double beta2, double eps = 1e-8);

/// One bias-corrected Adam update. Throws NumericError naming the tensor if
/// any gradient entry is NaN or infinite; weights are left untouched then.
void adam_step(AdamState& state, const GeneratorGrads& grads, GeneratorNet& g);

}  // namespace gnrd
