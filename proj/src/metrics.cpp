#include "gnrd/metrics.hpp"

#include "gnrd/assignment.hpp"
#include "gnrd/error.hpp"
#include "gnrd/training.hpp"

#include <cmath>
#include <fstream>
#include <string>

namespace gnrd {

double empirical_ot_eval(const MatrixRef& gen_samples, const MatrixRef& held_out, const RandomFeatureMap* feature) {
    if (gen_samples.cols() != held_out.cols()) {
        throw ConfigError("empirical_ot_eval: clouds have " + std::to_string(gen_samples.cols()) + " and " +
                          std::to_string(held_out.cols()) + " samples");
    }
    if (gen_samples.rows() != held_out.rows()) throw ConfigError("empirical_ot_eval: dimension mismatch");
    const Index k = gen_samples.cols();
    if (k == 0) throw ConfigError("empirical_ot_eval: empty clouds");
    Matrix cost = feature ? build_cost_matrix(feature->forward(gen_samples), feature->forward(held_out))
                          : build_cost_matrix(gen_samples, held_out);
    return assignment_to_ot_value(hungarian(cost), k);
}

RandomFeatureMap eval_feature_map(Index input_dim) {
    DiscriminatorSpec spec;
    spec.kind = DiscriminatorKind::random_mlp;
    spec.input_dim = input_dim;
    spec.hidden_dims = {64};
    spec.output_dim = 32;
    Rng rng(kEvalFeatureSeed);
    return sample_discriminator(spec, rng);
}

void export_image_grid(const MatrixRef& samples, Index rows, Index cols, Index height, Index width,
                       const std::filesystem::path& path) {
    if (rows < 1 || cols < 1 || height < 1 || width < 1) throw ConfigError("image grid: dimensions must be positive");
    if (samples.cols() != rows * cols) {
        throw ConfigError("image grid: expected " + std::to_string(rows * cols) + " images, got " +
                          std::to_string(samples.cols()));
    }
    if (samples.rows() != height * width) throw ConfigError("image grid: image size does not match height x width");
    if (!samples.allFinite() || samples.minCoeff() < 0.0 || samples.maxCoeff() > 1.0) {
        throw ConfigError("image grid: pixel values must lie in [0, 1]");
    }

    const Index out_w = cols * width + (cols + 1) * kGridGutter;
    const Index out_h = rows * height + (rows + 1) * kGridGutter;
    std::vector<unsigned char> pixels(static_cast<std::size_t>(out_w * out_h), 0);
    for (Index r = 0; r < rows; ++r) {
        for (Index c = 0; c < cols; ++c) {
            const auto image = samples.col(r * cols + c);
            const Index top = kGridGutter + r * (height + kGridGutter);
            const Index left = kGridGutter + c * (width + kGridGutter);
            for (Index y = 0; y < height; ++y) {
                for (Index x = 0; x < width; ++x) {
                    pixels[(top + y) * out_w + left + x] =
                        static_cast<unsigned char>(std::lround(image[y * width + x] * 255.0));
                }
            }
        }
    }

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write image grid " + path.string());
    out << "P5\n" << out_w << ' ' << out_h << "\n255\n";
    out.write(reinterpret_cast<const char*>(pixels.data()), static_cast<std::streamsize>(pixels.size()));
    if (!out) throw DataError("failed writing image grid " + path.string());
}

}  // namespace gnrd
