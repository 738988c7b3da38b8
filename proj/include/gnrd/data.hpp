#pragma once

#include "gnrd/rng.hpp"
#include "gnrd/types.hpp"

#include <filesystem>
#include <vector>

namespace gnrd {

enum class DatasetKind { image, vector2d };

/// Samples stored one per column (d x count). Image datasets keep pixel
/// values in [0, 1] with d = rows * cols, row-major within each image.
struct Dataset {
    Matrix samples;
    DatasetKind kind = DatasetKind::vector2d;
    Index image_rows = 0;
    Index image_cols = 0;

    Index count() const noexcept { return samples.cols(); }
    Index dim() const noexcept { return samples.rows(); }
};

struct MixtureSpec {
    std::vector<Eigen::Vector2d> means;
    double stddev = 0.05;
    std::vector<double> weights;  // empty means uniform

    void validate() const;
};

inline constexpr std::uint32_t kIdxImageMagic = 0x00000803;

/// Parse a big-endian IDX3 unsigned-byte image file and scale bytes by 1/255.
Dataset load_idx_images(const std::filesystem::path& path);

/// Write an image dataset as IDX3, quantizing with round(v * 255).
void write_idx_images(const Dataset& data, const std::filesystem::path& path);

MixtureSpec ring_mixture(Index components, double radius, double stddev);

Dataset synth_gaussian_mixture(const MixtureSpec& spec, Index n, Rng& rng);

/// Columns drawn uniformly with replacement.
Matrix sample_batch(const Dataset& data, Index n, Rng& rng);

}  // namespace gnrd
