#pragma once

#include "gnrd/random_discriminator.hpp"
#include "gnrd/types.hpp"

#include <filesystem>

namespace gnrd {

/// Exact assignment value / k between two equal-size clouds (columns), after
/// mapping both through `feature` when given.
double empirical_ot_eval(const MatrixRef& gen_samples, const MatrixRef& held_out,
                         const RandomFeatureMap* feature = nullptr);

/// Seed for the evaluation feature map, independent of any training seed.
inline constexpr std::uint64_t kEvalFeatureSeed = 0x5eed0e7a1ULL;

/// random_mlp d -> 64 -> 32 from kEvalFeatureSeed.
RandomFeatureMap eval_feature_map(Index input_dim);

inline constexpr Index kGridGutter = 2;

/// Tile rows * cols images (each image one column of `samples`, row-major
/// pixels of size height x width) into a binary PGM with black gutters.
void export_image_grid(const MatrixRef& samples, Index rows, Index cols, Index height, Index width,
                       const std::filesystem::path& path);

}  // namespace gnrd
