#pragma once

#include "gnrd/training.hpp"

#include <filesystem>
#include <optional>

namespace gnrd {

// Binary container: 8-byte magic, u32 format version, u64 header length, a
// JSON header (architecture, optimizer scalars, step, seed, image shape),
// then every tensor as little-endian IEEE-754 doubles in header order:
// per layer weight (column-major) and bias, first for the generator, then
// Adam first moments, then Adam second moments.
inline constexpr char kCheckpointMagic[8] = {'G', 'N', 'R', 'D', 'C', 'K', 'P', 'T'};
inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
    TrainState state;
    std::uint64_t seed = 0;
    Index image_rows = 0;  // 0 when the data are not images
    Index image_cols = 0;
};

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);

/// Throws DataError on a bad magic, version, or truncated payload.
Checkpoint load_checkpoint(const std::filesystem::path& path);

}  // namespace gnrd
