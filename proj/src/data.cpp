#include "gnrd/data.hpp"

#include "gnrd/error.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <fstream>
#include <limits>
#include <numbers>
#include <string>

namespace gnrd {

namespace {

std::uint32_t read_be32(const unsigned char* p) {
    return (std::uint32_t{p[0]} << 24) | (std::uint32_t{p[1]} << 16) | (std::uint32_t{p[2]} << 8) | std::uint32_t{p[3]};
}

void write_be32(std::ostream& out, std::uint32_t v) {
    const std::array<char, 4> bytes{static_cast<char>(v >> 24), static_cast<char>(v >> 16), static_cast<char>(v >> 8),
                                    static_cast<char>(v)};
    out.write(bytes.data(), bytes.size());
}

}  // namespace

Dataset load_idx_images(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open IDX file " + path.string());
    std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());

    constexpr std::size_t header = 16;
    if (bytes.size() < header) {
        throw DataError("IDX file " + path.string() + " is truncated: " + std::to_string(bytes.size()) +
                        " bytes, header needs 16");
    }
    const std::uint32_t magic = read_be32(bytes.data());
    if (magic != kIdxImageMagic) throw DataError("IDX file " + path.string() + " has bad magic " + std::to_string(magic));
    const std::uint64_t count = read_be32(bytes.data() + 4);
    const std::uint64_t rows = read_be32(bytes.data() + 8);
    const std::uint64_t cols = read_be32(bytes.data() + 12);

    // Each factor is < 2^32, so rows * cols cannot wrap; the product with count can.
    const std::uint64_t pixels = rows * cols;
    if (pixels != 0 && count > std::numeric_limits<std::uint64_t>::max() / pixels) {
        throw DataError("IDX file " + path.string() + ": dimensions overflow");
    }
    const std::uint64_t payload = count * pixels;
    if (payload > bytes.size() - header) {
        throw DataError("IDX file " + path.string() + " is truncated: header promises " + std::to_string(payload) +
                        " pixel bytes, found " + std::to_string(bytes.size() - header));
    }
    if (pixels == 0 || count == 0) throw DataError("IDX file " + path.string() + " holds no pixels");

    Dataset d;
    d.kind = DatasetKind::image;
    d.image_rows = static_cast<Index>(rows);
    d.image_cols = static_cast<Index>(cols);
    d.samples.resize(static_cast<Index>(pixels), static_cast<Index>(count));
    const unsigned char* src = bytes.data() + header;
    for (std::uint64_t k = 0; k < payload; ++k) d.samples.data()[k] = static_cast<double>(src[k]) / 255.0;
    return d;
}

void write_idx_images(const Dataset& data, const std::filesystem::path& path) {
    if (data.kind != DatasetKind::image || data.image_rows * data.image_cols != data.dim()) {
        throw ConfigError("write_idx_images: dataset is not an image set");
    }
    if (data.samples.size() > 0 && (data.samples.minCoeff() < 0.0 || data.samples.maxCoeff() > 1.0)) {
        throw ConfigError("write_idx_images: pixel values outside [0, 1]");
    }
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write IDX file " + path.string());
    write_be32(out, kIdxImageMagic);
    write_be32(out, static_cast<std::uint32_t>(data.count()));
    write_be32(out, static_cast<std::uint32_t>(data.image_rows));
    write_be32(out, static_cast<std::uint32_t>(data.image_cols));
    std::vector<char> buf(static_cast<std::size_t>(data.samples.size()));
    for (Index k = 0; k < data.samples.size(); ++k) {
        buf[k] = static_cast<char>(static_cast<unsigned char>(std::lround(data.samples.data()[k] * 255.0)));
    }
    out.write(buf.data(), static_cast<std::streamsize>(buf.size()));
    if (!out) throw DataError("failed writing IDX file " + path.string());
}

void MixtureSpec::validate() const {
    if (means.empty()) throw ConfigError("mixture: no components");
    if (!(stddev > 0.0)) throw ConfigError("mixture: std must be positive");
    if (!weights.empty()) {
        if (weights.size() != means.size()) throw ConfigError("mixture: weights and means differ in length");
        double total = 0.0;
        for (double w : weights) {
            if (!(w >= 0.0)) throw ConfigError("mixture: weights must be nonnegative");
            total += w;
        }
        if (std::abs(total - 1.0) > 1e-9) throw ConfigError("mixture: weights must sum to 1");
    }
}

MixtureSpec ring_mixture(Index components, double radius, double stddev) {
    if (components < 1) throw ConfigError("ring mixture: need at least one component");
    MixtureSpec spec;
    spec.stddev = stddev;
    for (Index k = 0; k < components; ++k) {
        const double angle = 2.0 * std::numbers::pi * static_cast<double>(k) / static_cast<double>(components);
        spec.means.emplace_back(radius * std::cos(angle), radius * std::sin(angle));
    }
    return spec;
}

Dataset synth_gaussian_mixture(const MixtureSpec& spec, Index n, Rng& rng) {
    spec.validate();
    if (n < 1) throw ConfigError("mixture: sample count must be at least 1");
    const std::size_t k = spec.means.size();
    std::vector<double> cdf(k);
    double running = 0.0;
    for (std::size_t c = 0; c < k; ++c) {
        running += spec.weights.empty() ? 1.0 / static_cast<double>(k) : spec.weights[c];
        cdf[c] = running;
    }

    Dataset d;
    d.kind = DatasetKind::vector2d;
    d.samples.resize(2, n);
    for (Index i = 0; i < n; ++i) {
        const double u = rng.uniform() * running;
        std::size_t c = static_cast<std::size_t>(std::upper_bound(cdf.begin(), cdf.end(), u) - cdf.begin());
        c = std::min(c, k - 1);
        const double x = rng.normal();
        const double y = rng.normal();
        d.samples(0, i) = spec.means[c].x() + spec.stddev * x;
        d.samples(1, i) = spec.means[c].y() + spec.stddev * y;
    }
    return d;
}

Matrix sample_batch(const Dataset& data, Index n, Rng& rng) {
    if (data.count() < 1) throw ConfigError("sample_batch: dataset is empty");
    Matrix batch(data.dim(), n);
    for (Index i = 0; i < n; ++i) batch.col(i) = data.samples.col(static_cast<Index>(rng.below(data.count())));
    return batch;
}

}  // namespace gnrd
