#include "gnrd/checkpoint.hpp"

#include "gnrd/error.hpp"

#include <json.hpp>

#include <bit>
#include <cstring>
#include <fstream>
#include <string>

namespace gnrd {

namespace {

using nlohmann::json;

static_assert(std::endian::native == std::endian::little, "checkpoint I/O assumes a little-endian host");

template <typename T>
void write_pod(std::ostream& out, const T& v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::istream& in, const std::filesystem::path& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T))) throw DataError("checkpoint " + path.string() + " is truncated");
    return v;
}

void write_layers(std::ostream& out, const std::vector<AffineLayer>& layers) {
    for (const auto& l : layers) {
        out.write(reinterpret_cast<const char*>(l.weight.data()), static_cast<std::streamsize>(l.weight.size() * sizeof(double)));
        out.write(reinterpret_cast<const char*>(l.bias.data()), static_cast<std::streamsize>(l.bias.size() * sizeof(double)));
    }
}

std::vector<AffineLayer> read_layers(std::istream& in, const std::vector<Index>& dims, const std::filesystem::path& path) {
    std::vector<AffineLayer> layers;
    for (std::size_t l = 0; l + 1 < dims.size(); ++l) {
        AffineLayer layer{Matrix(dims[l + 1], dims[l]), Vector(dims[l + 1])};
        const auto wbytes = static_cast<std::streamsize>(layer.weight.size() * sizeof(double));
        const auto bbytes = static_cast<std::streamsize>(layer.bias.size() * sizeof(double));
        if (!in.read(reinterpret_cast<char*>(layer.weight.data()), wbytes) ||
            !in.read(reinterpret_cast<char*>(layer.bias.data()), bbytes)) {
            throw DataError("checkpoint " + path.string() + " is truncated");
        }
        layers.push_back(std::move(layer));
    }
    return layers;
}

}  // namespace

void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path) {
    const auto& g = ckpt.state.generator;
    const auto& adam = ckpt.state.adam;
    json header = {
        {"layer_dims", g.layer_dims},
        {"output", std::string(to_string(g.output))},
        {"leaky_slope", g.leaky_slope},
        {"adam", {{"lr", adam.lr}, {"beta1", adam.beta1}, {"beta2", adam.beta2}, {"eps", adam.eps}, {"t", adam.t}}},
        {"step", ckpt.state.step},
        {"seed", ckpt.seed},
        {"image_rows", ckpt.image_rows},
        {"image_cols", ckpt.image_cols},
    };
    const std::string text = header.dump();

    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write checkpoint " + path.string());
    out.write(kCheckpointMagic, sizeof(kCheckpointMagic));
    write_pod(out, kCheckpointVersion);
    write_pod(out, static_cast<std::uint64_t>(text.size()));
    out.write(text.data(), static_cast<std::streamsize>(text.size()));
    write_layers(out, g.layers);
    write_layers(out, adam.m);
    write_layers(out, adam.v);
    if (!out) throw DataError("failed writing checkpoint " + path.string());
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open checkpoint " + path.string());
    char magic[sizeof(kCheckpointMagic)];
    if (!in.read(magic, sizeof(magic)) || std::memcmp(magic, kCheckpointMagic, sizeof(magic)) != 0) {
        throw DataError("checkpoint " + path.string() + ": not a checkpoint file (bad magic)");
    }
    const auto version = read_pod<std::uint32_t>(in, path);
    if (version != kCheckpointVersion) {
        throw DataError("checkpoint " + path.string() + ": unsupported version " + std::to_string(version) +
                        " (expected " + std::to_string(kCheckpointVersion) + ")");
    }
    const auto header_len = read_pod<std::uint64_t>(in, path);
    if (header_len > (1u << 24)) throw DataError("checkpoint " + path.string() + ": implausible header length");
    std::string text(header_len, '\0');
    if (!in.read(text.data(), static_cast<std::streamsize>(header_len))) {
        throw DataError("checkpoint " + path.string() + " is truncated");
    }

    Checkpoint ckpt;
    try {
        const json header = json::parse(text);
        auto& g = ckpt.state.generator;
        g.layer_dims = header.at("layer_dims").get<std::vector<Index>>();
        g.output = parse_output_activation(header.at("output").get<std::string>());
        g.leaky_slope = header.at("leaky_slope").get<double>();
        const auto& a = header.at("adam");
        auto& adam = ckpt.state.adam;
        adam.lr = a.at("lr").get<double>();
        adam.beta1 = a.at("beta1").get<double>();
        adam.beta2 = a.at("beta2").get<double>();
        adam.eps = a.at("eps").get<double>();
        adam.t = a.at("t").get<std::int64_t>();
        ckpt.state.step = header.at("step").get<std::int64_t>();
        ckpt.seed = header.at("seed").get<std::uint64_t>();
        ckpt.image_rows = header.at("image_rows").get<Index>();
        ckpt.image_cols = header.at("image_cols").get<Index>();
    } catch (const json::exception& e) {
        throw DataError("checkpoint " + path.string() + ": malformed header: " + e.what());
    } catch (const ConfigError& e) {
        throw DataError("checkpoint " + path.string() + ": " + e.what());
    }
    auto& g = ckpt.state.generator;
    if (g.layer_dims.size() < 2) throw DataError("checkpoint " + path.string() + ": too few layers");
    for (Index d : g.layer_dims) {
        if (d <= 0 || d > (Index{1} << 24)) throw DataError("checkpoint " + path.string() + ": bad layer dim");
    }
    g.layers = read_layers(in, g.layer_dims, path);
    ckpt.state.adam.m = read_layers(in, g.layer_dims, path);
    ckpt.state.adam.v = read_layers(in, g.layer_dims, path);
    if (in.peek() != std::char_traits<char>::eof()) throw DataError("checkpoint " + path.string() + ": trailing bytes");
    return ckpt;
}

}  // namespace gnrd
