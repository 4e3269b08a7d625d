#include "phishkit/layers/checkpoint.hpp"

#include <cstdint>
#include <cstring>
#include <fstream>

#include "phishkit/error.hpp"

namespace phishkit::layers {

namespace {

constexpr char kMagic[8] = {'P', 'H', 'K', 'C', 'K', 'P', 'T', '1'};

template <typename T>
void write_pod(std::ofstream& out, T v) {
    out.write(reinterpret_cast<const char*>(&v), sizeof(T));
}

template <typename T>
T read_pod(std::ifstream& in, const std::string& path) {
    T v{};
    if (!in.read(reinterpret_cast<char*>(&v), sizeof(T)))
        throw IoError("truncated checkpoint " + path);
    return v;
}

} // namespace

void save_checkpoint(const NamedTensors& tensors, const std::string& path) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write checkpoint " + path);
    out.write(kMagic, sizeof(kMagic));
    write_pod<std::uint64_t>(out, tensors.size());
    for (const auto& [name, tensor] : tensors) {
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        const auto& shape = tensor.shape();
        write_pod<std::uint32_t>(out, static_cast<std::uint32_t>(shape.size()));
        for (std::size_t d : shape) write_pod<std::uint64_t>(out, d);
        out.write(reinterpret_cast<const char*>(tensor.data().data()),
                  static_cast<std::streamsize>(tensor.numel() * sizeof(double)));
    }
    if (!out) throw IoError("failed writing checkpoint " + path);
}

NamedTensors load_checkpoint(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot read checkpoint " + path);
    char magic[8];
    if (!in.read(magic, sizeof(magic)) ||
        std::memcmp(magic, kMagic, sizeof(kMagic)) != 0)
        throw IoError("not a checkpoint archive: " + path);
    const auto count = read_pod<std::uint64_t>(in, path);
    NamedTensors out;
    out.reserve(count);
    for (std::uint64_t i = 0; i < count; ++i) {
        const auto name_len = read_pod<std::uint32_t>(in, path);
        std::string name(name_len, '\0');
        if (!in.read(name.data(), name_len))
            throw IoError("truncated checkpoint " + path);
        const auto ndim = read_pod<std::uint32_t>(in, path);
        numerics::Shape shape(ndim);
        std::size_t numel = 1;
        for (std::uint32_t d = 0; d < ndim; ++d) {
            shape[d] = static_cast<std::size_t>(read_pod<std::uint64_t>(in, path));
            numel *= shape[d];
        }
        std::vector<double> data(numel);
        if (!in.read(reinterpret_cast<char*>(data.data()),
                     static_cast<std::streamsize>(numel * sizeof(double))))
            throw IoError("truncated checkpoint " + path);
        out.emplace_back(std::move(name),
                         numerics::Tensor::from(std::move(data), std::move(shape)));
    }
    return out;
}

} // namespace phishkit::layers
