#include "hoi/mpm/checkpoint.hpp"

#include "hoi/common/bytes.hpp"

#include <fstream>
#include <iterator>

namespace hoi::mpm {

namespace {
constexpr std::uint8_t kMagic[4] = {'H', 'O', 'I', 'M'};
constexpr std::size_t kHeaderSize = 4 + 6 * 4;
} // namespace

std::vector<std::uint8_t> serialize(const MpmNetwork& network)
{
    const auto& s = network.shape();
    std::vector<std::uint8_t> out(std::begin(kMagic), std::end(kMagic));
    put_u32(out, kCheckpointVersion);
    put_u32(out, static_cast<std::uint32_t>(s.input));
    put_u32(out, static_cast<std::uint32_t>(s.hidden));
    put_u32(out, static_cast<std::uint32_t>(s.layers));
    put_u32(out, static_cast<std::uint32_t>(s.classes));
    put_u32(out, static_cast<std::uint32_t>(network.parameters().size()));
    for (double v : network.input_mean())
        put_f64(out, v);
    for (double v : network.input_scale())
        put_f64(out, v);
    for (double v : network.parameters())
        put_f64(out, v);
    return out;
}

MpmNetwork deserialize(const std::vector<std::uint8_t>& bytes)
{
    const std::span<const std::uint8_t> in(bytes);
    if (in.size() < kHeaderSize || !std::equal(std::begin(kMagic), std::end(kMagic), in.begin()))
        throw CheckpointError("not a checkpoint (bad magic)");
    if (get_u32(in, 4) != kCheckpointVersion)
        throw CheckpointError("unsupported checkpoint version " + std::to_string(get_u32(in, 4)));

    NetworkShape shape;
    shape.input = static_cast<int>(get_u32(in, 8));
    shape.hidden = static_cast<int>(get_u32(in, 12));
    shape.layers = static_cast<int>(get_u32(in, 16));
    shape.classes = static_cast<int>(get_u32(in, 20));
    const std::size_t count = get_u32(in, 24);

    MpmNetwork net = [&] {
        try {
            return MpmNetwork(shape);
        } catch (const ShapeMismatch& e) {
            throw CheckpointError(std::string("invalid shape table: ") + e.what());
        }
    }();
    if (static_cast<Eigen::Index>(count) != net.parameters().size())
        throw CheckpointError("parameter count does not match the shape table");
    const std::size_t expected = kHeaderSize + 8 * (2 * static_cast<std::size_t>(shape.input) + count);
    if (in.size() != expected)
        throw CheckpointError("checkpoint size " + std::to_string(in.size()) + " differs from expected "
                              + std::to_string(expected));

    std::size_t at = kHeaderSize;
    for (Eigen::Index i = 0; i < shape.input; ++i, at += 8)
        net.input_mean()(i) = get_f64(in, at);
    for (Eigen::Index i = 0; i < shape.input; ++i, at += 8)
        net.input_scale()(i) = get_f64(in, at);
    for (Eigen::Index i = 0; i < net.parameters().size(); ++i, at += 8)
        net.parameters()(i) = get_f64(in, at);
    if (!net.parameters().allFinite() || !net.input_mean().allFinite() || !net.input_scale().allFinite())
        throw CheckpointError("checkpoint contains non-finite values");
    return net;
}

void save_checkpoint(const std::filesystem::path& path, const MpmNetwork& network)
{
    const auto bytes = serialize(network);
    std::ofstream out(path, std::ios::binary);
    if (!out)
        throw CheckpointError("cannot open for writing: " + path.string());
    out.write(reinterpret_cast<const char*>(bytes.data()), static_cast<std::streamsize>(bytes.size()));
    if (!out)
        throw CheckpointError("write failed: " + path.string());
}

MpmNetwork load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in)
        throw CheckpointError("cannot open for reading: " + path.string());
    const std::vector<std::uint8_t> bytes((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
    return deserialize(bytes);
}

} // namespace hoi::mpm
