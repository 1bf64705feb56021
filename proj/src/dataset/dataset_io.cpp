#include "hoi/dataset/dataset_io.hpp"

#include "hoi/posekit/trajectory_io.hpp"

#include <json.hpp>

#include <fstream>

namespace hoi::dataset {

using nlohmann::json;

std::uint64_t class_seed(std::uint64_t seed, MotionClass motion)
{
    // splitmix64 step keeps per-class streams unrelated.
    std::uint64_t z = seed + 0x9e3779b97f4a7c15ull * static_cast<std::uint64_t>(code(motion) + 1);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
}

DatasetOnDisk generate_dataset(std::uint64_t seed, std::size_t frames, double jitter,
                               std::size_t stride, std::size_t samples_per_class,
                               const GeneratorConfig& config)
{
    DatasetOnDisk out;
    out.manifest.frames = frames;
    out.manifest.stride = stride;
    out.manifest.samples_per_class = samples_per_class;
    out.manifest.jitter = jitter;
    out.manifest.seed = seed;
    for (const auto motion : kAllClasses) {
        const auto s = class_seed(seed, motion);
        out.manifest.class_seeds[motion] = s;
        out.manifest.files[motion] = std::string(class_name(motion)) + ".csv";
        out.trajectories[motion] = generate_motion_trajectory(motion, frames, s, jitter, config);
    }
    out.manifest.total_windows = samples_per_class * kAllClasses.size();
    return out;
}

void save_dataset(const std::filesystem::path& dir, const DatasetOnDisk& data)
{
    std::filesystem::create_directories(dir);
    json classes = json::array();
    for (const auto& [motion, poses] : data.trajectories) {
        const std::string& file = data.manifest.files.at(motion);
        posekit::save_trajectory(dir / file, poses);
        classes.push_back({{"name", class_name(motion)},
                           {"code", code(motion)},
                           {"file", file},
                           {"seed", data.manifest.class_seeds.at(motion)},
                           {"frames", poses.size()}});
    }
    const json manifest = {{"schema_version", data.manifest.schema_version},
                           {"frames", data.manifest.frames},
                           {"stride", data.manifest.stride},
                           {"samples_per_class", data.manifest.samples_per_class},
                           {"jitter", data.manifest.jitter},
                           {"seed", data.manifest.seed},
                           {"window_shape", {posekit::kWindowLength, posekit::kFeatureCount}},
                           {"total_windows", data.manifest.total_windows},
                           {"classes", classes}};
    std::ofstream out(dir / "manifest.json", std::ios::binary);
    if (!out)
        throw std::runtime_error("cannot write manifest in " + dir.string());
    out << manifest.dump(2) << '\n';
}

DatasetOnDisk load_dataset(const std::filesystem::path& dir)
{
    std::ifstream in(dir / "manifest.json");
    if (!in)
        throw std::runtime_error("no manifest.json in " + dir.string());
    const json manifest = json::parse(in);

    DatasetOnDisk data;
    auto& m = data.manifest;
    m.schema_version = manifest.at("schema_version").get<int>();
    if (m.schema_version != kManifestSchemaVersion)
        throw std::runtime_error("unsupported dataset schema version " + std::to_string(m.schema_version));
    m.frames = manifest.at("frames").get<std::size_t>();
    m.stride = manifest.at("stride").get<std::size_t>();
    m.samples_per_class = manifest.at("samples_per_class").get<std::size_t>();
    m.jitter = manifest.at("jitter").get<double>();
    m.seed = manifest.at("seed").get<std::uint64_t>();
    m.total_windows = manifest.at("total_windows").get<std::size_t>();
    const auto shape = manifest.at("window_shape").get<std::vector<int>>();
    if (shape != std::vector<int>{posekit::kWindowLength, posekit::kFeatureCount})
        throw std::runtime_error("manifest window shape does not match (10, 63)");

    for (const auto& entry : manifest.at("classes")) {
        const MotionClass motion = class_from_code(entry.at("code").get<int>());
        if (class_name(motion) != entry.at("name").get<std::string>())
            throw std::runtime_error("manifest class name/code mismatch");
        const auto file = entry.at("file").get<std::string>();
        m.files[motion] = file;
        m.class_seeds[motion] = entry.at("seed").get<std::uint64_t>();
        auto poses = posekit::load_trajectory(dir / file);
        if (poses.size() != entry.at("frames").get<std::size_t>())
            throw std::runtime_error("trajectory " + file + " frame count differs from manifest");
        data.trajectories[motion] = std::move(poses);
    }
    return data;
}

LabeledDataset windows_of(const DatasetOnDisk& data)
{
    auto windows = build_dataset(data.trajectories, data.manifest.stride, data.manifest.samples_per_class);
    if (windows.size() != data.manifest.total_windows)
        throw std::runtime_error("manifest reports " + std::to_string(data.manifest.total_windows)
                                 + " windows, dataset yields " + std::to_string(windows.size()));
    return windows;
}

} // namespace hoi::dataset
