#pragma once

#include "hoi/dataset/dataset.hpp"

#include <filesystem>
#include <string>

namespace hoi::dataset {

inline constexpr int kManifestSchemaVersion = 1;

/// Contents of `manifest.json` in a dataset directory.
struct DatasetManifest {
    int schema_version = kManifestSchemaVersion;
    std::size_t frames = kDefaultFrames;
    std::size_t stride = posekit::kDefaultStride;
    std::size_t samples_per_class = kDefaultSamplesPerClass;
    double jitter = 0.001;
    std::uint64_t seed = 0;
    std::map<MotionClass, std::uint64_t> class_seeds;
    std::map<MotionClass, std::string> files;
    std::size_t total_windows = 0;
};

struct DatasetOnDisk {
    DatasetManifest manifest;
    TrajectorySet trajectories;
};

/// Seed for one class derived from the dataset seed.
std::uint64_t class_seed(std::uint64_t seed, MotionClass motion);

/// Generate every default class and describe it in a manifest.
DatasetOnDisk generate_dataset(std::uint64_t seed, std::size_t frames, double jitter,
                               std::size_t stride, std::size_t samples_per_class,
                               const GeneratorConfig& config = {});

/// Writes manifest.json plus one trajectory file per class.
void save_dataset(const std::filesystem::path& dir, const DatasetOnDisk& data);

/// Reads a dataset directory and checks the trajectories against the manifest.
DatasetOnDisk load_dataset(const std::filesystem::path& dir);

/// Windows described by the manifest.
LabeledDataset windows_of(const DatasetOnDisk& data);

} // namespace hoi::dataset
