#pragma once

#include "hoi/dataset/motion_class.hpp"
#include "hoi/dataset/synthetic_hand.hpp"
#include "hoi/posekit/window.hpp"

#include <cstddef>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <utility>
#include <vector>

namespace hoi::dataset {

inline constexpr std::size_t kDefaultFrames = 2000;
inline constexpr std::size_t kDefaultSamplesPerClass = 250;
inline constexpr std::size_t kMinFrames = 100;

class InsufficientData : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

/// Synthetic recording of one held gesture: `frames` poses at the configured
/// frame rate, each coordinate perturbed by N(0, jitter^2). Deterministic in
/// (motion, frames, seed, jitter, config).
std::vector<posekit::HandPose> generate_motion_trajectory(MotionClass motion,
                                                          std::size_t frames = kDefaultFrames,
                                                          std::uint64_t seed = 0,
                                                          double jitter = 0.001,
                                                          const GeneratorConfig& config = {});

struct Sample {
    posekit::FeatureWindow window;
    MotionClass label = MotionClass::Keep;
    std::size_t offset = 0; ///< start frame within the source trajectory
};

struct LabeledDataset {
    std::vector<Sample> samples;
    int class_count = kDefaultClassCount;

    std::size_t size() const { return samples.size(); }
    bool empty() const { return samples.empty(); }
    std::vector<std::size_t> class_counts() const;
};

using TrajectorySet = std::map<MotionClass, std::vector<posekit::HandPose>>;

/// Number of distinct windows a trajectory of `frames` poses yields.
constexpr std::size_t max_windows(std::size_t frames, std::size_t stride)
{
    const std::size_t span = posekit::required_span(stride);
    return frames < span ? 0 : frames - span + 1;
}

/// Start offsets of the windows taken from one trajectory: `count` distinct
/// offsets spread evenly over the valid range.
std::vector<std::size_t> window_offsets(std::size_t frames, std::size_t stride, std::size_t count);

/// Cut exactly `samples_per_class` windows from each trajectory. Throws
/// InsufficientData naming the class when a trajectory is too short.
LabeledDataset build_dataset(const TrajectorySet& trajectories,
                             std::size_t window_stride = posekit::kDefaultStride,
                             std::size_t samples_per_class = kDefaultSamplesPerClass);

/// Per-class split: floor(fraction * count) of each class to train, the rest
/// to validation. Deterministic under seed.
std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data,
                                                           double train_fraction = 0.8,
                                                           std::uint64_t seed = 0);

} // namespace hoi::dataset
