#include "hoi/dataset/dataset.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <string>

namespace hoi::dataset {

std::vector<posekit::HandPose> generate_motion_trajectory(MotionClass motion, std::size_t frames,
                                                          std::uint64_t seed, double jitter,
                                                          const GeneratorConfig& config)
{
    (void)class_name(motion); // validates the code
    if (frames < kMinFrames)
        throw std::invalid_argument("trajectory needs at least " + std::to_string(kMinFrames) + " frames");
    if (!(jitter >= 0.0))
        throw std::invalid_argument("jitter must be >= 0");

    const GestureInstance instance = draw_instance(motion, seed, config);
    std::seed_seq seq{static_cast<std::uint32_t>(seed), static_cast<std::uint32_t>(seed >> 32),
                      static_cast<std::uint32_t>(code(motion)), 0x7a11u};
    std::mt19937_64 rng(seq);
    std::normal_distribution<double> noise(0.0, 1.0);

    std::vector<posekit::HandPose> poses;
    poses.reserve(frames);
    for (std::size_t i = 0; i < frames; ++i) {
        const double t = static_cast<double>(i) / config.frame_rate;
        posekit::HandPose pose = class_pose(motion, t, instance, config);
        if (jitter > 0.0)
            for (int j = 0; j < posekit::kJointCount; ++j)
                for (int c = 0; c < 3; ++c)
                    pose.joints(j, c) += jitter * noise(rng);
        poses.push_back(pose);
    }
    return poses;
}

std::vector<std::size_t> LabeledDataset::class_counts() const
{
    std::vector<std::size_t> counts(static_cast<std::size_t>(class_count), 0);
    for (const auto& s : samples)
        ++counts.at(static_cast<std::size_t>(code(s.label)));
    return counts;
}

std::vector<std::size_t> window_offsets(std::size_t frames, std::size_t stride, std::size_t count)
{
    const std::size_t available = max_windows(frames, stride);
    if (count > available)
        throw InsufficientData("requested " + std::to_string(count) + " windows but only "
                               + std::to_string(available) + " fit");
    std::vector<std::size_t> offsets(count);
    if (count == 1) {
        offsets[0] = 0;
        return offsets;
    }
    for (std::size_t i = 0; i < count; ++i)
        offsets[i] = i * (available - 1) / (count - 1);
    return offsets;
}

LabeledDataset build_dataset(const TrajectorySet& trajectories, std::size_t window_stride,
                             std::size_t samples_per_class)
{
    LabeledDataset data;
    for (const auto& [motion, poses] : trajectories)
        data.class_count = std::max(data.class_count, code(motion) + 1);
    if (samples_per_class == 0)
        return data;

    for (const auto& [motion, poses] : trajectories) {
        if (max_windows(poses.size(), window_stride) < samples_per_class)
            throw InsufficientData("class " + std::string(class_name(motion)) + ": "
                                   + std::to_string(poses.size()) + " frames yield "
                                   + std::to_string(max_windows(poses.size(), window_stride))
                                   + " windows, " + std::to_string(samples_per_class) + " requested");
        const std::span<const posekit::HandPose> all(poses);
        for (const std::size_t offset : window_offsets(poses.size(), window_stride, samples_per_class)) {
            auto window = posekit::make_window(all.subspan(offset), window_stride);
            data.samples.push_back(Sample{*window, motion, offset});
        }
    }
    return data;
}

std::pair<LabeledDataset, LabeledDataset> stratified_split(const LabeledDataset& data,
                                                           double train_fraction, std::uint64_t seed)
{
    if (!(train_fraction > 0.0 && train_fraction < 1.0))
        throw std::invalid_argument("train fraction must lie in (0, 1)");

    std::vector<std::vector<std::size_t>> by_class(static_cast<std::size_t>(data.class_count));
    for (std::size_t i = 0; i < data.samples.size(); ++i)
        by_class.at(static_cast<std::size_t>(code(data.samples[i].label))).push_back(i);

    LabeledDataset train, validation;
    train.class_count = validation.class_count = data.class_count;
    std::mt19937_64 rng(seed);
    for (std::size_t c = 0; c < by_class.size(); ++c) {
        auto& idx = by_class[c];
        if (idx.empty())
            continue;
        if (idx.size() < 2)
            throw InsufficientData("class " + std::string(class_name(static_cast<MotionClass>(c)))
                                   + " has fewer than 2 samples");
        std::shuffle(idx.begin(), idx.end(), rng);
        const auto n_train = static_cast<std::size_t>(std::floor(train_fraction * static_cast<double>(idx.size()) + 1e-9));
        for (std::size_t k = 0; k < idx.size(); ++k)
            (k < n_train ? train : validation).samples.push_back(data.samples[idx[k]]);
    }
    return {std::move(train), std::move(validation)};
}

} // namespace hoi::dataset
