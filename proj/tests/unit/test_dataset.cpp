#include "hoi/dataset/dataset.hpp"
#include "hoi/dataset/dataset_io.hpp"

#include <catch_amalgamated.hpp>

#include <filesystem>
#include <fstream>
#include <set>

using namespace hoi;
using namespace hoi::dataset;

namespace {

TrajectorySet default_trajectories(std::uint64_t seed, std::size_t frames = kDefaultFrames)
{
    TrajectorySet set;
    for (auto c : kAllClasses)
        set[c] = generate_motion_trajectory(c, frames, class_seed(seed, c), 0.001);
    return set;
}

double coordinate_variance(const std::vector<posekit::HandPose>& poses, int joint, int axis)
{
    double mean = 0, sq = 0;
    for (const auto& p : poses)
        mean += p.joints(joint, axis);
    mean /= double(poses.size());
    for (const auto& p : poses)
        sq += (p.joints(joint, axis) - mean) * (p.joints(joint, axis) - mean);
    return sq / double(poses.size());
}

} // namespace

TEST_CASE("noise-free Keep is a static pose", "[dataset][generator]")
{
    const auto poses = generate_motion_trajectory(MotionClass::Keep, 2000, 7, 0.0);
    REQUIRE(poses.size() == 2000);
    for (const auto& p : poses)
        REQUIRE(p.joints == poses.front().joints);
}

TEST_CASE("generator is deterministic under its seed", "[dataset][generator]")
{
    for (auto c : kAllClasses) {
        REQUIRE(generate_motion_trajectory(c, 500, 7, 0.001) == generate_motion_trajectory(c, 500, 7, 0.001));
        REQUIRE_FALSE(generate_motion_trajectory(c, 500, 7, 0.001) == generate_motion_trajectory(c, 500, 8, 0.001));
    }
}

TEST_CASE("Come oscillates the index finger along y", "[dataset][generator]")
{
    const GeneratorConfig config;
    const double swing = config.oscillation_amplitude * config.oscillation_depth;

    const auto clean = generate_motion_trajectory(MotionClass::Come, 2000, 7, 0.0);
    for (int j = 0; j < posekit::kJointCount; ++j) {
        const bool index = j >= posekit::joint::kIndexMcp && j <= posekit::joint::kIndexTip;
        for (int a = 0; a < 3; ++a)
            if (!index || a != 1)
                REQUIRE(coordinate_variance(clean, j, a) == Catch::Approx(0.0).margin(1e-18));
    }
    // Sinusoid of amplitude `swing` at full weight on the tip.
    REQUIRE(coordinate_variance(clean, posekit::joint::kIndexTip, 1)
            == Catch::Approx(swing * swing / 2.0).epsilon(0.05));

    const double jitter = 0.001;
    const auto noisy = generate_motion_trajectory(MotionClass::Come, 2000, 7, jitter);
    double other_max = 0.0;
    for (int j = 0; j < posekit::kJointCount; ++j) {
        if (j >= posekit::joint::kIndexMcp && j <= posekit::joint::kIndexTip)
            continue;
        for (int a = 0; a < 3; ++a)
            other_max = std::max(other_max, coordinate_variance(noisy, j, a));
    }
    REQUIRE(other_max == Catch::Approx(jitter * jitter).epsilon(0.25));
    REQUIRE(coordinate_variance(noisy, posekit::joint::kIndexTip, 1)
            == Catch::Approx(swing * swing / 2.0 + jitter * jitter).epsilon(0.15));
}

TEST_CASE("generator preconditions", "[dataset][generator]")
{
    REQUIRE_THROWS(generate_motion_trajectory(MotionClass::Keep, 99, 0, 0.0));
    REQUIRE_THROWS(generate_motion_trajectory(MotionClass::Keep, 100, 0, -1.0));
    REQUIRE_THROWS_AS(generate_motion_trajectory(static_cast<MotionClass>(9), 100, 0, 0.0), UnknownClass);
}

TEST_CASE("default recipe yields 1000 windows of shape (10, 63)", "[dataset][build]")
{
    const auto data = build_dataset(default_trajectories(1), 10, 250);
    REQUIRE(data.size() == 1000);
    for (auto n : data.class_counts())
        REQUIRE(n == 250);
    for (const auto& s : data.samples) {
        REQUIRE(s.window.frames.rows() == 10);
        REQUIRE(s.window.frames.cols() == 63);
    }
}

TEST_CASE("dataset build edge cases", "[dataset][build]")
{
    REQUIRE(build_dataset(default_trajectories(1, 300), 10, 0).empty());
    // 300 frames, span 91: offsets 0..209 -> 210 distinct windows.
    REQUIRE(max_windows(300, 10) == 210);
    REQUIRE_THROWS_AS(build_dataset(default_trajectories(1, 300), 10, 250), InsufficientData);
    REQUIRE_NOTHROW(build_dataset(default_trajectories(1, 300), 10, 210));
    try {
        build_dataset(default_trajectories(1, 300), 10, 211);
    } catch (const InsufficientData& e) {
        REQUIRE(std::string(e.what()).find("Keep") != std::string::npos);
    }
}

TEST_CASE("window offsets are distinct and in range", "[dataset][build]")
{
    const auto offsets = window_offsets(2000, 10, 250);
    REQUIRE(offsets.size() == 250);
    REQUIRE(offsets.front() == 0);
    REQUIRE(offsets.back() == 2000 - 91);
    for (std::size_t i = 1; i < offsets.size(); ++i)
        REQUIRE(offsets[i] > offsets[i - 1]);
}

TEST_CASE("stratified split preserves class proportions", "[dataset][split]")
{
    const auto data = build_dataset(default_trajectories(2), 10, 250);
    const auto [train, val] = stratified_split(data, 0.8, 42);
    REQUIRE(train.size() == 800);
    REQUIRE(val.size() == 200);
    for (auto n : train.class_counts())
        REQUIRE(n == 200);
    for (auto n : val.class_counts())
        REQUIRE(n == 50);

    std::set<std::pair<int, std::size_t>> train_ids, val_ids;
    for (const auto& s : train.samples)
        train_ids.insert({code(s.label), s.offset});
    for (const auto& s : val.samples)
        val_ids.insert({code(s.label), s.offset});
    REQUIRE(train_ids.size() == 800);
    REQUIRE(val_ids.size() == 200);
    for (const auto& id : val_ids)
        REQUIRE_FALSE(train_ids.contains(id));

    const auto [train2, val2] = stratified_split(data, 0.8, 42);
    for (std::size_t i = 0; i < train.size(); ++i)
        REQUIRE(train.samples[i].offset == train2.samples[i].offset);
}

TEST_CASE("split of a two-per-class toy set", "[dataset][split]")
{
    LabeledDataset toy;
    for (auto c : kAllClasses)
        for (std::size_t k = 0; k < 2; ++k)
            toy.samples.push_back(Sample{{}, c, k});
    const auto [train, val] = stratified_split(toy, 0.5, 1);
    for (auto n : train.class_counts())
        REQUIRE(n == 1);
    for (auto n : val.class_counts())
        REQUIRE(n == 1);

    toy.samples.pop_back();
    REQUIRE_THROWS_AS(stratified_split(toy, 0.5, 1), InsufficientData);
    REQUIRE_THROWS(stratified_split(toy, 1.0, 1));
}

TEST_CASE("synthetic classes are separable by nearest centroid", "[dataset][property]")
{
    const auto data = build_dataset(default_trajectories(3), 10, 250);
    const auto [train, val] = stratified_split(data, 0.8, 0);
    std::vector<posekit::WindowMatrix> centroid(4, posekit::WindowMatrix::Zero());
    for (const auto& s : train.samples)
        centroid[std::size_t(code(s.label))] += s.window.frames / 200.0;
    std::size_t correct = 0;
    for (const auto& s : val.samples) {
        int best = 0;
        double best_d = 1e300;
        for (int c = 0; c < 4; ++c) {
            const double d = (s.window.frames - centroid[std::size_t(c)]).squaredNorm();
            if (d < best_d) {
                best_d = d;
                best = c;
            }
        }
        correct += best == code(s.label);
    }
    REQUIRE(double(correct) / double(val.size()) > 0.5);
}

TEST_CASE("dataset directory round-trip", "[dataset][io]")
{
    const auto dir = std::filesystem::temp_directory_path() / "hoi_dataset_roundtrip";
    std::filesystem::remove_all(dir);
    const auto generated = generate_dataset(5, 300, 0.001, 10, 20);
    save_dataset(dir, generated);
    REQUIRE(std::filesystem::exists(dir / "manifest.json"));
    for (auto c : kAllClasses)
        REQUIRE(std::filesystem::exists(dir / (std::string(class_name(c)) + ".csv")));

    const auto loaded = load_dataset(dir);
    REQUIRE(loaded.manifest.total_windows == 80);
    for (auto c : kAllClasses)
        REQUIRE(loaded.trajectories.at(c) == generated.trajectories.at(c));
    REQUIRE(windows_of(loaded).size() == 80);
    std::filesystem::remove_all(dir);
}
