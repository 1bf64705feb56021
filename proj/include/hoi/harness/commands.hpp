#pragma once

#include "hoi/dataset/dataset_io.hpp"
#include "hoi/harness/pipeline.hpp"
#include "hoi/mpm/training.hpp"

#include <json.hpp>

#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

namespace hoi::harness {

class CommandError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

struct DataConfig {
    std::uint64_t seed = 0;
    std::size_t frames = dataset::kDefaultFrames;
    double jitter = 0.001; ///< m
    std::size_t stride = posekit::kDefaultStride;
    std::size_t samples_per_class = dataset::kDefaultSamplesPerClass;
};

struct TrainConfig {
    mpm::TrainingConfig training;
    double validation_fraction = 0.2;
    std::uint64_t split_seed = 0;
};

/// Both read the keys of their own section (`data`, `train`) of a config
/// document and reject unknown ones.
DataConfig data_config(const nlohmann::json& doc);
TrainConfig train_config(const nlohmann::json& doc);
nlohmann::json read_config(const std::filesystem::path& path);

/// Writes the manifest and one trajectory file per class into `out`.
dataset::DatasetOnDisk cmd_gen_data(const DataConfig& config, const std::filesystem::path& out);

struct TrainReport {
    mpm::TrainingResult result;
    std::size_t train_windows = 0;
    std::size_t validation_windows = 0;
    double seconds = 0.0;
};

/// Trains on a stratified split of the dataset in `data_dir`, writes the
/// checkpoint, and next to it `<stem>_report.txt` and `<stem>_trace.csv`.
TrainReport cmd_train(const std::filesystem::path& data_dir, const TrainConfig& config,
                      const std::filesystem::path& checkpoint);

struct EvalReport {
    mpm::Evaluation evaluation;
    std::vector<double> class_accuracy;
};

/// Evaluates every window of the dataset; writes confusion.csv and
/// eval.txt into `out`. Throws CommandError when the network and the
/// dataset disagree on the class count.
EvalReport cmd_eval(const mpm::MpmNetwork& network, const std::filesystem::path& data_dir,
                    const std::filesystem::path& out);

struct ScenarioOutcome {
    ScenarioRun run;
    std::vector<std::string> failures; ///< unmet thresholds
};

ScenarioOutcome cmd_run_scenario(const mpm::MpmNetwork& network, const ScenarioScript& script,
                                 const std::filesystem::path& out);

/// Recomputes the metrics of a saved run from its traces and scenario.json
/// and writes them to replay_metrics.txt in the same directory.
std::pair<MetricsReport, std::vector<std::string>> cmd_replay(const std::filesystem::path& run_dir);

} // namespace hoi::harness
