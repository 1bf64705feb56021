#include "hoi/harness/commands.hpp"
#include "hoi/mpm/checkpoint.hpp"

#include <CLI11.hpp>

#include <iostream>
#include <optional>

using namespace hoi;
using namespace hoi::harness;

namespace {

nlohmann::json load_optional_config(const std::string& path)
{
    return path.empty() ? nlohmann::json::object() : read_config(path);
}

int report_failures(const std::vector<std::string>& failures)
{
    for (const auto& f : failures)
        std::cout << "FAIL " << f << '\n';
    if (failures.empty())
        std::cout << "all thresholds met\n";
    return failures.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Gesture-driven robot cooperation: data, training, evaluation and scenario runs"};
    app.require_subcommand(1);

    std::string config_path, out, checkpoint, data_dir, scenario = "ring", run_dir;
    std::optional<std::uint64_t> seed;

    auto* gen = app.add_subcommand("gen-data", "Generate a synthetic gesture dataset");
    gen->add_option("--config", config_path, "JSON config with a 'data' section")->check(CLI::ExistingFile);
    gen->add_option("--seed", seed, "Dataset seed");
    gen->add_option("--out", out, "Output directory")->required();

    auto* train = app.add_subcommand("train", "Train the gesture classifier");
    train->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    train->add_option("--config", config_path, "JSON config with a 'train' section")->check(CLI::ExistingFile);
    train->add_option("--seed", seed, "Training seed");
    train->add_option("--checkpoint", checkpoint, "Checkpoint to write")->required();

    auto* eval = app.add_subcommand("eval", "Evaluate a checkpoint on a dataset");
    eval->add_option("--checkpoint", checkpoint, "Checkpoint to read")->required()->check(CLI::ExistingFile);
    eval->add_option("--data", data_dir, "Dataset directory")->required()->check(CLI::ExistingDirectory);
    eval->add_option("--out", out, "Output directory")->required();

    auto* run = app.add_subcommand("run-scenario", "Run a scripted scenario through the full pipeline");
    run->add_option("--checkpoint", checkpoint, "Checkpoint to read")->required()->check(CLI::ExistingFile);
    run->add_option("--scenario", scenario, "ring, disturbance, empty or a scenario JSON file");
    run->add_option("--config", config_path, "JSON config whose 'scenario' section overrides the script's")
        ->check(CLI::ExistingFile);
    run->add_option("--seed", seed, "Scenario seed");
    run->add_option("--out", out, "Output directory")->required();

    auto* replay = app.add_subcommand("replay", "Recompute the metrics of a saved run");
    replay->add_option("run_dir", run_dir, "Directory written by run-scenario")->required()->check(CLI::ExistingDirectory);

    CLI11_PARSE(app, argc, argv);

    try {
        if (*gen) {
            DataConfig c = data_config(load_optional_config(config_path));
            if (seed)
                c.seed = *seed;
            const auto data = cmd_gen_data(c, out);
            std::cout << "windows " << data.manifest.total_windows << '\n';
            return 0;
        }
        if (*train) {
            TrainConfig c = train_config(load_optional_config(config_path));
            if (seed)
                c.training.seed = *seed;
            const auto report = cmd_train(data_dir, c, checkpoint);
            std::cout << "final_validation_accuracy " << report.result.final_validation_accuracy() << '\n'
                      << "seconds " << report.seconds << '\n';
            return 0;
        }
        if (*eval) {
            const auto report = cmd_eval(mpm::load_checkpoint(checkpoint), data_dir, out);
            std::cout << "accuracy " << report.evaluation.accuracy << '\n' << report.evaluation.confusion << '\n';
            return 0;
        }
        if (*run) {
            ScenarioScript script = resolve_scenario(scenario);
            const auto doc = load_optional_config(config_path);
            if (doc.contains("scenario"))
                apply_config(script.config, doc["scenario"]);
            if (seed)
                script.config.seed = *seed;
            script.validate();
            const auto outcome = cmd_run_scenario(mpm::load_checkpoint(checkpoint), script, out);
            write_metrics(std::cout, outcome.run.report);
            return report_failures(outcome.failures);
        }
        if (*replay) {
            const auto [report, failures] = cmd_replay(run_dir);
            write_metrics(std::cout, report);
            return report_failures(failures);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return 2;
    }
    return 2;
}
