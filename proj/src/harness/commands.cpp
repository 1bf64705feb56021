#include "hoi/harness/commands.hpp"

#include "hoi/mpm/checkpoint.hpp"

#include <chrono>
#include <fstream>
#include <iomanip>

namespace hoi::harness {

using nlohmann::json;

namespace {

const json& section(const json& doc, const char* name, std::initializer_list<std::string_view> allowed)
{
    static const json empty = json::object();
    if (!doc.is_object())
        throw CommandError("config: expected an object");
    if (!doc.contains(name))
        return empty;
    const json& s = doc[name];
    if (!s.is_object())
        throw CommandError(std::string(name) + ": expected an object");
    for (const auto& [key, value] : s.items()) {
        bool known = false;
        for (auto a : allowed)
            known = known || key == a;
        if (!known)
            throw CommandError(std::string(name) + ": unknown key '" + key + "'");
    }
    return s;
}

template <typename T>
T value(const json& s, const char* key, T fallback)
{
    if (!s.contains(key))
        return fallback;
    try {
        return s[key].get<T>();
    } catch (const json::exception&) {
        throw CommandError(std::string(key) + ": wrong type");
    }
}

std::size_t count_value(const json& s, const char* key, std::size_t fallback)
{
    if (s.contains(key) && !(s[key].is_number_integer() && s[key].get<std::int64_t>() >= 0))
        throw CommandError(std::string(key) + ": expected a non-negative integer");
    return value<std::size_t>(s, key, fallback);
}

std::ofstream open_out(const std::filesystem::path& path)
{
    std::ofstream out(path);
    if (!out)
        throw CommandError("cannot write " + path.string());
    out << std::setprecision(9);
    return out;
}

} // namespace

DataConfig data_config(const json& doc)
{
    const json& s = section(doc, "data", {"seed", "frames", "jitter", "stride", "samples_per_class"});
    DataConfig c;
    c.seed = count_value(s, "seed", c.seed);
    c.frames = count_value(s, "frames", c.frames);
    c.jitter = value(s, "jitter", c.jitter);
    c.stride = count_value(s, "stride", c.stride);
    c.samples_per_class = count_value(s, "samples_per_class", c.samples_per_class);
    return c;
}

TrainConfig train_config(const json& doc)
{
    const json& s = section(doc, "train", {"epochs", "learning_rate", "batch_size", "seed", "optimizer", "hidden",
                                           "layers", "standardize", "validation_fraction", "split_seed"});
    TrainConfig c;
    auto& t = c.training;
    t.epochs = value(s, "epochs", t.epochs);
    t.learning_rate = value(s, "learning_rate", t.learning_rate);
    t.batch_size = value(s, "batch_size", t.batch_size);
    t.seed = count_value(s, "seed", t.seed);
    t.hidden = value(s, "hidden", t.hidden);
    t.layers = value(s, "layers", t.layers);
    t.standardize = value(s, "standardize", t.standardize);
    const std::string optimizer = value<std::string>(s, "optimizer", "adam");
    if (optimizer == "adam")
        t.optimizer = mpm::Optimizer::Adam;
    else if (optimizer == "sgd")
        t.optimizer = mpm::Optimizer::GradientDescent;
    else
        throw CommandError("optimizer: expected adam or sgd");
    c.validation_fraction = value(s, "validation_fraction", c.validation_fraction);
    c.split_seed = count_value(s, "split_seed", c.split_seed);
    if (!(c.validation_fraction > 0.0 && c.validation_fraction < 1.0))
        throw CommandError("validation_fraction must lie in (0, 1)");
    try {
        t.validate();
    } catch (const std::invalid_argument& e) {
        throw CommandError(e.what());
    }
    return c;
}

json read_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in)
        throw CommandError("cannot open config " + path.string());
    try {
        return json::parse(in);
    } catch (const json::exception& e) {
        throw CommandError(path.string() + ": " + e.what());
    }
}

dataset::DatasetOnDisk cmd_gen_data(const DataConfig& c, const std::filesystem::path& out)
{
    auto data = dataset::generate_dataset(c.seed, c.frames, c.jitter, c.stride, c.samples_per_class);
    std::error_code ec;
    std::filesystem::create_directories(out, ec);
    if (ec)
        throw CommandError("cannot create " + out.string() + ": " + ec.message());
    dataset::save_dataset(out, data);
    return data;
}

TrainReport cmd_train(const std::filesystem::path& data_dir, const TrainConfig& config,
                      const std::filesystem::path& checkpoint)
{
    const auto windows = dataset::windows_of(dataset::load_dataset(data_dir));
    if (windows.empty())
        throw CommandError("dataset in " + data_dir.string() + " has no windows");
    const auto [train, validation] = dataset::stratified_split(windows, 1.0 - config.validation_fraction, config.split_seed);

    TrainReport report;
    report.train_windows = train.size();
    report.validation_windows = validation.size();
    const auto start = std::chrono::steady_clock::now();
    report.result = mpm::train_mpm(train, validation, config.training);
    report.seconds = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

    if (checkpoint.has_parent_path())
        std::filesystem::create_directories(checkpoint.parent_path());
    mpm::save_checkpoint(checkpoint, report.result.network);

    const auto base = checkpoint.parent_path() / checkpoint.stem();
    auto trace = open_out(base.string() + "_trace.csv");
    trace << "epoch,train_loss,train_accuracy,validation_loss,validation_accuracy\n";
    for (const auto& e : report.result.trace)
        trace << e.epoch << ',' << e.train_loss << ',' << e.train_accuracy << ',' << e.validation_loss << ','
              << e.validation_accuracy << '\n';

    auto summary = open_out(base.string() + "_report.txt");
    summary << "train_windows " << report.train_windows << '\n'
            << "validation_windows " << report.validation_windows << '\n'
            << "epochs " << report.result.trace.size() << '\n'
            << "final_train_loss " << (report.result.trace.empty() ? 0.0 : report.result.trace.back().train_loss) << '\n'
            << "final_validation_accuracy " << report.result.final_validation_accuracy() << '\n'
            << "seconds " << report.seconds << '\n';
    if (!trace || !summary)
        throw CommandError("cannot write the training report next to " + checkpoint.string());
    return report;
}

EvalReport cmd_eval(const mpm::MpmNetwork& network, const std::filesystem::path& data_dir,
                    const std::filesystem::path& out)
{
    const auto windows = dataset::windows_of(dataset::load_dataset(data_dir));
    if (network.shape().classes != windows.class_count)
        throw CommandError("network has " + std::to_string(network.shape().classes) + " classes, dataset has "
                           + std::to_string(windows.class_count));
    if (network.shape().input != int(posekit::kFeatureCount))
        throw CommandError("network input width does not match the dataset features");

    EvalReport report;
    report.evaluation = mpm::evaluate(network, windows);
    const Eigen::MatrixXi& m = report.evaluation.confusion;
    for (Eigen::Index k = 0; k < m.rows(); ++k) {
        const int total = m.row(k).sum();
        report.class_accuracy.push_back(total > 0 ? double(m(k, k)) / total : 0.0);
    }

    std::filesystem::create_directories(out);
    auto confusion = open_out(out / "confusion.csv");
    confusion << "true\\predicted";
    for (Eigen::Index k = 0; k < m.cols(); ++k)
        confusion << ',' << dataset::class_name(dataset::class_from_code(int(k)));
    confusion << '\n';
    for (Eigen::Index r = 0; r < m.rows(); ++r) {
        confusion << dataset::class_name(dataset::class_from_code(int(r)));
        for (Eigen::Index k = 0; k < m.cols(); ++k)
            confusion << ',' << m(r, k);
        confusion << '\n';
    }

    auto summary = open_out(out / "eval.txt");
    summary << "windows " << windows.size() << '\n'
            << "accuracy " << report.evaluation.accuracy << '\n'
            << "loss " << report.evaluation.loss << '\n';
    for (std::size_t k = 0; k < report.class_accuracy.size(); ++k)
        summary << "accuracy_" << dataset::class_name(dataset::class_from_code(int(k))) << ' '
                << report.class_accuracy[k] << '\n';
    if (!confusion || !summary)
        throw CommandError("cannot write evaluation results in " + out.string());
    return report;
}

ScenarioOutcome cmd_run_scenario(const mpm::MpmNetwork& network, const ScenarioScript& script,
                                 const std::filesystem::path& out)
{
    ScenarioOutcome outcome;
    outcome.run = run_scenario(network, script);
    save_run(out, script, outcome.run);
    outcome.failures = check_thresholds(outcome.run.report, script.config.thresholds);
    return outcome;
}

std::pair<MetricsReport, std::vector<std::string>> cmd_replay(const std::filesystem::path& run_dir)
{
    const ScenarioScript script = load_scenario(run_dir / "scenario.json");
    MetricsReport report = compute_metrics(load_traces(run_dir));
    auto out = open_out(run_dir / "replay_metrics.txt");
    write_metrics(out, report);
    if (!out)
        throw CommandError("cannot write " + (run_dir / "replay_metrics.txt").string());
    return {report, check_thresholds(report, script.config.thresholds)};
}

} // namespace hoi::harness
