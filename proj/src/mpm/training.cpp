#include "hoi/mpm/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <random>
#include <stdexcept>

namespace hoi::mpm {

namespace {

std::vector<int> labels_of(const dataset::LabeledDataset& data, const std::vector<std::size_t>& idx)
{
    std::vector<int> labels;
    labels.reserve(idx.size());
    for (auto i : idx)
        labels.push_back(dataset::code(data.samples[i].label));
    return labels;
}

SequenceBatch batch_of(const dataset::LabeledDataset& data, const std::vector<std::size_t>& idx)
{
    std::vector<const posekit::FeatureWindow*> windows;
    windows.reserve(idx.size());
    for (auto i : idx)
        windows.push_back(&data.samples[i].window);
    return to_batch(windows);
}

} // namespace

void TrainingConfig::validate() const
{
    if (epochs < 1)
        throw std::invalid_argument("epochs must be >= 1");
    if (batch_size < 1)
        throw std::invalid_argument("batch size must be >= 1");
    if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate))
        throw std::invalid_argument("learning rate must be a finite value >= 0");
    if (hidden < 1 || layers < 1)
        throw std::invalid_argument("network must have at least one hidden unit and layer");
}

AdamOptimizer::AdamOptimizer(Eigen::Index size, double learning_rate, double beta1, double beta2, double epsilon)
    : lr_(learning_rate), beta1_(beta1), beta2_(beta2), eps_(epsilon), m_(VectorXd::Zero(size)), v_(VectorXd::Zero(size))
{
}

void AdamOptimizer::step(VectorXd& params, const VectorXd& grad)
{
    ++t_;
    m_ = beta1_ * m_ + (1.0 - beta1_) * grad;
    v_ = beta2_ * v_ + (1.0 - beta2_) * grad.cwiseAbs2();
    const double c1 = 1.0 - std::pow(beta1_, static_cast<double>(t_));
    const double c2 = 1.0 - std::pow(beta2_, static_cast<double>(t_));
    params.array() -= lr_ * (m_.array() / c1) / ((v_.array() / c2).sqrt() + eps_);
}

Evaluation evaluate(const MpmNetwork& network, const dataset::LabeledDataset& data, int batch_size)
{
    const int K = network.shape().classes;
    Evaluation ev;
    ev.confusion = Eigen::MatrixXi::Zero(K, K);
    if (data.empty())
        return ev;

    double loss_sum = 0.0;
    std::size_t correct = 0;
    const std::size_t n = data.size();
    for (std::size_t start = 0; start < n; start += static_cast<std::size_t>(batch_size)) {
        std::vector<std::size_t> idx(std::min(n - start, static_cast<std::size_t>(batch_size)));
        std::iota(idx.begin(), idx.end(), start);
        const MatrixXd probs = network.probabilities(batch_of(data, idx));
        for (std::size_t b = 0; b < idx.size(); ++b) {
            const int truth = dataset::code(data.samples[idx[b]].label);
            if (truth >= K)
                throw ShapeMismatch("dataset class exceeds network class count");
            const int pred = decide(probs.col(static_cast<Eigen::Index>(b)));
            ++ev.confusion(truth, pred);
            correct += pred == truth;
            loss_sum -= std::log(std::max(probs(truth, static_cast<Eigen::Index>(b)), 1e-12));
        }
    }
    ev.loss = loss_sum / static_cast<double>(n);
    ev.accuracy = static_cast<double>(correct) / static_cast<double>(n);
    return ev;
}

void fit_standardization(MpmNetwork& network, const dataset::LabeledDataset& data)
{
    const int F = network.shape().input;
    VectorXd sum = VectorXd::Zero(F);
    VectorXd sum_sq = VectorXd::Zero(F);
    double count = 0.0;
    for (const auto& s : data.samples)
        for (int t = 0; t < posekit::kWindowLength; ++t) {
            const VectorXd row = s.window.frames.row(t).transpose();
            sum += row;
            sum_sq += row.cwiseAbs2();
            count += 1.0;
        }
    if (count == 0.0)
        return;
    const VectorXd mean = sum / count;
    const VectorXd var = (sum_sq / count - mean.cwiseAbs2()).cwiseMax(0.0);
    network.input_mean() = mean;
    // Features that barely move are left unscaled rather than amplified.
    network.input_scale() = var.cwiseSqrt().unaryExpr([](double sd) { return sd < 1e-4 ? 1.0 : 1.0 / sd; });
}

TrainingResult train_mpm(const dataset::LabeledDataset& train, const dataset::LabeledDataset& validation,
                         const TrainingConfig& config)
{
    config.validate();
    if (train.empty())
        throw std::invalid_argument("training set is empty");

    NetworkShape shape;
    shape.hidden = config.hidden;
    shape.layers = config.layers;
    shape.classes = train.class_count;

    TrainingResult result{MpmNetwork::initialized(shape, config.seed), {}};
    MpmNetwork& net = result.network;
    if (config.standardize)
        fit_standardization(net, train);

    AdamOptimizer adam(net.parameters().size(), config.learning_rate);
    std::mt19937_64 shuffle_rng(config.seed ^ 0x5bd1e995ull);
    std::vector<std::size_t> order(train.size());
    std::iota(order.begin(), order.end(), 0);

    for (int epoch = 1; epoch <= config.epochs; ++epoch) {
        std::shuffle(order.begin(), order.end(), shuffle_rng);
        for (std::size_t start = 0; start < order.size(); start += static_cast<std::size_t>(config.batch_size)) {
            const auto end = std::min(order.size(), start + static_cast<std::size_t>(config.batch_size));
            const std::vector<std::size_t> idx(order.begin() + static_cast<std::ptrdiff_t>(start),
                                               order.begin() + static_cast<std::ptrdiff_t>(end));
            const auto lg = gradient(net, batch_of(train, idx), labels_of(train, idx));
            if (config.optimizer == Optimizer::Adam)
                adam.step(net.parameters(), lg.gradient);
            else
                net.parameters() -= config.learning_rate * lg.gradient;
        }

        const Evaluation tr = evaluate(net, train);
        const Evaluation va = evaluate(net, validation);
        result.trace.push_back(EpochStats{epoch, tr.loss, tr.accuracy, va.loss, va.accuracy});
    }
    return result;
}

} // namespace hoi::mpm
