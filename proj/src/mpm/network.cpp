#include "hoi/mpm/network.hpp"

#include <cmath>
#include <random>
#include <string>

namespace hoi::mpm {

namespace {

struct DirectionTrace {
    // Indexed by processing step s; time index is order[s].
    std::vector<MatrixXd> gates; // activated i, f, g, o stacked (4H x B)
    std::vector<MatrixXd> cell;  // c after step
    std::vector<MatrixXd> hidden;
};

struct LayerTrace {
    DirectionTrace dirs[2];
    std::vector<MatrixXd> output; // (2H x B) per time index
};

struct ForwardTrace {
    std::vector<MatrixXd> normalized_input;
    std::vector<LayerTrace> layers;
    MatrixXd features; // (2H x B) head input
    MatrixXd logits;
};

double sigmoid(double x) { return 1.0 / (1.0 + std::exp(-x)); }

Eigen::Index time_at(Direction d, Eigen::Index step, Eigen::Index length)
{
    return d == Direction::Forward ? step : length - 1 - step;
}

void check_batch(const NetworkShape& shape, const SequenceBatch& batch)
{
    if (batch.steps.empty())
        throw ShapeMismatch("empty sequence");
    const Eigen::Index b = batch.batch();
    if (b == 0)
        throw ShapeMismatch("empty batch");
    for (const auto& x : batch.steps)
        if (x.rows() != shape.input || x.cols() != b)
            throw ShapeMismatch("sequence step has shape (" + std::to_string(x.rows()) + ", "
                                + std::to_string(x.cols()) + "), expected ("
                                + std::to_string(shape.input) + ", " + std::to_string(b) + ")");
}

ForwardTrace run_forward(const MpmNetwork& net, const SequenceBatch& batch)
{
    const NetworkShape& shape = net.shape();
    const ParameterLayout& layout = net.layout();
    check_batch(shape, batch);

    const Eigen::Index T = batch.length();
    const Eigen::Index B = batch.batch();
    const Eigen::Index H = shape.hidden;

    ForwardTrace trace;
    trace.normalized_input.reserve(static_cast<std::size_t>(T));
    for (const auto& x : batch.steps)
        trace.normalized_input.push_back(
            ((x.colwise() - net.input_mean()).array().colwise() * net.input_scale().array()).matrix());

    const std::vector<MatrixXd>* inputs = &trace.normalized_input;
    trace.layers.resize(static_cast<std::size_t>(shape.layers));
    for (int l = 0; l < shape.layers; ++l) {
        LayerTrace& lt = trace.layers[static_cast<std::size_t>(l)];
        lt.output.assign(static_cast<std::size_t>(T), MatrixXd(2 * H, B));
        for (int di = 0; di < 2; ++di) {
            const auto d = static_cast<Direction>(di);
            const auto Wx = net.block(layout.input_weights(l, d));
            const auto Wh = net.block(layout.recurrent_weights(l, d));
            const auto bias = net.block(layout.bias(l, d));
            DirectionTrace& dt = lt.dirs[di];
            dt.gates.reserve(static_cast<std::size_t>(T));
            dt.cell.reserve(static_cast<std::size_t>(T));
            dt.hidden.reserve(static_cast<std::size_t>(T));

            MatrixXd h = MatrixXd::Zero(H, B);
            MatrixXd c = MatrixXd::Zero(H, B);
            for (Eigen::Index s = 0; s < T; ++s) {
                const Eigen::Index t = time_at(d, s, T);
                MatrixXd z = Wx * (*inputs)[static_cast<std::size_t>(t)] + Wh * h;
                z.colwise() += bias.col(0);
                z.topRows(2 * H) = z.topRows(2 * H).unaryExpr(&sigmoid);
                z.middleRows(2 * H, H) = z.middleRows(2 * H, H).array().tanh().matrix();
                z.bottomRows(H) = z.bottomRows(H).unaryExpr(&sigmoid);

                c = (z.middleRows(H, H).array() * c.array()
                     + z.topRows(H).array() * z.middleRows(2 * H, H).array()).matrix();
                h = (z.bottomRows(H).array() * c.array().tanh()).matrix();

                dt.gates.push_back(std::move(z));
                dt.cell.push_back(c);
                dt.hidden.push_back(h);
                lt.output[static_cast<std::size_t>(t)].middleRows(di * H, H) = h;
            }
        }
        inputs = &lt.output;
    }

    const LayerTrace& top = trace.layers.back();
    trace.features.resize(2 * H, B);
    trace.features.topRows(H) = top.dirs[0].hidden.back();    // forward at t = T-1
    trace.features.bottomRows(H) = top.dirs[1].hidden.back(); // backward at t = 0

    trace.logits = net.block(layout.head_weights()) * trace.features;
    trace.logits.colwise() += net.block(layout.head_bias()).col(0);
    return trace;
}

double mean_cross_entropy(const MatrixXd& logits, const std::vector<int>& labels)
{
    double total = 0.0;
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
        const double m = logits.col(b).maxCoeff();
        const double lse = m + std::log((logits.col(b).array() - m).exp().sum());
        total += lse - logits(labels[static_cast<std::size_t>(b)], b);
    }
    return total / static_cast<double>(logits.cols());
}

void check_labels(const NetworkShape& shape, const SequenceBatch& batch, const std::vector<int>& labels)
{
    if (static_cast<Eigen::Index>(labels.size()) != batch.batch())
        throw ShapeMismatch("label count does not match batch size");
    for (int y : labels)
        if (y < 0 || y >= shape.classes)
            throw ShapeMismatch("label " + std::to_string(y) + " outside class range");
}

} // namespace

ParameterLayout::ParameterLayout(const NetworkShape& shape) : shape_(shape)
{
    if (shape.input < 1 || shape.hidden < 1 || shape.layers < 1 || shape.classes < 2)
        throw ShapeMismatch("invalid network shape");
    const Eigen::Index H = shape.hidden;
    auto add = [&](Eigen::Index rows, Eigen::Index cols) {
        blocks_.push_back(Block{size_, rows, cols});
        size_ += rows * cols;
    };
    for (int l = 0; l < shape.layers; ++l)
        for (int d = 0; d < 2; ++d) {
            add(4 * H, layer_input(l));
            add(4 * H, H);
            add(4 * H, 1);
        }
    add(shape.classes, 2 * H);
    add(shape.classes, 1);
}

MpmNetwork::MpmNetwork(const NetworkShape& shape)
    : layout_(shape),
      params_(VectorXd::Zero(layout_.size())),
      input_mean_(VectorXd::Zero(shape.input)),
      input_scale_(VectorXd::Ones(shape.input))
{
}

MpmNetwork MpmNetwork::initialized(const NetworkShape& shape, std::uint64_t seed)
{
    MpmNetwork net(shape);
    std::mt19937_64 rng(seed);
    auto fill = [&](const ParameterLayout::Block& b, double bound) {
        std::uniform_real_distribution<double> dist(-bound, bound);
        auto m = net.block(b);
        for (Eigen::Index j = 0; j < m.cols(); ++j)
            for (Eigen::Index i = 0; i < m.rows(); ++i)
                m(i, j) = dist(rng);
    };
    const auto& layout = net.layout();
    const Eigen::Index H = shape.hidden;
    for (int l = 0; l < shape.layers; ++l)
        for (int di = 0; di < 2; ++di) {
            const auto d = static_cast<Direction>(di);
            fill(layout.input_weights(l, d), 1.0 / std::sqrt(double(layout.layer_input(l))));
            fill(layout.recurrent_weights(l, d), 1.0 / std::sqrt(double(H)));
            net.block(layout.bias(l, d)).middleRows(H, H).setConstant(1.0);
        }
    fill(layout.head_weights(), 1.0 / std::sqrt(double(2 * H)));
    return net;
}

MatrixXd MpmNetwork::logits(const SequenceBatch& batch) const { return run_forward(*this, batch).logits; }

MatrixXd MpmNetwork::probabilities(const SequenceBatch& batch) const { return softmax(logits(batch)); }

MatrixXd softmax(const MatrixXd& logits)
{
    MatrixXd out(logits.rows(), logits.cols());
    for (Eigen::Index b = 0; b < logits.cols(); ++b) {
        const auto e = (logits.col(b).array() - logits.col(b).maxCoeff()).exp();
        out.col(b) = (e / e.sum()).matrix();
    }
    return out;
}

SequenceBatch to_batch(const std::vector<const posekit::FeatureWindow*>& windows)
{
    SequenceBatch batch;
    const auto B = static_cast<Eigen::Index>(windows.size());
    batch.steps.assign(posekit::kWindowLength, MatrixXd(posekit::kFeatureCount, B));
    for (Eigen::Index b = 0; b < B; ++b)
        for (int t = 0; t < posekit::kWindowLength; ++t)
            batch.steps[static_cast<std::size_t>(t)].col(b)
                = windows[static_cast<std::size_t>(b)]->frames.row(t).transpose();
    return batch;
}

SequenceBatch to_batch(const posekit::FeatureWindow& window) { return to_batch({&window}); }

VectorXd classify(const MpmNetwork& network, const posekit::FeatureWindow& window)
{
    if (network.shape().input != posekit::kFeatureCount)
        throw ShapeMismatch("network input size differs from the window feature count");
    return network.probabilities(to_batch(window)).col(0);
}

int decide(const VectorXd& probabilities)
{
    Eigen::Index best = 0;
    probabilities.maxCoeff(&best);
    return static_cast<int>(best);
}

double batch_loss(const MpmNetwork& network, const SequenceBatch& batch, const std::vector<int>& labels)
{
    check_labels(network.shape(), batch, labels);
    return mean_cross_entropy(network.logits(batch), labels);
}

LossAndGradient gradient(const MpmNetwork& net, const SequenceBatch& batch, const std::vector<int>& labels)
{
    const NetworkShape& shape = net.shape();
    const ParameterLayout& layout = net.layout();
    check_labels(shape, batch, labels);
    const ForwardTrace fw = run_forward(net, batch);

    const Eigen::Index T = batch.length();
    const Eigen::Index B = batch.batch();
    const Eigen::Index H = shape.hidden;

    LossAndGradient out;
    out.loss = mean_cross_entropy(fw.logits, labels);
    out.gradient = VectorXd::Zero(layout.size());
    auto grad_block = [&](const ParameterLayout::Block& b) {
        return Eigen::Map<MatrixXd>(out.gradient.data() + b.offset, b.rows, b.cols);
    };

    // Softmax + cross-entropy: d(mean loss)/d logits = (p - onehot) / B.
    MatrixXd dlogits = softmax(fw.logits);
    for (Eigen::Index b = 0; b < B; ++b)
        dlogits(labels[static_cast<std::size_t>(b)], b) -= 1.0;
    dlogits /= static_cast<double>(B);

    grad_block(layout.head_weights()) = dlogits * fw.features.transpose();
    grad_block(layout.head_bias()) = dlogits.rowwise().sum();
    const MatrixXd dfeatures = net.block(layout.head_weights()).transpose() * dlogits;

    // Gradient w.r.t. each layer's output sequence, starting at the top.
    std::vector<MatrixXd> doutput(static_cast<std::size_t>(T), MatrixXd::Zero(2 * H, B));
    doutput[static_cast<std::size_t>(T - 1)].topRows(H) = dfeatures.topRows(H);
    doutput[0].bottomRows(H) += dfeatures.bottomRows(H);

    for (int l = shape.layers - 1; l >= 0; --l) {
        const LayerTrace& lt = fw.layers[static_cast<std::size_t>(l)];
        const std::vector<MatrixXd>& inputs = l == 0 ? fw.normalized_input : fw.layers[static_cast<std::size_t>(l - 1)].output;
        const Eigen::Index I = layout.layer_input(l);
        std::vector<MatrixXd> dinput(static_cast<std::size_t>(T), MatrixXd::Zero(I, B));

        for (int di = 0; di < 2; ++di) {
            const auto d = static_cast<Direction>(di);
            const DirectionTrace& dt = lt.dirs[di];
            const auto Wx = net.block(layout.input_weights(l, d));
            const auto Wh = net.block(layout.recurrent_weights(l, d));
            auto dWx = grad_block(layout.input_weights(l, d));
            auto dWh = grad_block(layout.recurrent_weights(l, d));
            auto db = grad_block(layout.bias(l, d));

            MatrixXd dh_next = MatrixXd::Zero(H, B);
            MatrixXd dc_next = MatrixXd::Zero(H, B);
            const MatrixXd zeros = MatrixXd::Zero(H, B);
            MatrixXd dz(4 * H, B);
            for (Eigen::Index s = T - 1; s >= 0; --s) {
                const Eigen::Index t = time_at(d, s, T);
                const auto su = static_cast<std::size_t>(s);
                const MatrixXd& z = dt.gates[su];
                const auto gi = z.topRows(H).array();
                const auto gf = z.middleRows(H, H).array();
                const auto gg = z.middleRows(2 * H, H).array();
                const auto go = z.bottomRows(H).array();
                const MatrixXd& c_prev = s > 0 ? dt.cell[su - 1] : zeros;
                const MatrixXd& h_prev = s > 0 ? dt.hidden[su - 1] : zeros;
                const Eigen::ArrayXXd tanh_c = dt.cell[su].array().tanh();

                const Eigen::ArrayXXd dh
                    = doutput[static_cast<std::size_t>(t)].middleRows(di * H, H).array() + dh_next.array();
                const Eigen::ArrayXXd dc = dc_next.array() + dh * go * (1.0 - tanh_c.square());

                dz.topRows(H) = (dc * gg * gi * (1.0 - gi)).matrix();
                dz.middleRows(H, H) = (dc * c_prev.array() * gf * (1.0 - gf)).matrix();
                dz.middleRows(2 * H, H) = (dc * gi * (1.0 - gg.square())).matrix();
                dz.bottomRows(H) = (dh * tanh_c * go * (1.0 - go)).matrix();

                dc_next = (dc * gf).matrix();
                const MatrixXd& x = inputs[static_cast<std::size_t>(t)];
                dWx.noalias() += dz * x.transpose();
                dWh.noalias() += dz * h_prev.transpose();
                db += dz.rowwise().sum();
                dinput[static_cast<std::size_t>(t)].noalias() += Wx.transpose() * dz;
                dh_next.noalias() = Wh.transpose() * dz;
            }
        }
        doutput = std::move(dinput);
    }
    return out;
}

} // namespace hoi::mpm
