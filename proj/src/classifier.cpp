#include "convctx/classifier.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>

#include "convctx/error.hpp"
#include "convctx/random.hpp"

namespace convctx {

void TrainConfig::validate() const {
    if (batch_size < 1) throw Error(ErrorCode::InvalidConfig, "batch size must be >= 1");
    if (!(learning_rate > 0.0) || !std::isfinite(learning_rate)) {
        throw Error(ErrorCode::InvalidConfig, "learning rate must be positive");
    }
    if (!(l2 >= 0.0) || !std::isfinite(l2)) throw Error(ErrorCode::InvalidConfig, "l2 must be non-negative");
    if (!(momentum >= 0.0 && momentum < 1.0)) throw Error(ErrorCode::InvalidConfig, "momentum must lie in [0, 1)");
}

SoftmaxModel SoftmaxModel::zeros(std::vector<std::string> class_names, std::size_t feature_dim) {
    SoftmaxModel m;
    m.feature_dim = feature_dim;
    m.weights.assign(class_names.size() * feature_dim, 0.0);
    m.bias.assign(class_names.size(), 0.0);
    m.class_names = std::move(class_names);
    return m;
}

void softmax_in_place(std::span<double> z) noexcept {
    if (z.empty()) return;
    const double hi = *std::max_element(z.begin(), z.end());
    double total = 0.0;
    for (double& v : z) {
        v = std::exp(v - hi);
        total += v;
    }
    for (double& v : z) v /= total;
}

namespace {

void logits_into(const SoftmaxModel& m, std::span<const double> x, std::span<double> z) {
    const std::size_t d = m.feature_dim;
    for (std::size_t k = 0; k < m.num_classes(); ++k) {
        const double* w = m.weights.data() + k * d;
        double acc = m.bias[k];
        for (std::size_t j = 0; j < d; ++j) acc += w[j] * x[j];
        z[k] = acc;
    }
}

void check_dim(const SoftmaxModel& m, std::size_t n) {
    if (n != m.feature_dim) {
        throw Error(ErrorCode::DimensionMismatch, "feature has " + std::to_string(n) + " values, model expects " +
                                                      std::to_string(m.feature_dim));
    }
}

// Accumulates sum_i s_i * CE_i and its gradient over `batch` (unscaled).
double accumulate(const SoftmaxModel& m, std::span<const LabeledExample> examples, std::span<const std::size_t> batch,
                  std::span<const double> class_weights, std::vector<double>& gw, std::vector<double>& gb) {
    const std::size_t K = m.num_classes();
    const std::size_t d = m.feature_dim;
    std::vector<double> p(K);
    double loss = 0.0;
    for (const std::size_t i : batch) {
        const auto& ex = examples[i];
        const auto y = static_cast<std::size_t>(ex.label);
        const double s = class_weights.empty() ? 1.0 : class_weights[y];
        logits_into(m, ex.features, p);
        const double hi = *std::max_element(p.begin(), p.end());
        const double shifted_y = p[y] - hi;
        double total = 0.0;
        for (double& v : p) {
            v = std::exp(v - hi);
            total += v;
        }
        // -log softmax_y = log(sum exp(z - hi)) - (z_y - hi); finite even at logits of +-1e4.
        loss += s * (std::log(total) - shifted_y);
        for (double& v : p) v /= total;
        if (s == 0.0) continue;
        for (std::size_t k = 0; k < K; ++k) {
            const double g = s * (p[k] - (k == y ? 1.0 : 0.0));
            if (g == 0.0) continue;
            gb[k] += g;
            double* row = gw.data() + k * d;
            for (std::size_t j = 0; j < d; ++j) row[j] += g * ex.features[j];
        }
    }
    return loss;
}

double l2_penalty(const SoftmaxModel& m, double l2) {
    double sq = 0.0;
    for (const double w : m.weights) sq += w * w;
    return 0.5 * l2 * sq;
}

}  // namespace

std::vector<double> predict_proba(const SoftmaxModel& model, std::span<const double> features) {
    check_dim(model, features.size());
    std::vector<double> z(model.num_classes());
    logits_into(model, features, z);
    softmax_in_place(z);
    return z;
}

std::size_t predict(const SoftmaxModel& model, std::span<const double> features) {
    const auto p = predict_proba(model, features);
    return static_cast<std::size_t>(std::max_element(p.begin(), p.end()) - p.begin());
}

LossGradient loss_and_gradient(const SoftmaxModel& model, std::span<const LabeledExample> examples, double l2,
                               std::span<const double> class_weights) {
    LossGradient out;
    out.weights.assign(model.weights.size(), 0.0);
    out.bias.assign(model.bias.size(), 0.0);
    if (examples.empty()) return out;
    for (const auto& ex : examples) check_dim(model, ex.features.size());
    std::vector<std::size_t> all(examples.size());
    std::iota(all.begin(), all.end(), std::size_t{0});
    const double n = static_cast<double>(examples.size());
    out.loss = accumulate(model, examples, all, class_weights, out.weights, out.bias) / n + l2_penalty(model, l2);
    for (double& g : out.bias) g /= n;
    for (std::size_t i = 0; i < out.weights.size(); ++i) out.weights[i] = out.weights[i] / n + l2 * model.weights[i];
    return out;
}

std::vector<double> inverse_frequency_weights(std::span<const LabeledExample> examples, std::size_t num_classes) {
    std::vector<double> counts(num_classes, 0.0);
    for (const auto& ex : examples) counts.at(static_cast<std::size_t>(ex.label)) += 1.0;
    const double n = static_cast<double>(examples.size());
    std::vector<double> w(num_classes, 0.0);
    for (std::size_t c = 0; c < num_classes; ++c) {
        if (counts[c] > 0.0) w[c] = n / (static_cast<double>(num_classes) * counts[c]);
    }
    return w;
}

SoftmaxModel train(std::span<const LabeledExample> examples, std::vector<std::string> class_names,
                   const TrainConfig& config) {
    config.validate();
    const std::size_t K = class_names.size();
    if (K < 2) throw Error(ErrorCode::SingleClassData, "need at least two class names");
    if (examples.empty()) throw Error(ErrorCode::SingleClassData, "no training examples");
    const std::size_t d = examples.front().features.size();
    std::vector<std::size_t> seen(K, 0);
    for (const auto& ex : examples) {
        if (ex.features.size() != d) throw Error(ErrorCode::DimensionMismatch, "training features differ in length");
        if (ex.label < 0 || static_cast<std::size_t>(ex.label) >= K) {
            throw Error(ErrorCode::InvalidConfig, "label index out of range");
        }
        ++seen[static_cast<std::size_t>(ex.label)];
    }
    if (std::count_if(seen.begin(), seen.end(), [](std::size_t c) { return c > 0; }) < 2) {
        throw Error(ErrorCode::SingleClassData, "training data contains a single class");
    }

    SoftmaxModel model = SoftmaxModel::zeros(std::move(class_names), d);
    model.config = config;
    const std::vector<double> class_weights =
        config.class_weighting ? inverse_frequency_weights(examples, K) : std::vector<double>{};

    Rng rng(derive_seed(config.seed, "train-shuffle"));
    std::vector<std::size_t> order(examples.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::vector<double> gw(model.weights.size()), gb(K);
    std::vector<double> vw(model.weights.size(), 0.0), vb(K, 0.0);

    for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
        shuffle_in_place(std::span<std::size_t>(order), rng);
        for (std::size_t start = 0; start < order.size(); start += config.batch_size) {
            const std::size_t stop = std::min(order.size(), start + config.batch_size);
            std::span<const std::size_t> batch(order.data() + start, stop - start);
            std::fill(gw.begin(), gw.end(), 0.0);
            std::fill(gb.begin(), gb.end(), 0.0);
            accumulate(model, examples, batch, class_weights, gw, gb);
            const double inv_b = 1.0 / static_cast<double>(batch.size());
            for (std::size_t i = 0; i < gw.size(); ++i) {
                const double g = gw[i] * inv_b + config.l2 * model.weights[i];
                vw[i] = config.momentum * vw[i] - config.learning_rate * g;
                model.weights[i] += vw[i];
            }
            for (std::size_t k = 0; k < K; ++k) {
                vb[k] = config.momentum * vb[k] - config.learning_rate * gb[k] * inv_b;
                model.bias[k] += vb[k];
            }
        }
        const double loss = loss_and_gradient(model, examples, config.l2, class_weights).loss;
        if (!std::isfinite(loss)) {
            throw Error(ErrorCode::NonFiniteLoss, "loss diverged at epoch " + std::to_string(epoch + 1));
        }
        model.loss_history.push_back(loss);
    }
    return model;
}

SoftmaxModel bow_logreg_baseline(const Corpus& corpus, Task task, std::size_t dimension, const TrainConfig& config) {
    const auto examples = bow_examples(corpus, task, dimension);
    return train(examples, class_names(task), config);
}

namespace {

std::string fmt_double(double x) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.17g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

double parse_double(const std::string& tok) {
    try {
        std::size_t used = 0;
        const double x = std::stod(tok, &used);
        if (used != tok.size()) throw std::invalid_argument("trailing");
        return x;
    } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedFile, "bad number '" + tok + "' in model file");
    }
}

void expect_word(std::istream& in, const std::string& word) {
    std::string got;
    if (!(in >> got) || got != word) throw Error(ErrorCode::MalformedFile, "model file: expected '" + word + "'");
}

template <typename T>
T read_value(std::istream& in, const char* what) {
    T v{};
    if (!(in >> v)) throw Error(ErrorCode::MalformedFile, std::string("model file: bad ") + what);
    return v;
}

}  // namespace

void save_model(std::ostream& out, const SoftmaxModel& m) {
    out << "convctx-softmax 1\n";
    out << "classes " << m.num_classes() << '\n';
    for (const auto& name : m.class_names) out << name << '\n';
    out << "dim " << m.feature_dim << '\n';
    out << "epochs " << m.config.epochs << " batch_size " << m.config.batch_size << " learning_rate "
        << fmt_double(m.config.learning_rate) << " l2 " << fmt_double(m.config.l2) << " momentum "
        << fmt_double(m.config.momentum) << " seed " << m.config.seed << " class_weighting "
        << (m.config.class_weighting ? 1 : 0) << '\n';
    out << "loss_history " << m.loss_history.size();
    for (const double l : m.loss_history) out << ' ' << fmt_double(l);
    out << "\nbias";
    for (const double b : m.bias) out << ' ' << fmt_double(b);
    out << "\nweights\n";
    for (std::size_t k = 0; k < m.num_classes(); ++k) {
        for (std::size_t j = 0; j < m.feature_dim; ++j) {
            if (j) out << ' ';
            out << fmt_double(m.weights[k * m.feature_dim + j]);
        }
        out << '\n';
    }
}

SoftmaxModel load_model(std::istream& in) {
    std::string magic;
    std::getline(in, magic);
    if (magic != "convctx-softmax 1") throw Error(ErrorCode::MalformedFile, "not a convctx model file (version 1)");
    expect_word(in, "classes");
    const auto k = read_value<std::size_t>(in, "class count");
    if (k < 2) throw Error(ErrorCode::MalformedFile, "model file: fewer than two classes");
    std::string line;
    std::getline(in, line);
    std::vector<std::string> names(k);
    for (auto& name : names) {
        if (!std::getline(in, name)) throw Error(ErrorCode::MalformedFile, "model file: truncated class names");
    }
    expect_word(in, "dim");
    SoftmaxModel m = SoftmaxModel::zeros(std::move(names), read_value<std::size_t>(in, "dimension"));
    expect_word(in, "epochs");
    m.config.epochs = read_value<std::size_t>(in, "epochs");
    expect_word(in, "batch_size");
    m.config.batch_size = read_value<std::size_t>(in, "batch size");
    expect_word(in, "learning_rate");
    m.config.learning_rate = parse_double(read_value<std::string>(in, "learning rate"));
    expect_word(in, "l2");
    m.config.l2 = parse_double(read_value<std::string>(in, "l2"));
    expect_word(in, "momentum");
    m.config.momentum = parse_double(read_value<std::string>(in, "momentum"));
    expect_word(in, "seed");
    m.config.seed = read_value<std::uint64_t>(in, "seed");
    expect_word(in, "class_weighting");
    m.config.class_weighting = read_value<int>(in, "class weighting") != 0;
    expect_word(in, "loss_history");
    m.loss_history.resize(read_value<std::size_t>(in, "loss history length"));
    for (double& l : m.loss_history) l = parse_double(read_value<std::string>(in, "loss"));
    expect_word(in, "bias");
    for (double& b : m.bias) b = parse_double(read_value<std::string>(in, "bias"));
    expect_word(in, "weights");
    for (double& w : m.weights) w = parse_double(read_value<std::string>(in, "weight"));
    for (const double w : m.weights) {
        if (!std::isfinite(w)) throw Error(ErrorCode::MalformedFile, "model file: non-finite weight");
    }
    return m;
}

void save_model_file(const std::filesystem::path& path, const SoftmaxModel& model) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write model '" + path.string() + "'");
    save_model(out, model);
}

SoftmaxModel load_model_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open model '" + path.string() + "'");
    return load_model(in);
}

}  // namespace convctx
