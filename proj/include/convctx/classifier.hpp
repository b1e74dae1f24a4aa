#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <span>
#include <string>
#include <vector>

#include "convctx/context_features.hpp"

namespace convctx {

struct TrainConfig {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 0.1;
    double l2 = 1e-4;
    double momentum = 0.0;
    std::uint64_t seed = 0;
    /// Weight each example by N / (K * n_class).
    bool class_weighting = false;

    void validate() const;
};

/// Linear softmax classifier. weights is num_classes x feature_dim, row-major.
struct SoftmaxModel {
    std::vector<std::string> class_names;
    std::size_t feature_dim = 0;
    std::vector<double> weights;
    std::vector<double> bias;
    TrainConfig config;
    /// Full-data objective after each epoch.
    std::vector<double> loss_history;

    std::size_t num_classes() const noexcept { return class_names.size(); }

    /// All-zero parameters, which predict the uniform distribution.
    static SoftmaxModel zeros(std::vector<std::string> class_names, std::size_t feature_dim);
};

/// Max-shifted softmax of `logits`, in place.
void softmax_in_place(std::span<double> logits) noexcept;

/// Throws DimensionMismatch.
std::vector<double> predict_proba(const SoftmaxModel& model, std::span<const double> features);

/// Argmax of predict_proba; ties go to the lowest class index.
std::size_t predict(const SoftmaxModel& model, std::span<const double> features);

struct LossGradient {
    double loss = 0.0;
    std::vector<double> weights;  // d loss / d weights, same layout as the model
    std::vector<double> bias;
};

/// J = (1/N) sum_i s_i * CE_i + (l2/2) ||W||^2 (bias unregularized), where
/// s_i = sample_weights[label_i] (empty span = all ones).
LossGradient loss_and_gradient(const SoftmaxModel& model, std::span<const LabeledExample> examples, double l2,
                               std::span<const double> class_weights = {});

/// Inverse-frequency class weights N / (K * n_c); classes absent from the
/// data get weight 0.
std::vector<double> inverse_frequency_weights(std::span<const LabeledExample> examples, std::size_t num_classes);

/// Mini-batch gradient descent from zero initialization with a seeded
/// shuffle each epoch. Throws SingleClassData, DimensionMismatch,
/// NonFiniteLoss or InvalidConfig.
SoftmaxModel train(std::span<const LabeledExample> examples, std::vector<std::string> class_names,
                   const TrainConfig& config);

/// Bag-of-words + L2-regularized logistic regression over the given trees.
SoftmaxModel bow_logreg_baseline(const Corpus& corpus, Task task, std::size_t dimension, const TrainConfig& config);

/// Versioned text format; doubles are written with 17 significant digits so
/// save/load round-trips exactly.
void save_model(std::ostream& out, const SoftmaxModel& model);
SoftmaxModel load_model(std::istream& in);
void save_model_file(const std::filesystem::path& path, const SoftmaxModel& model);
SoftmaxModel load_model_file(const std::filesystem::path& path);

}  // namespace convctx
