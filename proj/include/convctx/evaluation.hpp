#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "convctx/classifier.hpp"
#include "convctx/context_features.hpp"
#include "convctx/corpus_io.hpp"

namespace convctx {

using ConfusionMatrix = std::vector<std::vector<std::size_t>>;  // [true][predicted]

struct EvalReport {
    std::vector<std::string> class_names;
    ConfusionMatrix confusion;
    std::size_t total = 0;
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
    std::vector<double> precision;
    std::vector<double> recall;
    std::vector<double> f1;
    /// Classes with no true examples; they contribute f1 = 0 to macro_f1.
    std::vector<std::string> unsupported_classes;
    /// Binary tasks only: metrics of class index 1.
    std::optional<double> precision_pos;
    std::optional<double> recall_pos;
    std::optional<double> f1_pos;
};

/// All metrics are derived from the matrix. Throws EmptyEvalSet.
EvalReport report_from_confusion(const ConfusionMatrix& confusion, std::vector<std::string> class_names);

/// Predicts with argmax and tallies the confusion matrix. Throws EmptyEvalSet
/// or DimensionMismatch.
EvalReport evaluate(const SoftmaxModel& model, std::span<const LabeledExample> examples);

/// Structured JSON text including the confusion matrix.
void write_report(std::ostream& out, const EvalReport& report);

struct TreeSplit {
    Corpus train;
    Corpus test;
};

/// Tree-level split: round(n * fraction) trees (clamped to [1, n-1]) go to
/// train. Throws TooFewTrees or InvalidConfig.
TreeSplit split_trees(const Corpus& corpus, double train_fraction, std::uint64_t seed);

/// Everything a single train/evaluate run needs besides the data.
struct ExperimentConfig {
    Task task = Task::Polarity;
    FeatureConfig features;
    TrainConfig train;
};

/// Walk and training seeds used for replicate `seed`.
std::uint64_t walk_seed_for(std::uint64_t seed) noexcept;
std::uint64_t train_seed_for(std::uint64_t seed) noexcept;

struct SeedAveragedReport {
    std::vector<std::uint64_t> seeds;
    std::vector<EvalReport> per_seed;
    // Arithmetic means of the per-seed metrics.
    double accuracy = 0.0;
    double macro_f1 = 0.0;
    double precision_pos = 0.0;
    double recall_pos = 0.0;
    double precision_macro = 0.0;
    double recall_macro = 0.0;
};

SeedAveragedReport average_reports(std::vector<std::uint64_t> seeds, std::vector<EvalReport> reports);

/// Featurize train and test with the replicate's walk seed, train with its
/// training seed and evaluate on test.
EvalReport run_replicate(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                         ExperimentConfig config, std::uint64_t seed, SoftmaxModel* model_out = nullptr);

SeedAveragedReport run_replicates(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                                  const ExperimentConfig& config, std::span<const std::uint64_t> seeds);

/// The context-free bag-of-words baseline under the same replicate seeds.
SeedAveragedReport run_bow_baseline(const Corpus& train, const Corpus& test, Task task, std::size_t dimension,
                                    const TrainConfig& train_config, std::span<const std::uint64_t> seeds);

struct GridCell {
    double p = 0.0;
    double gamma = 0.0;
    SeedAveragedReport report;
};

struct GridSearchResult {
    std::vector<GridCell> cells;  // p-major, in the order of the requested values
    std::size_t best = 0;
    std::vector<std::uint64_t> seeds;

    const GridCell& best_cell() const { return cells.at(best); }
};

/// Best by macro_f1, then accuracy, then lower p, then lower gamma.
std::size_t select_best_cell(std::span<const GridCell> cells);

/// Every (p, gamma) cell runs run_replicates; cells are evaluated in parallel
/// and the result does not depend on evaluation order.
GridSearchResult grid_search(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                             const ExperimentConfig& base, std::span<const double> p_values,
                             std::span<const double> gamma_values, std::span<const std::uint64_t> seeds);

/// Header: p,gamma,accuracy,macro_f1,precision_pos,recall_pos,precision_macro,recall_macro
void write_grid_csv(std::ostream& out, const GridSearchResult& result);

struct AblationRow {
    ConcatScheme scheme = ConcatScheme::UVAbsDiff;
    SeedAveragedReport report;
};

/// The four concatenation schemes under identical split, seeds and settings.
std::vector<AblationRow> ablate_concat(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                                       const ExperimentConfig& base, std::span<const std::uint64_t> seeds);

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows);

struct ContextEntry {
    std::string id;
    std::string text;
};

struct Misclassification {
    std::string tree_id;
    std::string node_id;
    std::string text;
    std::string true_label;
    std::string predicted_label;
    std::vector<ContextEntry> context;
};

struct ErrorAnalysis {
    std::vector<Misclassification> false_positives;
    std::vector<Misclassification> false_negatives;
};

/// Lists every misclassified example with its walk-sampled context. Throws
/// NotBinaryTask for models that are not two-class.
ErrorAnalysis error_analysis(const SoftmaxModel& model, std::span<const LabeledExample> examples,
                             const Corpus& corpus);

/// One JSON line per misclassification with a "kind" of "FP" or "FN".
void write_error_analysis(std::ostream& out, const ErrorAnalysis& analysis);

}  // namespace convctx
