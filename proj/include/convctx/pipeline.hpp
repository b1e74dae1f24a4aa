#pragma once

#include <cstdint>
#include <filesystem>
#include <memory>
#include <string>
#include <vector>

#include <json.hpp>

#include "convctx/classifier.hpp"
#include "convctx/evaluation.hpp"

namespace convctx {

struct EmbeddingSource {
    std::size_t hashed_dimension = kDefaultHashedDimension;
    bool normalize = true;
    /// Non-empty: load vectors from this file instead of hashing text.
    std::string external_path;
};

/// Every knob of an end-to-end run. All randomness derives from `seed`:
/// the split uses derive_seed(seed, "split"), walks and training use
/// walk_seed_for(seed) and train_seed_for(seed).
struct RunConfig {
    std::string corpus_path;
    Task task = Task::Polarity;
    WalkConfig walk;
    Aggregation aggregation = Aggregation::WeightedAverage;
    ConcatScheme scheme = ConcatScheme::UVAbsDiff;
    bool normalize_weighted = true;
    EmbeddingSource embedding;
    TrainConfig train;
    double train_fraction = 0.8;
    std::uint64_t seed = 0;
    std::string output_dir;
    bool dump_features = false;

    /// Throws InvalidConfig.
    void validate() const;
};

nlohmann::json to_json(const RunConfig& config);
/// Missing keys keep their defaults; unknown keys are rejected.
RunConfig run_config_from_json(const nlohmann::json& j, RunConfig base = {});

std::uint64_t split_seed_for(std::uint64_t seed) noexcept;
std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t count);

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingSource& source);
ExperimentConfig experiment_config(const RunConfig& config);
TreeSplit split_for(const RunConfig& config, const Corpus& corpus);

struct PipelineResult {
    EvalReport report;
    SoftmaxModel model;
    nlohmann::json manifest;
};

/// split -> featurize -> train -> evaluate. When output_dir is set, writes
/// model.txt, report.json, manifest.json and (optionally) the train/test
/// feature dumps.
PipelineResult run_pipeline(const RunConfig& config, const Corpus& corpus);

/// Re-featurizes the test split of `config` and evaluates a saved model.
EvalReport evaluate_saved(const RunConfig& config, const Corpus& corpus, const SoftmaxModel& model);

ErrorAnalysis run_error_analysis(const RunConfig& config, const Corpus& corpus, const SoftmaxModel& model);

GridSearchResult run_grid(const RunConfig& config, const Corpus& corpus, const std::vector<double>& p_values,
                          const std::vector<double>& gamma_values, std::size_t num_seeds);

std::vector<AblationRow> run_ablation(const RunConfig& config, const Corpus& corpus, std::size_t num_seeds);

/// Replay document for a run: {"version", "config", "derived_seeds", "metrics", ...}.
nlohmann::json make_manifest(const RunConfig& config, const std::string& command);

void write_text_file(const std::filesystem::path& path, const std::string& contents);

}  // namespace convctx
