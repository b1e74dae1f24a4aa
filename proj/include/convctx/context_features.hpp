#pragma once

#include <iosfwd>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "convctx/corpus_io.hpp"
#include "convctx/embeddings.hpp"
#include "convctx/walk_sampler.hpp"

namespace convctx {

enum class Aggregation { Sum, Average, WeightedAverage };
enum class ConcatScheme { UV, UVMul, UVAbsDiff, UVAbsDiffMul };
enum class Task { Polarity, Hate };

std::string_view aggregation_name(Aggregation a) noexcept;
std::string_view scheme_name(ConcatScheme s) noexcept;
std::string_view task_name(Task t) noexcept;
Aggregation parse_aggregation(std::string_view text);
ConcatScheme parse_scheme(std::string_view text);
Task parse_task(std::string_view text);

inline constexpr ConcatScheme kAllSchemes[] = {ConcatScheme::UV, ConcatScheme::UVMul, ConcatScheme::UVAbsDiff,
                                               ConcatScheme::UVAbsDiffMul};

/// 2, 3, 3 and 4 blocks of d respectively.
std::size_t scheme_multiplier(ConcatScheme s) noexcept;

/// Class order per task; index 1 is the positive class (support / hate).
std::vector<std::string> class_names(Task task);
/// -1 when the label belongs to the other task.
int class_index(Task task, Label label) noexcept;

struct FeatureConfig {
    WalkConfig walk;
    Aggregation aggregation = Aggregation::WeightedAverage;
    ConcatScheme scheme = ConcatScheme::UVAbsDiff;
    /// WeightedAverage divides by the weight sum; false gives the raw
    /// discounted sum instead.
    bool normalize_weighted = true;
};

struct FeatureVector {
    Vector values;
    ConcatScheme scheme = ConcatScheme::UVAbsDiff;
    std::string poi_id;
    WalkSample walk;
};

struct LabeledExample {
    std::string tree_id;
    std::string node_id;
    int label = 0;
    Vector features;
    /// Walk-sampled context ids (PoI excluded), kept for error analysis.
    std::vector<std::string> context_ids;
};

/// Empty context yields the zero vector under every strategy. A weighted
/// average whose weights sum to zero is also the zero vector. Throws
/// DimensionMismatch or NegativeWeight.
Vector aggregate_context(std::span<const Vector> vectors, std::span<const double> weights, Aggregation strategy,
                         std::size_t dimension, bool normalize_weighted = true);

/// Throws DimensionMismatch if u and v differ in length.
Vector concat_features(const Vector& u, const Vector& v, ConcatScheme scheme);

/// Walks from the PoI, aggregates positions 1..m into v (weights gamma^1..)
/// and concatenates with u = embedding of the PoI.
FeatureVector featurize_node(const DiscussionTree& tree, NodeIndex poi, const EmbeddingProvider& provider,
                             const FeatureConfig& config, Rng& rng);

/// Same computation over a precomputed per-node embedding table.
FeatureVector featurize_node(const DiscussionTree& tree, NodeIndex poi, std::span<const Vector> embeddings,
                             const FeatureConfig& config, Rng& rng);

/// Polarity: one example per non-root node. Hate: one example per node.
/// Each node walks with its own stream seeded by node_seed(walk.seed, tree,
/// node). Output order is (tree id, node id). OpenMP-parallel over nodes;
/// results are identical to featurize_corpus_serial. Throws MissingLabel.
std::vector<LabeledExample> featurize_corpus(const Corpus& corpus, const EmbeddingProvider& provider,
                                             const FeatureConfig& config, Task task);

/// Single-threaded reference implementation of featurize_corpus.
std::vector<LabeledExample> featurize_corpus_serial(const Corpus& corpus, const EmbeddingProvider& provider,
                                                    const FeatureConfig& config, Task task);

/// Context-free baseline inputs: polarity = (parent BoW, child BoW), hate = BoW.
std::vector<LabeledExample> bow_examples(const Corpus& corpus, Task task, std::size_t dimension);

/// One JSON line per example: {tree_id, node_id, label, features}.
void write_feature_dump(std::ostream& out, std::span<const LabeledExample> examples, Task task);

}  // namespace convctx
