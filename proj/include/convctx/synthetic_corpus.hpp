#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "convctx/context_features.hpp"
#include "convctx/corpus_io.hpp"

namespace convctx {

/// Knobs for the synthetic stand-in corpora.
///
/// Every comment holds `words_per_comment` neutral words plus one context
/// marker token ("ctx<f>pos" / "ctx<f>neg", family f = depth mod
/// (context_depth + 1)) whose polarity is drawn with probability
/// positive_fraction. Each labeled node is then one of:
///   - context-labeled (probability context_signal, depth >= context_depth):
///     its label copies the marker of its ancestor context_depth levels up and
///     its own text carries no label cue;
///   - noise (probability context_signal, too shallow): random label, no cue;
///   - self-labeled (otherwise): random label and a "selfpos"/"selfneg" cue
///     in its own text.
/// The marker in a node's own text belongs to a different family than the one
/// that decides its label, so node text alone is label-neutral for
/// context-labeled nodes.
struct CorpusSpec {
    Task task = Task::Polarity;
    std::size_t num_trees = 100;
    double mean_tree_size = 20.0;
    /// Sigma of the log-normal tree-size distribution.
    double size_dispersion = 1.0;
    /// Preferential attachment: a new reply picks parent j with weight
    /// (children_j + 1)^attachment_bias. 0 gives a uniform recursive tree.
    double attachment_bias = 1.0;
    double positive_fraction = 0.431;
    double context_signal = 0.0;
    std::size_t context_depth = 1;
    std::size_t vocab_size = 500;
    std::size_t words_per_comment = 8;
    std::uint64_t seed = 0;

    /// Throws InvalidSpec.
    void validate() const;
};

enum class NodeRole : std::uint8_t { Unlabeled, SelfLabeled, ContextLabeled, Noise };

struct SyntheticCorpus {
    Corpus corpus;
    /// roles[t][i] for node index i of corpus.trees[t].
    std::vector<std::vector<NodeRole>> roles;
};

/// Deterministic per spec (same spec and seed give byte-identical output).
SyntheticCorpus generate(const CorpusSpec& spec);

/// The marker token family a node at `depth` carries in its own text.
std::size_t marker_family(std::size_t depth, std::size_t context_depth) noexcept;
std::string marker_token(std::size_t family, bool positive);

}  // namespace convctx
