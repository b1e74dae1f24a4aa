#pragma once

#include <filesystem>
#include <iosfwd>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "convctx/discussion_graph.hpp"

namespace convctx {

using Vector = std::vector<double>;

inline constexpr std::size_t kDefaultHashedDimension = 256;

/// Lowercases and splits on anything that is not a letter or digit. Input is
/// decoded as UTF-8; Latin-1, Greek and Cyrillic capitals are folded, other
/// non-ASCII code points outside the common punctuation blocks count as
/// letters. Invalid bytes act as separators.
std::vector<std::string> tokenize(std::string_view text);

/// Feature-hashed unigram counts with a sign hash; optional L2 normalization.
Vector hashed_bow_embed(std::string_view text, std::size_t dimension, bool normalize);

/// Source of one fixed-dimension vector per comment.
class EmbeddingProvider {
public:
    virtual ~EmbeddingProvider() = default;
    virtual std::size_t dimension() const noexcept = 0;
    /// Throws MissingEmbedding if the node cannot be resolved.
    virtual Vector embed(const DiscussionTree& tree, NodeIndex node) const = 0;
};

class HashedBowProvider final : public EmbeddingProvider {
public:
    explicit HashedBowProvider(std::size_t dimension = kDefaultHashedDimension, bool normalize = true);
    std::size_t dimension() const noexcept override { return dimension_; }
    Vector embed(const DiscussionTree& tree, NodeIndex node) const override;

private:
    std::size_t dimension_;
    bool normalize_;
};

/// Precomputed vectors keyed by node id. A row key of the form
/// "<tree_id>/<node_id>" takes precedence over a bare "<node_id>" row, which
/// lets corpora with per-tree id spaces disambiguate.
class ExternalEmbeddingProvider final : public EmbeddingProvider {
public:
    ExternalEmbeddingProvider(std::size_t dimension, std::unordered_map<std::string, Vector> rows);
    std::size_t dimension() const noexcept override { return dimension_; }
    Vector embed(const DiscussionTree& tree, NodeIndex node) const override;
    std::size_t row_count() const noexcept { return rows_.size(); }

private:
    std::size_t dimension_;
    std::unordered_map<std::string, Vector> rows_;
};

/// Format: first line "d=<int>", then "<node_id> v1 ... vd" per line.
/// Throws MalformedFile or DimensionMismatch.
ExternalEmbeddingProvider load_external_embeddings(std::istream& in);
ExternalEmbeddingProvider load_external_embeddings(const std::filesystem::path& path);

/// Embeds every node of a tree once; throws MissingEmbedding or
/// DimensionMismatch if the provider misbehaves.
std::vector<Vector> embed_tree(const EmbeddingProvider& provider, const DiscussionTree& tree);

}  // namespace convctx
