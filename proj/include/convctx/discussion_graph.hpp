#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <utility>
#include <vector>

namespace convctx {

/// Task labels carried by a comment. For polarity the label describes the
/// reply edge from this node to its parent; for hate speech it describes the
/// node itself.
enum class Label : std::uint8_t { Support, Attack, Hate, NonHate };

std::string_view label_name(Label label) noexcept;
std::optional<Label> parse_label(std::string_view text) noexcept;

struct CommentNode {
    std::string id;
    std::optional<std::string> parent_id;
    std::string text;
    std::optional<Label> label;
};

using NodeIndex = std::uint32_t;
inline constexpr NodeIndex kNoParent = static_cast<NodeIndex>(-1);

/// Immutable, validated single-rooted reply tree. Node indices follow input
/// record order; children lists preserve input order as well.
class DiscussionTree {
public:
    /// Validates and indexes the records. Throws Error with one of
    /// EmptyInput, DuplicateId, DanglingParent, MultipleRoots, NoRoot or
    /// CycleDetected.
    static DiscussionTree build(std::vector<CommentNode> records, std::string tree_id = {});

    const std::string& tree_id() const noexcept { return tree_id_; }
    std::size_t size() const noexcept { return nodes_.size(); }
    NodeIndex root() const noexcept { return root_; }

    const CommentNode& node(NodeIndex i) const { return nodes_.at(i); }
    std::span<const CommentNode> nodes() const noexcept { return nodes_; }

    /// Throws UnknownId.
    NodeIndex index_of(std::string_view id) const;
    std::optional<NodeIndex> find(std::string_view id) const;

    bool is_root(NodeIndex i) const noexcept { return i == root_; }
    NodeIndex parent(NodeIndex i) const noexcept { return parent_[i]; }
    std::span<const NodeIndex> children(NodeIndex i) const noexcept { return children_[i]; }
    std::size_t depth(NodeIndex i) const noexcept { return depth_[i]; }
    std::size_t subtree_size(NodeIndex i) const noexcept { return subtree_size_[i]; }

    /// Non-fatal findings from construction (currently: empty comment text).
    const std::vector<std::string>& warnings() const noexcept { return warnings_; }

private:
    DiscussionTree() = default;

    std::string tree_id_;
    std::vector<CommentNode> nodes_;
    std::unordered_map<std::string, NodeIndex> index_;
    std::vector<NodeIndex> parent_;
    std::vector<std::vector<NodeIndex>> children_;
    std::vector<std::size_t> depth_;
    std::vector<std::size_t> subtree_size_;
    NodeIndex root_ = 0;
    std::vector<std::string> warnings_;
};

/// [parent, grandparent, ..., root]; empty for the root. Throws UnknownId.
std::vector<std::string> ancestors(const DiscussionTree& tree, std::string_view id);
std::vector<NodeIndex> ancestor_indices(const DiscussionTree& tree, NodeIndex i);

enum class Relation : std::uint8_t { Attack, Support };

/// Bipolar argumentation framework <A, R_att, R_sup>. Pairs are (source,
/// target) = (replying node, node replied to).
struct BipolarFramework {
    std::vector<std::string> arguments;
    std::vector<std::pair<std::string, std::string>> attacks;
    std::vector<std::pair<std::string, std::string>> supports;

    /// attacks and supports share no pair.
    bool conflict_free() const;
};

/// Throws MissingPolarityLabel if a non-root node lacks support/attack.
BipolarFramework to_baf(const DiscussionTree& tree);

struct TreeStats {
    std::size_t nodes = 0;
    std::size_t edges = 0;
    std::size_t depth = 0;
    std::size_t supports = 0;
    std::size_t attacks = 0;
    std::size_t hate = 0;
    std::size_t non_hate = 0;
    std::size_t unlabeled = 0;
    /// supports / (supports + attacks); absent when no polarity-labeled edge.
    std::optional<double> support_fraction;
};

TreeStats tree_stats(const DiscussionTree& tree);

}  // namespace convctx
