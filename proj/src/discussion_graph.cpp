#include "convctx/discussion_graph.hpp"

#include <algorithm>
#include <set>

#include "convctx/error.hpp"

namespace convctx {

std::string_view label_name(Label label) noexcept {
    switch (label) {
        case Label::Support: return "support";
        case Label::Attack: return "attack";
        case Label::Hate: return "hate";
        case Label::NonHate: return "non-hate";
    }
    return "";
}

std::optional<Label> parse_label(std::string_view text) noexcept {
    if (text == "support") return Label::Support;
    if (text == "attack") return Label::Attack;
    if (text == "hate") return Label::Hate;
    if (text == "non-hate") return Label::NonHate;
    return std::nullopt;
}

DiscussionTree DiscussionTree::build(std::vector<CommentNode> records, std::string tree_id) {
    if (records.empty()) throw Error(ErrorCode::EmptyInput, "tree '" + tree_id + "' has no records");
    if (records.size() >= kNoParent) throw Error(ErrorCode::InvalidConfig, "tree too large");

    DiscussionTree tree;
    tree.tree_id_ = std::move(tree_id);
    const auto n = static_cast<NodeIndex>(records.size());

    tree.index_.reserve(n);
    for (NodeIndex i = 0; i < n; ++i) {
        const auto& rec = records[i];
        if (rec.id.empty()) throw Error(ErrorCode::InvalidConfig, "record " + std::to_string(i) + " has an empty id");
        if (!tree.index_.emplace(rec.id, i).second) throw Error(ErrorCode::DuplicateId, "id '" + rec.id + "' appears twice");
    }

    tree.parent_.assign(n, kNoParent);
    std::vector<NodeIndex> roots;
    for (NodeIndex i = 0; i < n; ++i) {
        const auto& rec = records[i];
        if (!rec.parent_id) {
            roots.push_back(i);
            continue;
        }
        if (*rec.parent_id == rec.id) throw Error(ErrorCode::CycleDetected, "node '" + rec.id + "' replies to itself");
        const auto it = tree.index_.find(*rec.parent_id);
        if (it == tree.index_.end()) {
            throw Error(ErrorCode::DanglingParent, "node '" + rec.id + "' replies to unknown '" + *rec.parent_id + "'");
        }
        tree.parent_[i] = it->second;
    }

    // Colour-marking walk up the parent chain: 0 = unseen, 1 = on the current
    // chain, 2 = known to reach a root.
    std::vector<std::uint8_t> state(n, 0);
    std::vector<NodeIndex> chain;
    for (NodeIndex start = 0; start < n; ++start) {
        chain.clear();
        NodeIndex cur = start;
        while (cur != kNoParent && state[cur] == 0) {
            state[cur] = 1;
            chain.push_back(cur);
            cur = tree.parent_[cur];
        }
        if (cur != kNoParent && state[cur] == 1) {
            throw Error(ErrorCode::CycleDetected, "reply cycle through node '" + records[cur].id + "'");
        }
        for (const NodeIndex c : chain) state[c] = 2;
    }

    if (roots.empty()) throw Error(ErrorCode::NoRoot, "tree '" + tree.tree_id_ + "' has no root");
    if (roots.size() > 1) {
        throw Error(ErrorCode::MultipleRoots, "nodes '" + records[roots[0]].id + "' and '" + records[roots[1]].id +
                                                  "' both lack a parent");
    }
    tree.root_ = roots.front();

    tree.children_.resize(n);
    for (NodeIndex i = 0; i < n; ++i) {
        if (tree.parent_[i] != kNoParent) tree.children_[tree.parent_[i]].push_back(i);
    }

    // Depths by BFS from the root, then subtree sizes in reverse BFS order.
    tree.depth_.assign(n, 0);
    tree.subtree_size_.assign(n, 1);
    std::vector<NodeIndex> order;
    order.reserve(n);
    order.push_back(tree.root_);
    for (std::size_t k = 0; k < order.size(); ++k) {
        for (const NodeIndex c : tree.children_[order[k]]) {
            tree.depth_[c] = tree.depth_[order[k]] + 1;
            order.push_back(c);
        }
    }
    for (auto it = order.rbegin(); it != order.rend(); ++it) {
        if (tree.parent_[*it] != kNoParent) tree.subtree_size_[tree.parent_[*it]] += tree.subtree_size_[*it];
    }

    for (const auto& rec : records) {
        if (rec.text.empty()) tree.warnings_.push_back("node '" + rec.id + "' has empty text");
    }
    tree.nodes_ = std::move(records);
    return tree;
}

std::optional<NodeIndex> DiscussionTree::find(std::string_view id) const {
    const auto it = index_.find(std::string(id));
    if (it == index_.end()) return std::nullopt;
    return it->second;
}

NodeIndex DiscussionTree::index_of(std::string_view id) const {
    if (auto i = find(id)) return *i;
    throw Error(ErrorCode::UnknownId, "no node '" + std::string(id) + "' in tree '" + tree_id_ + "'");
}

std::vector<NodeIndex> ancestor_indices(const DiscussionTree& tree, NodeIndex i) {
    std::vector<NodeIndex> out;
    out.reserve(tree.depth(i));
    for (NodeIndex cur = tree.parent(i); cur != kNoParent; cur = tree.parent(cur)) out.push_back(cur);
    return out;
}

std::vector<std::string> ancestors(const DiscussionTree& tree, std::string_view id) {
    std::vector<std::string> out;
    for (const NodeIndex a : ancestor_indices(tree, tree.index_of(id))) out.push_back(tree.node(a).id);
    return out;
}

bool BipolarFramework::conflict_free() const {
    const std::set<std::pair<std::string, std::string>> att(attacks.begin(), attacks.end());
    return std::none_of(supports.begin(), supports.end(), [&](const auto& e) { return att.contains(e); });
}

BipolarFramework to_baf(const DiscussionTree& tree) {
    BipolarFramework baf;
    baf.arguments.reserve(tree.size());
    for (NodeIndex i = 0; i < tree.size(); ++i) {
        const auto& node = tree.node(i);
        baf.arguments.push_back(node.id);
        if (tree.is_root(i)) continue;
        const auto& parent_id = tree.node(tree.parent(i)).id;
        if (node.label == Label::Attack) {
            baf.attacks.emplace_back(node.id, parent_id);
        } else if (node.label == Label::Support) {
            baf.supports.emplace_back(node.id, parent_id);
        } else {
            throw Error(ErrorCode::MissingPolarityLabel, "node '" + node.id + "' has no support/attack label");
        }
    }
    return baf;
}

TreeStats tree_stats(const DiscussionTree& tree) {
    TreeStats s;
    s.nodes = tree.size();
    s.edges = tree.size() - 1;
    for (NodeIndex i = 0; i < tree.size(); ++i) {
        s.depth = std::max(s.depth, tree.depth(i));
        const auto& label = tree.node(i).label;
        if (!label) {
            ++s.unlabeled;
            continue;
        }
        switch (*label) {
            case Label::Support: ++s.supports; break;
            case Label::Attack: ++s.attacks; break;
            case Label::Hate: ++s.hate; break;
            case Label::NonHate: ++s.non_hate; break;
        }
    }
    if (s.supports + s.attacks > 0) {
        s.support_fraction = static_cast<double>(s.supports) / static_cast<double>(s.supports + s.attacks);
    }
    return s;
}

}  // namespace convctx
