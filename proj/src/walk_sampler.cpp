#include "convctx/walk_sampler.hpp"

#include <algorithm>
#include <cmath>
#include <ostream>

#include <json.hpp>

#include "convctx/error.hpp"

namespace convctx {

void WalkConfig::validate() const {
    if (!(p >= 0.0 && p <= 1.0)) throw Error(ErrorCode::InvalidConfig, "walk p must lie in [0, 1]");
    if (!(gamma >= 0.0 && gamma <= 1.0)) throw Error(ErrorCode::InvalidConfig, "walk gamma must lie in [0, 1]");
    if (max_nodes < 1) throw Error(ErrorCode::InvalidConfig, "walk length L must be >= 1");
    if (effective_step_cap() < max_nodes - 1) throw Error(ErrorCode::InvalidConfig, "step cap must be >= L - 1");
}

std::vector<std::pair<NodeIndex, double>> transition_distribution(const DiscussionTree& tree, NodeIndex current,
                                                                  double p) {
    if (current >= tree.size()) throw Error(ErrorCode::UnknownId, "node index out of range");
    const auto kids = tree.children(current);
    std::vector<std::pair<NodeIndex, double>> out;
    out.reserve(kids.size() + 1);
    const bool has_parent = !tree.is_root(current);
    if (has_parent && kids.empty()) {
        out.emplace_back(tree.parent(current), 1.0);
        return out;
    }
    if (has_parent) out.emplace_back(tree.parent(current), p);
    const double child_mass = has_parent ? 1.0 - p : 1.0;
    const double each = kids.empty() ? 0.0 : child_mass / static_cast<double>(kids.size());
    for (const NodeIndex c : kids) out.emplace_back(c, each);
    return out;
}

std::size_t reachable_count(const DiscussionTree& tree, NodeIndex start, double p) {
    if (p >= 1.0) return tree.depth(start) + 1;
    if (p > 0.0) return tree.size();
    // p = 0: internal non-root nodes never move up, leaves always do.
    if (tree.is_root(start)) return tree.size();
    NodeIndex anchor = start;
    if (tree.children(start).empty()) anchor = tree.parent(start);
    return tree.is_root(anchor) ? tree.size() : tree.subtree_size(anchor);
}

namespace {

NodeIndex draw_neighbor(const std::vector<std::pair<NodeIndex, double>>& dist, Rng& rng) {
    const double u = uniform01(rng);
    double cumulative = 0.0;
    std::size_t last_positive = 0;
    for (std::size_t k = 0; k < dist.size(); ++k) {
        if (dist[k].second <= 0.0) continue;
        cumulative += dist[k].second;
        last_positive = k;
        if (u < cumulative) return dist[k].first;
    }
    // Rounding left the cumulative sum just below 1.
    return dist[last_positive].first;
}

}  // namespace

WalkSample sample_walk(const DiscussionTree& tree, NodeIndex start, const WalkConfig& config, Rng& rng) {
    if (start >= tree.size()) throw Error(ErrorCode::UnknownId, "walk start out of range");
    config.validate();

    WalkSample walk;
    walk.nodes.push_back(start);
    walk.trace.push_back(start);

    const std::size_t target = std::min(config.max_nodes, reachable_count(tree, start, config.p));
    const std::size_t cap = config.effective_step_cap();
    const bool stop_at_root = config.p >= 1.0;

    // Walks are short (L is small), so a linear scan beats a hash set here.
    auto visited = [&](NodeIndex n) { return std::find(walk.nodes.begin(), walk.nodes.end(), n) != walk.nodes.end(); };

    NodeIndex position = start;
    std::vector<std::pair<NodeIndex, double>> dist;
    for (std::size_t step = 0; step < cap && walk.nodes.size() < target; ++step) {
        if (stop_at_root && tree.is_root(position)) break;
        dist = transition_distribution(tree, position, config.p);
        if (dist.empty()) break;
        position = draw_neighbor(dist, rng);
        walk.trace.push_back(position);
        if (!visited(position)) walk.nodes.push_back(position);
    }
    walk.weights = walk_weights(walk.nodes.size(), config.gamma);
    return walk;
}

WalkSample root_seeking_walk(const DiscussionTree& tree, NodeIndex start, std::size_t max_nodes, double gamma) {
    if (start >= tree.size()) throw Error(ErrorCode::UnknownId, "walk start out of range");
    if (max_nodes < 1) throw Error(ErrorCode::InvalidConfig, "walk length L must be >= 1");
    WalkSample walk;
    for (NodeIndex cur = start; cur != kNoParent && walk.nodes.size() < max_nodes; cur = tree.parent(cur)) {
        walk.nodes.push_back(cur);
    }
    walk.trace = walk.nodes;
    walk.weights = walk_weights(walk.nodes.size(), gamma);
    return walk;
}

std::vector<double> walk_weights(std::size_t length, double gamma) {
    std::vector<double> w(length);
    for (std::size_t k = 0; k < length; ++k) w[k] = std::pow(gamma, static_cast<double>(k));  // pow(0, 0) == 1
    return w;
}

void write_walk_trace(std::ostream& out, const DiscussionTree& tree, const WalkSample& walk) {
    auto ids = [&](const std::vector<NodeIndex>& xs) {
        std::vector<std::string> v;
        v.reserve(xs.size());
        for (const NodeIndex x : xs) v.push_back(tree.node(x).id);
        return v;
    };
    nlohmann::ordered_json rec;
    rec["tree_id"] = tree.tree_id();
    rec["start"] = tree.node(walk.nodes.front()).id;
    rec["raw_steps"] = ids(walk.trace);
    rec["nodes"] = ids(walk.nodes);
    rec["weights"] = walk.weights;
    out << rec.dump() << '\n';
}

}  // namespace convctx
