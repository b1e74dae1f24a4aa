#pragma once

#include <cstdint>
#include <iosfwd>
#include <optional>
#include <utility>
#include <vector>

#include "convctx/discussion_graph.hpp"
#include "convctx/random.hpp"

namespace convctx {

inline constexpr std::size_t kDefaultWalkLength = 4;

struct WalkConfig {
    double p = 0.8;      // probability of stepping to the parent
    double gamma = 0.8;  // discount per distinct-node position
    std::size_t max_nodes = kDefaultWalkLength;  // L, distinct nodes including the start
    std::uint64_t seed = 0;
    /// Hard bound on raw steps; 0 means 10 * max_nodes.
    std::size_t step_cap = 0;

    std::size_t effective_step_cap() const noexcept { return step_cap == 0 ? 10 * max_nodes : step_cap; }

    /// Throws InvalidConfig if any range invariant is violated.
    void validate() const;
};

struct WalkSample {
    std::vector<NodeIndex> nodes;   // distinct, position 0 = start
    std::vector<double> weights;    // weights[k] = gamma^k
    std::vector<NodeIndex> trace;   // every physical position, start included
};

/// Neighbours of `current` with their step probabilities: parent first, then
/// children in input order. A root spreads all mass over its children; a
/// leaf sends all mass to its parent. Empty for an isolated node.
std::vector<std::pair<NodeIndex, double>> transition_distribution(const DiscussionTree& tree, NodeIndex current,
                                                                  double p);

/// Number of distinct nodes a walk from `start` can ever reach with positive
/// probability under parent probability p.
std::size_t reachable_count(const DiscussionTree& tree, NodeIndex start, double p);

/// Biased root-seeking random walk. Revisits move the physical position but
/// add nothing to the sample. Stops at L distinct nodes, when nothing new is
/// reachable, or after step_cap raw steps. With p = 1 the walk stops once it
/// reaches the root.
WalkSample sample_walk(const DiscussionTree& tree, NodeIndex start, const WalkConfig& config, Rng& rng);

/// Deterministic p = 1 walk: [start] ++ ancestors, truncated to L.
WalkSample root_seeking_walk(const DiscussionTree& tree, NodeIndex start, std::size_t max_nodes, double gamma = 1.0);

/// [gamma^0, ..., gamma^(length-1)] with 0^0 = 1.
std::vector<double> walk_weights(std::size_t length, double gamma);

/// One JSON object per line: tree id, start, raw trace, distinct sequence and weights.
void write_walk_trace(std::ostream& out, const DiscussionTree& tree, const WalkSample& walk);

}  // namespace convctx
