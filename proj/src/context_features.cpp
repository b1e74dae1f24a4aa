#include "convctx/context_features.hpp"

#include <algorithm>
#include <cmath>
#include <exception>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "convctx/error.hpp"

namespace convctx {

std::string_view aggregation_name(Aggregation a) noexcept {
    switch (a) {
        case Aggregation::Sum: return "sum";
        case Aggregation::Average: return "average";
        case Aggregation::WeightedAverage: return "weighted_average";
    }
    return "";
}

std::string_view scheme_name(ConcatScheme s) noexcept {
    switch (s) {
        case ConcatScheme::UV: return "uv";
        case ConcatScheme::UVMul: return "uv_mul";
        case ConcatScheme::UVAbsDiff: return "uv_absdiff";
        case ConcatScheme::UVAbsDiffMul: return "uv_absdiff_mul";
    }
    return "";
}

std::string_view task_name(Task t) noexcept { return t == Task::Polarity ? "polarity" : "hate"; }

Aggregation parse_aggregation(std::string_view text) {
    for (auto a : {Aggregation::Sum, Aggregation::Average, Aggregation::WeightedAverage}) {
        if (aggregation_name(a) == text) return a;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown aggregation '" + std::string(text) + "'");
}

ConcatScheme parse_scheme(std::string_view text) {
    for (auto s : kAllSchemes) {
        if (scheme_name(s) == text) return s;
    }
    throw Error(ErrorCode::InvalidConfig, "unknown concatenation scheme '" + std::string(text) + "'");
}

Task parse_task(std::string_view text) {
    if (text == "polarity") return Task::Polarity;
    if (text == "hate") return Task::Hate;
    throw Error(ErrorCode::InvalidConfig, "unknown task '" + std::string(text) + "'");
}

std::size_t scheme_multiplier(ConcatScheme s) noexcept {
    switch (s) {
        case ConcatScheme::UV: return 2;
        case ConcatScheme::UVMul:
        case ConcatScheme::UVAbsDiff: return 3;
        case ConcatScheme::UVAbsDiffMul: return 4;
    }
    return 0;
}

std::vector<std::string> class_names(Task task) {
    if (task == Task::Polarity) return {"attack", "support"};
    return {"non-hate", "hate"};
}

int class_index(Task task, Label label) noexcept {
    if (task == Task::Polarity) {
        if (label == Label::Attack) return 0;
        if (label == Label::Support) return 1;
        return -1;
    }
    if (label == Label::NonHate) return 0;
    if (label == Label::Hate) return 1;
    return -1;
}

namespace {

template <typename Get>
Vector aggregate_impl(std::size_t count, Get&& get, std::span<const double> weights, Aggregation strategy,
                      std::size_t dimension, bool normalize_weighted) {
    if (weights.size() != count) throw Error(ErrorCode::DimensionMismatch, "weights and context lengths differ");
    Vector out(dimension, 0.0);
    if (count == 0) return out;
    for (std::size_t i = 0; i < count; ++i) {
        if (get(i).size() != dimension) throw Error(ErrorCode::DimensionMismatch, "context vector has wrong dimension");
        if (weights[i] < 0.0 || std::isnan(weights[i])) throw Error(ErrorCode::NegativeWeight, "context weight < 0");
    }
    switch (strategy) {
        case Aggregation::Sum:
        case Aggregation::Average:
            for (std::size_t i = 0; i < count; ++i) {
                const Vector& x = get(i);
                for (std::size_t j = 0; j < dimension; ++j) out[j] += x[j];
            }
            if (strategy == Aggregation::Average) {
                const double n = static_cast<double>(count);
                for (double& y : out) y /= n;
            }
            break;
        case Aggregation::WeightedAverage: {
            double total = 0.0;
            for (std::size_t i = 0; i < count; ++i) {
                const Vector& x = get(i);
                total += weights[i];
                for (std::size_t j = 0; j < dimension; ++j) out[j] += weights[i] * x[j];
            }
            if (normalize_weighted) {
                if (total > 0.0) {
                    for (double& y : out) y /= total;
                } else {
                    std::fill(out.begin(), out.end(), 0.0);
                }
            }
            break;
        }
    }
    return out;
}

FeatureVector featurize_with(const DiscussionTree& tree, NodeIndex poi, const FeatureConfig& config, Rng& rng,
                             const auto& embedding_of) {
    FeatureVector fv;
    fv.scheme = config.scheme;
    fv.poi_id = tree.node(poi).id;
    fv.walk = sample_walk(tree, poi, config.walk, rng);

    const Vector& u = embedding_of(poi);
    const std::size_t m = fv.walk.nodes.size() - 1;
    std::span<const double> context_weights(fv.walk.weights.data() + 1, m);
    const Vector v = aggregate_impl(
        m, [&](std::size_t i) -> const Vector& { return embedding_of(fv.walk.nodes[i + 1]); }, context_weights,
        config.aggregation, u.size(), config.normalize_weighted);
    fv.values = concat_features(u, v, config.scheme);
    return fv;
}

struct NodeTask {
    std::size_t tree;
    NodeIndex node;
    int label;
};

// Label check and canonical ordering; throws MissingLabel.
std::vector<NodeTask> plan_tasks(const Corpus& corpus, Task task) {
    std::vector<NodeTask> tasks;
    for (std::size_t t = 0; t < corpus.trees.size(); ++t) {
        const auto& tree = corpus.trees[t];
        std::vector<NodeIndex> order(tree.size());
        std::iota(order.begin(), order.end(), NodeIndex{0});
        std::sort(order.begin(), order.end(),
                  [&](NodeIndex a, NodeIndex b) { return tree.node(a).id < tree.node(b).id; });
        for (const NodeIndex i : order) {
            if (task == Task::Polarity && tree.is_root(i)) continue;
            const auto& node = tree.node(i);
            const int cls = node.label ? class_index(task, *node.label) : -1;
            if (cls < 0) {
                throw Error(ErrorCode::MissingLabel, "node '" + node.id + "' of tree '" + tree.tree_id() +
                                                         "' has no " + std::string(task_name(task)) + " label");
            }
            tasks.push_back({t, i, cls});
        }
    }
    return tasks;
}

LabeledExample run_task(const Corpus& corpus, const std::vector<std::vector<Vector>>& tables, const NodeTask& task,
                        const FeatureConfig& config) {
    const auto& tree = corpus.trees[task.tree];
    const auto& node = tree.node(task.node);
    Rng rng(node_seed(config.walk.seed, tree.tree_id(), node.id));
    auto fv = featurize_node(tree, task.node, tables[task.tree], config, rng);
    LabeledExample ex;
    ex.tree_id = tree.tree_id();
    ex.node_id = node.id;
    ex.label = task.label;
    ex.features = std::move(fv.values);
    for (std::size_t k = 1; k < fv.walk.nodes.size(); ++k) ex.context_ids.push_back(tree.node(fv.walk.nodes[k]).id);
    return ex;
}

}  // namespace

Vector aggregate_context(std::span<const Vector> vectors, std::span<const double> weights, Aggregation strategy,
                         std::size_t dimension, bool normalize_weighted) {
    return aggregate_impl(
        vectors.size(), [&](std::size_t i) -> const Vector& { return vectors[i]; }, weights, strategy, dimension,
        normalize_weighted);
}

Vector concat_features(const Vector& u, const Vector& v, ConcatScheme scheme) {
    if (u.size() != v.size()) throw Error(ErrorCode::DimensionMismatch, "u and v differ in dimension");
    const std::size_t d = u.size();
    Vector out;
    out.reserve(scheme_multiplier(scheme) * d);
    out.insert(out.end(), u.begin(), u.end());
    out.insert(out.end(), v.begin(), v.end());
    if (scheme == ConcatScheme::UVAbsDiff || scheme == ConcatScheme::UVAbsDiffMul) {
        for (std::size_t j = 0; j < d; ++j) out.push_back(std::fabs(u[j] - v[j]));
    }
    if (scheme == ConcatScheme::UVMul || scheme == ConcatScheme::UVAbsDiffMul) {
        for (std::size_t j = 0; j < d; ++j) out.push_back(u[j] * v[j]);
    }
    return out;
}

FeatureVector featurize_node(const DiscussionTree& tree, NodeIndex poi, const EmbeddingProvider& provider,
                             const FeatureConfig& config, Rng& rng) {
    if (poi >= tree.size()) throw Error(ErrorCode::UnknownId, "PoI index out of range");
    const auto table = embed_tree(provider, tree);
    return featurize_node(tree, poi, table, config, rng);
}

FeatureVector featurize_node(const DiscussionTree& tree, NodeIndex poi, std::span<const Vector> embeddings,
                             const FeatureConfig& config, Rng& rng) {
    if (poi >= tree.size()) throw Error(ErrorCode::UnknownId, "PoI index out of range");
    if (embeddings.size() != tree.size()) throw Error(ErrorCode::DimensionMismatch, "embedding table size mismatch");
    return featurize_with(tree, poi, config, rng, [&](NodeIndex i) -> const Vector& { return embeddings[i]; });
}

std::vector<LabeledExample> featurize_corpus_serial(const Corpus& corpus, const EmbeddingProvider& provider,
                                                    const FeatureConfig& config, Task task) {
    config.walk.validate();
    const auto tasks = plan_tasks(corpus, task);
    std::vector<std::vector<Vector>> tables;
    tables.reserve(corpus.trees.size());
    for (const auto& tree : corpus.trees) tables.push_back(embed_tree(provider, tree));

    std::vector<LabeledExample> out;
    out.reserve(tasks.size());
    for (const auto& t : tasks) out.push_back(run_task(corpus, tables, t, config));
    return out;
}

std::vector<LabeledExample> featurize_corpus(const Corpus& corpus, const EmbeddingProvider& provider,
                                             const FeatureConfig& config, Task task) {
    config.walk.validate();
    const auto tasks = plan_tasks(corpus, task);
    const auto n_trees = static_cast<std::ptrdiff_t>(corpus.trees.size());
    const auto n_tasks = static_cast<std::ptrdiff_t>(tasks.size());

    std::vector<std::vector<Vector>> tables(corpus.trees.size());
    std::vector<LabeledExample> out(tasks.size());
    std::exception_ptr failure;

#pragma omp parallel for schedule(dynamic, 16)
    for (std::ptrdiff_t t = 0; t < n_trees; ++t) {
        try {
            tables[t] = embed_tree(provider, corpus.trees[t]);
        } catch (...) {
#pragma omp critical(convctx_featurize_error)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);

#pragma omp parallel for schedule(dynamic, 64)
    for (std::ptrdiff_t k = 0; k < n_tasks; ++k) {
        try {
            out[k] = run_task(corpus, tables, tasks[k], config);
        } catch (...) {
#pragma omp critical(convctx_featurize_error)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    return out;
}

std::vector<LabeledExample> bow_examples(const Corpus& corpus, Task task, std::size_t dimension) {
    const auto tasks = plan_tasks(corpus, task);
    std::vector<LabeledExample> out;
    out.reserve(tasks.size());
    for (const auto& t : tasks) {
        const auto& tree = corpus.trees[t.tree];
        const auto& node = tree.node(t.node);
        LabeledExample ex;
        ex.tree_id = tree.tree_id();
        ex.node_id = node.id;
        ex.label = t.label;
        if (task == Task::Polarity) {
            ex.features = hashed_bow_embed(tree.node(tree.parent(t.node)).text, dimension, false);
            const auto child = hashed_bow_embed(node.text, dimension, false);
            ex.features.insert(ex.features.end(), child.begin(), child.end());
        } else {
            ex.features = hashed_bow_embed(node.text, dimension, false);
        }
        out.push_back(std::move(ex));
    }
    return out;
}

void write_feature_dump(std::ostream& out, std::span<const LabeledExample> examples, Task task) {
    const auto names = class_names(task);
    for (const auto& ex : examples) {
        nlohmann::ordered_json rec;
        rec["tree_id"] = ex.tree_id;
        rec["node_id"] = ex.node_id;
        rec["label"] = names.at(static_cast<std::size_t>(ex.label));
        rec["features"] = ex.features;
        out << rec.dump() << '\n';
    }
}

}  // namespace convctx
