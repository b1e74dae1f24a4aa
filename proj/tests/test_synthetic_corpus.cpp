#include <doctest.h>

#include <algorithm>
#include <sstream>

#include "convctx/classifier.hpp"
#include "convctx/error.hpp"
#include "convctx/evaluation.hpp"
#include "convctx/synthetic_corpus.hpp"

using namespace convctx;

namespace {

std::string serialize(const Corpus& c) {
    std::ostringstream out;
    write_corpus(out, c);
    return out.str();
}

double positive_rate(const Corpus& c, Task task) {
    double pos = 0, total = 0;
    for (const auto& t : c.trees) {
        for (const auto& n : t.nodes()) {
            if (!n.label) continue;
            const int k = class_index(task, *n.label);
            if (k < 0) continue;
            ++total;
            pos += k;
        }
    }
    return pos / total;
}

bool contains_token(const std::string& text, const std::string& token) {
    const auto toks = tokenize(text);
    return std::find(toks.begin(), toks.end(), token) != toks.end();
}

}  // namespace

TEST_CASE("label ratios follow the requested fractions") {
    for (auto [task, fraction] : {std::pair{Task::Polarity, 0.431}, std::pair{Task::Hate, 0.106}}) {
        CorpusSpec spec;
        spec.task = task;
        spec.positive_fraction = fraction;
        spec.num_trees = 600;
        spec.context_signal = 0.5;
        spec.seed = 21;
        const auto c = generate(spec).corpus;
        REQUIRE(c.node_count() >= 10000);
        CHECK(std::abs(positive_rate(c, task) - fraction) <= 0.02);
    }
}

TEST_CASE("polarity corpora leave the root unlabeled, hate corpora label everything") {
    CorpusSpec spec;
    spec.num_trees = 30;
    const auto pol = generate(spec);
    for (std::size_t t = 0; t < pol.corpus.trees.size(); ++t) {
        const auto& tree = pol.corpus.trees[t];
        CHECK_FALSE(tree.node(tree.root()).label.has_value());
        CHECK(pol.roles[t][tree.root()] == NodeRole::Unlabeled);
        CHECK(to_baf(tree).arguments.size() == tree.size());
    }
    spec.task = Task::Hate;
    for (const auto& tree : generate(spec).corpus.trees) {
        for (const auto& n : tree.nodes()) CHECK(n.label.has_value());
    }
}

TEST_CASE("generation is byte-identical per seed") {
    CorpusSpec spec;
    spec.num_trees = 50;
    spec.context_signal = 0.7;
    spec.seed = 8;
    const auto a = serialize(generate(spec).corpus);
    CHECK(a == serialize(generate(spec).corpus));
    spec.seed = 9;
    CHECK(a != serialize(generate(spec).corpus));

    std::istringstream in(a);
    CHECK(serialize(read_corpus(in)) == a);
}

TEST_CASE("mean tree size is calibrated") {
    CorpusSpec spec;
    spec.num_trees = 3000;
    spec.mean_tree_size = 12;
    spec.size_dispersion = 0.8;
    const auto c = generate(spec).corpus;
    CHECK(std::abs(double(c.node_count()) / c.trees.size() - 12.0) <= 0.6);
    CHECK(c.trees.front().tree_id() == "t0000");
}

TEST_CASE("context-labeled nodes copy a marker their own text lacks") {
    for (std::size_t depth_k : {1u, 2u}) {
        CorpusSpec spec;
        spec.task = Task::Hate;
        spec.num_trees = 300;
        spec.context_signal = 0.8;
        spec.context_depth = depth_k;
        spec.seed = 13;
        const auto g = generate(spec);
        std::size_t checked = 0;
        for (std::size_t t = 0; t < g.corpus.trees.size(); ++t) {
            const auto& tree = g.corpus.trees[t];
            for (NodeIndex i = 0; i < tree.size(); ++i) {
                const auto& node = tree.node(i);
                const auto role = g.roles[t][i];
                if (role == NodeRole::SelfLabeled) {
                    const bool pos = *node.label == Label::Hate;
                    CHECK(contains_token(node.text, pos ? "selfpos" : "selfneg"));
                    continue;
                }
                CHECK_FALSE(contains_token(node.text, "selfpos"));
                CHECK_FALSE(contains_token(node.text, "selfneg"));
                if (role == NodeRole::Noise) {
                    CHECK(tree.depth(i) < depth_k);
                    continue;
                }
                REQUIRE(role == NodeRole::ContextLabeled);
                REQUIRE(tree.depth(i) >= depth_k);
                const auto anc = ancestor_indices(tree, i)[depth_k - 1];
                const auto family = marker_family(tree.depth(anc), depth_k);
                const bool pos = *node.label == Label::Hate;
                CHECK(contains_token(tree.node(anc).text, marker_token(family, pos)));
                CHECK_FALSE(contains_token(node.text, marker_token(family, true)));
                CHECK_FALSE(contains_token(node.text, marker_token(family, false)));
                ++checked;
            }
        }
        CHECK(checked > 1000);
    }
}

TEST_CASE("without context signal the node text suffices") {
    CorpusSpec spec;
    spec.task = Task::Hate;
    spec.num_trees = 300;
    spec.mean_tree_size = 10;
    spec.positive_fraction = 0.3;
    spec.context_signal = 0.0;
    spec.seed = 2;
    const auto split = split_trees(generate(spec).corpus, 0.8, 1);
    const auto model = bow_logreg_baseline(split.train, Task::Hate, 256, TrainConfig{});
    const auto r = evaluate(model, bow_examples(split.test, Task::Hate, 256));
    CHECK(r.accuracy >= 0.98);
}

TEST_CASE("with full context signal the node text is no better than the majority rate") {
    CorpusSpec spec;
    spec.task = Task::Hate;
    spec.num_trees = 400;
    spec.mean_tree_size = 10;
    spec.positive_fraction = 0.3;
    spec.context_signal = 1.0;
    spec.seed = 2;
    const auto split = split_trees(generate(spec).corpus, 0.8, 1);
    const auto test = bow_examples(split.test, Task::Hate, 256);
    const auto model = bow_logreg_baseline(split.train, Task::Hate, 256, TrainConfig{});
    const auto r = evaluate(model, test);
    double pos = 0;
    for (const auto& e : test) pos += e.label;
    const double majority = std::max(pos, test.size() - pos) / test.size();
    CHECK(r.accuracy <= majority + 0.05);
}

TEST_CASE("invalid specs are rejected") {
    auto bad = [](auto mutate) {
        CorpusSpec spec;
        mutate(spec);
        try {
            generate(spec);
        } catch (const Error& e) {
            return e.code() == ErrorCode::InvalidSpec;
        }
        return false;
    };
    CHECK(bad([](CorpusSpec& s) { s.num_trees = 0; }));
    CHECK(bad([](CorpusSpec& s) { s.mean_tree_size = 0.5; }));
    CHECK(bad([](CorpusSpec& s) { s.positive_fraction = 1.2; }));
    CHECK(bad([](CorpusSpec& s) { s.context_signal = -0.1; }));
    CHECK(bad([](CorpusSpec& s) { s.context_depth = 0; }));
    CHECK(bad([](CorpusSpec& s) { s.vocab_size = 0; }));
}

TEST_CASE("size-one trees are allowed") {
    CorpusSpec spec;
    spec.mean_tree_size = 1.0;
    spec.num_trees = 5;
    const auto c = generate(spec).corpus;
    CHECK(c.node_count() == 5);
}
