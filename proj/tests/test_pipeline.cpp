#include <doctest.h>

#include <filesystem>
#include <fstream>
#include <sstream>

#include "convctx/error.hpp"
#include "convctx/pipeline.hpp"
#include "convctx/synthetic_corpus.hpp"

using namespace convctx;
namespace fs = std::filesystem;

namespace {

fs::path scratch(const std::string& name) {
    const auto dir = fs::temp_directory_path() / ("convctx_pipeline_test_" + name);
    fs::remove_all(dir);
    fs::create_directories(dir);
    return dir;
}

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    std::ostringstream s;
    s << in.rdbuf();
    return s.str();
}

Corpus hate_corpus() {
    CorpusSpec spec;
    spec.task = Task::Hate;
    spec.num_trees = 80;
    spec.mean_tree_size = 10;
    spec.positive_fraction = 0.3;
    spec.context_signal = 0.8;
    spec.seed = 17;
    return generate(spec).corpus;
}

RunConfig hate_config(const fs::path& out) {
    RunConfig c;
    c.corpus_path = "unused.jsonl";
    c.task = Task::Hate;
    c.embedding.hashed_dimension = 32;
    c.train.epochs = 10;
    c.train.class_weighting = true;
    c.seed = 3;
    c.output_dir = out.string();
    return c;
}

}  // namespace

TEST_CASE("run config survives a JSON round trip") {
    RunConfig c;
    c.corpus_path = "c.jsonl";
    c.task = Task::Hate;
    c.walk.p = 0.6;
    c.walk.gamma = 0.2;
    c.walk.max_nodes = 6;
    c.walk.step_cap = 99;
    c.aggregation = Aggregation::Sum;
    c.scheme = ConcatScheme::UVMul;
    c.normalize_weighted = false;
    c.embedding.hashed_dimension = 12;
    c.embedding.normalize = false;
    c.train.epochs = 3;
    c.train.momentum = 0.9;
    c.train.class_weighting = true;
    c.train_fraction = 0.75;
    c.seed = 18446744073709551615ULL;
    c.output_dir = "out";
    c.dump_features = true;
    const auto j = to_json(c);
    const auto back = run_config_from_json(j);
    CHECK(to_json(back) == j);
    CHECK(back.seed == c.seed);
    CHECK(back.walk.step_cap == 99);
}

TEST_CASE("partial configs keep defaults and unknown keys are rejected") {
    const auto c = run_config_from_json(nlohmann::json::parse(R"({"walk": {"p": 0.3}, "task": "hate"})"));
    CHECK(c.walk.p == 0.3);
    CHECK(c.walk.gamma == WalkConfig{}.gamma);
    CHECK(c.task == Task::Hate);
    for (const char* bad : {R"({"walks": {}})", R"({"walk": {"q": 1}})", R"({"train": {"epochs": "many"}})",
                            R"({"scheme": "uvw"})"}) {
        try {
            run_config_from_json(nlohmann::json::parse(bad));
            FAIL("expected InvalidConfig for " << bad);
        } catch (const Error& e) {
            CHECK(e.code() == ErrorCode::InvalidConfig);
        }
    }
}

TEST_CASE("configuration validation") {
    RunConfig c;
    c.train_fraction = 1.0;
    CHECK_THROWS_AS(c.validate(), Error);
    c.train_fraction = 0.8;
    c.walk.p = 2.0;
    CHECK_THROWS_AS(c.validate(), Error);
}

TEST_CASE("replicate seeds are consecutive") {
    CHECK(replicate_seeds(10, 3) == std::vector<std::uint64_t>{10, 11, 12});
}

TEST_CASE("pipeline writes artifacts and replays bit-exactly from its manifest") {
    const auto dir = scratch("replay");
    const auto corpus = hate_corpus();
    auto config = hate_config(dir / "first");
    config.dump_features = true;
    const auto first = run_pipeline(config, corpus);
    for (const char* f : {"model.txt", "report.json", "manifest.json", "features_train.jsonl", "features_test.jsonl"}) {
        CHECK(fs::exists(dir / "first" / f));
    }
    CHECK(first.manifest["derived_seeds"]["walk"] == walk_seed_for(3));

    auto replay = run_config_from_json(nlohmann::json::parse(slurp(dir / "first" / "manifest.json")));
    replay.output_dir = (dir / "second").string();
    const auto second = run_pipeline(replay, corpus);
    CHECK(second.report.macro_f1 == first.report.macro_f1);
    CHECK(second.report.confusion == first.report.confusion);
    CHECK(slurp(dir / "first" / "model.txt") == slurp(dir / "second" / "model.txt"));
    CHECK(slurp(dir / "first" / "report.json") == slurp(dir / "second" / "report.json"));
    CHECK(slurp(dir / "first" / "features_test.jsonl") == slurp(dir / "second" / "features_test.jsonl"));

    const auto saved = load_model_file(dir / "first" / "model.txt");
    const auto again = evaluate_saved(config, corpus, saved);
    CHECK(again.confusion == first.report.confusion);
    CHECK(again.macro_f1 == first.report.macro_f1);

    const auto errors = run_error_analysis(config, corpus, saved);
    CHECK(errors.false_positives.size() == first.report.confusion[0][1]);
    CHECK(errors.false_negatives.size() == first.report.confusion[1][0]);
    fs::remove_all(dir);
}

TEST_CASE("a polarity run on a hate-labeled corpus fails with MissingLabel") {
    auto config = hate_config("");
    config.task = Task::Polarity;
    try {
        run_pipeline(config, hate_corpus());
        FAIL("expected MissingLabel");
    } catch (const Error& e) {
        CHECK(e.code() == ErrorCode::MissingLabel);
        CHECK(is_configuration_error(e.code()));
    }
}

TEST_CASE("pipeline grid and ablation drivers") {
    const auto corpus = hate_corpus();
    auto config = hate_config("");
    config.train.epochs = 3;
    const auto grid = run_grid(config, corpus, {0.5, 1.0}, {0.0, 0.8}, 2);
    CHECK(grid.cells.size() == 4);
    CHECK(grid.seeds == std::vector<std::uint64_t>{3, 4});
    CHECK(run_ablation(config, corpus, 1).size() == 4);
    CHECK_THROWS_AS(run_grid(config, corpus, {0.5}, {0.5}, 0), Error);
}

TEST_CASE("external embedding files drive the provider") {
    const auto dir = scratch("external");
    Corpus corpus;
    corpus.trees.push_back(DiscussionTree::build(
        {{"r", std::nullopt, "a", Label::NonHate}, {"k", "r", "b", Label::Hate}}, "t"));
    {
        std::ofstream out(dir / "emb.txt");
        out << "d=3\nr 1 0 0\nk 0 1 0\n";
    }
    EmbeddingSource src;
    src.external_path = (dir / "emb.txt").string();
    const auto provider = make_provider(src);
    CHECK(provider->dimension() == 3);
    CHECK(provider->embed(corpus.trees[0], 1) == Vector{0, 1, 0});
    src.external_path = (dir / "missing.txt").string();
    CHECK_THROWS_AS(make_provider(src), Error);
    fs::remove_all(dir);
}
