#include "convctx/pipeline.hpp"

#include <fstream>
#include <set>
#include <sstream>

#include "convctx/error.hpp"
#include "convctx/random.hpp"

namespace convctx {

using nlohmann::json;

void RunConfig::validate() const {
    walk.validate();
    train.validate();
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "train fraction must lie in (0, 1)");
    }
    if (embedding.external_path.empty() && embedding.hashed_dimension < 1) {
        throw Error(ErrorCode::InvalidConfig, "hashed embedding dimension must be >= 1");
    }
}

json to_json(const RunConfig& c) {
    nlohmann::ordered_json j;
    j["corpus"] = c.corpus_path;
    j["task"] = std::string(task_name(c.task));
    j["walk"] = {{"p", c.walk.p}, {"gamma", c.walk.gamma}, {"L", c.walk.max_nodes}, {"step_cap", c.walk.step_cap}};
    j["aggregation"] = std::string(aggregation_name(c.aggregation));
    j["scheme"] = std::string(scheme_name(c.scheme));
    j["normalize_weighted"] = c.normalize_weighted;
    j["embedding"] = {{"dimension", c.embedding.hashed_dimension},
                      {"normalize", c.embedding.normalize},
                      {"external", c.embedding.external_path}};
    j["train"] = {{"epochs", c.train.epochs},
                  {"batch_size", c.train.batch_size},
                  {"learning_rate", c.train.learning_rate},
                  {"l2", c.train.l2},
                  {"momentum", c.train.momentum},
                  {"class_weighting", c.train.class_weighting}};
    j["train_fraction"] = c.train_fraction;
    j["seed"] = c.seed;
    j["output_dir"] = c.output_dir;
    j["dump_features"] = c.dump_features;
    return json::parse(j.dump());
}

namespace {

void reject_unknown(const json& j, std::initializer_list<const char*> allowed, const std::string& where) {
    std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.contains(key)) throw Error(ErrorCode::InvalidConfig, "unknown config key '" + where + key + "'");
    }
}

template <typename T>
void read_into(const json& j, const char* key, T& out) {
    if (!j.contains(key)) return;
    try {
        out = j.at(key).get<T>();
    } catch (const json::exception& e) {
        throw Error(ErrorCode::InvalidConfig, std::string("config key '") + key + "': " + e.what());
    }
}

}  // namespace

RunConfig run_config_from_json(const json& input, RunConfig c) {
    // A run manifest embeds its configuration under "config".
    const json& j = (input.contains("config") && input.contains("version")) ? input.at("config") : input;
    if (!j.is_object()) throw Error(ErrorCode::InvalidConfig, "config must be a JSON object");
    reject_unknown(j,
                   {"corpus", "task", "walk", "aggregation", "scheme", "normalize_weighted", "embedding", "train",
                    "train_fraction", "seed", "output_dir", "dump_features"},
                   "");
    read_into(j, "corpus", c.corpus_path);
    if (j.contains("task")) c.task = parse_task(j.at("task").get<std::string>());
    if (j.contains("walk")) {
        const auto& w = j.at("walk");
        reject_unknown(w, {"p", "gamma", "L", "step_cap"}, "walk.");
        read_into(w, "p", c.walk.p);
        read_into(w, "gamma", c.walk.gamma);
        read_into(w, "L", c.walk.max_nodes);
        read_into(w, "step_cap", c.walk.step_cap);
    }
    if (j.contains("aggregation")) c.aggregation = parse_aggregation(j.at("aggregation").get<std::string>());
    if (j.contains("scheme")) c.scheme = parse_scheme(j.at("scheme").get<std::string>());
    read_into(j, "normalize_weighted", c.normalize_weighted);
    if (j.contains("embedding")) {
        const auto& e = j.at("embedding");
        reject_unknown(e, {"dimension", "normalize", "external"}, "embedding.");
        read_into(e, "dimension", c.embedding.hashed_dimension);
        read_into(e, "normalize", c.embedding.normalize);
        read_into(e, "external", c.embedding.external_path);
    }
    if (j.contains("train")) {
        const auto& t = j.at("train");
        reject_unknown(t, {"epochs", "batch_size", "learning_rate", "l2", "momentum", "class_weighting"}, "train.");
        read_into(t, "epochs", c.train.epochs);
        read_into(t, "batch_size", c.train.batch_size);
        read_into(t, "learning_rate", c.train.learning_rate);
        read_into(t, "l2", c.train.l2);
        read_into(t, "momentum", c.train.momentum);
        read_into(t, "class_weighting", c.train.class_weighting);
    }
    read_into(j, "train_fraction", c.train_fraction);
    read_into(j, "seed", c.seed);
    read_into(j, "output_dir", c.output_dir);
    read_into(j, "dump_features", c.dump_features);
    return c;
}

std::uint64_t split_seed_for(std::uint64_t seed) noexcept { return derive_seed(seed, "split"); }

std::vector<std::uint64_t> replicate_seeds(std::uint64_t seed, std::size_t count) {
    std::vector<std::uint64_t> seeds(count);
    for (std::size_t i = 0; i < count; ++i) seeds[i] = seed + i;
    return seeds;
}

std::unique_ptr<EmbeddingProvider> make_provider(const EmbeddingSource& source) {
    if (!source.external_path.empty()) {
        return std::make_unique<ExternalEmbeddingProvider>(load_external_embeddings(source.external_path));
    }
    return std::make_unique<HashedBowProvider>(source.hashed_dimension, source.normalize);
}

ExperimentConfig experiment_config(const RunConfig& config) {
    ExperimentConfig e;
    e.task = config.task;
    e.features.walk = config.walk;
    e.features.aggregation = config.aggregation;
    e.features.scheme = config.scheme;
    e.features.normalize_weighted = config.normalize_weighted;
    e.train = config.train;
    return e;
}

TreeSplit split_for(const RunConfig& config, const Corpus& corpus) {
    return split_trees(corpus, config.train_fraction, split_seed_for(config.seed));
}

void write_text_file(const std::filesystem::path& path, const std::string& contents) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write '" + path.string() + "'");
    out << contents;
    if (!out) throw Error(ErrorCode::Io, "failed writing '" + path.string() + "'");
}

json make_manifest(const RunConfig& config, const std::string& command) {
    json m;
    m["version"] = 1;
    m["command"] = command;
    m["config"] = to_json(config);
    m["derived_seeds"] = {{"split", split_seed_for(config.seed)},
                          {"walk", walk_seed_for(config.seed)},
                          {"train", train_seed_for(config.seed)}};
    return m;
}

namespace {

json metrics_json(const EvalReport& r) {
    json j = {{"accuracy", r.accuracy}, {"macro_f1", r.macro_f1}, {"precision_macro", r.precision_macro},
              {"recall_macro", r.recall_macro}};
    if (r.precision_pos) {
        j["precision_pos"] = *r.precision_pos;
        j["recall_pos"] = *r.recall_pos;
        j["f1_pos"] = *r.f1_pos;
    }
    return j;
}

std::string features_text(std::span<const LabeledExample> examples, Task task) {
    std::ostringstream out;
    write_feature_dump(out, examples, task);
    return out.str();
}

}  // namespace

PipelineResult run_pipeline(const RunConfig& config, const Corpus& corpus) {
    config.validate();
    const auto provider = make_provider(config.embedding);
    const auto split = split_for(config, corpus);
    auto exp = experiment_config(config);
    exp.features.walk.seed = walk_seed_for(config.seed);
    exp.train.seed = train_seed_for(config.seed);

    const auto train_examples = featurize_corpus(split.train, *provider, exp.features, exp.task);
    const auto test_examples = featurize_corpus(split.test, *provider, exp.features, exp.task);

    PipelineResult result;
    result.model = train(train_examples, class_names(exp.task), exp.train);
    result.report = evaluate(result.model, test_examples);
    result.manifest = make_manifest(config, "train");
    result.manifest["metrics"] = metrics_json(result.report);
    result.manifest["split"] = {{"train_trees", split.train.trees.size()},
                                {"test_trees", split.test.trees.size()},
                                {"train_examples", train_examples.size()},
                                {"test_examples", test_examples.size()}};

    if (!config.output_dir.empty()) {
        const std::filesystem::path dir(config.output_dir);
        std::filesystem::create_directories(dir);
        std::ostringstream model_text, report_text;
        save_model(model_text, result.model);
        write_report(report_text, result.report);
        write_text_file(dir / "model.txt", model_text.str());
        write_text_file(dir / "report.json", report_text.str());
        json outputs = {"model.txt", "report.json", "manifest.json"};
        if (config.dump_features) {
            write_text_file(dir / "features_train.jsonl", features_text(train_examples, exp.task));
            write_text_file(dir / "features_test.jsonl", features_text(test_examples, exp.task));
            outputs.push_back("features_train.jsonl");
            outputs.push_back("features_test.jsonl");
        }
        result.manifest["outputs"] = outputs;
        write_text_file(dir / "manifest.json", result.manifest.dump(2) + "\n");
    }
    return result;
}

namespace {

std::vector<LabeledExample> test_examples_for(const RunConfig& config, const Corpus& corpus) {
    config.validate();
    const auto provider = make_provider(config.embedding);
    const auto split = split_for(config, corpus);
    auto exp = experiment_config(config);
    exp.features.walk.seed = walk_seed_for(config.seed);
    return featurize_corpus(split.test, *provider, exp.features, exp.task);
}

}  // namespace

EvalReport evaluate_saved(const RunConfig& config, const Corpus& corpus, const SoftmaxModel& model) {
    return evaluate(model, test_examples_for(config, corpus));
}

ErrorAnalysis run_error_analysis(const RunConfig& config, const Corpus& corpus, const SoftmaxModel& model) {
    return error_analysis(model, test_examples_for(config, corpus), corpus);
}

GridSearchResult run_grid(const RunConfig& config, const Corpus& corpus, const std::vector<double>& p_values,
                          const std::vector<double>& gamma_values, std::size_t num_seeds) {
    config.validate();
    if (num_seeds < 1) throw Error(ErrorCode::InvalidConfig, "need at least one seed");
    const auto provider = make_provider(config.embedding);
    const auto split = split_for(config, corpus);
    const auto seeds = replicate_seeds(config.seed, num_seeds);
    return grid_search(split.train, split.test, *provider, experiment_config(config), p_values, gamma_values, seeds);
}

std::vector<AblationRow> run_ablation(const RunConfig& config, const Corpus& corpus, std::size_t num_seeds) {
    config.validate();
    if (num_seeds < 1) throw Error(ErrorCode::InvalidConfig, "need at least one seed");
    const auto provider = make_provider(config.embedding);
    const auto split = split_for(config, corpus);
    const auto seeds = replicate_seeds(config.seed, num_seeds);
    return ablate_concat(split.train, split.test, *provider, experiment_config(config), seeds);
}

}  // namespace convctx
