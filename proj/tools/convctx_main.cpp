// convctx: command-line driver for context-aware conversation classification.
//
//   convctx generate      --out corpus.jsonl --trees 2000 --task hate ...
//   convctx validate      --corpus corpus.jsonl [--baf-out dir]
//   convctx featurize     --corpus corpus.jsonl --features-out f.jsonl [--walk-trace w.jsonl]
//   convctx train         --corpus corpus.jsonl --task hate --out run/
//   convctx evaluate      --config run/manifest.json --model run/model.txt
//   convctx grid-search   --corpus corpus.jsonl --seeds 5 --out grid/
//   convctx ablate-concat --corpus corpus.jsonl --seeds 5 --out ablation/
//   convctx error-analysis --config run/manifest.json --model run/model.txt
//
// Exit status: 0 success, 1 runtime failure, 2 configuration error.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#ifdef _OPENMP
#include <omp.h>
#endif

#include "convctx/corpus_io.hpp"
#include "convctx/error.hpp"
#include "convctx/pipeline.hpp"
#include "convctx/synthetic_corpus.hpp"

namespace fs = std::filesystem;
using namespace convctx;

namespace {

constexpr int kExitRuntime = 1;
constexpr int kExitConfig = 2;

std::string default_output_dir() {
    if (const char* env = std::getenv("CONVCTX_OUTPUT_DIR"); env && *env) return env;
    return "convctx_out";
}

// Flags that override the config file; unset options leave it untouched.
struct RunFlags {
    std::optional<std::string> config_file;
    std::optional<std::string> corpus;
    std::optional<std::string> task;
    std::optional<double> p;
    std::optional<double> gamma;
    std::optional<std::size_t> walk_length;
    std::optional<std::size_t> step_cap;
    std::optional<std::string> aggregation;
    std::optional<std::string> scheme;
    bool raw_weighted_sum = false;
    std::optional<std::size_t> dim;
    bool no_embedding_norm = false;
    std::optional<std::string> embeddings;
    std::optional<std::size_t> epochs;
    std::optional<std::size_t> batch_size;
    std::optional<double> lr;
    std::optional<double> l2;
    std::optional<double> momentum;
    bool class_weighting = false;
    std::optional<double> train_fraction;
    std::optional<std::uint64_t> seed;
    std::optional<std::string> out;
    bool dump_features = false;

    void attach(CLI::App* cmd) {
        cmd->add_option("--config", config_file, "JSON config file or run manifest");
        cmd->add_option("--corpus", corpus, "Corpus file (JSON lines)");
        cmd->add_option("--task", task, "polarity | hate");
        cmd->add_option("--p", p, "Probability of stepping to the parent");
        cmd->add_option("--gamma", gamma, "Discount factor");
        cmd->add_option("--L", walk_length, "Maximum distinct nodes per walk");
        cmd->add_option("--step-cap", step_cap, "Raw step bound per walk (default 10*L)");
        cmd->add_option("--aggregation", aggregation, "sum | average | weighted_average");
        cmd->add_option("--scheme", scheme, "uv | uv_mul | uv_absdiff | uv_absdiff_mul");
        cmd->add_flag("--raw-weighted-sum", raw_weighted_sum, "Do not divide weighted context by the weight sum");
        cmd->add_option("--dim", dim, "Hashed bag-of-words dimension");
        cmd->add_flag("--no-embedding-norm", no_embedding_norm, "Skip L2 normalization of hashed embeddings");
        cmd->add_option("--embeddings", embeddings, "External embedding file (d=<int> header)");
        cmd->add_option("--epochs", epochs);
        cmd->add_option("--batch-size", batch_size);
        cmd->add_option("--lr", lr, "Learning rate");
        cmd->add_option("--l2", l2, "L2 regularization strength");
        cmd->add_option("--momentum", momentum);
        cmd->add_flag("--class-weighting", class_weighting, "Inverse-frequency class weights");
        cmd->add_option("--train-fraction", train_fraction);
        cmd->add_option("--seed", seed, "Top-level seed");
        cmd->add_option("--out", out, "Output directory (default $CONVCTX_OUTPUT_DIR or ./convctx_out)");
        cmd->add_flag("--dump-features", dump_features, "Also write train/test feature dumps");
    }

    RunConfig resolve() const {
        RunConfig c;
        c.output_dir = default_output_dir();
        if (config_file) {
            std::ifstream in(*config_file);
            if (!in) throw Error(ErrorCode::InvalidConfig, "cannot open config '" + *config_file + "'");
            nlohmann::json j;
            try {
                j = nlohmann::json::parse(in);
            } catch (const nlohmann::json::exception& e) {
                throw Error(ErrorCode::InvalidConfig, "config '" + *config_file + "': " + e.what());
            }
            c = run_config_from_json(j, c);
        }
        if (corpus) c.corpus_path = *corpus;
        if (task) c.task = parse_task(*task);
        if (p) c.walk.p = *p;
        if (gamma) c.walk.gamma = *gamma;
        if (walk_length) c.walk.max_nodes = *walk_length;
        if (step_cap) c.walk.step_cap = *step_cap;
        if (aggregation) c.aggregation = parse_aggregation(*aggregation);
        if (scheme) c.scheme = parse_scheme(*scheme);
        if (raw_weighted_sum) c.normalize_weighted = false;
        if (dim) c.embedding.hashed_dimension = *dim;
        if (no_embedding_norm) c.embedding.normalize = false;
        if (embeddings) c.embedding.external_path = *embeddings;
        if (epochs) c.train.epochs = *epochs;
        if (batch_size) c.train.batch_size = *batch_size;
        if (lr) c.train.learning_rate = *lr;
        if (l2) c.train.l2 = *l2;
        if (momentum) c.train.momentum = *momentum;
        if (class_weighting) c.train.class_weighting = true;
        if (train_fraction) c.train_fraction = *train_fraction;
        if (seed) c.seed = *seed;
        if (out) c.output_dir = *out;
        if (dump_features) c.dump_features = true;
        if (c.corpus_path.empty()) throw Error(ErrorCode::InvalidConfig, "no corpus given (--corpus or --config)");
        c.validate();
        return c;
    }
};

std::vector<double> parse_list(const std::string& text) {
    std::vector<double> out;
    std::stringstream ss(text);
    std::string item;
    while (std::getline(ss, item, ',')) {
        try {
            std::size_t used = 0;
            out.push_back(std::stod(item, &used));
            if (used != item.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw Error(ErrorCode::InvalidConfig, "bad number '" + item + "' in list '" + text + "'");
        }
    }
    if (out.empty()) throw Error(ErrorCode::InvalidConfig, "empty value list");
    return out;
}

void print_report(const EvalReport& r) {
    std::cout << "accuracy " << r.accuracy << "  macro_f1 " << r.macro_f1;
    if (r.precision_pos) {
        std::cout << "  precision_pos " << *r.precision_pos << "  recall_pos " << *r.recall_pos << "  f1_pos "
                  << *r.f1_pos;
    }
    std::cout << '\n';
    for (const auto& c : r.unsupported_classes) std::cerr << "warning: class '" << c << "' absent from test fold\n";
}

void print_warnings(const Corpus& corpus) {
    for (const auto& tree : corpus.trees) {
        for (const auto& w : tree.warnings()) std::cerr << "warning: tree " << tree.tree_id() << ": " << w << '\n';
    }
}

Corpus load(const RunConfig& c) {
    auto corpus = read_corpus_file(c.corpus_path);
    print_warnings(corpus);
    return corpus;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Context-aware classification of threaded conversations via root-seeking walks"};
    app.require_subcommand(1);
    std::size_t threads = 0;
    app.add_option("--threads", threads, "Worker threads for parallel stages (0 = all cores)");

    // validate
    auto* validate_cmd = app.add_subcommand("validate", "Check a corpus and print per-tree statistics");
    std::string validate_corpus, baf_out;
    validate_cmd->add_option("--corpus", validate_corpus)->required();
    validate_cmd->add_option("--baf-out", baf_out, "Directory for per-tree BAF edge lists");

    // generate
    auto* generate_cmd = app.add_subcommand("generate", "Write a synthetic labeled corpus");
    CorpusSpec spec;
    std::string generate_out, generate_task = "polarity";
    generate_cmd->add_option("--out", generate_out, "Corpus file to write")->required();
    generate_cmd->add_option("--task", generate_task, "polarity | hate");
    generate_cmd->add_option("--trees", spec.num_trees);
    generate_cmd->add_option("--mean-size", spec.mean_tree_size);
    generate_cmd->add_option("--dispersion", spec.size_dispersion, "Sigma of log-normal tree sizes");
    generate_cmd->add_option("--attachment", spec.attachment_bias, "Preferential attachment exponent");
    generate_cmd->add_option("--positive-fraction", spec.positive_fraction);
    generate_cmd->add_option("--context-signal", spec.context_signal);
    generate_cmd->add_option("--context-depth", spec.context_depth);
    generate_cmd->add_option("--vocab", spec.vocab_size);
    generate_cmd->add_option("--words", spec.words_per_comment);
    generate_cmd->add_option("--seed", spec.seed);

    RunFlags featurize_flags, train_flags, evaluate_flags, grid_flags, ablate_flags, errors_flags;

    auto* featurize_cmd = app.add_subcommand("featurize", "Write context features for every labeled node");
    featurize_flags.attach(featurize_cmd);
    std::string features_out, walk_trace_out;
    featurize_cmd->add_option("--features-out", features_out, "Feature dump (JSON lines)")->required();
    featurize_cmd->add_option("--walk-trace", walk_trace_out, "Walk trace dump (JSON lines)");

    auto* train_cmd = app.add_subcommand("train", "Split, featurize, train and evaluate; writes a manifest");
    train_flags.attach(train_cmd);

    auto* evaluate_cmd = app.add_subcommand("evaluate", "Evaluate a saved model on the run's test split");
    evaluate_flags.attach(evaluate_cmd);
    std::string evaluate_model, evaluate_report_out;
    evaluate_cmd->add_option("--model", evaluate_model)->required();
    evaluate_cmd->add_option("--report-out", evaluate_report_out);

    auto* grid_cmd = app.add_subcommand("grid-search", "Sweep (p, gamma) and emit a macro-F1 grid CSV");
    grid_flags.attach(grid_cmd);
    std::string p_values = "0,0.2,0.4,0.6,0.8,1", gamma_values = "0,0.2,0.4,0.6,0.8,1";
    std::size_t grid_seeds = 5;
    grid_cmd->add_option("--p-values", p_values);
    grid_cmd->add_option("--gamma-values", gamma_values);
    grid_cmd->add_option("--seeds", grid_seeds, "Replicates per cell");

    auto* ablate_cmd = app.add_subcommand("ablate-concat", "Compare the four concatenation schemes");
    ablate_flags.attach(ablate_cmd);
    std::size_t ablate_seeds = 5;
    ablate_cmd->add_option("--seeds", ablate_seeds, "Replicates per scheme");

    auto* errors_cmd = app.add_subcommand("error-analysis", "List false positives and negatives with context");
    errors_flags.attach(errors_cmd);
    std::string errors_model;
    errors_cmd->add_option("--model", errors_model)->required();

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e);
        return code == 0 ? 0 : kExitConfig;
    }

#ifdef _OPENMP
    if (threads > 0) omp_set_num_threads(static_cast<int>(threads));
#endif

    try {
        if (*validate_cmd) {
            const auto corpus = read_corpus_file(validate_corpus);
            print_warnings(corpus);
            std::cout << "tree_id,nodes,depth,supports,attacks,hate,non_hate,support_fraction\n";
            for (const auto& tree : corpus.trees) {
                const auto s = tree_stats(tree);
                std::cout << tree.tree_id() << ',' << s.nodes << ',' << s.depth << ',' << s.supports << ','
                          << s.attacks << ',' << s.hate << ',' << s.non_hate << ',';
                if (s.support_fraction) std::cout << *s.support_fraction;
                std::cout << '\n';
            }
            if (!baf_out.empty()) {
                fs::create_directories(baf_out);
                for (const auto& tree : corpus.trees) {
                    std::ostringstream text;
                    write_baf(text, to_baf(tree));
                    write_text_file(fs::path(baf_out) / (tree.tree_id() + ".baf.jsonl"), text.str());
                }
            }
            std::cerr << corpus.trees.size() << " trees, " << corpus.node_count() << " nodes: ok\n";
        } else if (*generate_cmd) {
            spec.task = parse_task(generate_task);
            const auto generated = generate(spec);
            write_corpus_file(generate_out, generated.corpus);
            std::cerr << "wrote " << generated.corpus.trees.size() << " trees, " << generated.corpus.node_count()
                      << " nodes to " << generate_out << '\n';
        } else if (*featurize_cmd) {
            const auto config = featurize_flags.resolve();
            const auto corpus = load(config);
            const auto provider = make_provider(config.embedding);
            auto exp = experiment_config(config);
            exp.features.walk.seed = walk_seed_for(config.seed);
            const auto examples = featurize_corpus(corpus, *provider, exp.features, exp.task);
            std::ostringstream text;
            write_feature_dump(text, examples, exp.task);
            write_text_file(features_out, text.str());
            if (!walk_trace_out.empty()) {
                std::ostringstream trace;
                for (const auto& tree : corpus.trees) {
                    for (NodeIndex i = 0; i < tree.size(); ++i) {
                        Rng rng(node_seed(exp.features.walk.seed, tree.tree_id(), tree.node(i).id));
                        write_walk_trace(trace, tree, sample_walk(tree, i, exp.features.walk, rng));
                    }
                }
                write_text_file(walk_trace_out, trace.str());
            }
            std::cerr << "wrote " << examples.size() << " examples to " << features_out << '\n';
        } else if (*train_cmd) {
            const auto config = train_flags.resolve();
            const auto result = run_pipeline(config, load(config));
            print_report(result.report);
            std::cerr << "artifacts in " << config.output_dir << '\n';
        } else if (*evaluate_cmd) {
            const auto config = evaluate_flags.resolve();
            const auto model = load_model_file(evaluate_model);
            const auto report = evaluate_saved(config, load(config), model);
            print_report(report);
            if (!evaluate_report_out.empty()) {
                std::ostringstream text;
                write_report(text, report);
                write_text_file(evaluate_report_out, text.str());
            }
        } else if (*grid_cmd) {
            const auto config = grid_flags.resolve();
            const auto result =
                run_grid(config, load(config), parse_list(p_values), parse_list(gamma_values), grid_seeds);
            fs::create_directories(config.output_dir);
            std::ostringstream csv;
            write_grid_csv(csv, result);
            write_text_file(fs::path(config.output_dir) / "grid.csv", csv.str());
            auto manifest = make_manifest(config, "grid-search");
            manifest["p_values"] = parse_list(p_values);
            manifest["gamma_values"] = parse_list(gamma_values);
            manifest["seeds"] = result.seeds;
            manifest["best"] = {{"p", result.best_cell().p},
                                {"gamma", result.best_cell().gamma},
                                {"macro_f1", result.best_cell().report.macro_f1},
                                {"accuracy", result.best_cell().report.accuracy}};
            write_text_file(fs::path(config.output_dir) / "grid_manifest.json", manifest.dump(2) + "\n");
            std::cout << "best p=" << result.best_cell().p << " gamma=" << result.best_cell().gamma
                      << " macro_f1=" << result.best_cell().report.macro_f1 << " (" << result.cells.size()
                      << " cells)\n";
        } else if (*ablate_cmd) {
            const auto config = ablate_flags.resolve();
            const auto rows = run_ablation(config, load(config), ablate_seeds);
            fs::create_directories(config.output_dir);
            std::ostringstream csv;
            write_ablation_csv(csv, rows);
            write_text_file(fs::path(config.output_dir) / "ablation.csv", csv.str());
            auto manifest = make_manifest(config, "ablate-concat");
            manifest["seeds"] = replicate_seeds(config.seed, ablate_seeds);
            write_text_file(fs::path(config.output_dir) / "ablation_manifest.json", manifest.dump(2) + "\n");
            std::cout << csv.str();
        } else if (*errors_cmd) {
            const auto config = errors_flags.resolve();
            const auto corpus = load(config);
            const auto model = load_model_file(errors_model);
            const auto analysis = run_error_analysis(config, corpus, model);
            fs::create_directories(config.output_dir);
            std::ostringstream text;
            write_error_analysis(text, analysis);
            write_text_file(fs::path(config.output_dir) / "errors.jsonl", text.str());
            std::cout << "false_positives " << analysis.false_positives.size() << "  false_negatives "
                      << analysis.false_negatives.size() << '\n';
        }
    } catch (const Error& e) {
        std::cerr << "error: " << e.what() << '\n';
        return is_configuration_error(e.code()) ? kExitConfig : kExitRuntime;
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << '\n';
        return kExitRuntime;
    }
    return 0;
}
