#include "convctx/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <exception>
#include <numeric>
#include <ostream>

#include <json.hpp>

#include "convctx/error.hpp"
#include "convctx/random.hpp"

namespace convctx {

namespace {

double safe_ratio(double num, double den) { return den > 0.0 ? num / den : 0.0; }

std::string fmt(double x) {
    char buf[32];
    const int n = std::snprintf(buf, sizeof buf, "%.10g", x);
    return std::string(buf, static_cast<std::size_t>(n));
}

}  // namespace

EvalReport report_from_confusion(const ConfusionMatrix& confusion, std::vector<std::string> class_names) {
    const std::size_t K = class_names.size();
    if (confusion.size() != K) throw Error(ErrorCode::DimensionMismatch, "confusion matrix size != class count");
    for (const auto& row : confusion) {
        if (row.size() != K) throw Error(ErrorCode::DimensionMismatch, "confusion matrix is not square");
    }
    EvalReport r;
    r.confusion = confusion;
    r.class_names = std::move(class_names);
    std::size_t correct = 0;
    std::vector<double> row_sum(K, 0.0), col_sum(K, 0.0);
    for (std::size_t t = 0; t < K; ++t) {
        for (std::size_t p = 0; p < K; ++p) {
            r.total += confusion[t][p];
            row_sum[t] += static_cast<double>(confusion[t][p]);
            col_sum[p] += static_cast<double>(confusion[t][p]);
        }
        correct += confusion[t][t];
    }
    if (r.total == 0) throw Error(ErrorCode::EmptyEvalSet, "no examples to evaluate");
    r.accuracy = static_cast<double>(correct) / static_cast<double>(r.total);

    r.precision.resize(K);
    r.recall.resize(K);
    r.f1.resize(K);
    for (std::size_t c = 0; c < K; ++c) {
        const auto tp = static_cast<double>(confusion[c][c]);
        r.precision[c] = safe_ratio(tp, col_sum[c]);
        r.recall[c] = safe_ratio(tp, row_sum[c]);
        r.f1[c] = safe_ratio(2.0 * r.precision[c] * r.recall[c], r.precision[c] + r.recall[c]);
        if (row_sum[c] == 0.0) r.unsupported_classes.push_back(r.class_names[c]);
    }
    const double k = static_cast<double>(K);
    r.macro_f1 = std::accumulate(r.f1.begin(), r.f1.end(), 0.0) / k;
    r.precision_macro = std::accumulate(r.precision.begin(), r.precision.end(), 0.0) / k;
    r.recall_macro = std::accumulate(r.recall.begin(), r.recall.end(), 0.0) / k;
    if (K == 2) {
        r.precision_pos = r.precision[1];
        r.recall_pos = r.recall[1];
        r.f1_pos = r.f1[1];
    }
    return r;
}

EvalReport evaluate(const SoftmaxModel& model, std::span<const LabeledExample> examples) {
    if (examples.empty()) throw Error(ErrorCode::EmptyEvalSet, "no examples to evaluate");
    const std::size_t K = model.num_classes();
    ConfusionMatrix cm(K, std::vector<std::size_t>(K, 0));
    for (const auto& ex : examples) {
        const auto truth = static_cast<std::size_t>(ex.label);
        if (truth >= K) throw Error(ErrorCode::InvalidConfig, "example label outside the model's classes");
        ++cm[truth][predict(model, ex.features)];
    }
    return report_from_confusion(cm, model.class_names);
}

void write_report(std::ostream& out, const EvalReport& r) {
    nlohmann::ordered_json j;
    j["classes"] = r.class_names;
    j["confusion"] = r.confusion;
    j["total"] = r.total;
    j["accuracy"] = r.accuracy;
    j["macro_f1"] = r.macro_f1;
    j["precision_macro"] = r.precision_macro;
    j["recall_macro"] = r.recall_macro;
    j["precision"] = r.precision;
    j["recall"] = r.recall;
    j["f1"] = r.f1;
    if (r.precision_pos) {
        j["precision_pos"] = *r.precision_pos;
        j["recall_pos"] = *r.recall_pos;
        j["f1_pos"] = *r.f1_pos;
    }
    j["unsupported_classes"] = r.unsupported_classes;
    out << j.dump(2) << '\n';
}

TreeSplit split_trees(const Corpus& corpus, double train_fraction, std::uint64_t seed) {
    const std::size_t n = corpus.trees.size();
    if (n < 2) throw Error(ErrorCode::TooFewTrees, "need at least two trees to split, got " + std::to_string(n));
    if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
        throw Error(ErrorCode::InvalidConfig, "train fraction must lie in (0, 1)");
    }
    auto n_train = static_cast<std::size_t>(std::floor(static_cast<double>(n) * train_fraction + 0.5));
    n_train = std::clamp<std::size_t>(n_train, 1, n - 1);

    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    Rng rng(seed);
    shuffle_in_place(std::span<std::size_t>(order), rng);
    std::vector<bool> in_train(n, false);
    for (std::size_t k = 0; k < n_train; ++k) in_train[order[k]] = true;

    TreeSplit split;
    for (std::size_t i = 0; i < n; ++i) (in_train[i] ? split.train : split.test).trees.push_back(corpus.trees[i]);
    return split;
}

std::uint64_t walk_seed_for(std::uint64_t seed) noexcept { return derive_seed(seed, "walk"); }
std::uint64_t train_seed_for(std::uint64_t seed) noexcept { return derive_seed(seed, "train"); }

SeedAveragedReport average_reports(std::vector<std::uint64_t> seeds, std::vector<EvalReport> reports) {
    SeedAveragedReport out;
    out.seeds = std::move(seeds);
    out.per_seed = std::move(reports);
    if (out.per_seed.empty()) return out;
    const double n = static_cast<double>(out.per_seed.size());
    for (const auto& r : out.per_seed) {
        out.accuracy += r.accuracy / n;
        out.macro_f1 += r.macro_f1 / n;
        out.precision_pos += r.precision_pos.value_or(0.0) / n;
        out.recall_pos += r.recall_pos.value_or(0.0) / n;
        out.precision_macro += r.precision_macro / n;
        out.recall_macro += r.recall_macro / n;
    }
    return out;
}

EvalReport run_replicate(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                         ExperimentConfig config, std::uint64_t seed, SoftmaxModel* model_out) {
    config.features.walk.seed = walk_seed_for(seed);
    config.train.seed = train_seed_for(seed);
    const auto train_examples = featurize_corpus(train, provider, config.features, config.task);
    const auto test_examples = featurize_corpus(test, provider, config.features, config.task);
    auto model = convctx::train(train_examples, class_names(config.task), config.train);
    auto report = evaluate(model, test_examples);
    if (model_out) *model_out = std::move(model);
    return report;
}

SeedAveragedReport run_replicates(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                                  const ExperimentConfig& config, std::span<const std::uint64_t> seeds) {
    std::vector<EvalReport> reports;
    reports.reserve(seeds.size());
    for (const auto s : seeds) reports.push_back(run_replicate(train, test, provider, config, s));
    return average_reports({seeds.begin(), seeds.end()}, std::move(reports));
}

SeedAveragedReport run_bow_baseline(const Corpus& train, const Corpus& test, Task task, std::size_t dimension,
                                    const TrainConfig& train_config, std::span<const std::uint64_t> seeds) {
    const auto train_examples = bow_examples(train, task, dimension);
    const auto test_examples = bow_examples(test, task, dimension);
    std::vector<EvalReport> reports;
    for (const auto s : seeds) {
        auto cfg = train_config;
        cfg.seed = train_seed_for(s);
        const auto model = convctx::train(train_examples, class_names(task), cfg);
        reports.push_back(evaluate(model, test_examples));
    }
    return average_reports({seeds.begin(), seeds.end()}, std::move(reports));
}

std::size_t select_best_cell(std::span<const GridCell> cells) {
    if (cells.empty()) throw Error(ErrorCode::InvalidConfig, "empty grid");
    std::size_t best = 0;
    for (std::size_t i = 1; i < cells.size(); ++i) {
        const auto& a = cells[i];
        const auto& b = cells[best];
        const bool better = a.report.macro_f1 != b.report.macro_f1 ? a.report.macro_f1 > b.report.macro_f1
                            : a.report.accuracy != b.report.accuracy ? a.report.accuracy > b.report.accuracy
                            : a.p != b.p                             ? a.p < b.p
                                                                     : a.gamma < b.gamma;
        if (better) best = i;
    }
    return best;
}

GridSearchResult grid_search(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                             const ExperimentConfig& base, std::span<const double> p_values,
                             std::span<const double> gamma_values, std::span<const std::uint64_t> seeds) {
    if (p_values.empty() || gamma_values.empty() || seeds.empty()) {
        throw Error(ErrorCode::InvalidConfig, "grid search needs p values, gamma values and seeds");
    }
    GridSearchResult result;
    result.seeds.assign(seeds.begin(), seeds.end());
    for (const double p : p_values) {
        for (const double g : gamma_values) result.cells.push_back({p, g, {}});
    }
    // Validate up front so configuration errors surface outside the parallel region.
    for (const auto& cell : result.cells) {
        WalkConfig w = base.features.walk;
        w.p = cell.p;
        w.gamma = cell.gamma;
        w.validate();
    }

    const auto n_cells = static_cast<std::ptrdiff_t>(result.cells.size());
    std::exception_ptr failure;
#pragma omp parallel for schedule(dynamic, 1)
    for (std::ptrdiff_t c = 0; c < n_cells; ++c) {
        try {
            auto& cell = result.cells[c];
            ExperimentConfig cfg = base;
            cfg.features.walk.p = cell.p;
            cfg.features.walk.gamma = cell.gamma;
            cell.report = run_replicates(train, test, provider, cfg, seeds);
        } catch (...) {
#pragma omp critical(convctx_grid_error)
            if (!failure) failure = std::current_exception();
        }
    }
    if (failure) std::rethrow_exception(failure);
    result.best = select_best_cell(result.cells);
    return result;
}

void write_grid_csv(std::ostream& out, const GridSearchResult& result) {
    out << "p,gamma,accuracy,macro_f1,precision_pos,recall_pos,precision_macro,recall_macro\n";
    for (const auto& c : result.cells) {
        const auto& r = c.report;
        out << fmt(c.p) << ',' << fmt(c.gamma) << ',' << fmt(r.accuracy) << ',' << fmt(r.macro_f1) << ','
            << fmt(r.precision_pos) << ',' << fmt(r.recall_pos) << ',' << fmt(r.precision_macro) << ','
            << fmt(r.recall_macro) << '\n';
    }
}

std::vector<AblationRow> ablate_concat(const Corpus& train, const Corpus& test, const EmbeddingProvider& provider,
                                       const ExperimentConfig& base, std::span<const std::uint64_t> seeds) {
    std::vector<AblationRow> rows;
    for (const auto scheme : kAllSchemes) {
        ExperimentConfig cfg = base;
        cfg.features.scheme = scheme;
        rows.push_back({scheme, run_replicates(train, test, provider, cfg, seeds)});
    }
    return rows;
}

void write_ablation_csv(std::ostream& out, std::span<const AblationRow> rows) {
    out << "scheme,accuracy,macro_f1,precision_pos,recall_pos,precision_macro,recall_macro\n";
    for (const auto& row : rows) {
        const auto& r = row.report;
        out << scheme_name(row.scheme) << ',' << fmt(r.accuracy) << ',' << fmt(r.macro_f1) << ','
            << fmt(r.precision_pos) << ',' << fmt(r.recall_pos) << ',' << fmt(r.precision_macro) << ','
            << fmt(r.recall_macro) << '\n';
    }
}

ErrorAnalysis error_analysis(const SoftmaxModel& model, std::span<const LabeledExample> examples,
                             const Corpus& corpus) {
    if (model.num_classes() != 2) {
        throw Error(ErrorCode::NotBinaryTask, "error analysis needs a two-class model, got " +
                                                  std::to_string(model.num_classes()) + " classes");
    }
    ErrorAnalysis out;
    for (const auto& ex : examples) {
        const auto predicted = predict(model, ex.features);
        const auto truth = static_cast<std::size_t>(ex.label);
        if (predicted == truth) continue;
        Misclassification m;
        m.tree_id = ex.tree_id;
        m.node_id = ex.node_id;
        m.true_label = model.class_names.at(truth);
        m.predicted_label = model.class_names.at(predicted);
        if (const auto* tree = corpus.find_tree(ex.tree_id)) {
            if (const auto idx = tree->find(ex.node_id)) m.text = tree->node(*idx).text;
            for (const auto& id : ex.context_ids) {
                const auto idx = tree->find(id);
                m.context.push_back({id, idx ? tree->node(*idx).text : std::string{}});
            }
        }
        (predicted == 1 ? out.false_positives : out.false_negatives).push_back(std::move(m));
    }
    return out;
}

void write_error_analysis(std::ostream& out, const ErrorAnalysis& analysis) {
    auto emit = [&](const std::vector<Misclassification>& items, const char* kind) {
        for (const auto& m : items) {
            nlohmann::ordered_json rec;
            rec["kind"] = kind;
            rec["tree_id"] = m.tree_id;
            rec["node_id"] = m.node_id;
            rec["text"] = m.text;
            rec["true_label"] = m.true_label;
            rec["predicted_label"] = m.predicted_label;
            auto ctx = nlohmann::ordered_json::array();
            for (const auto& c : m.context) ctx.push_back({{"id", c.id}, {"text", c.text}});
            rec["context"] = ctx;
            out << rec.dump() << '\n';
        }
    };
    emit(analysis.false_positives, "FP");
    emit(analysis.false_negatives, "FN");
}

}  // namespace convctx
