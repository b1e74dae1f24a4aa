// Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any fail.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "convctx/classifier.hpp"
#include "convctx/evaluation.hpp"
#include "convctx/pipeline.hpp"
#include "convctx/synthetic_corpus.hpp"
#include "convctx/walk_sampler.hpp"

using namespace convctx;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
    return std::chrono::duration<double>(Clock::now() - t0).count();
}

struct Outcome {
    bool pass = false;
    std::string detail;
};

int failures = 0;

void report(int id, const std::string& name, const std::function<Outcome()>& check) {
    Outcome o;
    try {
        o = check();
    } catch (const std::exception& e) {
        o = {false, std::string("threw: ") + e.what()};
    }
    if (!o.pass) ++failures;
    std::printf("[%s] C%d %s: %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), o.detail.c_str());
    std::fflush(stdout);
}

std::string fmt(const char* f, auto... args) {
    char buf[512];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

DiscussionTree star_tree() {
    std::vector<CommentNode> recs{{"a0", std::nullopt, "root", std::nullopt},
                                  {"a1", "a0", "hub", std::nullopt},
                                  {"a2", "a1", "x", std::nullopt},
                                  {"a3", "a1", "y", std::nullopt},
                                  {"a4", "a1", "z", std::nullopt}};
    return DiscussionTree::build(recs, "star");
}

DiscussionTree random_tree(std::size_t n, Rng& rng) {
    std::vector<CommentNode> recs(n);
    for (std::size_t i = 0; i < n; ++i) {
        recs[i].id = std::to_string(i);
        recs[i].text = "x";
        if (i > 0) recs[i].parent_id = std::to_string(uniform_index(rng, i));
    }
    return DiscussionTree::build(std::move(recs));
}

// ---------------------------------------------------------------------------

Outcome walk_distribution() {
    const auto t0 = Clock::now();
    const auto tree = star_tree();
    const NodeIndex start = tree.index_of("a1");
    WalkConfig cfg;
    cfg.p = 0.75;
    cfg.max_nodes = 2;
    std::map<std::string, int> counts;
    Rng rng(20240101);
    const int n = 10000;
    for (int i = 0; i < n; ++i) ++counts[tree.node(sample_walk(tree, start, cfg, rng).nodes.at(1)).id];
    const double secs = seconds_since(t0);
    const std::map<std::string, double> expected{{"a0", 0.75}, {"a2", 1.0 / 12}, {"a3", 1.0 / 12}, {"a4", 1.0 / 12}};
    double worst = 0.0;
    for (const auto& [id, q] : expected) worst = std::max(worst, std::abs(counts[id] / double(n) - q));
    return {worst <= 0.02 && secs < 1.0,
            fmt("a0=%.4f a2=%.4f a3=%.4f a4=%.4f, max deviation %.4f (tol 0.02), %.3f s (limit 1 s)",
                counts["a0"] / double(n), counts["a2"] / double(n), counts["a3"] / double(n),
                counts["a4"] / double(n), worst, secs)};
}

Outcome deterministic_walk() {
    Rng rng(7);
    std::size_t mismatches = 0, walks = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const auto tree = random_tree(1 + uniform_index(rng, 200), rng);
        const auto start = static_cast<NodeIndex>(uniform_index(rng, tree.size()));
        WalkConfig cfg;
        cfg.p = 1.0;
        cfg.max_nodes = 1 + uniform_index(rng, 10);
        std::vector<NodeIndex> expected{start};
        for (const auto a : ancestor_indices(tree, start)) expected.push_back(a);
        if (expected.size() > cfg.max_nodes) expected.resize(cfg.max_nodes);
        for (std::uint64_t seed = 0; seed < 10; ++seed) {
            Rng walk_rng(seed * 1000003 + trial);
            mismatches += sample_walk(tree, start, cfg, walk_rng).nodes != expected;
            ++walks;
        }
    }
    return {mismatches == 0, fmt("%zu walks on 1000 random trees, %zu mismatches", walks, mismatches)};
}

Outcome discount_weights() {
    const bool half = walk_weights(4, 0.5) == std::vector<double>{1.0, 0.5, 0.25, 0.125};
    const bool zero = walk_weights(5, 0.0) == std::vector<double>{1.0, 0.0, 0.0, 0.0, 0.0};
    const bool one = walk_weights(6, 1.0) == std::vector<double>(6, 1.0);
    return {half && zero && one, fmt("gamma=0.5 %s, gamma=0 %s, gamma=1 %s (exact equality)", half ? "ok" : "bad",
                                     zero ? "ok" : "bad", one ? "ok" : "bad")};
}

Outcome aggregation_identities() {
    Rng rng(11);
    double worst_eq = 0.0;
    std::size_t hull_violations = 0;
    for (int trial = 0; trial < 1000; ++trial) {
        const std::size_t d = 1 + uniform_index(rng, 16);
        const std::size_t m = 1 + uniform_index(rng, 8);
        std::vector<Vector> xs(m, Vector(d));
        for (auto& x : xs)
            for (auto& v : x) v = 10.0 * standard_normal(rng);
        const auto ones = walk_weights(m + 1, 1.0);
        const std::span<const double> w1(ones.data() + 1, m);
        const auto a = aggregate_context(xs, w1, Aggregation::WeightedAverage, d);
        const auto b = aggregate_context(xs, w1, Aggregation::Average, d);
        for (std::size_t j = 0; j < d; ++j) worst_eq = std::max(worst_eq, std::abs(a[j] - b[j]));

        const auto gw = walk_weights(m + 1, uniform01(rng));
        const std::span<const double> wg(gw.data() + 1, m);
        const auto h = aggregate_context(xs, wg, Aggregation::WeightedAverage, d);
        for (std::size_t j = 0; j < d; ++j) {
            double lo = xs[0][j], hi = xs[0][j];
            for (const auto& x : xs) lo = std::min(lo, x[j]), hi = std::max(hi, x[j]);
            const double slack = 1e-12 * std::max(1.0, std::max(std::abs(lo), std::abs(hi)));
            const bool zero_weights = h[j] == 0.0 && std::all_of(wg.begin(), wg.end(), [](double v) { return v == 0; });
            if (!zero_weights && (h[j] < lo - slack || h[j] > hi + slack)) ++hull_violations;
        }
    }
    return {worst_eq <= 1e-12 && hull_violations == 0,
            fmt("max |wavg(gamma=1) - avg| = %.3g (tol 1e-12), convex-hull violations %zu over 1000 sets", worst_eq,
                hull_violations)};
}

Outcome metric_oracle() {
    const auto r = report_from_confusion({{1093, 36}, {62, 40}}, {"non-hate", "hate"});
    const double p = *r.precision_pos, rc = *r.recall_pos, f = *r.f1_pos;
    const bool ok = std::abs(p - 0.53) <= 0.005 && std::abs(rc - 0.39) <= 0.005 && std::abs(f - 0.45) <= 0.005;
    return {ok, fmt("precision %.4f (0.53), recall %.4f (0.39), F1 %.4f (0.45), tol 0.005", p, rc, f)};
}

double objective(const SoftmaxModel& m, const std::vector<LabeledExample>& xs, double l2) {
    const std::size_t K = m.num_classes(), d = m.feature_dim;
    double total = 0.0;
    for (const auto& e : xs) {
        std::vector<double> z(K);
        double hi = -INFINITY;
        for (std::size_t k = 0; k < K; ++k) {
            z[k] = m.bias[k];
            for (std::size_t j = 0; j < d; ++j) z[k] += m.weights[k * d + j] * e.features[j];
            hi = std::max(hi, z[k]);
        }
        double s = 0.0;
        for (double v : z) s += std::exp(v - hi);
        total += std::log(s) + hi - z[e.label];
    }
    double sq = 0.0;
    for (double w : m.weights) sq += w * w;
    return total / xs.size() + 0.5 * l2 * sq;
}

Outcome gradient_check() {
    Rng rng(31415);
    const double h = 1e-5;
    double worst = 0.0;
    for (int instance = 0; instance < 50; ++instance) {
        auto m = SoftmaxModel::zeros({"a", "b", "c"}, 10);
        for (auto& w : m.weights) w = 0.5 * standard_normal(rng);
        for (auto& b : m.bias) b = 0.5 * standard_normal(rng);
        std::vector<LabeledExample> xs(20);
        for (auto& e : xs) {
            e.features.resize(10);
            for (auto& v : e.features) v = standard_normal(rng);
            e.label = static_cast<int>(uniform_index(rng, 3));
        }
        const double l2 = 0.05 * uniform01(rng);
        const auto g = loss_and_gradient(m, xs, l2);
        auto probe = [&](double& param, double analytic) {
            const double saved = param;
            param = saved + h;
            const double up = objective(m, xs, l2);
            param = saved - h;
            const double down = objective(m, xs, l2);
            param = saved;
            const double numeric = (up - down) / (2 * h);
            worst = std::max(worst, std::abs(analytic - numeric) /
                                        std::max(1e-8, std::abs(analytic) + std::abs(numeric)));
        };
        for (std::size_t i = 0; i < m.weights.size(); ++i) probe(m.weights[i], g.weights[i]);
        for (std::size_t k = 0; k < m.bias.size(); ++k) probe(m.bias[k], g.bias[k]);
    }
    return {worst <= 1e-5, fmt("max relative error %.3g over 50 instances (tol 1e-5)", worst)};
}

// Shared by the context experiments below.
CorpusSpec context_spec() {
    CorpusSpec spec;
    spec.task = Task::Hate;
    spec.num_trees = 2000;
    spec.positive_fraction = 0.106;
    spec.context_signal = 0.8;
    spec.mean_tree_size = 12;
    spec.seed = 2023;
    return spec;
}

RunConfig context_run(double p, double gamma) {
    RunConfig c;
    c.task = Task::Hate;
    c.walk.p = p;
    c.walk.gamma = gamma;
    c.walk.max_nodes = 4;
    c.aggregation = Aggregation::WeightedAverage;
    c.scheme = ConcatScheme::UVAbsDiff;
    c.embedding.hashed_dimension = 128;
    c.train.class_weighting = true;
    c.seed = 1;
    return c;
}

const Corpus& context_corpus() {
    static const Corpus corpus = generate(context_spec()).corpus;
    return corpus;
}

Outcome context_helps() {
    const auto t0 = Clock::now();
    const Corpus& corpus = context_corpus();
    const auto full_cfg = context_run(0.8, 0.8);
    const auto split = split_for(full_cfg, corpus);
    const auto provider = make_provider(full_cfg.embedding);
    const auto seeds = replicate_seeds(full_cfg.seed, 5);

    const auto full = run_replicates(split.train, split.test, *provider, experiment_config(full_cfg), seeds);
    const auto flat = run_replicates(split.train, split.test, *provider, experiment_config(context_run(0.8, 0.0)), seeds);
    auto bow_train = full_cfg.train;
    bow_train.epochs = 100;
    const auto bow = run_bow_baseline(split.train, split.test, Task::Hate, kDefaultHashedDimension, bow_train, seeds);
    const double secs = seconds_since(t0);

    const double gap_flat = 100.0 * (full.macro_f1 - flat.macro_f1);
    const double gap_bow = 100.0 * (full.macro_f1 - bow.macro_f1);
    return {gap_flat >= 10.0 && gap_bow >= 10.0 && secs < 300.0,
            fmt("%zu trees / %zu nodes; macro-F1 context %.2f, gamma=0 %.2f, BoW %.2f; gaps %+.2f / %+.2f points "
                "(need >= 10); %.1f s (limit 300 s)",
                corpus.trees.size(), corpus.node_count(), 100 * full.macro_f1, 100 * flat.macro_f1,
                100 * bow.macro_f1, gap_flat, gap_bow, secs)};
}

Outcome grid_shape() {
    CorpusSpec spec = context_spec();
    spec.num_trees = 500;
    const auto corpus = generate(spec).corpus;
    auto cfg = context_run(0.8, 0.8);
    cfg.embedding.hashed_dimension = 64;
    cfg.train.epochs = 20;
    const std::vector<double> axis{0.0, 0.2, 0.4, 0.6, 0.8, 1.0};
    const std::size_t seeds = 2;

    auto csv_of = [](const GridSearchResult& g) {
        std::ostringstream out;
        write_grid_csv(out, g);
        return out.str();
    };
    const auto first = run_grid(cfg, corpus, axis, axis, seeds);
    auto manifest = make_manifest(cfg, "grid-search");
    const auto replay_cfg = run_config_from_json(nlohmann::json::parse(manifest.dump()));
    const auto second = run_grid(replay_cfg, corpus, axis, axis, seeds);

    const bool identical = csv_of(first) == csv_of(second);
    const auto& best = first.best_cell();
    double best_flat = 0.0;
    for (const auto& c : first.cells) {
        if (c.gamma == 0.0) best_flat = std::max(best_flat, c.report.macro_f1);
    }
    return {first.cells.size() == 36 && identical && best.gamma != 0.0,
            fmt("%zu cells, replay %s, best (p=%.1f, gamma=%.1f) macro-F1 %.2f vs best gamma=0 cell %.2f",
                first.cells.size(), identical ? "identical" : "DIFFERS", best.p, best.gamma,
                100 * best.report.macro_f1, 100 * best_flat)};
}

Outcome ablation() {
    const Corpus& corpus = context_corpus();
    const auto rows = run_ablation(context_run(0.8, 0.8), corpus, 5);
    double uv = 0.0, absdiff = 0.0;
    std::string table;
    bool same_seeds = rows.size() == 4;
    for (const auto& r : rows) {
        if (r.scheme == ConcatScheme::UV) uv = r.report.macro_f1;
        if (r.scheme == ConcatScheme::UVAbsDiff) absdiff = r.report.macro_f1;
        same_seeds = same_seeds && r.report.seeds == rows.front().report.seeds;
        table += fmt(" %s=%.2f", std::string(scheme_name(r.scheme)).c_str(), 100 * r.report.macro_f1);
    }
    const double excess = 100.0 * (uv - absdiff);
    return {same_seeds && excess <= 1.0,
            fmt("%zu rows, macro-F1%s; uv - uv_absdiff = %+.2f points (limit +1)", rows.size(), table.c_str(),
                excess)};
}

Outcome manifest_replay() {
    const auto dir = fs::temp_directory_path() / "convctx_acceptance_replay";
    fs::remove_all(dir);
    CorpusSpec spec = context_spec();
    spec.num_trees = 300;
    const auto corpus = generate(spec).corpus;
    auto cfg = context_run(0.8, 0.8);
    cfg.output_dir = (dir / "a").string();
    cfg.dump_features = true;
    const auto a = run_pipeline(cfg, corpus);

    std::ifstream in(dir / "a" / "manifest.json");
    auto replay = run_config_from_json(nlohmann::json::parse(in));
    replay.output_dir = (dir / "b").string();
    const auto b = run_pipeline(replay, corpus);

    auto slurp = [](const fs::path& p) {
        std::ifstream f(p, std::ios::binary);
        std::ostringstream s;
        s << f.rdbuf();
        return s.str();
    };
    std::size_t same = 0, total = 0;
    for (const char* f : {"model.txt", "report.json", "features_train.jsonl", "features_test.jsonl"}) {
        ++total;
        same += slurp(dir / "a" / f) == slurp(dir / "b" / f);
    }
    const bool metrics = a.report.accuracy == b.report.accuracy && a.report.macro_f1 == b.report.macro_f1 &&
                         a.report.confusion == b.report.confusion;
    fs::remove_all(dir);
    return {metrics && same == total,
            fmt("metrics %s, %zu/%zu artifact files byte-identical", metrics ? "bit-identical" : "DIFFER", same,
                total)};
}

}  // namespace

int main() {
    const auto t0 = Clock::now();
    report(1, "walk-distribution oracle", walk_distribution);
    report(2, "deterministic-walk equivalence", deterministic_walk);
    report(3, "discount-weight exactness", discount_weights);
    report(4, "aggregation identities", aggregation_identities);
    report(5, "metric oracle", metric_oracle);
    report(6, "gradient check", gradient_check);
    report(7, "context-helps experiment", context_helps);
    report(8, "grid-search shape", grid_shape);
    report(9, "concatenation ablation", ablation);
    report(10, "manifest determinism", manifest_replay);
    std::printf("%d of 10 criteria failed (%.1f s)\n", failures, seconds_since(t0));
    return failures == 0 ? 0 : 1;
}
