#include "convctx/synthetic_corpus.hpp"

#include <cmath>
#include <cstdio>

#include "convctx/error.hpp"
#include "convctx/random.hpp"

namespace convctx {

void CorpusSpec::validate() const {
    auto fraction = [](double x) { return x >= 0.0 && x <= 1.0; };
    if (num_trees < 1) throw Error(ErrorCode::InvalidSpec, "num_trees must be >= 1");
    if (!(mean_tree_size >= 1.0)) throw Error(ErrorCode::InvalidSpec, "mean_tree_size must be >= 1");
    if (!(size_dispersion >= 0.0)) throw Error(ErrorCode::InvalidSpec, "size_dispersion must be >= 0");
    if (!(attachment_bias >= 0.0)) throw Error(ErrorCode::InvalidSpec, "attachment_bias must be >= 0");
    if (!fraction(positive_fraction)) throw Error(ErrorCode::InvalidSpec, "positive_fraction must lie in [0, 1]");
    if (!fraction(context_signal)) throw Error(ErrorCode::InvalidSpec, "context_signal must lie in [0, 1]");
    if (context_depth < 1) throw Error(ErrorCode::InvalidSpec, "context_depth must be >= 1");
    if (vocab_size < 1) throw Error(ErrorCode::InvalidSpec, "vocab_size must be >= 1");
}

std::size_t marker_family(std::size_t depth, std::size_t context_depth) noexcept {
    return depth % (context_depth + 1);
}

std::string marker_token(std::size_t family, bool positive) {
    return "ctx" + std::to_string(family) + (positive ? "pos" : "neg");
}

namespace {

std::size_t draw_tree_size(const CorpusSpec& spec, Rng& rng) {
    const double extra_mean = spec.mean_tree_size - 1.0;
    if (extra_mean <= 0.0) return 1;
    const double sigma = spec.size_dispersion;
    const double mu = std::log(extra_mean) - 0.5 * sigma * sigma;
    const double extra = std::exp(mu + sigma * standard_normal(rng));
    return 1 + static_cast<std::size_t>(std::llround(extra));
}

Label positive_label(Task task) { return task == Task::Polarity ? Label::Support : Label::Hate; }
Label negative_label(Task task) { return task == Task::Polarity ? Label::Attack : Label::NonHate; }

std::string zero_pad(std::size_t value, int width) {
    char buf[32];
    std::snprintf(buf, sizeof buf, "%0*zu", width, value);
    return buf;
}

}  // namespace

SyntheticCorpus generate(const CorpusSpec& spec) {
    spec.validate();
    Rng rng(derive_seed(spec.seed, "synthetic-corpus"));
    SyntheticCorpus out;
    out.corpus.trees.reserve(spec.num_trees);
    const int tree_width = static_cast<int>(std::to_string(spec.num_trees).size());

    for (std::size_t t = 0; t < spec.num_trees; ++t) {
        const std::size_t n = draw_tree_size(spec, rng);

        // Reply structure.
        std::vector<std::size_t> parent(n, 0), depth(n, 0), children(n, 0);
        std::vector<double> attach(n, 0.0);
        attach[0] = 1.0;
        double attach_total = 1.0;
        for (std::size_t i = 1; i < n; ++i) {
            double u = uniform01(rng) * attach_total;
            std::size_t j = 0;
            while (j + 1 < i && u >= attach[j]) u -= attach[j++];
            parent[i] = j;
            depth[i] = depth[j] + 1;
            ++children[j];
            attach_total -= attach[j];
            attach[j] = std::pow(static_cast<double>(children[j] + 1), spec.attachment_bias);
            attach_total += attach[j];
            attach[i] = 1.0;
            attach_total += 1.0;
        }

        // Markers, roles, labels and text.
        std::vector<bool> marker(n);
        for (std::size_t i = 0; i < n; ++i) marker[i] = uniform01(rng) < spec.positive_fraction;

        std::vector<NodeRole> roles(n, NodeRole::Unlabeled);
        std::vector<CommentNode> records(n);
        for (std::size_t i = 0; i < n; ++i) {
            auto& rec = records[i];
            rec.id = std::to_string(i);
            if (i > 0) rec.parent_id = std::to_string(parent[i]);

            std::string text;
            for (std::size_t w = 0; w < spec.words_per_comment; ++w) {
                text += 'w';
                text += std::to_string(uniform_index(rng, spec.vocab_size));
                text += ' ';
            }
            text += marker_token(marker_family(depth[i], spec.context_depth), marker[i]);

            const bool labeled = spec.task == Task::Hate || i > 0;
            const bool from_context = uniform01(rng) < spec.context_signal;
            const bool coin = uniform01(rng) < spec.positive_fraction;
            if (labeled) {
                bool positive = coin;
                if (from_context && depth[i] >= spec.context_depth) {
                    std::size_t a = i;
                    for (std::size_t k = 0; k < spec.context_depth; ++k) a = parent[a];
                    positive = marker[a];
                    roles[i] = NodeRole::ContextLabeled;
                } else if (from_context) {
                    roles[i] = NodeRole::Noise;
                } else {
                    roles[i] = NodeRole::SelfLabeled;
                    text += positive ? " selfpos" : " selfneg";
                }
                rec.label = positive ? positive_label(spec.task) : negative_label(spec.task);
            }
            rec.text = std::move(text);
        }
        out.corpus.trees.push_back(DiscussionTree::build(std::move(records), "t" + zero_pad(t, tree_width)));
        out.roles.push_back(std::move(roles));
    }
    return out;
}

}  // namespace convctx
