#include "convctx/corpus_io.hpp"

#include <algorithm>
#include <fstream>
#include <map>

#include <json.hpp>

#include "convctx/error.hpp"

namespace convctx {

using nlohmann::json;

std::size_t Corpus::node_count() const noexcept {
    std::size_t n = 0;
    for (const auto& t : trees) n += t.size();
    return n;
}

const DiscussionTree* Corpus::find_tree(std::string_view tree_id) const {
    const auto it = std::lower_bound(trees.begin(), trees.end(), tree_id,
                                     [](const DiscussionTree& t, std::string_view id) { return t.tree_id() < id; });
    if (it == trees.end() || it->tree_id() != tree_id) return nullptr;
    return &*it;
}

namespace {

std::string id_field(const json& v, const char* field, std::size_t line_no) {
    if (v.is_string()) return v.get<std::string>();
    if (v.is_number_integer()) return std::to_string(v.get<long long>());
    throw Error(ErrorCode::MalformedFile,
                "line " + std::to_string(line_no) + ": field '" + field + "' must be a string or integer");
}

}  // namespace

Corpus read_corpus(std::istream& in) {
    std::map<std::string, std::vector<CommentNode>> grouped;
    std::string line;
    std::size_t line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (std::all_of(line.begin(), line.end(), [](unsigned char c) { return std::isspace(c); })) continue;
        json rec;
        try {
            rec = json::parse(line);
        } catch (const json::parse_error& e) {
            throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) + ": " + e.what());
        }
        if (!rec.is_object() || !rec.contains("tree_id") || !rec.contains("id")) {
            throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) + ": expected tree_id and id");
        }
        CommentNode node;
        const auto tree_id = id_field(rec["tree_id"], "tree_id", line_no);
        node.id = id_field(rec["id"], "id", line_no);
        if (rec.contains("parent_id") && !rec["parent_id"].is_null()) {
            node.parent_id = id_field(rec["parent_id"], "parent_id", line_no);
        }
        if (rec.contains("text") && !rec["text"].is_null()) {
            if (!rec["text"].is_string()) {
                throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) + ": text must be a string");
            }
            node.text = rec["text"].get<std::string>();
        }
        if (rec.contains("label") && !rec["label"].is_null()) {
            const auto& l = rec["label"];
            const auto parsed = l.is_string() ? parse_label(l.get<std::string>()) : std::nullopt;
            if (!parsed) {
                throw Error(ErrorCode::MalformedFile,
                            "line " + std::to_string(line_no) + ": label must be support|attack|hate|non-hate");
            }
            node.label = parsed;
        }
        grouped[tree_id].push_back(std::move(node));
    }

    Corpus corpus;
    corpus.trees.reserve(grouped.size());
    for (auto& [tree_id, records] : grouped) corpus.trees.push_back(DiscussionTree::build(std::move(records), tree_id));
    return corpus;
}

Corpus read_corpus_file(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open corpus '" + path.string() + "'");
    return read_corpus(in);
}

void write_corpus(std::ostream& out, const Corpus& corpus) {
    for (const auto& tree : corpus.trees) {
        for (NodeIndex i = 0; i < tree.size(); ++i) {
            const auto& node = tree.node(i);
            // ordered_json keeps insertion order, so the output is byte-stable.
            nlohmann::ordered_json rec;
            rec["tree_id"] = tree.tree_id();
            rec["id"] = node.id;
            rec["parent_id"] = node.parent_id ? json(*node.parent_id) : json(nullptr);
            rec["text"] = node.text;
            rec["label"] = node.label ? json(std::string(label_name(*node.label))) : json(nullptr);
            out << rec.dump() << '\n';
        }
    }
}

void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw Error(ErrorCode::Io, "cannot write corpus '" + path.string() + "'");
    write_corpus(out, corpus);
}

void write_baf(std::ostream& out, const BipolarFramework& baf) {
    auto emit = [&](const auto& edges, const char* relation) {
        for (const auto& [source, target] : edges) {
            nlohmann::ordered_json rec;
            rec["source"] = source;
            rec["target"] = target;
            rec["relation"] = relation;
            out << rec.dump() << '\n';
        }
    };
    emit(baf.attacks, "attack");
    emit(baf.supports, "support");
}

}  // namespace convctx
