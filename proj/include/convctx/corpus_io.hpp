#pragma once

#include <filesystem>
#include <iosfwd>
#include <string>
#include <vector>

#include "convctx/discussion_graph.hpp"

namespace convctx {

/// A collection of independent discussion trees, ordered by tree id.
struct Corpus {
    std::vector<DiscussionTree> trees;

    std::size_t node_count() const noexcept;
    const DiscussionTree* find_tree(std::string_view tree_id) const;
};

/// Reads newline-delimited JSON records
///   {"tree_id": ..., "id": ..., "parent_id": ... | null, "text": ..., "label": ...}
/// grouping them by tree id (record order within a tree is preserved).
/// String or integer ids are accepted. Throws MalformedFile for unparsable
/// lines and propagates tree validation errors.
Corpus read_corpus(std::istream& in);
Corpus read_corpus_file(const std::filesystem::path& path);

/// Writes the same format with a fixed key order; output is byte-stable.
void write_corpus(std::ostream& out, const Corpus& corpus);
void write_corpus_file(const std::filesystem::path& path, const Corpus& corpus);

/// One edge per line: {"source": child, "target": parent, "relation": "attack"|"support"}.
void write_baf(std::ostream& out, const BipolarFramework& baf);

}  // namespace convctx
