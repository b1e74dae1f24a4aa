#include "convctx/embeddings.hpp"

#include <cmath>
#include <fstream>
#include <istream>
#include <sstream>

#include "convctx/error.hpp"
#include "convctx/random.hpp"

namespace convctx {

namespace {

// Returns the code point and advances i; 0xFFFFFFFF for an invalid sequence
// (one byte is consumed).
char32_t decode_utf8(std::string_view s, std::size_t& i) {
    constexpr char32_t kInvalid = 0xFFFFFFFF;
    const auto b0 = static_cast<unsigned char>(s[i]);
    int len = 0;
    char32_t cp = 0;
    if (b0 < 0x80) {
        ++i;
        return b0;
    } else if ((b0 & 0xE0) == 0xC0) {
        len = 2;
        cp = b0 & 0x1F;
    } else if ((b0 & 0xF0) == 0xE0) {
        len = 3;
        cp = b0 & 0x0F;
    } else if ((b0 & 0xF8) == 0xF0) {
        len = 4;
        cp = b0 & 0x07;
    } else {
        ++i;
        return kInvalid;
    }
    if (i + len > s.size()) {
        ++i;
        return kInvalid;
    }
    for (int k = 1; k < len; ++k) {
        const auto b = static_cast<unsigned char>(s[i + k]);
        if ((b & 0xC0) != 0x80) {
            ++i;
            return kInvalid;
        }
        cp = (cp << 6) | (b & 0x3F);
    }
    i += len;
    return cp;
}

void encode_utf8(char32_t cp, std::string& out) {
    if (cp < 0x80) {
        out.push_back(static_cast<char>(cp));
    } else if (cp < 0x800) {
        out.push_back(static_cast<char>(0xC0 | (cp >> 6)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else if (cp < 0x10000) {
        out.push_back(static_cast<char>(0xE0 | (cp >> 12)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    } else {
        out.push_back(static_cast<char>(0xF0 | (cp >> 18)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 12) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | ((cp >> 6) & 0x3F)));
        out.push_back(static_cast<char>(0x80 | (cp & 0x3F)));
    }
}

bool is_word_char(char32_t cp) {
    if (cp < 0x80) return (cp >= '0' && cp <= '9') || (cp >= 'a' && cp <= 'z') || (cp >= 'A' && cp <= 'Z');
    if (cp == 0xFFFFFFFF) return false;
    if (cp <= 0xBF) return cp == 0xAA || cp == 0xB5 || cp == 0xBA;  // Latin-1 symbols block
    if (cp == 0xD7 || cp == 0xF7) return false;
    if (cp >= 0x2000 && cp <= 0x2BFF) return false;  // punctuation, symbols, arrows, dingbats
    if (cp >= 0x3000 && cp <= 0x303F) return false;  // CJK punctuation
    if (cp >= 0xFE30 && cp <= 0xFE4F) return false;
    if (cp >= 0xFF00 && cp <= 0xFF0F) return false;
    if (cp >= 0x1F000 && cp <= 0x1FAFF) return false;  // emoji
    return true;
}

char32_t to_lower(char32_t cp) {
    if (cp >= 'A' && cp <= 'Z') return cp + 0x20;
    if (cp >= 0xC0 && cp <= 0xDE && cp != 0xD7) return cp + 0x20;
    if (cp >= 0x391 && cp <= 0x3A9 && cp != 0x3A2) return cp + 0x20;
    if (cp >= 0x410 && cp <= 0x42F) return cp + 0x20;
    if (cp >= 0x400 && cp <= 0x40F) return cp + 0x50;
    return cp;
}

}  // namespace

std::vector<std::string> tokenize(std::string_view text) {
    std::vector<std::string> tokens;
    std::string current;
    std::size_t i = 0;
    while (i < text.size()) {
        const char32_t cp = decode_utf8(text, i);
        if (is_word_char(cp)) {
            encode_utf8(to_lower(cp), current);
        } else if (!current.empty()) {
            tokens.push_back(std::move(current));
            current.clear();
        }
    }
    if (!current.empty()) tokens.push_back(std::move(current));
    return tokens;
}

Vector hashed_bow_embed(std::string_view text, std::size_t dimension, bool normalize) {
    if (dimension == 0) throw Error(ErrorCode::InvalidConfig, "embedding dimension must be >= 1");
    Vector v(dimension, 0.0);
    for (const auto& token : tokenize(text)) {
        const std::uint64_t h = fnv1a64(token);
        const auto bucket = static_cast<std::size_t>(h % dimension);
        // Sign from an independent mix of the same hash.
        const double sign = (splitmix64(h) >> 63) != 0 ? -1.0 : 1.0;
        v[bucket] += sign;
    }
    if (normalize) {
        double sq = 0.0;
        for (const double x : v) sq += x * x;
        if (sq > 0.0) {
            const double inv = 1.0 / std::sqrt(sq);
            for (double& x : v) x *= inv;
        }
    }
    return v;
}

HashedBowProvider::HashedBowProvider(std::size_t dimension, bool normalize) : dimension_(dimension), normalize_(normalize) {
    if (dimension == 0) throw Error(ErrorCode::InvalidConfig, "embedding dimension must be >= 1");
}

Vector HashedBowProvider::embed(const DiscussionTree& tree, NodeIndex node) const {
    return hashed_bow_embed(tree.node(node).text, dimension_, normalize_);
}

ExternalEmbeddingProvider::ExternalEmbeddingProvider(std::size_t dimension, std::unordered_map<std::string, Vector> rows)
    : dimension_(dimension), rows_(std::move(rows)) {
    for (const auto& [id, v] : rows_) {
        if (v.size() != dimension_) {
            throw Error(ErrorCode::DimensionMismatch, "row '" + id + "' has " + std::to_string(v.size()) +
                                                          " values, expected " + std::to_string(dimension_));
        }
    }
}

Vector ExternalEmbeddingProvider::embed(const DiscussionTree& tree, NodeIndex node) const {
    const auto& id = tree.node(node).id;
    if (auto it = rows_.find(tree.tree_id() + "/" + id); it != rows_.end()) return it->second;
    if (auto it = rows_.find(id); it != rows_.end()) return it->second;
    throw Error(ErrorCode::MissingEmbedding, "no embedding for node '" + id + "' of tree '" + tree.tree_id() + "'");
}

ExternalEmbeddingProvider load_external_embeddings(std::istream& in) {
    std::string line;
    if (!std::getline(in, line) || line.rfind("d=", 0) != 0) {
        throw Error(ErrorCode::MalformedFile, "embedding file must start with 'd=<int>'");
    }
    std::size_t dimension = 0;
    try {
        std::size_t used = 0;
        const auto d = std::stoll(line.substr(2), &used);
        if (d < 1 || 2 + used != line.size()) throw std::invalid_argument("bad");
        dimension = static_cast<std::size_t>(d);
    } catch (const std::exception&) {
        throw Error(ErrorCode::MalformedFile, "invalid dimension header '" + line + "'");
    }

    std::unordered_map<std::string, Vector> rows;
    std::size_t line_no = 1;
    while (std::getline(in, line)) {
        ++line_no;
        std::istringstream fields(line);
        std::string id;
        if (!(fields >> id)) continue;
        Vector v;
        v.reserve(dimension);
        std::string tok;
        while (fields >> tok) {
            double x = 0.0;
            try {
                std::size_t used = 0;
                x = std::stod(tok, &used);
                if (used != tok.size()) throw std::invalid_argument("trailing");
            } catch (const std::exception&) {
                throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) + ": bad number '" + tok + "'");
            }
            if (!std::isfinite(x)) {
                throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) + ": non-finite value");
            }
            v.push_back(x);
        }
        if (v.size() != dimension) {
            throw Error(ErrorCode::DimensionMismatch, "line " + std::to_string(line_no) + ": row '" + id + "' has " +
                                                          std::to_string(v.size()) + " values, expected " +
                                                          std::to_string(dimension));
        }
        if (!rows.emplace(id, std::move(v)).second) {
            throw Error(ErrorCode::MalformedFile, "line " + std::to_string(line_no) + ": duplicate row '" + id + "'");
        }
    }
    return ExternalEmbeddingProvider(dimension, std::move(rows));
}

ExternalEmbeddingProvider load_external_embeddings(const std::filesystem::path& path) {
    std::ifstream in(path);
    if (!in) throw Error(ErrorCode::Io, "cannot open embedding file '" + path.string() + "'");
    return load_external_embeddings(in);
}

std::vector<Vector> embed_tree(const EmbeddingProvider& provider, const DiscussionTree& tree) {
    std::vector<Vector> out;
    out.reserve(tree.size());
    for (NodeIndex i = 0; i < tree.size(); ++i) {
        out.push_back(provider.embed(tree, i));
        if (out.back().size() != provider.dimension()) {
            throw Error(ErrorCode::DimensionMismatch, "provider returned a vector of the wrong size");
        }
    }
    return out;
}

}  // namespace convctx
