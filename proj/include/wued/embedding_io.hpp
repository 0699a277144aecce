#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <vector>

#include "wued/error.hpp"
#include "wued/layers.hpp"
#include "wued/vocab.hpp"

namespace wued {

struct EmbeddingLoadStats {
    std::size_t matched = 0;      // distinct vocab tokens found in the file
    std::size_t vocab_tokens = 0; // real vocab tokens (PAD/UNK excluded)
    std::size_t file_vectors = 0; // vector lines seen in the file

    double coverage() const {
        return vocab_tokens == 0 ? 0.0
                                 : static_cast<double>(matched) /
                                       static_cast<double>(vocab_tokens);
    }
};

namespace detail {

inline std::vector<std::string> split_ws(const std::string& line) {
    std::vector<std::string> fields;
    std::istringstream ss(line);
    std::string f;
    while (ss >> f) fields.push_back(std::move(f));
    return fields;
}

inline bool is_uint(const std::string& s) {
    if (s.empty()) return false;
    for (char c : s) {
        if (c < '0' || c > '9') return false;
    }
    return true;
}

} // namespace detail

/// Loads word vectors in the text format: an optional `count dim` header
/// line, then one `token v_1 ... v_dim` line each. Rows for vocab tokens
/// found in the file are taken from the file; everything else (UNK
/// included) keeps the seeded uniform initialisation, and the PAD row is
/// zero. Rows are drawn for the whole table up front, so a missing
/// token's row depends only on the seed and its id, never on the file.
inline EmbeddingTable load_embeddings(const std::string& path, const Vocab& vocab,
                                      std::size_t dim, Rng& rng,
                                      EmbeddingLoadStats* stats = nullptr) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open embeddings file: " + path);

    EmbeddingTable table = embedding_init(vocab.word_count(), dim, rng);

    EmbeddingLoadStats st;
    st.vocab_tokens = vocab.word_count() - 2;

    std::string line;
    std::size_t line_no = 0;
    std::unordered_set<std::uint32_t> seen;

    bool first_content_line = true;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        std::vector<std::string> fields = detail::split_ws(line);

        if (first_content_line) {
            first_content_line = false;
            if (fields.size() == 2 && detail::is_uint(fields[0]) &&
                detail::is_uint(fields[1])) {
                // header: declared count and dimension
                const std::size_t declared_dim = std::stoull(fields[1]);
                if (declared_dim != dim) {
                    throw ParseError(path + ":" + std::to_string(line_no) +
                                     ": declared dimension " + std::to_string(declared_dim) +
                                     " does not match requested " + std::to_string(dim));
                }
                continue;
            }
        }

        if (fields.size() != dim + 1) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected token + " +
                             std::to_string(dim) + " values, got " +
                             std::to_string(fields.size() - 1));
        }
        ++st.file_vectors;
        auto it = vocab.word_id.find(fields[0]);
        if (it == vocab.word_id.end() || it->second < 2) continue;
        const std::uint32_t id = it->second;
        for (std::size_t c = 0; c < dim; ++c) {
            try {
                table.vectors(id, c) = std::stod(fields[c + 1]);
            } catch (const std::exception&) {
                throw ParseError(path + ":" + std::to_string(line_no) +
                                 ": bad numeric value '" + fields[c + 1] + "'");
            }
        }
        seen.insert(id);
    }
    st.matched = seen.size();
    if (stats) *stats = st;
    return table;
}

} // namespace wued
