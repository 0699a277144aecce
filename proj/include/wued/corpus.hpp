#pragma once

#include <cstdint>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "wued/error.hpp"

namespace wued {

/// One annotated sentence: surface tokens, their POS tags, a binary
/// error label per token, and the 1-based gold error position (0 when
/// the sentence carries no labelled error).
struct Sentence {
    std::vector<std::string> tokens;
    std::vector<std::string> pos_tags;
    std::vector<std::uint8_t> error_labels;
    std::size_t gold_position = 0;

    std::size_t size() const { return tokens.size(); }
    bool has_gold() const { return gold_position != 0; }
};

/// First token labelled 1, as a 1-based index; 0 if none.
inline std::size_t first_error_position(const std::vector<std::uint8_t>& labels) {
    for (std::size_t i = 0; i < labels.size(); ++i) {
        if (labels[i] == 1) return i + 1;
    }
    return 0;
}

namespace detail {

inline std::vector<std::string> split_tabs(const std::string& line) {
    std::vector<std::string> fields;
    std::size_t start = 0;
    while (true) {
        const std::size_t tab = line.find('\t', start);
        if (tab == std::string::npos) {
            fields.push_back(line.substr(start));
            break;
        }
        fields.push_back(line.substr(start, tab - start));
        start = tab + 1;
    }
    return fields;
}

} // namespace detail

/// Reads a corpus in the column format
///   surface<TAB>pos<TAB>label
/// with one token per line, a blank line between sentences, labels 0/1.
/// Consecutive blank lines are tolerated.
inline std::vector<Sentence> load_corpus(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open corpus file: " + path);

    std::vector<Sentence> sentences;
    Sentence current;
    std::string line;
    std::size_t line_no = 0;

    auto flush = [&]() {
        if (current.tokens.empty()) return;
        current.gold_position = first_error_position(current.error_labels);
        sentences.push_back(std::move(current));
        current = Sentence{};
    };

    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) {
            flush();
            continue;
        }
        std::vector<std::string> fields = detail::split_tabs(line);
        if (fields.size() != 3) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": expected 3 " +
                             "tab-separated columns, got " + std::to_string(fields.size()));
        }
        if (fields[0].empty()) {
            throw ParseError(path + ":" + std::to_string(line_no) + ": empty token");
        }
        if (fields[2] != "0" && fields[2] != "1") {
            throw ParseError(path + ":" + std::to_string(line_no) +
                             ": error label must be 0 or 1, got '" + fields[2] + "'");
        }
        current.tokens.push_back(std::move(fields[0]));
        current.pos_tags.push_back(std::move(fields[1]));
        current.error_labels.push_back(fields[2] == "1" ? 1 : 0);
    }
    flush();

    if (sentences.empty()) {
        throw ParseError(path + ":" + std::to_string(line_no) +
                         ": corpus contains no sentences");
    }
    return sentences;
}

/// Writes the same column format; byte-deterministic for fixed input.
inline void save_corpus(const std::string& path, const std::vector<Sentence>& sentences) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write corpus file: " + path);
    for (const Sentence& s : sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            out << s.tokens[i] << '\t' << s.pos_tags[i] << '\t'
                << (s.error_labels[i] ? '1' : '0') << '\n';
        }
        out << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

} // namespace wued
