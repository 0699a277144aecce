#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <fstream>
#include <string>
#include <unordered_map>
#include <vector>

#include "wued/corpus.hpp"
#include "wued/error.hpp"

namespace wued {

inline constexpr std::uint32_t kPadId = 0;
inline constexpr std::uint32_t kUnkId = 1;
inline constexpr const char* kPadToken = "<pad>";
inline constexpr const char* kUnkToken = "<unk>";

/// Token and POS-tag inventories with training-split frequency counts.
/// Word ids reserve PAD=0 and UNK=1; POS ids reserve PAD=0 only.
/// Ids are dense, assigned in first-occurrence order over the training
/// sentences, and stable under save/load.
struct Vocab {
    std::unordered_map<std::string, std::uint32_t> word_id;
    std::vector<std::string> word_str;
    std::vector<std::uint64_t> word_freq;

    std::unordered_map<std::string, std::uint32_t> pos_id;
    std::vector<std::string> pos_str;
    std::vector<std::uint64_t> pos_freq;

    std::size_t word_count() const { return word_str.size(); }
    std::size_t pos_count() const { return pos_str.size(); }

    std::uint32_t encode_word(const std::string& token) const {
        auto it = word_id.find(token);
        return it == word_id.end() ? kUnkId : it->second;
    }

    /// Tags unseen at training time fall back to the PAD id.
    std::uint32_t encode_pos(const std::string& tag) const {
        auto it = pos_id.find(tag);
        return it == pos_id.end() ? kPadId : it->second;
    }

    /// Training frequency of a surface token; unseen and UNK-mapped
    /// tokens count as 1.
    std::uint64_t train_freq(const std::string& token) const {
        auto it = word_id.find(token);
        if (it == word_id.end()) return 1;
        const std::uint64_t f = word_freq[it->second];
        return f == 0 ? 1 : f;
    }

    bool operator==(const Vocab& other) const {
        return word_str == other.word_str && word_freq == other.word_freq &&
               pos_str == other.pos_str && pos_freq == other.pos_freq;
    }
};

inline constexpr std::uint32_t kLogFreqClasses = 10;

/// Word log-frequency class: the natural log of the training frequency,
/// truncated to an integer and clamped to the digits 0..9. Frequency 1
/// (and anything unseen) lands in class 0.
inline std::uint32_t log_freq_label_of(std::uint64_t freq) {
    if (freq <= 1) return 0;
    const double l = std::log(static_cast<double>(freq));
    auto label = static_cast<std::int64_t>(l); // truncation toward zero
    if (label < 0) label = 0;
    if (label > 9) label = 9;
    return static_cast<std::uint32_t>(label);
}

inline std::uint32_t log_freq_label(const std::string& token, const Vocab& vocab) {
    return log_freq_label_of(vocab.train_freq(token));
}

/// Builds the vocabulary from the training split. Tokens whose training
/// frequency falls below min_freq receive no id and encode as UNK.
inline Vocab build_vocab(const std::vector<Sentence>& train, std::uint64_t min_freq = 1) {
    if (train.empty()) throw DataError("build_vocab: empty training set");
    if (min_freq < 1) throw ArgError("build_vocab: min_freq must be at least 1");

    // counting pass
    std::unordered_map<std::string, std::uint64_t> counts;
    for (const Sentence& s : train) {
        for (const std::string& tok : s.tokens) ++counts[tok];
    }

    Vocab v;
    v.word_str = {kPadToken, kUnkToken};
    v.word_freq = {0, 0};
    v.word_id[kPadToken] = kPadId;
    v.word_id[kUnkToken] = kUnkId;

    v.pos_str = {kPadToken};
    v.pos_freq = {0};
    v.pos_id[kPadToken] = kPadId;

    // id pass, first-occurrence order
    for (const Sentence& s : train) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            const std::string& tok = s.tokens[i];
            if (counts[tok] >= min_freq && !v.word_id.count(tok)) {
                v.word_id[tok] = static_cast<std::uint32_t>(v.word_str.size());
                v.word_str.push_back(tok);
                v.word_freq.push_back(counts[tok]);
            }
            const std::string& tag = s.pos_tags[i];
            auto it = v.pos_id.find(tag);
            if (it == v.pos_id.end()) {
                v.pos_id[tag] = static_cast<std::uint32_t>(v.pos_str.size());
                v.pos_str.push_back(tag);
                v.pos_freq.push_back(1);
            } else {
                ++v.pos_freq[it->second];
            }
        }
    }
    return v;
}

/// Deterministic text dump, one `token<TAB>id<TAB>freq` line per entry,
/// words first, then a POS section.
inline void save_vocab(const std::string& path, const Vocab& v) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw IoError("cannot write vocab file: " + path);
    out << "#words\t" << v.word_count() << '\n';
    for (std::size_t i = 0; i < v.word_count(); ++i) {
        out << v.word_str[i] << '\t' << i << '\t' << v.word_freq[i] << '\n';
    }
    out << "#pos\t" << v.pos_count() << '\n';
    for (std::size_t i = 0; i < v.pos_count(); ++i) {
        out << v.pos_str[i] << '\t' << i << '\t' << v.pos_freq[i] << '\n';
    }
    if (!out) throw IoError("write failed: " + path);
}

inline Vocab load_vocab(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw IoError("cannot open vocab file: " + path);
    Vocab v;
    std::string line;
    std::size_t line_no = 0;

    auto bad = [&](const std::string& why) {
        return ParseError(path + ":" + std::to_string(line_no) + ": " + why);
    };
    auto read_section = [&](const std::string& header, auto&& add) {
        if (!std::getline(in, line)) throw bad("missing " + header + " header");
        ++line_no;
        auto fields = detail::split_tabs(line);
        if (fields.size() != 2 || fields[0] != header) {
            throw bad("expected " + header + " header");
        }
        const std::size_t n = std::stoull(fields[1]);
        for (std::size_t i = 0; i < n; ++i) {
            if (!std::getline(in, line)) throw bad("truncated vocab section");
            ++line_no;
            fields = detail::split_tabs(line);
            if (fields.size() != 3) throw bad("expected token<TAB>id<TAB>freq");
            if (std::stoull(fields[1]) != i) throw bad("non-dense id sequence");
            add(fields[0], std::stoull(fields[2]));
        }
    };

    read_section("#words", [&](const std::string& tok, std::uint64_t freq) {
        v.word_id[tok] = static_cast<std::uint32_t>(v.word_str.size());
        v.word_str.push_back(tok);
        v.word_freq.push_back(freq);
    });
    read_section("#pos", [&](const std::string& tag, std::uint64_t freq) {
        v.pos_id[tag] = static_cast<std::uint32_t>(v.pos_str.size());
        v.pos_str.push_back(tag);
        v.pos_freq.push_back(freq);
    });
    if (v.word_count() < 2 || v.word_str[kPadId] != kPadToken ||
        v.word_str[kUnkId] != kUnkToken) {
        throw ParseError(path + ": missing reserved PAD/UNK entries");
    }
    return v;
}

/// Error counts bucketed by the log-frequency class of the token written
/// at each labelled error position. `vocab` must be built from the same
/// corpus acting as the training split.
inline std::array<std::uint64_t, kLogFreqClasses>
error_counts_by_log_freq(const std::vector<Sentence>& sentences, const Vocab& vocab) {
    std::array<std::uint64_t, kLogFreqClasses> counts{};
    for (const Sentence& s : sentences) {
        for (std::size_t i = 0; i < s.size(); ++i) {
            if (s.error_labels[i] == 1) {
                ++counts[log_freq_label(s.tokens[i], vocab)];
            }
        }
    }
    return counts;
}

} // namespace wued
