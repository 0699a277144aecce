#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "wued/corpus.hpp"
#include "wued/error.hpp"
#include "wued/rng.hpp"
#include "wued/vocab.hpp"

namespace wued {

/// Which auxiliary task the model is trained with.
enum class AuxKind { none, pos_tag, log_freq };

inline std::string aux_kind_name(AuxKind k) {
    switch (k) {
        case AuxKind::none: return "none";
        case AuxKind::pos_tag: return "pos_tag";
        case AuxKind::log_freq: return "log_freq";
    }
    return "none";
}

inline AuxKind aux_kind_from(const std::string& name) {
    if (name == "none") return AuxKind::none;
    if (name == "pos_tag") return AuxKind::pos_tag;
    if (name == "log_freq") return AuxKind::log_freq;
    throw ArgError("unknown aux task '" + name + "' (none|pos_tag|log_freq)");
}

/// Number of auxiliary classes implied by the task and the vocabulary.
inline std::size_t aux_class_count(AuxKind kind, const Vocab& vocab) {
    switch (kind) {
        case AuxKind::none: return 0;
        case AuxKind::pos_tag: return vocab.pos_count();
        case AuxKind::log_freq: return kLogFreqClasses;
    }
    return 0;
}

/// Padded, id-encoded group of sentences. Grids are rectangular with
/// PAD (= 0) beyond each sentence's true length; mask marks real tokens.
struct Batch {
    std::vector<std::vector<std::uint32_t>> word_ids;
    std::vector<std::vector<std::uint32_t>> pos_ids;
    std::vector<std::vector<std::uint8_t>> mask;
    std::vector<std::vector<std::uint8_t>> error_labels;
    std::vector<std::vector<std::uint32_t>> aux_labels;
    std::vector<std::size_t> lengths;

    std::size_t size() const { return lengths.size(); }
    std::size_t padded_len() const { return word_ids.empty() ? 0 : word_ids[0].size(); }
};

inline std::uint32_t aux_label_for(AuxKind kind, const Vocab& vocab,
                                   const std::string& token, std::uint32_t pos_id) {
    switch (kind) {
        case AuxKind::none: return 0;
        case AuxKind::pos_tag: return pos_id;
        case AuxKind::log_freq: return log_freq_label(token, vocab);
    }
    return 0;
}

/// Encodes and pads one group of sentences to the group's max length.
inline Batch encode_batch(const std::vector<const Sentence*>& group, const Vocab& vocab,
                          AuxKind aux_kind) {
    std::size_t max_len = 0;
    for (const Sentence* s : group) max_len = std::max(max_len, s->size());

    Batch b;
    const std::size_t n = group.size();
    b.word_ids.assign(n, std::vector<std::uint32_t>(max_len, kPadId));
    b.pos_ids.assign(n, std::vector<std::uint32_t>(max_len, kPadId));
    b.mask.assign(n, std::vector<std::uint8_t>(max_len, 0));
    b.error_labels.assign(n, std::vector<std::uint8_t>(max_len, 0));
    b.aux_labels.assign(n, std::vector<std::uint32_t>(max_len, 0));
    b.lengths.resize(n);

    for (std::size_t i = 0; i < n; ++i) {
        const Sentence& s = *group[i];
        b.lengths[i] = s.size();
        for (std::size_t t = 0; t < s.size(); ++t) {
            const std::uint32_t pid = vocab.encode_pos(s.pos_tags[t]);
            b.word_ids[i][t] = vocab.encode_word(s.tokens[t]);
            b.pos_ids[i][t] = pid;
            b.mask[i][t] = 1;
            b.error_labels[i][t] = s.error_labels[t];
            b.aux_labels[i][t] = aux_label_for(aux_kind, vocab, s.tokens[t], pid);
        }
    }
    return b;
}

/// Shuffles the sentences with the caller's rng, then groups them into
/// fixed-size batches (the last may be short), each padded to its own
/// max length.
inline std::vector<Batch> make_batches(const std::vector<Sentence>& sentences,
                                       const Vocab& vocab, std::size_t batch_size,
                                       AuxKind aux_kind, Rng& rng) {
    if (batch_size == 0) throw ArgError("make_batches: batch_size must be positive");
    std::vector<std::size_t> order(sentences.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
    rng.shuffle(order);

    std::vector<Batch> batches;
    for (std::size_t start = 0; start < order.size(); start += batch_size) {
        const std::size_t end = std::min(order.size(), start + batch_size);
        std::vector<const Sentence*> group;
        group.reserve(end - start);
        for (std::size_t k = start; k < end; ++k) group.push_back(&sentences[order[k]]);
        batches.push_back(encode_batch(group, vocab, aux_kind));
    }
    return batches;
}

} // namespace wued
