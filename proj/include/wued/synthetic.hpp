#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "wued/corpus.hpp"
#include "wued/error.hpp"
#include "wued/rng.hpp"

namespace wued {

/// Recipe for the synthetic stand-in corpus.
///
/// Sentences follow a cyclic POS-tag template: position t carries the
/// tag family (t + phase) mod `families`, and the token is drawn from
/// that family's inventory with a Zipf profile. Exactly one position is
/// then overwritten with the confusable partner of its token; partners
/// belong to the next tag family, so the written tag breaks the cycle
/// and the substitution is detectable from context. Partner surfaces
/// never occur as normal text. Substitution positions are weighted
/// toward rare tokens (`rarity_bias`), so error counts pile up on the
/// low log-frequency classes.
struct SynthSpec {
    std::size_t families = 4;
    std::size_t types_per_family = 40;
    std::size_t variants_per_type = 32; // confusable partners per token type
    double zipf_exponent = 1.1;
    double rarity_bias = 0.5; // substitution weight = freq^(-rarity_bias)
    std::size_t min_len = 6;
    std::size_t max_len = 12;
};

namespace detail {

inline std::size_t sample_discrete(Rng& rng, const std::vector<double>& cumulative) {
    const double u = rng.next_double() * cumulative.back();
    std::size_t lo = 0, hi = cumulative.size() - 1;
    while (lo < hi) {
        const std::size_t mid = (lo + hi) / 2;
        if (u < cumulative[mid]) {
            hi = mid;
        } else {
            lo = mid + 1;
        }
    }
    return lo;
}

} // namespace detail

inline void validate(const SynthSpec& spec) {
    if (spec.families < 2) throw ArgError("SynthSpec: need at least 2 tag families");
    if (spec.types_per_family < 1) throw ArgError("SynthSpec: need at least 1 type per family");
    if (spec.variants_per_type < 1) throw ArgError("SynthSpec: need at least 1 variant");
    if (spec.min_len < 1 || spec.max_len < spec.min_len) {
        throw ArgError("SynthSpec: invalid sentence length range");
    }
    if (spec.zipf_exponent < 0.0 || spec.rarity_bias < 0.0) {
        throw ArgError("SynthSpec: exponents must be non-negative");
    }
}

/// Draws `n_sentences` sentences, each with exactly one labelled error.
inline std::vector<Sentence> generate_synthetic(Rng& rng, std::size_t n_sentences,
                                                const SynthSpec& spec) {
    validate(spec);

    // within-family Zipf weights, shared by all families
    std::vector<double> type_weight(spec.types_per_family);
    std::vector<double> type_cum(spec.types_per_family);
    double total = 0.0;
    for (std::size_t j = 0; j < spec.types_per_family; ++j) {
        type_weight[j] = std::pow(static_cast<double>(j + 1), -spec.zipf_exponent);
        total += type_weight[j];
        type_cum[j] = total;
    }

    auto natural_surface = [](std::size_t f, std::size_t j) {
        return "w" + std::to_string(f) + "_" + std::to_string(j);
    };
    auto partner_surface = [](std::size_t f, std::size_t j, std::size_t v) {
        return "x" + std::to_string(f) + "_" + std::to_string(j) + "_" + std::to_string(v);
    };
    auto tag_of = [](std::size_t f) { return "T" + std::to_string(f); };

    std::vector<Sentence> out;
    out.reserve(n_sentences);
    for (std::size_t k = 0; k < n_sentences; ++k) {
        const std::size_t len =
            spec.min_len + rng.below(spec.max_len - spec.min_len + 1);
        const std::size_t phase = rng.below(spec.families);

        Sentence s;
        s.tokens.reserve(len);
        s.pos_tags.reserve(len);
        s.error_labels.assign(len, 0);

        std::vector<std::size_t> type_idx(len), family_idx(len);
        std::vector<double> sub_cum(len);
        double sub_total = 0.0;
        for (std::size_t t = 0; t < len; ++t) {
            const std::size_t f = (t + phase) % spec.families;
            const std::size_t j = detail::sample_discrete(rng, type_cum);
            family_idx[t] = f;
            type_idx[t] = j;
            s.tokens.push_back(natural_surface(f, j));
            s.pos_tags.push_back(tag_of(f));
            sub_total += std::pow(type_weight[j] / total, -spec.rarity_bias);
            sub_cum[t] = sub_total;
        }

        const std::size_t err = detail::sample_discrete(rng, sub_cum);
        const std::size_t v = rng.below(spec.variants_per_type);
        s.tokens[err] = partner_surface(family_idx[err], type_idx[err], v);
        s.pos_tags[err] = tag_of((family_idx[err] + 1) % spec.families);
        s.error_labels[err] = 1;
        s.gold_position = err + 1;
        out.push_back(std::move(s));
    }
    return out;
}

} // namespace wued
