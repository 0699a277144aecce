#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "wued/batch.hpp"
#include "wued/error.hpp"
#include "wued/layers.hpp"
#include "wued/matrix.hpp"
#include "wued/rng.hpp"

namespace wued {

/// Architecture and loss configuration.
struct ModelConfig {
    std::size_t word_dim = 300;
    std::size_t pos_dim = 16;
    std::size_t hidden = 100;
    AuxKind aux_kind = AuxKind::none;
    std::size_t aux_classes = 0; // required > 0 iff aux_kind != none
    double lambda = 0.01;        // auxiliary loss weight
    bool embeddings_trainable = true; // word table only; POS table always trains

    bool has_aux() const { return aux_kind != AuxKind::none; }
};

inline void validate(const ModelConfig& cfg) {
    if (cfg.word_dim == 0 || cfg.hidden == 0 || cfg.pos_dim == 0) {
        throw ArgError("ModelConfig: dimensions must be positive");
    }
    if (cfg.lambda < 0.0) throw ArgError("ModelConfig: lambda must be non-negative");
    if (cfg.has_aux() && cfg.aux_classes == 0) {
        throw ArgError("ModelConfig: aux task needs a positive class count");
    }
}

/// All learnable tensors of the parallel Bi-LSTM.
///
/// The public encoder reads word embeddings only and is trained by both
/// tasks; the private encoder reads word (+) POS embeddings and serves
/// the error head alone. The error head scores the concatenation of
/// both encoders' states (4*hidden); the auxiliary head reads only the
/// public state (2*hidden).
struct ModelParams {
    EmbeddingTable word_table;
    EmbeddingTable pos_table;
    LstmCellParams public_fwd, public_bwd;
    LstmCellParams private_fwd, private_bwd;
    LinearParams error_head; // (1, 4*hidden)
    LinearParams aux_head;   // (aux_classes, 2*hidden), empty when no aux task
};

/// Draws every parameter from one rng stream in a fixed order:
/// word table, pos table, public fwd/bwd, private fwd/bwd, error head,
/// aux head. Biases start at zero.
inline ModelParams model_init(const ModelConfig& cfg, std::size_t word_vocab,
                              std::size_t pos_vocab, Rng& rng) {
    validate(cfg);
    ModelParams p;
    p.word_table = embedding_init(word_vocab, cfg.word_dim, rng);
    p.word_table.trainable = cfg.embeddings_trainable;
    p.pos_table = embedding_init(pos_vocab, cfg.pos_dim, rng);
    p.public_fwd = lstm_cell_init(cfg.hidden, cfg.word_dim, rng);
    p.public_bwd = lstm_cell_init(cfg.hidden, cfg.word_dim, rng);
    p.private_fwd = lstm_cell_init(cfg.hidden, cfg.word_dim + cfg.pos_dim, rng);
    p.private_bwd = lstm_cell_init(cfg.hidden, cfg.word_dim + cfg.pos_dim, rng);
    p.error_head = linear_init(1, 4 * cfg.hidden, rng);
    if (cfg.has_aux()) {
        p.aux_head = linear_init(cfg.aux_classes, 2 * cfg.hidden, rng);
    }
    return p;
}

/// Gradient container mirroring ModelParams shape for shape.
struct ModelGrads {
    Matrix word_table, pos_table;
    LstmCellGrads public_fwd, public_bwd, private_fwd, private_bwd;
    LinearGrads error_head, aux_head;
};

inline ModelGrads model_zero_grads(const ModelParams& p, const ModelConfig& cfg) {
    ModelGrads g;
    g.word_table = Matrix(p.word_table.vocab_size(), p.word_table.dim());
    g.pos_table = Matrix(p.pos_table.vocab_size(), p.pos_table.dim());
    g.public_fwd = lstm_cell_zero_grads(p.public_fwd);
    g.public_bwd = lstm_cell_zero_grads(p.public_bwd);
    g.private_fwd = lstm_cell_zero_grads(p.private_fwd);
    g.private_bwd = lstm_cell_zero_grads(p.private_bwd);
    g.error_head = linear_zero_grads(p.error_head);
    if (cfg.has_aux()) g.aux_head = linear_zero_grads(p.aux_head);
    return g;
}

namespace detail {

template <typename F>
void visit_cell(const std::string& prefix, Matrix& w_f, Matrix& w_i, Matrix& w_c,
                Matrix& w_o, Matrix& b_f, Matrix& b_i, Matrix& b_c, Matrix& b_o, F&& f) {
    f(prefix + ".w_f", w_f);
    f(prefix + ".w_i", w_i);
    f(prefix + ".w_c", w_c);
    f(prefix + ".w_o", w_o);
    f(prefix + ".b_f", b_f);
    f(prefix + ".b_i", b_i);
    f(prefix + ".b_c", b_c);
    f(prefix + ".b_o", b_o);
}

} // namespace detail

/// Visits every parameter matrix in the canonical order used by the
/// optimizer and the checkpoint format.
template <typename F>
void visit_params(ModelParams& p, bool has_aux, F&& f) {
    f("word_table", p.word_table.vectors);
    f("pos_table", p.pos_table.vectors);
    detail::visit_cell("public_fwd", p.public_fwd.w_f, p.public_fwd.w_i, p.public_fwd.w_c,
                       p.public_fwd.w_o, p.public_fwd.b_f, p.public_fwd.b_i,
                       p.public_fwd.b_c, p.public_fwd.b_o, f);
    detail::visit_cell("public_bwd", p.public_bwd.w_f, p.public_bwd.w_i, p.public_bwd.w_c,
                       p.public_bwd.w_o, p.public_bwd.b_f, p.public_bwd.b_i,
                       p.public_bwd.b_c, p.public_bwd.b_o, f);
    detail::visit_cell("private_fwd", p.private_fwd.w_f, p.private_fwd.w_i,
                       p.private_fwd.w_c, p.private_fwd.w_o, p.private_fwd.b_f,
                       p.private_fwd.b_i, p.private_fwd.b_c, p.private_fwd.b_o, f);
    detail::visit_cell("private_bwd", p.private_bwd.w_f, p.private_bwd.w_i,
                       p.private_bwd.w_c, p.private_bwd.w_o, p.private_bwd.b_f,
                       p.private_bwd.b_i, p.private_bwd.b_c, p.private_bwd.b_o, f);
    f("error_head.w", p.error_head.w);
    f("error_head.b", p.error_head.b);
    if (has_aux) {
        f("aux_head.w", p.aux_head.w);
        f("aux_head.b", p.aux_head.b);
    }
}

/// Same order as visit_params, over the gradient container.
template <typename F>
void visit_grads(ModelGrads& g, bool has_aux, F&& f) {
    f("word_table", g.word_table);
    f("pos_table", g.pos_table);
    detail::visit_cell("public_fwd", g.public_fwd.w_f, g.public_fwd.w_i, g.public_fwd.w_c,
                       g.public_fwd.w_o, g.public_fwd.b_f, g.public_fwd.b_i,
                       g.public_fwd.b_c, g.public_fwd.b_o, f);
    detail::visit_cell("public_bwd", g.public_bwd.w_f, g.public_bwd.w_i, g.public_bwd.w_c,
                       g.public_bwd.w_o, g.public_bwd.b_f, g.public_bwd.b_i,
                       g.public_bwd.b_c, g.public_bwd.b_o, f);
    detail::visit_cell("private_fwd", g.private_fwd.w_f, g.private_fwd.w_i,
                       g.private_fwd.w_c, g.private_fwd.w_o, g.private_fwd.b_f,
                       g.private_fwd.b_i, g.private_fwd.b_c, g.private_fwd.b_o, f);
    detail::visit_cell("private_bwd", g.private_bwd.w_f, g.private_bwd.w_i,
                       g.private_bwd.w_c, g.private_bwd.w_o, g.private_bwd.b_f,
                       g.private_bwd.b_i, g.private_bwd.b_c, g.private_bwd.b_o, f);
    f("error_head.w", g.error_head.w);
    f("error_head.b", g.error_head.b);
    if (has_aux) {
        f("aux_head.w", g.aux_head.w);
        f("aux_head.b", g.aux_head.b);
    }
}

/// Per-sentence forward record: encoder caches plus head outputs for the
/// sentence's true length. Padded positions are never run through the
/// recurrences, which keeps every result independent of pad length.
struct SentenceCache {
    std::vector<std::uint32_t> word_ids, pos_ids;
    std::vector<Matrix> word_emb, pos_emb;
    std::vector<Matrix> private_inputs; // word (+) pos per position
    BilstmCache pub, priv;
    std::vector<Matrix> h_p;         // (4*hidden, 1) per position
    std::vector<double> error_prob;  // sigmoid head output per position
    std::vector<Matrix> aux_dist;    // softmax head output per position
};

struct ForwardCache {
    std::vector<SentenceCache> sentences;
    // fingerprint for stale-cache detection
    std::size_t hidden = 0, word_dim = 0, pos_dim = 0, aux_classes = 0;
    AuxKind aux_kind = AuxKind::none;
};

namespace detail {

inline double sigmoid_scalar(double v) {
    if (v >= 0.0) return 1.0 / (1.0 + std::exp(-v));
    const double e = std::exp(v);
    return e / (1.0 + e);
}

inline Matrix softmax_col(const Matrix& logits) {
    Matrix row(1, logits.rows());
    for (std::size_t k = 0; k < logits.rows(); ++k) row(0, k) = logits(k, 0);
    Matrix sm = softmax_row(row);
    Matrix out(logits.rows(), 1);
    for (std::size_t k = 0; k < logits.rows(); ++k) out(k, 0) = sm(0, k);
    return out;
}

inline SentenceCache forward_sentence(const ModelParams& p, const ModelConfig& cfg,
                                      std::vector<std::uint32_t> word_ids,
                                      std::vector<std::uint32_t> pos_ids) {
    if (word_ids.empty() || word_ids.size() != pos_ids.size()) {
        throw ArgError("model forward: bad sentence encoding");
    }
    SentenceCache sc;
    sc.word_ids = std::move(word_ids);
    sc.pos_ids = std::move(pos_ids);
    sc.word_emb = embedding_lookup(p.word_table, sc.word_ids);
    sc.pos_emb = embedding_lookup(p.pos_table, sc.pos_ids);

    const std::size_t len = sc.word_ids.size();
    sc.private_inputs.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
        sc.private_inputs.push_back(vstack(sc.word_emb[t], sc.pos_emb[t]));
    }

    sc.pub = bilstm_forward(p.public_fwd, p.public_bwd, sc.word_emb);
    sc.priv = bilstm_forward(p.private_fwd, p.private_bwd, sc.private_inputs);

    sc.h_p.reserve(len);
    sc.error_prob.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
        sc.h_p.push_back(vstack(sc.pub.outputs[t], sc.priv.outputs[t]));
        const Matrix logit = linear_forward(p.error_head, sc.h_p[t]);
        sc.error_prob.push_back(sigmoid_scalar(logit(0, 0)));
        if (cfg.has_aux()) {
            sc.aux_dist.push_back(
                softmax_col(linear_forward(p.aux_head, sc.pub.outputs[t])));
        }
    }
    return sc;
}

} // namespace detail

/// Runs the batch through both encoders and both heads, one sentence at
/// a time up to its true length.
inline ForwardCache model_forward(const ModelParams& p, const ModelConfig& cfg,
                                  const Batch& batch) {
    validate(cfg);
    ForwardCache cache;
    cache.hidden = cfg.hidden;
    cache.word_dim = cfg.word_dim;
    cache.pos_dim = cfg.pos_dim;
    cache.aux_classes = cfg.aux_classes;
    cache.aux_kind = cfg.aux_kind;
    cache.sentences.reserve(batch.size());
    for (std::size_t i = 0; i < batch.size(); ++i) {
        const std::size_t len = batch.lengths[i];
        std::vector<std::uint32_t> wids(batch.word_ids[i].begin(),
                                        batch.word_ids[i].begin() + len);
        std::vector<std::uint32_t> pids(batch.pos_ids[i].begin(),
                                        batch.pos_ids[i].begin() + len);
        cache.sentences.push_back(
            detail::forward_sentence(p, cfg, std::move(wids), std::move(pids)));
    }
    return cache;
}

struct LossParts {
    double total = 0.0;
    double error = 0.0;
    double aux = 0.0;
};

inline constexpr double kLogClip = 1e-12;

/// Binary cross-entropy summed per sentence and averaged by its true
/// length; the auxiliary cross-entropy follows the same averaging. Both
/// are then averaged over the batch, and
///   total = error + lambda * aux
/// holds exactly as written.
inline LossParts model_loss(const ForwardCache& cache, const Batch& batch, double lambda) {
    const std::size_t n = batch.size();
    if (cache.sentences.size() != n) {
        throw ContractError("model_loss: cache holds " +
                            std::to_string(cache.sentences.size()) + " sentences, batch " +
                            std::to_string(n));
    }
    const bool has_aux = cache.aux_kind != AuxKind::none;
    double err_sum = 0.0, aux_sum = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const SentenceCache& sc = cache.sentences[i];
        const std::size_t len = batch.lengths[i];
        if (sc.error_prob.size() != len || batch.error_labels[i].size() < len ||
            (has_aux && batch.aux_labels[i].size() < len)) {
            throw DataError("model_loss: labels missing for sentence " + std::to_string(i));
        }
        double bce = 0.0, ce = 0.0;
        for (std::size_t t = 0; t < len; ++t) {
            const double y = batch.error_labels[i][t] ? 1.0 : 0.0;
            const double o = sc.error_prob[t];
            bce -= y * std::log(std::max(o, kLogClip)) +
                   (1.0 - y) * std::log(std::max(1.0 - o, kLogClip));
            if (has_aux) {
                const std::uint32_t a = batch.aux_labels[i][t];
                if (a >= cache.aux_classes) {
                    throw DataError("model_loss: aux label " + std::to_string(a) +
                                    " out of range " + std::to_string(cache.aux_classes));
                }
                ce -= std::log(std::max(sc.aux_dist[t](a, 0), kLogClip));
            }
        }
        err_sum += bce / static_cast<double>(len);
        aux_sum += ce / static_cast<double>(len);
    }
    LossParts parts;
    parts.error = err_sum / static_cast<double>(n);
    parts.aux = has_aux ? aux_sum / static_cast<double>(n) : 0.0;
    parts.total = parts.error + lambda * parts.aux;
    return parts;
}

/// Gradients of the total loss for every parameter. The auxiliary path
/// is skipped entirely when lambda is zero or no aux head exists, so
/// lambda = 0 reproduces the single-task gradients bit for bit.
inline ModelGrads model_backward(const ModelParams& p, const ModelConfig& cfg,
                                 const ForwardCache& cache, const Batch& batch,
                                 double lambda) {
    if (cache.hidden != cfg.hidden || cache.word_dim != cfg.word_dim ||
        cache.pos_dim != cfg.pos_dim || cache.aux_kind != cfg.aux_kind ||
        cache.aux_classes != cfg.aux_classes) {
        throw ContractError("model_backward: cache does not match the model config");
    }
    if (cache.sentences.size() != batch.size()) {
        throw ContractError("model_backward: cache does not match the batch");
    }
    if (p.word_table.dim() != cfg.word_dim || p.error_head.in_dim() != 4 * cfg.hidden) {
        throw ContractError("model_backward: params do not match the model config");
    }

    const std::size_t n = batch.size();
    const bool aux_active = cfg.has_aux() && lambda != 0.0;
    ModelGrads g = model_zero_grads(p, cfg);

    for (std::size_t i = 0; i < n; ++i) {
        const SentenceCache& sc = cache.sentences[i];
        const std::size_t len = batch.lengths[i];
        if (sc.error_prob.size() != len) {
            throw ContractError("model_backward: stale cache for sentence " +
                                std::to_string(i));
        }
        const double inv = 1.0 / (static_cast<double>(n) * static_cast<double>(len));

        std::vector<Matrix> d_h_pu(len), d_h_pr(len);
        for (std::size_t t = 0; t < len; ++t) {
            // main head: d(loss)/d(logit) = (o - y) * inv
            const double y = batch.error_labels[i][t] ? 1.0 : 0.0;
            Matrix dlogit(1, 1, {(sc.error_prob[t] - y) * inv});
            Matrix dh_p = linear_backward(p.error_head, sc.h_p[t], dlogit, g.error_head);

            d_h_pu[t] = Matrix(2 * cfg.hidden, 1);
            d_h_pr[t] = Matrix(2 * cfg.hidden, 1);
            for (std::size_t k = 0; k < 2 * cfg.hidden; ++k) {
                d_h_pu[t].data()[k] = dh_p(k, 0);
                d_h_pr[t].data()[k] = dh_p(2 * cfg.hidden + k, 0);
            }

            if (aux_active) {
                // aux head: lambda folded into the upstream gradient
                const std::uint32_t a = batch.aux_labels[i][t];
                Matrix dlogits(cfg.aux_classes, 1);
                for (std::size_t c = 0; c < cfg.aux_classes; ++c) {
                    dlogits(c, 0) = lambda * sc.aux_dist[t](c, 0) * inv;
                }
                dlogits(a, 0) -= lambda * inv;
                Matrix dh_pu_aux =
                    linear_backward(p.aux_head, sc.pub.outputs[t], dlogits, g.aux_head);
                add_in_place(d_h_pu[t], dh_pu_aux);
            }
        }

        std::vector<Matrix> d_word_from_pub = bilstm_backward(
            p.public_fwd, p.public_bwd, sc.pub, d_h_pu, g.public_fwd, g.public_bwd);
        std::vector<Matrix> d_priv_in = bilstm_backward(
            p.private_fwd, p.private_bwd, sc.priv, d_h_pr, g.private_fwd, g.private_bwd);

        std::vector<Matrix> d_word(len), d_pos(len);
        for (std::size_t t = 0; t < len; ++t) {
            d_word[t] = d_word_from_pub[t];
            Matrix dw_priv(cfg.word_dim, 1), dp_priv(cfg.pos_dim, 1);
            for (std::size_t k = 0; k < cfg.word_dim; ++k) {
                dw_priv.data()[k] = d_priv_in[t](k, 0);
            }
            for (std::size_t k = 0; k < cfg.pos_dim; ++k) {
                dp_priv.data()[k] = d_priv_in[t](cfg.word_dim + k, 0);
            }
            add_in_place(d_word[t], dw_priv);
            d_pos[t] = dp_priv;
        }
        embedding_backward(p.word_table, sc.word_ids, d_word, g.word_table);
        embedding_backward(p.pos_table, sc.pos_ids, d_pos, g.pos_table);
    }

    if (!p.word_table.trainable) g.word_table.fill(0.0);
    return g;
}

/// Per-token error scores of one encoded sentence, for ranking.
inline std::vector<double> predict_scores(const ModelParams& p, const ModelConfig& cfg,
                                          const std::vector<std::uint32_t>& word_ids,
                                          const std::vector<std::uint32_t>& pos_ids) {
    SentenceCache sc = detail::forward_sentence(p, cfg, word_ids, pos_ids);
    return sc.error_prob;
}

} // namespace wued
