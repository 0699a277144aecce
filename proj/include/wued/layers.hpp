#pragma once

#include <cstdint>
#include <vector>

#include "wued/error.hpp"
#include "wued/matrix.hpp"
#include "wued/rng.hpp"

namespace wued {

// ---------------------------------------------------------------------------
// LSTM cell
// ---------------------------------------------------------------------------

/// Gate parameters of one LSTM direction. Each W acts on the stacked
/// vector [h_prev ; x_t], so its shape is (hidden, hidden + input).
struct LstmCellParams {
    Matrix w_f, w_i, w_c, w_o; // (hidden, hidden + input)
    Matrix b_f, b_i, b_c, b_o; // (hidden, 1)

    std::size_t hidden() const { return w_f.rows(); }
    std::size_t input() const { return w_f.cols() - w_f.rows(); }
};

/// Glorot-style init: weights uniform in [-l, l] with
/// l = sqrt(6 / (fan_in + fan_out)), biases zero.
inline double glorot_limit(std::size_t fan_in, std::size_t fan_out) {
    return std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
}

inline LstmCellParams lstm_cell_init(std::size_t hidden, std::size_t input, Rng& rng) {
    LstmCellParams p;
    const double l = glorot_limit(hidden + input, hidden);
    p.w_f = rng_uniform(rng, hidden, hidden + input, l);
    p.w_i = rng_uniform(rng, hidden, hidden + input, l);
    p.w_c = rng_uniform(rng, hidden, hidden + input, l);
    p.w_o = rng_uniform(rng, hidden, hidden + input, l);
    p.b_f = Matrix(hidden, 1);
    p.b_i = Matrix(hidden, 1);
    p.b_c = Matrix(hidden, 1);
    p.b_o = Matrix(hidden, 1);
    return p;
}

/// Everything one backward step needs from the matching forward step.
struct LstmStepCache {
    Matrix x_t, h_prev, c_prev;
    Matrix f_t, i_t, o_t;   // gate activations, in (0,1)
    Matrix c_bar;           // candidate, in (-1,1)
    Matrix c_t, h_t;
};

/// Gradients mirroring LstmCellParams.
struct LstmCellGrads {
    Matrix w_f, w_i, w_c, w_o;
    Matrix b_f, b_i, b_c, b_o;
};

inline LstmCellGrads lstm_cell_zero_grads(const LstmCellParams& p) {
    LstmCellGrads g;
    g.w_f = Matrix(p.w_f.rows(), p.w_f.cols());
    g.w_i = Matrix(p.w_i.rows(), p.w_i.cols());
    g.w_c = Matrix(p.w_c.rows(), p.w_c.cols());
    g.w_o = Matrix(p.w_o.rows(), p.w_o.cols());
    g.b_f = Matrix(p.b_f.rows(), 1);
    g.b_i = Matrix(p.b_i.rows(), 1);
    g.b_c = Matrix(p.b_c.rows(), 1);
    g.b_o = Matrix(p.b_o.rows(), 1);
    return g;
}

/// One LSTM step:
///   f = sigmoid(W_f [h,x] + b_f)      i = sigmoid(W_i [h,x] + b_i)
///   c_bar = tanh(W_c [h,x] + b_c)     c = f*c_prev + i*c_bar
///   o = sigmoid(W_o [h,x] + b_o)      h = o * tanh(c)
inline LstmStepCache lstm_cell_forward(const LstmCellParams& p, const Matrix& x_t,
                                       const Matrix& h_prev, const Matrix& c_prev) {
    const std::size_t hidden = p.hidden();
    if (x_t.cols() != 1 || x_t.rows() != p.input()) {
        throw ShapeError("lstm_cell_forward: input " + x_t.shape_str() +
                         " for cell expecting " + std::to_string(p.input()) + "x1");
    }
    if (h_prev.rows() != hidden || h_prev.cols() != 1 ||
        c_prev.rows() != hidden || c_prev.cols() != 1) {
        throw ShapeError("lstm_cell_forward: state " + h_prev.shape_str() + "/" +
                         c_prev.shape_str() + " for hidden " + std::to_string(hidden));
    }

    LstmStepCache cache;
    cache.x_t = x_t;
    cache.h_prev = h_prev;
    cache.c_prev = c_prev;

    const Matrix z = vstack(h_prev, x_t);
    cache.f_t = sigmoid(add(matmul(p.w_f, z), p.b_f));
    cache.i_t = sigmoid(add(matmul(p.w_i, z), p.b_i));
    cache.c_bar = tanh_ew(add(matmul(p.w_c, z), p.b_c));
    cache.c_t = add(hadamard(cache.f_t, c_prev), hadamard(cache.i_t, cache.c_bar));
    cache.o_t = sigmoid(add(matmul(p.w_o, z), p.b_o));
    cache.h_t = hadamard(cache.o_t, tanh_ew(cache.c_t));
    return cache;
}

/// Inputs flowing out of one backward step.
struct LstmStepInputGrads {
    Matrix dx_t;
    Matrix dh_prev;
    Matrix dc_prev;
};

/// Exact gradients of one cached step. dh_t / dc_t are the upstream
/// gradients on h_t and c_t; parameter gradients accumulate into `grads`.
inline LstmStepInputGrads lstm_cell_backward(const LstmCellParams& p,
                                             const LstmStepCache& cache,
                                             const Matrix& dh_t, const Matrix& dc_t,
                                             LstmCellGrads& grads) {
    const std::size_t hidden = p.hidden();
    if (dh_t.rows() != hidden || dh_t.cols() != 1 ||
        dc_t.rows() != hidden || dc_t.cols() != 1) {
        throw ShapeError("lstm_cell_backward: upstream " + dh_t.shape_str() + "/" +
                         dc_t.shape_str() + " for hidden " + std::to_string(hidden));
    }

    const std::size_t n = hidden;
    Matrix dpre_f(n, 1), dpre_i(n, 1), dpre_c(n, 1), dpre_o(n, 1), dc_prev(n, 1);
    for (std::size_t k = 0; k < n; ++k) {
        const double f = cache.f_t.data()[k];
        const double i = cache.i_t.data()[k];
        const double o = cache.o_t.data()[k];
        const double cb = cache.c_bar.data()[k];
        const double tc = std::tanh(cache.c_t.data()[k]);

        const double dc_total = dc_t.data()[k] + dh_t.data()[k] * o * (1.0 - tc * tc);
        dpre_o.data()[k] = dh_t.data()[k] * tc * o * (1.0 - o);
        dpre_f.data()[k] = dc_total * cache.c_prev.data()[k] * f * (1.0 - f);
        dpre_i.data()[k] = dc_total * cb * i * (1.0 - i);
        dpre_c.data()[k] = dc_total * i * (1.0 - cb * cb);
        dc_prev.data()[k] = dc_total * f;
    }

    const Matrix z = vstack(cache.h_prev, cache.x_t);
    add_outer(grads.w_f, dpre_f, z);
    add_outer(grads.w_i, dpre_i, z);
    add_outer(grads.w_c, dpre_c, z);
    add_outer(grads.w_o, dpre_o, z);
    add_in_place(grads.b_f, dpre_f);
    add_in_place(grads.b_i, dpre_i);
    add_in_place(grads.b_c, dpre_c);
    add_in_place(grads.b_o, dpre_o);

    Matrix dz = matmul_ta(p.w_f, dpre_f);
    add_in_place(dz, matmul_ta(p.w_i, dpre_i));
    add_in_place(dz, matmul_ta(p.w_c, dpre_c));
    add_in_place(dz, matmul_ta(p.w_o, dpre_o));

    LstmStepInputGrads out;
    out.dh_prev = Matrix(hidden, 1);
    out.dx_t = Matrix(p.input(), 1);
    for (std::size_t k = 0; k < hidden; ++k) out.dh_prev.data()[k] = dz.data()[k];
    for (std::size_t k = 0; k < p.input(); ++k) out.dx_t.data()[k] = dz.data()[hidden + k];
    out.dc_prev = dc_prev;
    return out;
}

// ---------------------------------------------------------------------------
// Bidirectional LSTM over a sequence
// ---------------------------------------------------------------------------

struct BilstmCache {
    std::vector<LstmStepCache> fwd_steps; // time order 0..L-1
    std::vector<LstmStepCache> bwd_steps; // consumption order L-1..0
    std::vector<Matrix> outputs;          // [fwd_h_t ; bwd_h_t], 2*hidden x 1
};

/// Runs both directions from zero initial states. Output t concatenates
/// the forward state after inputs 0..t and the backward state after
/// inputs L-1..t.
inline BilstmCache bilstm_forward(const LstmCellParams& fwd, const LstmCellParams& bwd,
                                  const std::vector<Matrix>& inputs) {
    if (inputs.empty()) throw ArgError("bilstm_forward: empty input sequence");
    const std::size_t len = inputs.size();
    const std::size_t hidden = fwd.hidden();

    BilstmCache cache;
    cache.fwd_steps.reserve(len);
    cache.bwd_steps.reserve(len);

    Matrix h(hidden, 1), c(hidden, 1);
    for (std::size_t t = 0; t < len; ++t) {
        cache.fwd_steps.push_back(lstm_cell_forward(fwd, inputs[t], h, c));
        h = cache.fwd_steps.back().h_t;
        c = cache.fwd_steps.back().c_t;
    }

    h = Matrix(hidden, 1);
    c = Matrix(hidden, 1);
    for (std::size_t k = 0; k < len; ++k) {
        const std::size_t t = len - 1 - k;
        cache.bwd_steps.push_back(lstm_cell_forward(bwd, inputs[t], h, c));
        h = cache.bwd_steps.back().h_t;
        c = cache.bwd_steps.back().c_t;
    }

    cache.outputs.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
        // bwd step consuming input t sits at index len-1-t.
        cache.outputs.push_back(vstack(cache.fwd_steps[t].h_t,
                                       cache.bwd_steps[len - 1 - t].h_t));
    }
    return cache;
}

/// Backward through both directions. d_outputs[t] is the upstream gradient
/// on the concatenated output at position t. Returns per-position input
/// gradients; parameter gradients accumulate into fwd_grads / bwd_grads.
inline std::vector<Matrix> bilstm_backward(const LstmCellParams& fwd,
                                           const LstmCellParams& bwd,
                                           const BilstmCache& cache,
                                           const std::vector<Matrix>& d_outputs,
                                           LstmCellGrads& fwd_grads,
                                           LstmCellGrads& bwd_grads) {
    const std::size_t len = cache.outputs.size();
    if (d_outputs.size() != len) {
        throw ShapeError("bilstm_backward: " + std::to_string(d_outputs.size()) +
                         " upstream gradients for length " + std::to_string(len));
    }
    const std::size_t hidden = fwd.hidden();

    std::vector<Matrix> d_inputs(len);

    // Forward direction, walked back from the last step.
    Matrix dh(hidden, 1), dc(hidden, 1);
    for (std::size_t k = 0; k < len; ++k) {
        const std::size_t t = len - 1 - k;
        Matrix dh_t = dh;
        for (std::size_t j = 0; j < hidden; ++j) dh_t.data()[j] += d_outputs[t](j, 0);
        auto in = lstm_cell_backward(fwd, cache.fwd_steps[t], dh_t, dc, fwd_grads);
        d_inputs[t] = in.dx_t;
        dh = in.dh_prev;
        dc = in.dc_prev;
    }

    // Backward direction: its last consumed input is position 0.
    dh = Matrix(hidden, 1);
    dc = Matrix(hidden, 1);
    for (std::size_t t = 0; t < len; ++t) {
        // step that consumed input t
        const LstmStepCache& step = cache.bwd_steps[len - 1 - t];
        Matrix dh_t = dh;
        for (std::size_t j = 0; j < hidden; ++j) {
            dh_t.data()[j] += d_outputs[t](hidden + j, 0);
        }
        auto in = lstm_cell_backward(bwd, step, dh_t, dc, bwd_grads);
        add_in_place(d_inputs[t], in.dx_t);
        dh = in.dh_prev;
        dc = in.dc_prev;
    }
    return d_inputs;
}

// ---------------------------------------------------------------------------
// Embedding table
// ---------------------------------------------------------------------------

/// Row-per-id embedding table; row 0 is PAD by convention and its
/// gradient is always forced to zero.
struct EmbeddingTable {
    Matrix vectors; // (vocab_size, dim)
    bool trainable = true;

    std::size_t vocab_size() const { return vectors.rows(); }
    std::size_t dim() const { return vectors.cols(); }
};

inline EmbeddingTable embedding_init(std::size_t vocab_size, std::size_t dim, Rng& rng) {
    EmbeddingTable t;
    t.vectors = rng_uniform(rng, vocab_size, dim, glorot_limit(vocab_size, dim));
    // PAD row stays zero.
    for (std::size_t c = 0; c < dim; ++c) t.vectors(0, c) = 0.0;
    return t;
}

inline Matrix embedding_row(const EmbeddingTable& table, std::uint32_t id) {
    if (id >= table.vocab_size()) {
        throw IndexError("embedding lookup: id " + std::to_string(id) +
                         " out of range " + std::to_string(table.vocab_size()));
    }
    Matrix out(table.dim(), 1);
    for (std::size_t c = 0; c < table.dim(); ++c) out.data()[c] = table.vectors(id, c);
    return out;
}

inline std::vector<Matrix> embedding_lookup(const EmbeddingTable& table,
                                            const std::vector<std::uint32_t>& ids) {
    std::vector<Matrix> out;
    out.reserve(ids.size());
    for (std::uint32_t id : ids) out.push_back(embedding_row(table, id));
    return out;
}

/// Accumulates per-row gradients; duplicate ids accumulate, PAD row is
/// zeroed afterwards.
inline void embedding_backward(const EmbeddingTable& table,
                               const std::vector<std::uint32_t>& ids,
                               const std::vector<Matrix>& d_rows, Matrix& grad) {
    if (ids.size() != d_rows.size()) {
        throw ShapeError("embedding_backward: " + std::to_string(ids.size()) +
                         " ids vs " + std::to_string(d_rows.size()) + " gradients");
    }
    if (grad.rows() != table.vocab_size() || grad.cols() != table.dim()) {
        throw ShapeError("embedding_backward: grad " + grad.shape_str() +
                         " for table " + table.vectors.shape_str());
    }
    for (std::size_t k = 0; k < ids.size(); ++k) {
        const std::uint32_t id = ids[k];
        if (id >= table.vocab_size()) {
            throw IndexError("embedding_backward: id " + std::to_string(id) +
                             " out of range " + std::to_string(table.vocab_size()));
        }
        for (std::size_t c = 0; c < table.dim(); ++c) grad(id, c) += d_rows[k](c, 0);
    }
    for (std::size_t c = 0; c < table.dim(); ++c) grad(0, c) = 0.0;
}

// ---------------------------------------------------------------------------
// Linear layer
// ---------------------------------------------------------------------------

struct LinearParams {
    Matrix w; // (out, in)
    Matrix b; // (out, 1)

    std::size_t out_dim() const { return w.rows(); }
    std::size_t in_dim() const { return w.cols(); }
};

inline LinearParams linear_init(std::size_t out_dim, std::size_t in_dim, Rng& rng) {
    LinearParams p;
    p.w = rng_uniform(rng, out_dim, in_dim, glorot_limit(in_dim, out_dim));
    p.b = Matrix(out_dim, 1);
    return p;
}

struct LinearGrads {
    Matrix w, b;
};

inline LinearGrads linear_zero_grads(const LinearParams& p) {
    return LinearGrads{Matrix(p.w.rows(), p.w.cols()), Matrix(p.b.rows(), 1)};
}

inline Matrix linear_forward(const LinearParams& p, const Matrix& h) {
    return add(matmul(p.w, h), p.b);
}

/// dW = dy h^T, db = dy; returns dh = W^T dy.
inline Matrix linear_backward(const LinearParams& p, const Matrix& h,
                              const Matrix& dy, LinearGrads& grads) {
    if (dy.rows() != p.out_dim() || dy.cols() != 1) {
        throw ShapeError("linear_backward: dy " + dy.shape_str() + " for out " +
                         std::to_string(p.out_dim()));
    }
    add_outer(grads.w, dy, h);
    add_in_place(grads.b, dy);
    return matmul_ta(p.w, dy);
}

} // namespace wued
