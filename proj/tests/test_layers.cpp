#include <catch2/catch_amalgamated.hpp>

#include <cmath>
#include <vector>

#include "test_helpers.hpp"
#include "wued/layers.hpp"

using namespace wued;

namespace {

// Straight-line transcription of one LSTM step, kept independent of the
// library path: plain loops, no Matrix helpers.
void oracle_lstm_step(const LstmCellParams& p, const std::vector<double>& x,
                      const std::vector<double>& h_prev, const std::vector<double>& c_prev,
                      std::vector<double>& h_out, std::vector<double>& c_out) {
    const std::size_t hidden = p.hidden();
    const std::size_t input = p.input();
    std::vector<double> z(hidden + input);
    for (std::size_t k = 0; k < hidden; ++k) z[k] = h_prev[k];
    for (std::size_t k = 0; k < input; ++k) z[hidden + k] = x[k];

    auto affine = [&](const Matrix& w, const Matrix& b, std::size_t row) {
        double acc = b(row, 0);
        for (std::size_t c = 0; c < w.cols(); ++c) acc += w(row, c) * z[c];
        return acc;
    };
    auto sig = [](double v) { return 1.0 / (1.0 + std::exp(-v)); };

    h_out.resize(hidden);
    c_out.resize(hidden);
    for (std::size_t r = 0; r < hidden; ++r) {
        const double f = sig(affine(p.w_f, p.b_f, r));
        const double i = sig(affine(p.w_i, p.b_i, r));
        const double cb = std::tanh(affine(p.w_c, p.b_c, r));
        const double c = f * c_prev[r] + i * cb;
        const double o = sig(affine(p.w_o, p.b_o, r));
        c_out[r] = c;
        h_out[r] = o * std::tanh(c);
    }
}

LstmCellParams small_cell(std::size_t hidden, std::size_t input, std::uint64_t seed,
                          double limit = 0.4) {
    Rng rng(seed);
    LstmCellParams p;
    p.w_f = rng_uniform(rng, hidden, hidden + input, limit);
    p.w_i = rng_uniform(rng, hidden, hidden + input, limit);
    p.w_c = rng_uniform(rng, hidden, hidden + input, limit);
    p.w_o = rng_uniform(rng, hidden, hidden + input, limit);
    p.b_f = rng_uniform(rng, hidden, 1, limit);
    p.b_i = rng_uniform(rng, hidden, 1, limit);
    p.b_c = rng_uniform(rng, hidden, 1, limit);
    p.b_o = rng_uniform(rng, hidden, 1, limit);
    return p;
}

LstmCellParams zero_cell(std::size_t hidden, std::size_t input) {
    LstmCellParams p;
    p.w_f = Matrix(hidden, hidden + input);
    p.w_i = Matrix(hidden, hidden + input);
    p.w_c = Matrix(hidden, hidden + input);
    p.w_o = Matrix(hidden, hidden + input);
    p.b_f = Matrix(hidden, 1);
    p.b_i = Matrix(hidden, 1);
    p.b_c = Matrix(hidden, 1);
    p.b_o = Matrix(hidden, 1);
    return p;
}

// Scalar probe loss over one LSTM step so that every h/c entry gets a
// distinct upstream weight.
double cell_probe_loss(const LstmCellParams& p, const Matrix& x, const Matrix& h0,
                       const Matrix& c0, const Matrix& wh, const Matrix& wc) {
    LstmStepCache cache = lstm_cell_forward(p, x, h0, c0);
    double loss = 0.0;
    for (std::size_t k = 0; k < cache.h_t.size(); ++k) {
        loss += wh.data()[k] * cache.h_t.data()[k] + wc.data()[k] * cache.c_t.data()[k];
    }
    return loss;
}

} // namespace

TEST_CASE("lstm cell with zero params and zero state gives zero outputs") {
    LstmCellParams p = zero_cell(3, 2);
    Matrix x(2, 1, {1.5, -0.7});
    Matrix h0(3, 1), c0(3, 1);
    LstmStepCache cache = lstm_cell_forward(p, x, h0, c0);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(cache.h_t.data()[k] == 0.0);
        REQUIRE(cache.c_t.data()[k] == 0.0);
        REQUIRE(cache.f_t.data()[k] == 0.5);
        REQUIRE(cache.i_t.data()[k] == 0.5);
    }
}

TEST_CASE("lstm cell with zero params halves the previous cell state") {
    LstmCellParams p = zero_cell(3, 2);
    Matrix x(2, 1, {0.3, 0.9});
    Matrix h0(3, 1);
    Matrix c0(3, 1, {1.0, -2.0, 0.5});
    LstmStepCache cache = lstm_cell_forward(p, x, h0, c0);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(cache.c_t.data()[k] == 0.5 * c0.data()[k]);
    }
}

TEST_CASE("lstm cell forward matches the straight-line oracle") {
    LstmCellParams p = small_cell(3, 2, 101);
    Rng rng(55);
    std::vector<double> x = {0.4, -1.1};
    std::vector<double> h_prev = {0.2, -0.3, 0.8};
    std::vector<double> c_prev = {-0.5, 0.7, 0.1};
    Matrix mx(2, 1, x), mh(3, 1, h_prev), mc(3, 1, c_prev);

    LstmStepCache cache = lstm_cell_forward(p, mx, mh, mc);
    std::vector<double> h_ref, c_ref;
    oracle_lstm_step(p, x, h_prev, c_prev, h_ref, c_ref);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE_THAT(cache.h_t.data()[k], Catch::Matchers::WithinAbs(h_ref[k], 1e-14));
        REQUIRE_THAT(cache.c_t.data()[k], Catch::Matchers::WithinAbs(c_ref[k], 1e-14));
    }
    // gates live in their ranges
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(cache.f_t.data()[k] > 0.0);
        REQUIRE(cache.f_t.data()[k] < 1.0);
        REQUIRE(std::abs(cache.c_bar.data()[k]) < 1.0);
    }
}

TEST_CASE("lstm cell backward with zero upstream gives zero gradients") {
    LstmCellParams p = small_cell(4, 3, 7);
    Rng rng(8);
    Matrix x = testutil::random_matrix(rng, 3, 1);
    Matrix h0 = testutil::random_matrix(rng, 4, 1);
    Matrix c0 = testutil::random_matrix(rng, 4, 1);
    LstmStepCache cache = lstm_cell_forward(p, x, h0, c0);

    LstmCellGrads grads = lstm_cell_zero_grads(p);
    Matrix dh(4, 1), dc(4, 1);
    auto in = lstm_cell_backward(p, cache, dh, dc, grads);
    for (std::size_t k = 0; k < grads.w_f.size(); ++k) REQUIRE(grads.w_f.data()[k] == 0.0);
    for (std::size_t k = 0; k < grads.b_o.size(); ++k) REQUIRE(grads.b_o.data()[k] == 0.0);
    for (std::size_t k = 0; k < in.dx_t.size(); ++k) REQUIRE(in.dx_t.data()[k] == 0.0);
    for (std::size_t k = 0; k < in.dh_prev.size(); ++k) REQUIRE(in.dh_prev.data()[k] == 0.0);
    for (std::size_t k = 0; k < in.dc_prev.size(); ++k) REQUIRE(in.dc_prev.data()[k] == 0.0);
}

TEST_CASE("lstm cell parameter gradients match central finite differences") {
    LstmCellParams p = small_cell(4, 3, 21);
    Rng rng(22);
    Matrix x = testutil::random_matrix(rng, 3, 1);
    Matrix h0 = testutil::random_matrix(rng, 4, 1, 0.5);
    Matrix c0 = testutil::random_matrix(rng, 4, 1, 0.5);
    Matrix wh = testutil::random_matrix(rng, 4, 1);
    Matrix wc = testutil::random_matrix(rng, 4, 1);

    LstmStepCache cache = lstm_cell_forward(p, x, h0, c0);
    LstmCellGrads grads = lstm_cell_zero_grads(p);
    lstm_cell_backward(p, cache, wh, wc, grads);

    auto loss = [&]() { return cell_probe_loss(p, x, h0, c0, wh, wc); };
    std::vector<std::pair<Matrix*, Matrix*>> pairs = {
        {&p.w_f, &grads.w_f}, {&p.w_i, &grads.w_i}, {&p.w_c, &grads.w_c},
        {&p.w_o, &grads.w_o}, {&p.b_f, &grads.b_f}, {&p.b_i, &grads.b_i},
        {&p.b_c, &grads.b_c}, {&p.b_o, &grads.b_o}};
    for (auto& [param, grad] : pairs) {
        Matrix fd = testutil::finite_diff(*param, loss, 1e-5);
        REQUIRE(testutil::max_grad_mismatch(*grad, fd, 1e-6) < 1e-6);
    }
}

TEST_CASE("lstm cell input gradients match finite differences") {
    LstmCellParams p = small_cell(4, 3, 31);
    Rng rng(32);
    Matrix x = testutil::random_matrix(rng, 3, 1);
    Matrix h0 = testutil::random_matrix(rng, 4, 1, 0.5);
    Matrix c0 = testutil::random_matrix(rng, 4, 1, 0.5);
    Matrix wh = testutil::random_matrix(rng, 4, 1);
    Matrix wc = testutil::random_matrix(rng, 4, 1);

    LstmStepCache cache = lstm_cell_forward(p, x, h0, c0);
    LstmCellGrads grads = lstm_cell_zero_grads(p);
    auto in = lstm_cell_backward(p, cache, wh, wc, grads);

    auto loss = [&]() { return cell_probe_loss(p, x, h0, c0, wh, wc); };
    REQUIRE(testutil::max_grad_mismatch(in.dx_t, testutil::finite_diff(x, loss), 1e-6) < 1e-6);
    REQUIRE(testutil::max_grad_mismatch(in.dh_prev, testutil::finite_diff(h0, loss), 1e-6) < 1e-6);
    REQUIRE(testutil::max_grad_mismatch(in.dc_prev, testutil::finite_diff(c0, loss), 1e-6) < 1e-6);
}

TEST_CASE("dc_prev equals the hand-derived chain rule expression") {
    LstmCellParams p = small_cell(5, 2, 41);
    Rng rng(42);
    Matrix x = testutil::random_matrix(rng, 2, 1);
    Matrix h0 = testutil::random_matrix(rng, 5, 1, 0.5);
    Matrix c0 = testutil::random_matrix(rng, 5, 1, 0.5);
    Matrix dh = testutil::random_matrix(rng, 5, 1);
    Matrix dc = testutil::random_matrix(rng, 5, 1);

    LstmStepCache cache = lstm_cell_forward(p, x, h0, c0);
    LstmCellGrads grads = lstm_cell_zero_grads(p);
    auto in = lstm_cell_backward(p, cache, dh, dc, grads);

    for (std::size_t k = 0; k < 5; ++k) {
        const double tc = std::tanh(cache.c_t.data()[k]);
        const double expect = cache.f_t.data()[k] *
            (dc.data()[k] + dh.data()[k] * cache.o_t.data()[k] * (1.0 - tc * tc));
        REQUIRE_THAT(in.dc_prev.data()[k], Catch::Matchers::WithinAbs(expect, 1e-14));
    }
}

TEST_CASE("bilstm on a length-1 sequence concatenates two one-step states") {
    LstmCellParams fwd = small_cell(3, 2, 51);
    LstmCellParams bwd = small_cell(3, 2, 52);
    Rng rng(53);
    Matrix x = testutil::random_matrix(rng, 2, 1);
    BilstmCache cache = bilstm_forward(fwd, bwd, {x});
    REQUIRE(cache.outputs.size() == 1);
    REQUIRE(cache.outputs[0].rows() == 6);

    Matrix h0(3, 1), c0(3, 1);
    LstmStepCache f = lstm_cell_forward(fwd, x, h0, c0);
    LstmStepCache b = lstm_cell_forward(bwd, x, h0, c0);
    for (std::size_t k = 0; k < 3; ++k) {
        REQUIRE(cache.outputs[0](k, 0) == f.h_t.data()[k]);
        REQUIRE(cache.outputs[0](3 + k, 0) == b.h_t.data()[k]);
    }
}

TEST_CASE("bilstm rejects an empty sequence") {
    LstmCellParams fwd = small_cell(3, 2, 54);
    LstmCellParams bwd = small_cell(3, 2, 55);
    REQUIRE_THROWS_AS(bilstm_forward(fwd, bwd, {}), ArgError);
}

TEST_CASE("reversing the input swaps the directions' roles") {
    LstmCellParams cell = small_cell(3, 2, 61);
    Rng rng(62);
    std::vector<Matrix> inputs;
    for (int t = 0; t < 5; ++t) inputs.push_back(testutil::random_matrix(rng, 2, 1));
    std::vector<Matrix> reversed(inputs.rbegin(), inputs.rend());

    // Same cell params on both sides isolates the direction bookkeeping.
    BilstmCache orig = bilstm_forward(cell, cell, inputs);
    BilstmCache rev = bilstm_forward(cell, cell, reversed);

    const std::size_t L = inputs.size();
    for (std::size_t t = 0; t < L; ++t) {
        for (std::size_t k = 0; k < 3; ++k) {
            // forward state on reversed input at position t == backward state
            // on the original input at position L-1-t
            REQUIRE(rev.outputs[t](k, 0) == orig.outputs[L - 1 - t](3 + k, 0));
        }
    }
}

TEST_CASE("bilstm matches a naive two-pass oracle on a length-4 sequence") {
    LstmCellParams fwd = small_cell(3, 2, 71);
    LstmCellParams bwd = small_cell(3, 2, 72);
    Rng rng(73);
    std::vector<Matrix> inputs;
    for (int t = 0; t < 4; ++t) inputs.push_back(testutil::random_matrix(rng, 2, 1));

    BilstmCache cache = bilstm_forward(fwd, bwd, inputs);

    // explicit forward loop
    Matrix h(3, 1), c(3, 1);
    std::vector<Matrix> fh;
    for (const Matrix& x : inputs) {
        LstmStepCache s = lstm_cell_forward(fwd, x, h, c);
        h = s.h_t;
        c = s.c_t;
        fh.push_back(h);
    }
    // explicit reversed loop
    h = Matrix(3, 1);
    c = Matrix(3, 1);
    std::vector<Matrix> bh(4);
    for (int t = 3; t >= 0; --t) {
        LstmStepCache s = lstm_cell_forward(bwd, inputs[static_cast<std::size_t>(t)], h, c);
        h = s.h_t;
        c = s.c_t;
        bh[static_cast<std::size_t>(t)] = h;
    }
    for (std::size_t t = 0; t < 4; ++t) {
        REQUIRE(cache.outputs[t].rows() == 6);
        for (std::size_t k = 0; k < 3; ++k) {
            REQUIRE(cache.outputs[t](k, 0) == fh[t](k, 0));
            REQUIRE(cache.outputs[t](3 + k, 0) == bh[t](k, 0));
        }
    }
}

TEST_CASE("bilstm gradients match finite differences through a sequence") {
    LstmCellParams fwd = small_cell(3, 2, 81, 0.3);
    LstmCellParams bwd = small_cell(3, 2, 82, 0.3);
    Rng rng(83);
    std::vector<Matrix> inputs;
    for (int t = 0; t < 4; ++t) inputs.push_back(testutil::random_matrix(rng, 2, 1));
    std::vector<Matrix> probe;
    for (int t = 0; t < 4; ++t) probe.push_back(testutil::random_matrix(rng, 6, 1));

    auto loss = [&]() {
        BilstmCache c = bilstm_forward(fwd, bwd, inputs);
        double acc = 0.0;
        for (std::size_t t = 0; t < 4; ++t) {
            for (std::size_t k = 0; k < 6; ++k) acc += probe[t](k, 0) * c.outputs[t](k, 0);
        }
        return acc;
    };

    BilstmCache cache = bilstm_forward(fwd, bwd, inputs);
    LstmCellGrads fg = lstm_cell_zero_grads(fwd);
    LstmCellGrads bg = lstm_cell_zero_grads(bwd);
    std::vector<Matrix> d_in = bilstm_backward(fwd, bwd, cache, probe, fg, bg);

    REQUIRE(testutil::max_grad_mismatch(fg.w_f, testutil::finite_diff(fwd.w_f, loss)) < 1e-4);
    REQUIRE(testutil::max_grad_mismatch(fg.b_c, testutil::finite_diff(fwd.b_c, loss)) < 1e-4);
    REQUIRE(testutil::max_grad_mismatch(bg.w_o, testutil::finite_diff(bwd.w_o, loss)) < 1e-4);
    REQUIRE(testutil::max_grad_mismatch(bg.b_i, testutil::finite_diff(bwd.b_i, loss)) < 1e-4);
    for (std::size_t t = 0; t < 4; ++t) {
        REQUIRE(testutil::max_grad_mismatch(d_in[t], testutil::finite_diff(inputs[t], loss)) < 1e-4);
    }
}

TEST_CASE("embedding duplicate ids accumulate row gradients") {
    Rng rng(91);
    EmbeddingTable table;
    table.vectors = testutil::random_matrix(rng, 5, 3);
    std::vector<std::uint32_t> ids = {2, 2};
    Matrix g1 = testutil::random_matrix(rng, 3, 1);
    Matrix g2 = testutil::random_matrix(rng, 3, 1);

    Matrix grad(5, 3);
    embedding_backward(table, ids, {g1, g2}, grad);
    for (std::size_t c = 0; c < 3; ++c) {
        REQUIRE(grad(2, c) == g1(c, 0) + g2(c, 0));
    }
    for (std::size_t r = 0; r < 5; ++r) {
        if (r == 2) continue;
        for (std::size_t c = 0; c < 3; ++c) REQUIRE(grad(r, c) == 0.0);
    }
}

TEST_CASE("embedding zero upstream gives zero table gradient") {
    Rng rng(92);
    EmbeddingTable table;
    table.vectors = testutil::random_matrix(rng, 5, 3);
    std::vector<std::uint32_t> ids = {1, 3, 4};
    std::vector<Matrix> zeros(3, Matrix(3, 1));
    Matrix grad(5, 3);
    embedding_backward(table, ids, zeros, grad);
    for (std::size_t k = 0; k < grad.size(); ++k) REQUIRE(grad.data()[k] == 0.0);
}

TEST_CASE("embedding gradient matches finite differences of a scalar loss") {
    Rng rng(93);
    EmbeddingTable table;
    table.vectors = testutil::random_matrix(rng, 5, 3);
    std::vector<std::uint32_t> ids = {1, 4, 1, 2};
    std::vector<Matrix> probe;
    for (std::size_t k = 0; k < ids.size(); ++k) {
        probe.push_back(testutil::random_matrix(rng, 3, 1));
    }

    auto loss = [&]() {
        double acc = 0.0;
        std::vector<Matrix> rows = embedding_lookup(table, ids);
        for (std::size_t k = 0; k < ids.size(); ++k) {
            for (std::size_t c = 0; c < 3; ++c) acc += probe[k](c, 0) * rows[k](c, 0);
        }
        return acc;
    };

    Matrix grad(5, 3);
    embedding_backward(table, ids, probe, grad);
    Matrix fd = testutil::finite_diff(table.vectors, loss);
    // PAD row (0) is never looked up here, so FD there is zero too.
    REQUIRE(testutil::max_grad_mismatch(grad, fd) < 1e-6);
}

TEST_CASE("embedding rejects out-of-range ids") {
    EmbeddingTable table;
    table.vectors = Matrix(4, 2);
    REQUIRE_THROWS_AS(embedding_lookup(table, {4}), IndexError);
}

TEST_CASE("linear layer identity and bias-only cases") {
    LinearParams p;
    p.w = Matrix(3, 3);
    for (std::size_t i = 0; i < 3; ++i) p.w(i, i) = 1.0;
    p.b = Matrix(3, 1);
    Matrix h(3, 1, {1.0, -2.0, 0.25});
    Matrix y = linear_forward(p, h);
    for (std::size_t k = 0; k < 3; ++k) REQUIRE(y.data()[k] == h.data()[k]);

    Rng rng(94);
    LinearParams q = linear_init(4, 3, rng);
    q.b = testutil::random_matrix(rng, 4, 1);
    Matrix zero(3, 1);
    Matrix yb = linear_forward(q, zero);
    for (std::size_t k = 0; k < 4; ++k) REQUIRE(yb.data()[k] == q.b.data()[k]);
}

TEST_CASE("linear gradients match finite differences on a 4x6 layer") {
    Rng rng(95);
    LinearParams p = linear_init(4, 6, rng);
    Matrix h = testutil::random_matrix(rng, 6, 1);
    Matrix probe = testutil::random_matrix(rng, 4, 1);

    auto loss = [&]() {
        Matrix y = linear_forward(p, h);
        double acc = 0.0;
        for (std::size_t k = 0; k < 4; ++k) acc += probe(k, 0) * y(k, 0);
        return acc;
    };

    LinearGrads grads = linear_zero_grads(p);
    Matrix dh = linear_backward(p, h, probe, grads);
    REQUIRE(testutil::max_grad_mismatch(grads.w, testutil::finite_diff(p.w, loss)) < 1e-6);
    REQUIRE(testutil::max_grad_mismatch(grads.b, testutil::finite_diff(p.b, loss)) < 1e-6);
    REQUIRE(testutil::max_grad_mismatch(dh, testutil::finite_diff(h, loss)) < 1e-6);
}
