#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "wued/error.hpp"
#include "wued/matrix.hpp"
#include "wued/model.hpp"

namespace wued {

struct AdamHyper {
    double lr = 0.001;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double eps = 1e-8;
};

inline void validate(const AdamHyper& h) {
    if (!(h.lr > 0.0)) throw ArgError("AdamHyper: lr must be positive");
    if (h.beta1 < 0.0 || h.beta1 >= 1.0 || h.beta2 < 0.0 || h.beta2 >= 1.0) {
        throw ArgError("AdamHyper: betas must lie in [0, 1)");
    }
    if (!(h.eps > 0.0)) throw ArgError("AdamHyper: eps must be positive");
}

/// First and second moments per parameter, in visit_params order.
struct AdamState {
    std::vector<Matrix> m, v;
    std::uint64_t t = 0;
};

inline AdamState adam_init(ModelParams& params, const ModelConfig& cfg) {
    AdamState s;
    visit_params(params, cfg.has_aux(), [&](const std::string&, Matrix& p) {
        s.m.emplace_back(p.rows(), p.cols());
        s.v.emplace_back(p.rows(), p.cols());
    });
    return s;
}

/// Bias-corrected Adam update:
///   m <- b1 m + (1-b1) g,  v <- b2 v + (1-b2) g^2
///   theta <- theta - lr * m_hat / (sqrt(v_hat) + eps)
inline void adam_step(ModelParams& params, ModelGrads& grads, AdamState& state,
                      const AdamHyper& h, const ModelConfig& cfg) {
    validate(h);
    std::vector<Matrix*> ps, gs;
    visit_params(params, cfg.has_aux(), [&](const std::string&, Matrix& m) { ps.push_back(&m); });
    visit_grads(grads, cfg.has_aux(), [&](const std::string&, Matrix& m) { gs.push_back(&m); });
    if (ps.size() != gs.size() || ps.size() != state.m.size()) {
        throw ShapeError("adam_step: param/grad/state collections disagree");
    }

    state.t += 1;
    const double bc1 = 1.0 - std::pow(h.beta1, static_cast<double>(state.t));
    const double bc2 = 1.0 - std::pow(h.beta2, static_cast<double>(state.t));

    for (std::size_t k = 0; k < ps.size(); ++k) {
        Matrix& p = *ps[k];
        const Matrix& g = *gs[k];
        Matrix& m = state.m[k];
        Matrix& v = state.v[k];
        if (!p.same_shape(g) || !p.same_shape(m) || !p.same_shape(v)) {
            throw ShapeError("adam_step: shape mismatch at parameter " + std::to_string(k) +
                             " (" + p.shape_str() + " vs " + g.shape_str() + ")");
        }
        for (std::size_t i = 0; i < p.size(); ++i) {
            const double gi = g.data()[i];
            m.data()[i] = h.beta1 * m.data()[i] + (1.0 - h.beta1) * gi;
            v.data()[i] = h.beta2 * v.data()[i] + (1.0 - h.beta2) * gi * gi;
            const double m_hat = m.data()[i] / bc1;
            const double v_hat = v.data()[i] / bc2;
            p.data()[i] -= h.lr * m_hat / (std::sqrt(v_hat) + h.eps);
        }
    }
}

/// Global-norm gradient clipping; a no-op when max_norm <= 0.
inline double clip_grads(ModelGrads& grads, bool has_aux, double max_norm) {
    double sq = 0.0;
    visit_grads(grads, has_aux, [&](const std::string&, Matrix& m) {
        for (std::size_t i = 0; i < m.size(); ++i) sq += m.data()[i] * m.data()[i];
    });
    const double norm = std::sqrt(sq);
    if (max_norm > 0.0 && norm > max_norm) {
        const double factor = max_norm / norm;
        visit_grads(grads, has_aux, [&](const std::string&, Matrix& m) {
            for (std::size_t i = 0; i < m.size(); ++i) m.data()[i] *= factor;
        });
    }
    return norm;
}

} // namespace wued
