#pragma once

#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "act/core.hpp"
#include "act/errors.hpp"
#include "act/logistic.hpp"
#include "act/metrics.hpp"
#include "act/transport.hpp"

namespace act {

// Prior steering methods expressed in the unified affine form. Every one of
// them emits AffineMap1D values, so a single application code path serves all
// methods. The strength parameter of these baselines multiplies the bias
// (LambdaSemantics::bias_multiplier) rather than interpolating.
enum class BaselineKind { actadd, caa_itim, iti_c, aura, detzero };

inline const char* to_string(BaselineKind k) {
    switch (k) {
        case BaselineKind::actadd: return "actadd";
        case BaselineKind::caa_itim: return "caa";
        case BaselineKind::iti_c: return "iti_c";
        case BaselineKind::aura: return "aura";
        case BaselineKind::detzero: return "detzero";
    }
    return "caa";
}

// Contrast-pair bias from a single (a+, a-) pair: beta = a+ - a-. The maps
// keep omega = 1 and unbounded support.
inline std::vector<double> actadd_bias(std::span<const double> a_plus,
                                       std::span<const double> a_minus) {
    if (a_plus.size() != a_minus.size()) throw invalid_input("actadd_bias: length mismatch");
    if (a_plus.empty()) throw invalid_input("actadd_bias: empty contrast pair");
    std::vector<double> beta(a_plus.size());
    for (std::size_t m = 0; m < beta.size(); ++m) beta[m] = a_plus[m] - a_minus[m];
    return beta;
}

// Mean-difference bias: beta_m = mean(B_m) - mean(A_m). Covers both CAA and
// ITI-m, which share the formula.
inline std::vector<double> caa_bias(const ActivationMatrix& src, const ActivationMatrix& tgt) {
    if (src.width() != tgt.width()) throw invalid_input("caa_bias: width mismatch");
    std::vector<double> beta(src.width());
    for (std::size_t m = 0; m < beta.size(); ++m) {
        auto a = src.data.col(m);
        auto b = tgt.data.col(m);
        beta[m] = mean_of(b) - mean_of(a);
    }
    return beta;
}

// Classifier-direction bias: fit the shared logistic probe labeling tgt as 1,
// normalize the weight vector, orient it from src toward tgt, and scale by
// the standard deviation of activations projected along it.
inline std::vector<double> iti_c_bias(const ActivationMatrix& src, const ActivationMatrix& tgt,
                                      const LogisticConfig& cfg = {}) {
    if (src.width() != tgt.width()) throw invalid_input("iti_c_bias: width mismatch");
    if (src.samples() < 4 || tgt.samples() < 4)
        throw invalid_input("iti_c_bias: need n >= 4 per class");

    LogisticModel model = fit_logistic(src.data, tgt.data, cfg);

    double norm = 0.0;
    for (double w : model.weights) norm += w * w;
    norm = std::sqrt(norm);
    std::vector<double> dir(model.weights);
    for (double& w : dir) w /= norm;

    auto project = [&](const Matrix& rows, std::vector<double>& out) {
        for (std::size_t r = 0; r < rows.rows(); ++r) {
            double p = 0.0;
            auto x = rows.row(r);
            for (std::size_t c = 0; c < dir.size(); ++c) p += dir[c] * x[c];
            out.push_back(p);
        }
    };
    std::vector<double> proj_src, proj_tgt, proj_all;
    project(src.data, proj_src);
    project(tgt.data, proj_tgt);
    proj_all = proj_src;
    proj_all.insert(proj_all.end(), proj_tgt.begin(), proj_tgt.end());

    // Orient toward the target class.
    if (mean_of(proj_tgt) < mean_of(proj_src))
        for (double& w : dir) w = -w;

    const double sigma = stddev_pop(proj_all);
    std::vector<double> beta(dir);
    for (double& w : beta) w *= sigma;
    return beta;
}

inline std::vector<AffineMap1D> bias_to_maps(std::span<const double> beta) {
    std::vector<AffineMap1D> maps(beta.size());
    for (std::size_t m = 0; m < beta.size(); ++m) maps[m].beta = beta[m];
    return maps;
}

// Expert-neuron dampening: omega = 1 - Gini(A, B) with beta = 0, applied only
// where the activation separates the classes (AUROC > 0.5); identity
// otherwise. `src` plays the concept-positive role. Never amplifies.
inline AffineMap1D aura_map(std::span<const double> src, std::span<const double> tgt) {
    if (src.size() < 2 || tgt.size() < 2) throw invalid_input("aura_map: need n >= 2");
    const double roc = auroc(src, tgt);
    AffineMap1D map;  // identity, unbounded
    if (roc <= 0.5) return map;
    const double gini = std::clamp(2.0 * roc - 1.0, 0.0, 1.0);
    map.omega = 1.0 - gini;
    return map;
}

// Constant replacement for detector activations: omega = 0, beta = m_b where
// the activation detects the src class with AP > epsilon; identity otherwise.
inline AffineMap1D detzero_map(std::span<const double> src, std::span<const double> tgt,
                               double epsilon) {
    if (src.size() < 2 || tgt.size() < 2) throw invalid_input("detzero_map: need n >= 2");
    if (!(epsilon > 0.0 && epsilon < 1.0)) throw invalid_input("detzero_map: epsilon outside (0, 1)");
    AffineMap1D map;
    if (average_precision(src, tgt) > epsilon) {
        map.omega = 0.0;
        map.beta = mean_of(tgt);
    }
    return map;
}

}  // namespace act
