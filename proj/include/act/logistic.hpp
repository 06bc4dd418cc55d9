#pragma once

#include <cmath>
#include <cstddef>
#include <span>
#include <vector>

#include "act/core.hpp"
#include "act/errors.hpp"

namespace act {

// Plain full-batch gradient descent on the mean cross-entropy, no
// regularization. Hyperparameters are fixed constants so fits are
// reproducible; they are echoed into map-file metadata.
struct LogisticConfig {
    int epochs = 500;
    double step = 0.1;
};

struct LogisticModel {
    std::vector<double> weights;
    double bias = 0.0;

    double logit(std::span<const double> x) const {
        double z = bias;
        for (std::size_t i = 0; i < weights.size(); ++i) z += weights[i] * x[i];
        return z;
    }
    bool predict(std::span<const double> x) const { return logit(x) >= 0.0; }
};

inline double sigmoid(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// Binary fit with `pos` labeled 1 and `neg` labeled 0. Deterministic: zero
// init, fixed epoch count. Throws degenerate_classifier if no direction
// emerges (identical classes leave the gradient at zero).
inline LogisticModel fit_logistic(const Matrix& neg, const Matrix& pos,
                                  const LogisticConfig& cfg = {}) {
    if (neg.cols() != pos.cols()) throw invalid_input("fit_logistic: feature width mismatch");
    if (neg.rows() == 0 || pos.rows() == 0) throw invalid_input("fit_logistic: empty class");
    const std::size_t m = neg.cols();
    const std::size_t n = neg.rows() + pos.rows();

    LogisticModel model;
    model.weights.assign(m, 0.0);

    std::vector<double> grad_w(m);
    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        std::fill(grad_w.begin(), grad_w.end(), 0.0);
        double grad_b = 0.0;
        auto accumulate = [&](const Matrix& cls, double label) {
            for (std::size_t r = 0; r < cls.rows(); ++r) {
                auto x = cls.row(r);
                const double err = sigmoid(model.logit(x)) - label;
                for (std::size_t c = 0; c < m; ++c) grad_w[c] += err * x[c];
                grad_b += err;
            }
        };
        accumulate(neg, 0.0);
        accumulate(pos, 1.0);
        const double scale = cfg.step / static_cast<double>(n);
        for (std::size_t c = 0; c < m; ++c) model.weights[c] -= scale * grad_w[c];
        model.bias -= scale * grad_b;
    }

    double norm2 = 0.0;
    for (double w : model.weights) norm2 += w * w;
    if (!(norm2 > 1e-24))
        throw degenerate_classifier("fit_logistic: classifier found no direction");
    return model;
}

}  // namespace act
