#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <span>
#include <string>
#include <vector>

#include "act/core.hpp"
#include "act/errors.hpp"
#include "act/logistic.hpp"
#include "act/transport.hpp"

namespace act {

// Empirical 1-Wasserstein distance between two equal-size samples:
// mean |a_(i) - b_(i)| over sorted pairs. Exact for the empirical measures.
inline double wasserstein1(std::span<const double> a, std::span<const double> b) {
    if (a.size() != b.size()) throw invalid_input("wasserstein1: length mismatch");
    if (a.empty()) throw invalid_input("wasserstein1: empty input");
    std::vector<double> sa = detail::sorted_copy(a);
    std::vector<double> sb = detail::sorted_copy(b);
    double total = 0.0;
    for (std::size_t i = 0; i < sa.size(); ++i) total += std::abs(sa[i] - sb[i]);
    return total / static_cast<double>(sa.size());
}

// Fraction of (pos, neg) pairs ranked correctly, ties counted 0.5.
// Midrank formulation, O((n+m) log(n+m)).
inline double auroc(std::span<const double> pos, std::span<const double> neg) {
    if (pos.empty() || neg.empty()) throw invalid_input("auroc: empty class");
    struct Item {
        double value;
        bool is_pos;
    };
    std::vector<Item> items;
    items.reserve(pos.size() + neg.size());
    for (double v : pos) items.push_back({v, true});
    for (double v : neg) items.push_back({v, false});
    std::stable_sort(items.begin(), items.end(),
                     [](const Item& x, const Item& y) { return x.value < y.value; });

    double rank_sum_pos = 0.0;
    std::size_t i = 0;
    while (i < items.size()) {
        std::size_t j = i;
        while (j < items.size() && items[j].value == items[i].value) ++j;
        // 1-based midrank shared by the tie group [i, j).
        const double midrank = 0.5 * static_cast<double>(i + 1 + j);
        for (std::size_t k = i; k < j; ++k)
            if (items[k].is_pos) rank_sum_pos += midrank;
        i = j;
    }
    const double np = static_cast<double>(pos.size());
    const double nn = static_cast<double>(neg.size());
    return (rank_sum_pos - np * (np + 1.0) / 2.0) / (np * nn);
}

// One (score, label) observation for a ranking metric.
struct ScoredLabel {
    double score;
    bool positive;
};

// Average precision of a ranking by descending score. Ties are kept in input
// order (stable sort), so callers control tie resolution by pre-shuffling.
inline double average_precision(std::span<const ScoredLabel> items) {
    if (items.empty()) throw invalid_input("average_precision: empty input");
    std::vector<std::size_t> order(items.size());
    std::iota(order.begin(), order.end(), 0);
    std::stable_sort(order.begin(), order.end(), [&](std::size_t x, std::size_t y) {
        return items[x].score > items[y].score;
    });

    std::size_t n_pos = 0;
    for (const auto& it : items) n_pos += it.positive ? 1 : 0;
    if (n_pos == 0) throw invalid_input("average_precision: no positives");

    double ap = 0.0;
    std::size_t hits = 0;
    for (std::size_t k = 0; k < order.size(); ++k) {
        if (items[order[k]].positive) {
            ++hits;
            ap += static_cast<double>(hits) / static_cast<double>(k + 1);
        }
    }
    return ap / static_cast<double>(n_pos);
}

// Detector reading: `pos` are the concept-bearing samples and rank first on
// score ties.
inline double average_precision(std::span<const double> pos, std::span<const double> neg) {
    std::vector<ScoredLabel> items;
    items.reserve(pos.size() + neg.size());
    for (double v : pos) items.push_back({v, true});
    for (double v : neg) items.push_back({v, false});
    return average_precision(items);
}

// Balanced accuracy (mean of per-class recalls) of the shared logistic probe,
// trained on the train split and scored on the test split.
inline double probe_accuracy(const ActivationMatrix& train_pos, const ActivationMatrix& train_neg,
                             const ActivationMatrix& test_pos, const ActivationMatrix& test_neg,
                             const LogisticConfig& cfg = {}) {
    if (train_pos.samples() < 2 || train_neg.samples() < 2 || test_pos.samples() < 2 ||
        test_neg.samples() < 2)
        throw invalid_input("probe_accuracy: need n >= 2 per class per split");
    LogisticModel model = fit_logistic(train_neg.data, train_pos.data, cfg);

    auto recall = [&](const Matrix& rows, bool expected) {
        std::size_t correct = 0;
        for (std::size_t r = 0; r < rows.rows(); ++r)
            if (model.predict(rows.row(r)) == expected) ++correct;
        return static_cast<double>(correct) / static_cast<double>(rows.rows());
    };
    return 0.5 * (recall(test_pos.data, true) + recall(test_neg.data, false));
}

// Per-layer evaluation of one intervention strength.
struct LayerEval {
    int layer_id = 0;
    double w1_before = 0.0;
    double w1_after = 0.0;
};

struct EvalReport {
    std::string method;
    LambdaSemantics lambda_semantics = LambdaSemantics::interpolation;
    double lambda = 1.0;
    std::vector<LayerEval> layers;
    double probe_before = 0.0;
    double probe_after = 0.0;
};

}  // namespace act
