#pragma once

#include <algorithm>
#include <span>
#include <vector>

#include "act/core.hpp"
#include "act/errors.hpp"
#include "act/metrics.hpp"
#include "act/model.hpp"
#include "act/pipeline.hpp"

namespace act {

// Mean over activations of the univariate W1 between two matched matrices.
inline double mean_w1(const Matrix& a, const Matrix& b) {
    if (a.cols() != b.cols()) throw invalid_input("mean_w1: width mismatch");
    double total = 0.0;
    for (std::size_t m = 0; m < a.cols(); ++m) total += wasserstein1(a.col(m), b.col(m));
    return total / static_cast<double>(a.cols());
}

namespace detail {

struct SplitHalves {
    Matrix train;
    Matrix test;
};

inline SplitHalves split_rows(const Matrix& m) {
    const std::size_t half = m.rows() / 2;
    SplitHalves out{Matrix(half, m.cols()), Matrix(m.rows() - half, m.cols())};
    for (std::size_t r = 0; r < half; ++r) {
        auto src = m.row(r);
        std::copy(src.begin(), src.end(), out.train.row(r).begin());
    }
    for (std::size_t r = half; r < m.rows(); ++r) {
        auto src = m.row(r);
        std::copy(src.begin(), src.end(), out.test.row(r - half).begin());
    }
    return out;
}

}  // namespace detail

// Balanced probe accuracy distinguishing the two activation matrices, with a
// deterministic first-half/second-half train/test split.
inline double split_probe_accuracy(const Matrix& pos, const Matrix& neg,
                                   const LogisticConfig& cfg = {}) {
    if (pos.rows() < 8 || neg.rows() < 8)
        throw invalid_input("split_probe_accuracy: need n >= 8 per class");
    auto p = detail::split_rows(pos);
    auto n = detail::split_rows(neg);
    return probe_accuracy(ActivationMatrix(p.train, 0), ActivationMatrix(n.train, 0),
                          ActivationMatrix(p.test, 0), ActivationMatrix(n.test, 0), cfg);
}

// Evaluate one intervention strength. Per layer: W1 between source and target
// activations before intervention, and between transported source and
// unintervened target after. The probe reads the deepest evaluated layer.
inline EvalReport evaluate_intervention(const LayeredModel& model, const Matrix& x_src,
                                        const Matrix& x_tgt, const Intervention& intervention,
                                        Strength strength) {
    std::vector<int> layer_ids;
    for (const auto& lm : intervention.layers) layer_ids.push_back(lm.layer_id);
    const int last_layer = static_cast<int>(model.layer_count()) - 1;
    if (layer_ids.empty() || layer_ids.back() != last_layer) layer_ids.push_back(last_layer);
    std::sort(layer_ids.begin(), layer_ids.end());
    layer_ids.erase(std::unique(layer_ids.begin(), layer_ids.end()), layer_ids.end());

    auto base_src = collect_activations(model, x_src, layer_ids);
    auto base_tgt = collect_activations(model, x_tgt, layer_ids);

    IntervenedModel intervened = apply_to_model(model, intervention, strength);
    auto moved_src = collect_activations(intervened, x_src, layer_ids);

    EvalReport report;
    report.method = intervention.method;
    report.lambda_semantics = intervention.lambda_semantics;
    report.lambda = strength.lambda;
    for (int id : layer_ids) {
        LayerEval le;
        le.layer_id = id;
        le.w1_before = mean_w1(base_src.at(id).data, base_tgt.at(id).data);
        le.w1_after = mean_w1(moved_src.at(id).data, base_tgt.at(id).data);
        report.layers.push_back(le);
    }

    const int probe_layer = layer_ids.back();
    report.probe_before =
        split_probe_accuracy(base_src.at(probe_layer).data, base_tgt.at(probe_layer).data);
    report.probe_after =
        split_probe_accuracy(moved_src.at(probe_layer).data, base_tgt.at(probe_layer).data);
    return report;
}

// One report per strength, in the given order.
inline std::vector<EvalReport> sweep_strengths(const LayeredModel& model, const Matrix& x_src,
                                               const Matrix& x_tgt,
                                               const Intervention& intervention,
                                               std::span<const double> lambdas) {
    std::vector<EvalReport> reports;
    reports.reserve(lambdas.size());
    for (double l : lambdas)
        reports.push_back(evaluate_intervention(model, x_src, x_tgt, intervention, Strength(l)));
    return reports;
}

}  // namespace act
