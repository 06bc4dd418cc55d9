#pragma once

#include <chrono>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "act/baselines.hpp"
#include "act/core.hpp"
#include "act/errors.hpp"
#include "act/model.hpp"
#include "act/transport.hpp"

namespace act {

// All per-activation maps for one hooked layer. `exact` is populated instead
// of `maps` when the non-parametric oracle is requested; it never serializes.
struct LayerMaps {
    int layer_id = 0;
    std::vector<AffineMap1D> maps;
    std::vector<QuantileMap> exact;
    std::string method;
    LambdaSemantics lambda_semantics = LambdaSemantics::interpolation;

    bool is_exact() const { return !exact.empty(); }
    std::size_t width() const { return is_exact() ? exact.size() : maps.size(); }

    void apply_inplace(std::span<double> activations, Strength strength) const {
        if (activations.size() != width())
            throw config_error("LayerMaps: activation width mismatch at layer " +
                               std::to_string(layer_id));
        if (is_exact()) {
            for (std::size_t m = 0; m < exact.size(); ++m)
                activations[m] = apply(exact[m], activations[m], strength);
        } else {
            for (std::size_t m = 0; m < maps.size(); ++m)
                activations[m] = apply(maps[m], activations[m], strength, lambda_semantics);
        }
    }
};

// A whole-model intervention: one LayerMaps per hooked layer, in model order.
struct Intervention {
    std::string method;
    LambdaSemantics lambda_semantics = LambdaSemantics::interpolation;
    double estimation_strength = 1.0;
    bool causal = false;
    std::vector<LayerMaps> layers;

    const LayerMaps* find(int layer_id) const {
        for (const auto& lm : layers)
            if (lm.layer_id == layer_id) return &lm;
        return nullptr;
    }
};

enum class SupportKind { observed, infinite, quantile };

// How the interval support of estimated maps is chosen. Observed and quantile
// bounds always derive from the (refreshed) source samples at each layer.
struct SupportPolicy {
    SupportKind kind = SupportKind::observed;
    double q_lo = 0.0;
    double q_hi = 1.0;

    static SupportPolicy observed() { return {}; }
    static SupportPolicy infinite() { return {SupportKind::infinite, 0.0, 1.0}; }
    static SupportPolicy quantiles(double lo, double hi) {
        if (!(lo >= 0.0 && lo <= 1.0 && hi >= 0.0 && hi <= 1.0))
            throw invalid_input("SupportPolicy: quantiles outside [0, 1]");
        if (lo > hi) throw invalid_input("SupportPolicy: q_lo > q_hi");
        return {SupportKind::quantile, lo, hi};
    }

    SupportBounds bounds_for(std::span<const double> samples) const {
        switch (kind) {
            case SupportKind::observed: return SupportBounds::observed(samples);
            case SupportKind::infinite: return SupportBounds::infinite();
            case SupportKind::quantile: return support_bounds(samples, q_lo, q_hi);
        }
        return SupportBounds::infinite();
    }
};

// Estimator selection plus the knobs individual methods need.
struct EstimatorSpec {
    std::string method = "linear";
    SupportPolicy support;                 // transport estimators only
    LinearFitOptions linear;
    double detzero_epsilon = 0.5;
    LogisticConfig logistic;
    std::size_t actadd_pair_index = 0;     // which sample pair ActAdd reads

    bool is_transport() const {
        return method == "linear" || method == "mean" || method == "gaussian" ||
               method == "exact_oracle";
    }
    bool is_baseline() const {
        return method == "actadd" || method == "caa" || method == "iti_c" ||
               method == "aura" || method == "detzero";
    }
    LambdaSemantics semantics() const {
        return is_transport() ? LambdaSemantics::interpolation
                              : LambdaSemantics::bias_multiplier;
    }
    void validate() const {
        if (!is_transport() && !is_baseline())
            throw config_error("unknown estimator: " + method);
    }
};

// Fit all M maps of one layer from paired observations C (source) and D
// (target). Baseline methods keep unbounded interval support per their own
// gating rules; transport estimators honor the support policy.
inline LayerMaps fit_layer_maps(const Matrix& c_obs, const Matrix& d_obs, int layer_id,
                                const EstimatorSpec& spec) {
    spec.validate();
    if (c_obs.cols() != d_obs.cols()) throw invalid_input("fit_layer_maps: width mismatch");
    const std::size_t width = c_obs.cols();

    LayerMaps lm;
    lm.layer_id = layer_id;
    lm.method = spec.method;
    lm.lambda_semantics = spec.semantics();

    auto fit_affine_per_column = [&](auto&& estimator) {
        lm.maps.resize(width);
        for (std::size_t m = 0; m < width; ++m) {
            auto c = c_obs.col(m);
            auto d = d_obs.col(m);
            lm.maps[m] = estimator(c, d);
            lm.maps[m].support = spec.support.bounds_for(c);
        }
    };

    if (spec.method == "linear") {
        fit_affine_per_column([&](const auto& c, const auto& d) {
            return estimate_linear(c, d, spec.linear);
        });
    } else if (spec.method == "mean") {
        fit_affine_per_column([](const auto& c, const auto& d) { return estimate_mean(c, d); });
    } else if (spec.method == "gaussian") {
        fit_affine_per_column([](const auto& c, const auto& d) { return estimate_gaussian(c, d); });
    } else if (spec.method == "exact_oracle") {
        lm.exact.resize(width);
        for (std::size_t m = 0; m < width; ++m)
            lm.exact[m] = estimate_exact(c_obs.col(m), d_obs.col(m));
    } else if (spec.method == "actadd") {
        if (spec.actadd_pair_index >= c_obs.rows())
            throw invalid_input("fit_layer_maps: actadd pair index out of range");
        auto plus = d_obs.row(spec.actadd_pair_index);
        auto minus = c_obs.row(spec.actadd_pair_index);
        lm.maps = bias_to_maps(actadd_bias(plus, minus));
    } else if (spec.method == "caa") {
        lm.maps = bias_to_maps(caa_bias(ActivationMatrix(c_obs, layer_id),
                                        ActivationMatrix(d_obs, layer_id)));
    } else if (spec.method == "iti_c") {
        lm.maps = bias_to_maps(iti_c_bias(ActivationMatrix(c_obs, layer_id),
                                          ActivationMatrix(d_obs, layer_id), spec.logistic));
    } else if (spec.method == "aura") {
        lm.maps.resize(width);
        for (std::size_t m = 0; m < width; ++m)
            lm.maps[m] = aura_map(c_obs.col(m), d_obs.col(m));
    } else if (spec.method == "detzero") {
        lm.maps.resize(width);
        for (std::size_t m = 0; m < width; ++m)
            lm.maps[m] = detzero_map(c_obs.col(m), d_obs.col(m), spec.detzero_epsilon);
    }
    return lm;
}

namespace detail {

inline void check_estimation_inputs(const LayeredModel& model, const Matrix& x_src,
                                    const Matrix& x_tgt, std::span<const int> layer_ids) {
    if (x_src.rows() != x_tgt.rows())
        throw invalid_input("estimate: source and target sample counts differ");
    if (x_src.rows() < 2) throw invalid_input("estimate: need n >= 2 samples");
    if (x_src.cols() != model.input_width() || x_tgt.cols() != model.input_width())
        throw config_error("estimate: input width does not match model");
    if (layer_ids.empty()) throw config_error("estimate: no layers requested");
    for (std::size_t i = 0; i < layer_ids.size(); ++i) {
        model.check_layer_id(layer_ids[i]);
        if (i > 0 && layer_ids[i] <= layer_ids[i - 1])
            throw config_error("estimate: layer ids must be strictly ascending");
    }
}

}  // namespace detail

struct FitStat {
    int layer_id = 0;
    double millis = 0.0;
};

// Causal whole-model estimation: fit layer maps in model order, refreshing
// both observation sets through the already-fitted maps (applied at
// `estimation_strength`) before fitting the next layer. One sweep over the
// stack realizes the recursion.
inline Intervention estimate_causal(const LayeredModel& model, const Matrix& x_src,
                                    const Matrix& x_tgt, std::span<const int> layer_ids,
                                    const EstimatorSpec& spec,
                                    Strength estimation_strength = Strength(1.0),
                                    std::vector<FitStat>* stats = nullptr) {
    spec.validate();
    detail::check_estimation_inputs(model, x_src, x_tgt, layer_ids);
    const std::size_t n = x_src.rows();

    Intervention iv;
    iv.method = spec.method;
    iv.lambda_semantics = spec.semantics();
    iv.estimation_strength = estimation_strength.lambda;
    iv.causal = true;

    std::vector<std::vector<double>> cur_src(n), cur_tgt(n);
    for (std::size_t i = 0; i < n; ++i) {
        auto s = x_src.row(i);
        auto t = x_tgt.row(i);
        cur_src[i].assign(s.begin(), s.end());
        cur_tgt[i].assign(t.begin(), t.end());
    }

    std::size_t next_target = 0;
    for (std::size_t l = 0; l < model.layer_count(); ++l) {
        const Layer& layer = model.layer(l);
        for (std::size_t i = 0; i < n; ++i) {
            cur_src[i] = layer.forward(cur_src[i]);
            cur_tgt[i] = layer.forward(cur_tgt[i]);
        }
        if (next_target >= layer_ids.size()) continue;
        if (static_cast<std::size_t>(layer_ids[next_target]) != l) continue;

        Matrix c_obs(n, layer.out), d_obs(n, layer.out);
        for (std::size_t i = 0; i < n; ++i) {
            std::copy(cur_src[i].begin(), cur_src[i].end(), c_obs.row(i).begin());
            std::copy(cur_tgt[i].begin(), cur_tgt[i].end(), d_obs.row(i).begin());
        }
        const auto t0 = std::chrono::steady_clock::now();
        LayerMaps lm = fit_layer_maps(c_obs, d_obs, static_cast<int>(l), spec);
        const auto t1 = std::chrono::steady_clock::now();
        if (stats)
            stats->push_back({static_cast<int>(l),
                              std::chrono::duration<double, std::milli>(t1 - t0).count()});

        // Refresh both observation sets through the new maps.
        for (std::size_t i = 0; i < n; ++i) {
            lm.apply_inplace(cur_src[i], estimation_strength);
            lm.apply_inplace(cur_tgt[i], estimation_strength);
        }
        iv.layers.push_back(std::move(lm));
        ++next_target;
    }
    return iv;
}

// Simultaneous estimation: capture every requested layer in one unintervened
// pass and fit each independently.
inline Intervention estimate_simultaneous(const LayeredModel& model, const Matrix& x_src,
                                          const Matrix& x_tgt, std::span<const int> layer_ids,
                                          const EstimatorSpec& spec,
                                          std::vector<FitStat>* stats = nullptr) {
    spec.validate();
    detail::check_estimation_inputs(model, x_src, x_tgt, layer_ids);

    auto src_acts = collect_activations(model, x_src, layer_ids, PoolingMode::mean);
    auto tgt_acts = collect_activations(model, x_tgt, layer_ids, PoolingMode::mean);

    Intervention iv;
    iv.method = spec.method;
    iv.lambda_semantics = spec.semantics();
    iv.estimation_strength = 1.0;
    iv.causal = false;
    for (int id : layer_ids) {
        const auto t0 = std::chrono::steady_clock::now();
        iv.layers.push_back(fit_layer_maps(src_acts.at(id).data, tgt_acts.at(id).data, id, spec));
        const auto t1 = std::chrono::steady_clock::now();
        if (stats)
            stats->push_back({id, std::chrono::duration<double, std::milli>(t1 - t0).count()});
    }
    return iv;
}

// Wrapper model whose forward pass applies the intervention at each hooked
// layer output before feeding the next layer. The base model is copied, never
// modified; instances are immutable and safe to share across threads.
class IntervenedModel {
public:
    IntervenedModel(LayeredModel base, Intervention intervention, Strength strength)
        : base_(std::move(base)), intervention_(std::move(intervention)), strength_(strength) {
        for (const auto& lm : intervention_.layers) {
            base_.check_layer_id(lm.layer_id);
            const Layer& layer = base_.layer(static_cast<std::size_t>(lm.layer_id));
            if (lm.width() != layer.out)
                throw config_error("IntervenedModel: map width " + std::to_string(lm.width()) +
                                   " does not match layer " + std::to_string(lm.layer_id) +
                                   " output width " + std::to_string(layer.out));
        }
    }

    std::size_t layer_count() const { return base_.layer_count(); }
    std::size_t input_width() const { return base_.input_width(); }
    std::size_t output_width() const { return base_.output_width(); }
    void check_layer_id(int id) const { base_.check_layer_id(id); }
    const LayeredModel& base() const { return base_; }
    Strength strength() const { return strength_; }

    std::vector<double> forward(std::span<const double> x) const {
        std::vector<double> cur(x.begin(), x.end());
        for (std::size_t l = 0; l < base_.layer_count(); ++l) {
            cur = base_.layer(l).forward(cur);
            if (const LayerMaps* lm = intervention_.find(static_cast<int>(l)))
                lm->apply_inplace(cur, strength_);
        }
        return cur;
    }

    // Post-intervention activations: what the next layer actually sees.
    std::vector<std::vector<double>> forward_all(std::span<const double> x) const {
        return forward_all_impl(x, false);
    }

    // Pre-intervention activations at hooked layers (upstream hooks still
    // applied); these equal the C observations causal estimation fits on.
    std::vector<std::vector<double>> forward_all_pre(std::span<const double> x) const {
        return forward_all_impl(x, true);
    }

    // collect_activations adapter capturing pre-intervention activations.
    struct PreInterventionView {
        const IntervenedModel* model;
        std::vector<std::vector<double>> forward_all(std::span<const double> x) const {
            return model->forward_all_pre(x);
        }
        std::size_t layer_count() const { return model->layer_count(); }
        void check_layer_id(int id) const { model->check_layer_id(id); }
    };
    PreInterventionView pre_intervention_view() const { return {this}; }

private:
    std::vector<std::vector<double>> forward_all_impl(std::span<const double> x,
                                                      bool capture_pre) const {
        std::vector<std::vector<double>> acts;
        acts.reserve(base_.layer_count());
        std::vector<double> cur(x.begin(), x.end());
        for (std::size_t l = 0; l < base_.layer_count(); ++l) {
            cur = base_.layer(l).forward(cur);
            const LayerMaps* lm = intervention_.find(static_cast<int>(l));
            if (capture_pre) acts.push_back(cur);
            if (lm) lm->apply_inplace(cur, strength_);
            if (!capture_pre) acts.push_back(cur);
        }
        return acts;
    }

    LayeredModel base_;
    Intervention intervention_;
    Strength strength_;
};

inline IntervenedModel apply_to_model(const LayeredModel& model, Intervention intervention,
                                      Strength strength) {
    return IntervenedModel(model, std::move(intervention), strength);
}

// Fold interpolated maps into the linear layer they follow:
//   omega~ = lambda*(omega - 1) + 1
//   gamma' row m = omega~_m * gamma row m,  delta'_m = omega~_m*delta_m + lambda*beta_m
// Only valid for ungated maps; any bounded support refuses to fold.
inline LinearLayerParams fold_into_linear(const LinearLayerParams& layer,
                                          std::span<const AffineMap1D> maps, Strength strength) {
    if (maps.size() != layer.out_width())
        throw config_error("fold_into_linear: map count does not match layer output width");
    for (const AffineMap1D& m : maps)
        if (m.support.is_bounded())
            throw fold_unsupported("fold_into_linear: bounded support cannot be folded");

    const double l = strength.lambda;
    LinearLayerParams folded = layer;
    for (std::size_t m = 0; m < maps.size(); ++m) {
        const double omega_eff = l * (maps[m].omega - 1.0) + 1.0;
        auto row = folded.gamma.row(m);
        for (double& w : row) w *= omega_eff;
        folded.delta[m] = omega_eff * layer.delta[m] + l * maps[m].beta;
    }
    return folded;
}

// Storage accounting: 2 floats (omega, beta) per activation, plus 2 more
// (lo, hi) when interval support is kept.
inline std::uint64_t memory_footprint(std::span<const LayerMaps> layers, bool with_support,
                                      unsigned bytes_per_float) {
    std::uint64_t activations = 0;
    for (const auto& lm : layers) activations += lm.maps.size();
    const std::uint64_t floats_per_activation = with_support ? 4 : 2;
    return floats_per_activation * activations * bytes_per_float;
}

}  // namespace act
