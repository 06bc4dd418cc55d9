#pragma once

#include <cmath>
#include <cstddef>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "act/core.hpp"
#include "act/errors.hpp"

namespace act {

enum class LayerKind { linear, tanh, layernorm };

inline const char* to_string(LayerKind k) {
    switch (k) {
        case LayerKind::linear: return "linear";
        case LayerKind::tanh: return "tanh";
        case LayerKind::layernorm: return "layernorm";
    }
    return "linear";
}

inline LayerKind layer_kind_from_string(const std::string& s) {
    if (s == "linear") return LayerKind::linear;
    if (s == "tanh") return LayerKind::tanh;
    if (s == "layernorm") return LayerKind::layernorm;
    throw config_error("unknown layer kind: " + s);
}

// Weights of one affine layer: y = gamma * x + delta.
struct LinearLayerParams {
    Matrix gamma;              // out x in, row-major
    std::vector<double> delta; // out

    std::size_t in_width() const { return gamma.cols(); }
    std::size_t out_width() const { return gamma.rows(); }
};

struct Layer {
    LayerKind kind = LayerKind::tanh;
    std::size_t in = 0;
    std::size_t out = 0;
    LinearLayerParams params;   // linear only
    double eps = 1e-5;          // layernorm only

    static Layer linear(LinearLayerParams p) {
        Layer l;
        l.kind = LayerKind::linear;
        l.in = p.in_width();
        l.out = p.out_width();
        if (p.delta.size() != l.out) throw config_error("Layer::linear: bias width mismatch");
        l.params = std::move(p);
        return l;
    }
    static Layer tanh(std::size_t width) { return {LayerKind::tanh, width, width, {}, 1e-5}; }
    static Layer layernorm(std::size_t width, double eps = 1e-5) {
        return {LayerKind::layernorm, width, width, {}, eps};
    }

    std::vector<double> forward(std::span<const double> x) const {
        if (x.size() != in) throw config_error("Layer::forward: input width mismatch");
        std::vector<double> y(out);
        switch (kind) {
            case LayerKind::linear:
                for (std::size_t r = 0; r < out; ++r) {
                    double acc = params.delta[r];
                    auto w = params.gamma.row(r);
                    for (std::size_t c = 0; c < in; ++c) acc += w[c] * x[c];
                    y[r] = acc;
                }
                break;
            case LayerKind::tanh:
                for (std::size_t i = 0; i < in; ++i) y[i] = std::tanh(x[i]);
                break;
            case LayerKind::layernorm: {
                double mean = 0.0;
                for (double v : x) mean += v;
                mean /= static_cast<double>(in);
                double var = 0.0;
                for (double v : x) var += (v - mean) * (v - mean);
                var /= static_cast<double>(in);
                const double inv = 1.0 / std::sqrt(var + eps);
                for (std::size_t i = 0; i < in; ++i) y[i] = (x[i] - mean) * inv;
                break;
            }
        }
        return y;
    }
};

// Ordered stack of layers with a hook point on every layer output.
// Immutable after construction; forward passes are const and thread-safe.
class LayeredModel {
public:
    LayeredModel() = default;
    explicit LayeredModel(std::vector<Layer> layers) : layers_(std::move(layers)) {
        if (layers_.empty()) throw config_error("LayeredModel: need at least one layer");
        for (std::size_t i = 1; i < layers_.size(); ++i)
            if (layers_[i].in != layers_[i - 1].out)
                throw config_error("LayeredModel: width mismatch between layers " +
                                   std::to_string(i - 1) + " and " + std::to_string(i));
    }

    std::size_t layer_count() const { return layers_.size(); }
    std::size_t input_width() const { return layers_.front().in; }
    std::size_t output_width() const { return layers_.back().out; }
    const Layer& layer(std::size_t i) const { return layers_[i]; }
    const std::vector<Layer>& layers() const { return layers_; }

    void check_layer_id(int id) const {
        if (id < 0 || static_cast<std::size_t>(id) >= layers_.size())
            throw config_error("unknown layer id: " + std::to_string(id));
    }

    std::vector<double> forward(std::span<const double> x) const {
        std::vector<double> cur(x.begin(), x.end());
        for (const Layer& l : layers_) cur = l.forward(cur);
        return cur;
    }

    // Outputs of every layer on one input, in model order.
    std::vector<std::vector<double>> forward_all(std::span<const double> x) const {
        std::vector<std::vector<double>> acts;
        acts.reserve(layers_.size());
        std::vector<double> cur(x.begin(), x.end());
        for (const Layer& l : layers_) {
            cur = l.forward(cur);
            acts.push_back(cur);
        }
        return acts;
    }

private:
    std::vector<Layer> layers_;
};

// Anything that can run an input through a layer stack while reporting
// per-layer activations; satisfied by LayeredModel and IntervenedModel.
template <typename M>
concept ForwardModel = requires(const M& m, std::span<const double> x) {
    { m.forward_all(x) } -> std::same_as<std::vector<std::vector<double>>>;
    { m.layer_count() } -> std::convertible_to<std::size_t>;
    { m.check_layer_id(0) };
};

// Pool-and-stack activation collection: row i of each returned matrix is the
// pooled layer-l activation of input i. Each input is one token (K = 1);
// multi-token inputs run the stack per token before pooling.
template <ForwardModel M>
std::map<int, ActivationMatrix> collect_activations(const M& model, const Matrix& inputs,
                                                    std::span<const int> layer_ids,
                                                    PoolingMode mode = PoolingMode::mean) {
    if (inputs.rows() < 2) throw invalid_input("collect_activations: need n >= 2 inputs");
    for (int id : layer_ids) model.check_layer_id(id);

    std::map<int, Matrix> raw;
    for (std::size_t i = 0; i < inputs.rows(); ++i) {
        auto acts = model.forward_all(inputs.row(i));
        for (int id : layer_ids) {
            const auto& v = acts[static_cast<std::size_t>(id)];
            auto [it, inserted] = raw.try_emplace(id, inputs.rows(), v.size());
            std::copy(v.begin(), v.end(), it->second.row(i).begin());
        }
    }
    std::map<int, ActivationMatrix> out;
    for (auto& [id, m] : raw) out.emplace(id, ActivationMatrix(std::move(m), id, mode));
    return out;
}

// Multi-token variant: one TokenActivations (K x input_width) per sample.
template <ForwardModel M>
std::map<int, ActivationMatrix> collect_activations(const M& model,
                                                    std::span<const TokenActivations> inputs,
                                                    std::span<const int> layer_ids,
                                                    PoolingMode mode = PoolingMode::mean) {
    if (inputs.size() < 2) throw invalid_input("collect_activations: need n >= 2 inputs");
    for (int id : layer_ids) model.check_layer_id(id);

    std::map<int, Matrix> pooled;
    for (std::size_t i = 0; i < inputs.size(); ++i) {
        const Matrix& toks = inputs[i].data;
        std::map<int, Matrix> per_layer;
        for (std::size_t t = 0; t < toks.rows(); ++t) {
            auto acts = model.forward_all(toks.row(t));
            for (int id : layer_ids) {
                const auto& v = acts[static_cast<std::size_t>(id)];
                auto [it, ins] = per_layer.try_emplace(id, toks.rows(), v.size());
                std::copy(v.begin(), v.end(), it->second.row(t).begin());
            }
        }
        for (auto& [id, m] : per_layer) {
            auto vec = pool(TokenActivations(std::move(m)), mode);
            auto [it, ins] = pooled.try_emplace(id, inputs.size(), vec.size());
            std::copy(vec.begin(), vec.end(), it->second.row(i).begin());
        }
    }
    std::map<int, ActivationMatrix> out;
    for (auto& [id, m] : pooled) out.emplace(id, ActivationMatrix(std::move(m), id, mode));
    return out;
}

}  // namespace act
