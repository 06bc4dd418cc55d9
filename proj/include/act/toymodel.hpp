#pragma once

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "act/core.hpp"
#include "act/errors.hpp"
#include "act/model.hpp"
#include "act/rng.hpp"

namespace act {

enum class Nonlinearity { tanh, identity };

inline const char* to_string(Nonlinearity n) {
    return n == Nonlinearity::tanh ? "tanh" : "identity";
}

inline Nonlinearity nonlinearity_from_string(const std::string& s) {
    if (s == "tanh") return Nonlinearity::tanh;
    if (s == "identity") return Nonlinearity::identity;
    throw invalid_input("unknown nonlinearity: " + s);
}

// Deterministic synthetic setup: a seeded layered network plus two input
// populations, source N(0, I) and target N(concept_shift, concept_scale^2 I).
// Every artifact derived from a ToyConfig is a pure function of it.
struct ToyConfig {
    std::uint64_t seed = 0;
    std::vector<std::size_t> widths;  // widths[0] is the input width
    Nonlinearity nonlinearity = Nonlinearity::tanh;
    std::size_t n_samples = 0;
    std::vector<double> concept_shift;  // padded with zeros up to input width
    double concept_scale = 1.0;

    void validate() const {
        if (widths.size() < 2) throw invalid_input("ToyConfig: need at least input and one layer width");
        for (std::size_t w : widths)
            if (w < 1) throw invalid_input("ToyConfig: widths must be >= 1");
        if (n_samples < 4) throw invalid_input("ToyConfig: need n_samples >= 4");
        if (!(concept_scale > 0.0)) throw invalid_input("ToyConfig: concept_scale must be > 0");
        if (concept_shift.size() > widths.front())
            throw invalid_input("ToyConfig: concept_shift longer than input width");
    }
};

// Seeded network: one linear block per width transition (weights scaled by
// 1/sqrt(fan_in)), each followed by the configured nonlinearity. Identity
// nonlinearity adds no extra layers, so widths [2,2] give a pure affine model.
inline LayeredModel make_model(const ToyConfig& config) {
    config.validate();
    std::vector<Layer> layers;
    SplitMix64 root(config.seed);
    for (std::size_t i = 1; i < config.widths.size(); ++i) {
        const std::size_t fan_in = config.widths[i - 1];
        const std::size_t fan_out = config.widths[i];
        SplitMix64 rng = root.split(i);
        const double weight_scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
        LinearLayerParams params;
        params.gamma = Matrix(fan_out, fan_in);
        params.delta.resize(fan_out);
        for (std::size_t r = 0; r < fan_out; ++r)
            for (std::size_t c = 0; c < fan_in; ++c)
                params.gamma.at(r, c) = weight_scale * rng.next_gaussian();
        for (std::size_t r = 0; r < fan_out; ++r)
            params.delta[r] = 0.1 * rng.next_gaussian();
        layers.push_back(Layer::linear(std::move(params)));
        if (config.nonlinearity == Nonlinearity::tanh) layers.push_back(Layer::tanh(fan_out));
    }
    return LayeredModel(std::move(layers));
}

struct Populations {
    Matrix src;
    Matrix tgt;
};

// Source inputs ~ N(0, I); target inputs ~ N(shift, scale^2 I). Streams are
// split from the config seed so the two draws are independent.
inline Populations sample_populations(const ToyConfig& config) {
    config.validate();
    const std::size_t d = config.widths.front();
    const std::size_t n = config.n_samples;

    std::vector<double> shift(d, 0.0);
    for (std::size_t i = 0; i < config.concept_shift.size(); ++i) shift[i] = config.concept_shift[i];

    SplitMix64 root(config.seed);
    SplitMix64 src_rng = root.split(0x5bc);
    SplitMix64 tgt_rng = root.split(0x76c);

    Populations pops{Matrix(n, d), Matrix(n, d)};
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j) pops.src.at(i, j) = src_rng.next_gaussian();
    for (std::size_t i = 0; i < n; ++i)
        for (std::size_t j = 0; j < d; ++j)
            pops.tgt.at(i, j) = shift[j] + config.concept_scale * tgt_rng.next_gaussian();
    return pops;
}

// One canonical demo setup: a config plus the layer ids the demo intervenes
// on (the nonlinearity outputs, or every layer for identity stacks).
struct CanonicalDemo {
    std::string name;
    ToyConfig config;
    std::vector<int> layer_ids;
};

// The three canonical configurations used by the demo command and the
// acceptance checks.
inline std::vector<CanonicalDemo> canonical_demos() {
    std::vector<CanonicalDemo> demos;
    {
        CanonicalDemo d;
        d.name = "identity-2-layer";
        d.config.seed = 7;
        d.config.widths = {2, 4, 2};
        d.config.nonlinearity = Nonlinearity::identity;
        d.config.n_samples = 1000;
        d.config.concept_shift = {2.0};
        d.config.concept_scale = 1.5;
        d.layer_ids = {0, 1};
        demos.push_back(std::move(d));
    }
    {
        CanonicalDemo d;
        d.name = "tanh-3-layer";
        d.config.seed = 7;
        d.config.widths = {4, 8, 8, 4};
        d.config.nonlinearity = Nonlinearity::tanh;
        d.config.n_samples = 2000;
        d.config.concept_shift = {3.0};
        d.config.concept_scale = 2.0;
        d.layer_ids = {1, 3, 5};
        demos.push_back(std::move(d));
    }
    {
        CanonicalDemo d;
        d.name = "wide-shallow";
        d.config.seed = 7;
        d.config.widths = {16, 64};
        d.config.nonlinearity = Nonlinearity::tanh;
        d.config.n_samples = 1000;
        d.config.concept_shift = {1.5, 1.5, 1.5, 1.5};
        d.config.concept_scale = 0.75;
        d.layer_ids = {1};
        demos.push_back(std::move(d));
    }
    return demos;
}

inline const CanonicalDemo& canonical_demo(const std::string& name) {
    static const std::vector<CanonicalDemo> demos = canonical_demos();
    for (const auto& d : demos)
        if (d.name == name) return d;
    throw config_error("unknown canonical demo: " + name);
}

}  // namespace act
