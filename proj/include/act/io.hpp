#pragma once

#include <charconv>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <sstream>
#include <string>
#include <system_error>
#include <vector>

#include <json.hpp>

#include "act/core.hpp"
#include "act/errors.hpp"
#include "act/metrics.hpp"
#include "act/model.hpp"
#include "act/pipeline.hpp"
#include "act/rng.hpp"
#include "act/toymodel.hpp"

namespace act {

using json = nlohmann::json;

// Shortest decimal form that round-trips the exact double.
inline std::string format_double(double v) {
    char buf[64];
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    if (ec != std::errc()) throw io_error("format_double: conversion failed");
    return std::string(buf, ptr);
}

// All file outputs go through a temp-file-plus-rename so readers never see a
// partial write.
inline void atomic_write(const std::filesystem::path& path, const std::string& content) {
    namespace fs = std::filesystem;
    fs::path dir = path.parent_path();
    if (!dir.empty()) {
        std::error_code ec;
        fs::create_directories(dir, ec);
    }
    fs::path tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        if (!out) throw io_error("cannot open for writing: " + tmp.string());
        out << content;
        if (!out.flush()) throw io_error("write failed: " + tmp.string());
    }
    std::error_code ec;
    fs::rename(tmp, path, ec);
    if (ec) throw io_error("rename failed: " + path.string() + ": " + ec.message());
}

inline std::string read_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw io_error("cannot open: " + path.string());
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

// ---------------------------------------------------------------------------
// Activation matrix text format:
//   act v1 n=<n> m=<M> layer=<l> pooling=<mode>
//   <n lines of M space-separated decimal floats>
// Model-input matrices reuse the container with layer=-1.

inline std::string activation_matrix_to_text(const ActivationMatrix& am) {
    std::ostringstream out;
    out << "act v1 n=" << am.samples() << " m=" << am.width() << " layer=" << am.layer_id
        << " pooling=" << to_string(am.pooling) << "\n";
    for (std::size_t r = 0; r < am.samples(); ++r) {
        auto row = am.data.row(r);
        for (std::size_t c = 0; c < row.size(); ++c) {
            if (c) out << ' ';
            out << format_double(row[c]);
        }
        out << "\n";
    }
    return out.str();
}

inline ActivationMatrix activation_matrix_from_text(const std::string& text) {
    std::istringstream in(text);
    std::string magic, version;
    in >> magic >> version;
    if (magic != "act" || version != "v1") throw io_error("activation matrix: bad header");

    std::size_t n = 0, m = 0;
    int layer = 0;
    std::string pooling = "mean";
    std::string field;
    for (int i = 0; i < 4 && (in >> field); ++i) {
        auto eq = field.find('=');
        if (eq == std::string::npos) throw io_error("activation matrix: bad header field " + field);
        std::string key = field.substr(0, eq), value = field.substr(eq + 1);
        if (key == "n") n = std::stoull(value);
        else if (key == "m") m = std::stoull(value);
        else if (key == "layer") layer = std::stoi(value);
        else if (key == "pooling") pooling = value;
        else throw io_error("activation matrix: unknown header field " + key);
    }
    if (n < 2 || m < 1) throw io_error("activation matrix: bad dimensions");

    Matrix data(n, m);
    for (std::size_t r = 0; r < n; ++r)
        for (std::size_t c = 0; c < m; ++c)
            if (!(in >> data.at(r, c))) throw io_error("activation matrix: truncated data");
    return ActivationMatrix(std::move(data), layer, pooling_from_string(pooling));
}

inline void save_activation_matrix(const std::filesystem::path& path, const ActivationMatrix& am) {
    atomic_write(path, activation_matrix_to_text(am));
}

inline ActivationMatrix load_activation_matrix(const std::filesystem::path& path) {
    return activation_matrix_from_text(read_file(path));
}

// ---------------------------------------------------------------------------
// Transport map JSON

namespace detail {

inline json bounds_array(const std::vector<AffineMap1D>& maps, bool lower) {
    bool any_finite = false;
    for (const auto& m : maps) {
        const double v = lower ? m.support.lo : m.support.hi;
        if (std::isfinite(v)) any_finite = true;
    }
    if (!any_finite) return nullptr;  // whole-layer Q_infinity
    json arr = json::array();
    for (const auto& m : maps) {
        const double v = lower ? m.support.lo : m.support.hi;
        if (std::isfinite(v)) arr.push_back(v);
        else arr.push_back(nullptr);
    }
    return arr;
}

inline void read_bounds(const json& arr, std::vector<AffineMap1D>& maps, bool lower) {
    const double inf = std::numeric_limits<double>::infinity();
    if (arr.is_null()) return;  // keep default +-inf
    if (arr.size() != maps.size()) throw io_error("map file: bounds length mismatch");
    for (std::size_t i = 0; i < maps.size(); ++i) {
        double& slot = lower ? maps[i].support.lo : maps[i].support.hi;
        slot = arr[i].is_null() ? (lower ? -inf : inf) : arr[i].get<double>();
    }
}

}  // namespace detail

inline json intervention_to_json(const Intervention& iv, json metadata = json::object()) {
    json doc;
    doc["version"] = 1;
    doc["method"] = iv.method;
    doc["lambda_semantics"] = to_string(iv.lambda_semantics);
    doc["estimation_strength"] = iv.estimation_strength;
    doc["causal"] = iv.causal;
    if (!metadata.empty()) doc["metadata"] = std::move(metadata);
    json layers = json::array();
    for (const auto& lm : iv.layers) {
        if (lm.is_exact())
            throw io_error("map file: the exact oracle map has no serial form");
        json layer;
        layer["layer_id"] = lm.layer_id;
        json omega = json::array(), beta = json::array();
        for (const auto& m : lm.maps) {
            omega.push_back(m.omega);
            beta.push_back(m.beta);
        }
        layer["omega"] = std::move(omega);
        layer["beta"] = std::move(beta);
        layer["lo"] = detail::bounds_array(lm.maps, true);
        layer["hi"] = detail::bounds_array(lm.maps, false);
        layers.push_back(std::move(layer));
    }
    doc["layers"] = std::move(layers);
    return doc;
}

inline Intervention intervention_from_json(const json& doc) {
    if (!doc.contains("version") || doc["version"].get<int>() != 1)
        throw io_error("map file: unsupported version");
    Intervention iv;
    iv.method = doc.at("method").get<std::string>();
    iv.lambda_semantics = doc.contains("lambda_semantics")
                              ? lambda_semantics_from_string(doc["lambda_semantics"])
                              : LambdaSemantics::interpolation;
    iv.estimation_strength = doc.value("estimation_strength", 1.0);
    iv.causal = doc.value("causal", false);
    for (const auto& layer : doc.at("layers")) {
        LayerMaps lm;
        lm.layer_id = layer.at("layer_id").get<int>();
        lm.method = iv.method;
        lm.lambda_semantics = iv.lambda_semantics;
        const auto& omega = layer.at("omega");
        const auto& beta = layer.at("beta");
        if (omega.size() != beta.size()) throw io_error("map file: omega/beta length mismatch");
        lm.maps.resize(omega.size());
        for (std::size_t m = 0; m < lm.maps.size(); ++m) {
            lm.maps[m].omega = omega[m].get<double>();
            lm.maps[m].beta = beta[m].get<double>();
        }
        detail::read_bounds(layer.value("lo", json()), lm.maps, true);
        detail::read_bounds(layer.value("hi", json()), lm.maps, false);
        iv.layers.push_back(std::move(lm));
    }
    return iv;
}

inline void save_intervention(const std::filesystem::path& path, const Intervention& iv,
                              json metadata = json::object()) {
    atomic_write(path, intervention_to_json(iv, std::move(metadata)).dump(2) + "\n");
}

inline Intervention load_intervention(const std::filesystem::path& path) {
    return intervention_from_json(json::parse(read_file(path)));
}

// ---------------------------------------------------------------------------
// Model JSON: layer kinds, shapes, row-major weights.

inline json model_to_json(const LayeredModel& model, json metadata = json::object()) {
    json doc;
    doc["version"] = 1;
    if (!metadata.empty()) doc["metadata"] = std::move(metadata);
    json layers = json::array();
    for (const Layer& l : model.layers()) {
        json layer;
        layer["kind"] = to_string(l.kind);
        switch (l.kind) {
            case LayerKind::linear: {
                layer["in"] = l.in;
                layer["out"] = l.out;
                json gamma = json::array();
                for (double v : l.params.gamma.flat()) gamma.push_back(v);
                layer["gamma"] = std::move(gamma);
                layer["delta"] = l.params.delta;
                break;
            }
            case LayerKind::tanh:
                layer["width"] = l.in;
                break;
            case LayerKind::layernorm:
                layer["width"] = l.in;
                layer["eps"] = l.eps;
                break;
        }
        layers.push_back(std::move(layer));
    }
    doc["layers"] = std::move(layers);
    return doc;
}

inline LayeredModel model_from_json(const json& doc) {
    if (!doc.contains("version") || doc["version"].get<int>() != 1)
        throw io_error("model file: unsupported version");
    std::vector<Layer> layers;
    for (const auto& layer : doc.at("layers")) {
        const auto kind = layer_kind_from_string(layer.at("kind").get<std::string>());
        switch (kind) {
            case LayerKind::linear: {
                const auto in = layer.at("in").get<std::size_t>();
                const auto out = layer.at("out").get<std::size_t>();
                const auto& gamma = layer.at("gamma");
                if (gamma.size() != in * out) throw io_error("model file: gamma size mismatch");
                LinearLayerParams params;
                params.gamma = Matrix(out, in);
                auto flat = params.gamma.flat();
                for (std::size_t i = 0; i < flat.size(); ++i) flat[i] = gamma[i].get<double>();
                params.delta = layer.at("delta").get<std::vector<double>>();
                layers.push_back(Layer::linear(std::move(params)));
                break;
            }
            case LayerKind::tanh:
                layers.push_back(Layer::tanh(layer.at("width").get<std::size_t>()));
                break;
            case LayerKind::layernorm:
                layers.push_back(Layer::layernorm(layer.at("width").get<std::size_t>(),
                                                  layer.value("eps", 1e-5)));
                break;
        }
    }
    return LayeredModel(std::move(layers));
}

inline void save_model(const std::filesystem::path& path, const LayeredModel& model,
                       json metadata = json::object()) {
    atomic_write(path, model_to_json(model, std::move(metadata)).dump(2) + "\n");
}

inline LayeredModel load_model(const std::filesystem::path& path) {
    return model_from_json(json::parse(read_file(path)));
}

// ---------------------------------------------------------------------------
// Toy config JSON. The PRNG identifier travels with the config so sampled
// values can be reproduced by other implementations.

inline json toy_config_to_json(const ToyConfig& cfg) {
    json doc;
    doc["version"] = 1;
    doc["seed"] = cfg.seed;
    doc["widths"] = cfg.widths;
    doc["nonlinearity"] = to_string(cfg.nonlinearity);
    doc["n_samples"] = cfg.n_samples;
    doc["concept_shift"] = cfg.concept_shift;
    doc["concept_scale"] = cfg.concept_scale;
    doc["rng"] = SplitMix64::algorithm_name();
    return doc;
}

inline ToyConfig toy_config_from_json(const json& doc) {
    ToyConfig cfg;
    cfg.seed = doc.at("seed").get<std::uint64_t>();
    cfg.widths = doc.at("widths").get<std::vector<std::size_t>>();
    cfg.nonlinearity = nonlinearity_from_string(doc.at("nonlinearity").get<std::string>());
    cfg.n_samples = doc.at("n_samples").get<std::size_t>();
    cfg.concept_shift = doc.value("concept_shift", std::vector<double>{});
    cfg.concept_scale = doc.value("concept_scale", 1.0);
    cfg.validate();
    return cfg;
}

// ---------------------------------------------------------------------------
// Eval reports: JSON for tooling, flat CSV (one row per layer x lambda) for
// plotting.

inline json report_to_json(const EvalReport& r) {
    json doc;
    doc["method"] = r.method;
    doc["lambda_semantics"] = to_string(r.lambda_semantics);
    doc["lambda"] = r.lambda;
    json layers = json::array();
    for (const auto& le : r.layers)
        layers.push_back({{"layer_id", le.layer_id},
                          {"w1_before", le.w1_before},
                          {"w1_after", le.w1_after}});
    doc["layers"] = std::move(layers);
    doc["probe_before"] = r.probe_before;
    doc["probe_after"] = r.probe_after;
    return doc;
}

inline std::string reports_to_csv(std::span<const EvalReport> reports) {
    std::ostringstream out;
    out << "method,lambda_semantics,lambda,layer_id,w1_before,w1_after,probe_before,probe_after\n";
    for (const auto& r : reports)
        for (const auto& le : r.layers)
            out << r.method << ',' << to_string(r.lambda_semantics) << ','
                << format_double(r.lambda) << ',' << le.layer_id << ','
                << format_double(le.w1_before) << ',' << format_double(le.w1_after) << ','
                << format_double(r.probe_before) << ',' << format_double(r.probe_after) << "\n";
    return out.str();
}

}  // namespace act
