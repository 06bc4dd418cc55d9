#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <span>
#include <string>
#include <vector>

#include "act/core.hpp"
#include "act/errors.hpp"

namespace act {

// Interval on which a map is applied; samples outside pass through unchanged.
// Defaults to the full real line (Q_infinity).
struct SupportBounds {
    double lo = -std::numeric_limits<double>::infinity();
    double hi = std::numeric_limits<double>::infinity();

    static SupportBounds infinite() { return {}; }

    static SupportBounds observed(std::span<const double> samples) {
        if (samples.empty()) throw invalid_input("SupportBounds::observed: empty sample");
        auto [mn, mx] = std::minmax_element(samples.begin(), samples.end());
        return {*mn, *mx};
    }

    bool is_bounded() const { return std::isfinite(lo) || std::isfinite(hi); }
    bool contains(double a) const { return a >= lo && a <= hi; }
};

// One activation's transport: a -> omega * a + beta, gated by `support`.
struct AffineMap1D {
    double omega = 1.0;
    double beta = 0.0;
    SupportBounds support;

    static AffineMap1D identity() { return {}; }
    double transport(double a) const { return omega * a + beta; }
};

// Interpolation strength. The documented range is [0, 1]; larger values are
// accepted for extrapolation sweeps.
struct Strength {
    double lambda = 1.0;

    Strength() = default;
    explicit Strength(double l) : lambda(l) {
        if (!(l >= 0.0)) throw invalid_input("Strength: lambda must be >= 0");
    }
    bool is_extrapolation() const { return lambda > 1.0; }
};

// How a strength parameter enters the applied map:
//   interpolation    (1-l)*a + l*(omega*a + beta)
//   bias_multiplier  omega*a + l*beta
enum class LambdaSemantics { interpolation, bias_multiplier };

inline const char* to_string(LambdaSemantics s) {
    return s == LambdaSemantics::interpolation ? "interpolation" : "bias_multiplier";
}

inline LambdaSemantics lambda_semantics_from_string(const std::string& s) {
    if (s == "interpolation") return LambdaSemantics::interpolation;
    if (s == "bias_multiplier") return LambdaSemantics::bias_multiplier;
    throw invalid_input("unknown lambda semantics: " + s);
}

// Exact empirical 1-D transport map stored as paired sorted samples. Used as
// the reference the affine estimators approximate; not a deployable artifact.
struct QuantileMap {
    std::vector<double> src_sorted;
    std::vector<double> tgt_sorted;

    std::size_t size() const { return src_sorted.size(); }
};

namespace detail {

inline std::vector<double> sorted_copy(std::span<const double> v) {
    std::vector<double> out(v.begin(), v.end());
    std::stable_sort(out.begin(), out.end());
    return out;
}

inline void require_finite(std::span<const double> v, const char* who) {
    for (double x : v)
        if (!std::isfinite(x)) throw invalid_input(std::string(who) + ": non-finite sample");
}

}  // namespace detail

// Empirical quantile, linear interpolation between closest ranks with
// inclusive endpoints: q=0 gives min, q=1 gives max.
inline double quantile(std::span<const double> samples, double q) {
    if (samples.empty()) throw invalid_input("quantile: empty sample");
    if (!(q >= 0.0 && q <= 1.0)) throw invalid_input("quantile: q outside [0, 1]");
    std::vector<double> s = detail::sorted_copy(samples);
    if (s.size() == 1) return s[0];
    double pos = q * static_cast<double>(s.size() - 1);
    auto idx = static_cast<std::size_t>(pos);
    if (idx >= s.size() - 1) return s.back();
    double frac = pos - static_cast<double>(idx);
    return s[idx] + frac * (s[idx + 1] - s[idx]);
}

inline SupportBounds support_bounds(std::span<const double> samples, double q_lo, double q_hi) {
    if (q_lo > q_hi) throw invalid_input("support_bounds: q_lo > q_hi");
    return {quantile(samples, q_lo), quantile(samples, q_hi)};
}

// Which sum of squares divides the cross term in the affine fit. `source` is
// the minimizer of the stated least-squares objective; `target` mirrors a
// transcription that divides by the centered target instead, kept for
// comparison.
enum class LinearDenominator { source, target };

struct LinearFitOptions {
    LinearDenominator denominator = LinearDenominator::source;
};

// Best affine approximation to the 1-D OT map: sort both samples, recenter,
// and solve min over (omega, beta) of sum_i (b_(i) - omega*a_(i) - beta)^2.
//   omega = sum(a~ * b~) / sum(a~^2),  beta = m_b - omega * m_a
// A constant source column (dead neuron) falls back to a pure mean shift with
// a warning instead of failing, so whole-layer estimation never aborts.
inline AffineMap1D estimate_linear(std::span<const double> src, std::span<const double> tgt,
                                   const LinearFitOptions& opts = {}) {
    if (src.size() != tgt.size()) throw invalid_input("estimate_linear: length mismatch");
    if (src.size() < 2) throw invalid_input("estimate_linear: need n >= 2");
    detail::require_finite(src, "estimate_linear");
    detail::require_finite(tgt, "estimate_linear");

    std::vector<double> a = detail::sorted_copy(src);
    std::vector<double> b = detail::sorted_copy(tgt);
    const double ma = mean_of(a);
    const double mb = mean_of(b);

    double cross = 0.0, ss_a = 0.0, ss_b = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) {
        const double at = a[i] - ma;
        const double bt = b[i] - mb;
        cross += at * bt;
        ss_a += at * at;
        ss_b += bt * bt;
    }

    AffineMap1D map;
    map.support = SupportBounds::observed(src);
    if (ss_a == 0.0) {
        warn("estimate_linear: constant source sample, falling back to mean shift");
        map.omega = 1.0;
        map.beta = mb - ma;
        return map;
    }
    const double denom = opts.denominator == LinearDenominator::source ? ss_a : ss_b;
    if (denom == 0.0) {
        warn("estimate_linear: constant target sample, falling back to mean shift");
        map.omega = 1.0;
        map.beta = mb - ma;
        return map;
    }
    map.omega = cross / denom;
    map.beta = mb - map.omega * ma;
    return map;
}

// Pure translation a -> a + (m_b - m_a); the equal-variance special case.
inline AffineMap1D estimate_mean(std::span<const double> src, std::span<const double> tgt) {
    if (src.empty() || tgt.empty()) throw invalid_input("estimate_mean: empty input");
    detail::require_finite(src, "estimate_mean");
    detail::require_finite(tgt, "estimate_mean");
    AffineMap1D map;
    map.omega = 1.0;
    map.beta = mean_of(tgt) - mean_of(src);
    map.support = SupportBounds::observed(src);
    return map;
}

// Moment-matching map between two Gaussians:
//   omega = sigma_b / sigma_a,  beta = m_b - omega * m_a
// Standard deviations use divisor n (population).
inline AffineMap1D estimate_gaussian(std::span<const double> src, std::span<const double> tgt) {
    if (src.size() < 2 || tgt.size() < 2) throw invalid_input("estimate_gaussian: need n >= 2");
    detail::require_finite(src, "estimate_gaussian");
    detail::require_finite(tgt, "estimate_gaussian");
    const double sa = stddev_pop(src);
    if (sa == 0.0) throw degenerate_source("estimate_gaussian: source has zero variance");
    const double sb = stddev_pop(tgt);
    AffineMap1D map;
    map.omega = sb / sa;
    map.beta = mean_of(tgt) - map.omega * mean_of(src);
    map.support = SupportBounds::observed(src);
    return map;
}

// Exact empirical OT map under any submodular cost: pair sorted samples.
inline QuantileMap estimate_exact(std::span<const double> src, std::span<const double> tgt) {
    if (src.size() != tgt.size()) throw invalid_input("estimate_exact: length mismatch");
    if (src.size() < 2) throw invalid_input("estimate_exact: need n >= 2");
    detail::require_finite(src, "estimate_exact");
    detail::require_finite(tgt, "estimate_exact");
    return {detail::sorted_copy(src), detail::sorted_copy(tgt)};
}

// Target-quantile of the source-CDF: piecewise-linear between knots, clamped
// outside the observed source range. Knot inputs map to their paired target
// sample exactly (no interpolation arithmetic on hits).
inline double apply_exact(const QuantileMap& map, double a) {
    const auto& s = map.src_sorted;
    const auto& t = map.tgt_sorted;
    if (s.size() < 2 || s.size() != t.size()) throw invalid_input("apply_exact: invalid map");
    if (a <= s.front()) return t.front();
    if (a >= s.back()) return t.back();

    // Last index with s[idx] <= a.
    auto it = std::upper_bound(s.begin(), s.end(), a);
    auto idx = static_cast<std::size_t>(std::distance(s.begin(), it)) - 1;
    if (s[idx] == a) return t[idx];
    const double gap = s[idx + 1] - s[idx];
    const double frac = (a - s[idx]) / gap;
    return t[idx] + frac * (t[idx + 1] - t[idx]);
}

// Strength-controlled application with support gating. Out-of-support inputs
// pass through unchanged at every lambda.
inline double apply(const AffineMap1D& map, double a, Strength strength,
                    LambdaSemantics semantics = LambdaSemantics::interpolation) {
    if (!map.support.contains(a)) return a;
    const double l = strength.lambda;
    if (semantics == LambdaSemantics::interpolation)
        return (1.0 - l) * a + l * map.transport(a);
    return map.omega * a + l * map.beta;
}

// Eq.-style interpolation for the exact map: (1-l)*a + l*T*(a).
inline double apply(const QuantileMap& map, double a, Strength strength) {
    const double l = strength.lambda;
    return (1.0 - l) * a + l * apply_exact(map, a);
}

}  // namespace act
