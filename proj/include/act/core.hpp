#pragma once

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <span>
#include <string>
#include <vector>

#include "act/errors.hpp"

namespace act {

// Dense row-major matrix of doubles. Small enough at desk scale that we keep
// value semantics throughout.
class Matrix {
public:
    Matrix() = default;
    Matrix(std::size_t rows, std::size_t cols, double fill = 0.0)
        : rows_(rows), cols_(cols), data_(rows * cols, fill) {}

    static Matrix from_rows(const std::vector<std::vector<double>>& rows) {
        if (rows.empty()) throw invalid_input("Matrix::from_rows: no rows");
        Matrix m(rows.size(), rows.front().size());
        for (std::size_t i = 0; i < rows.size(); ++i) {
            if (rows[i].size() != m.cols_)
                throw invalid_input("Matrix::from_rows: ragged rows");
            std::copy(rows[i].begin(), rows[i].end(), m.data_.begin() + static_cast<std::ptrdiff_t>(i * m.cols_));
        }
        return m;
    }

    std::size_t rows() const { return rows_; }
    std::size_t cols() const { return cols_; }

    double& at(std::size_t r, std::size_t c) { return data_[r * cols_ + c]; }
    double at(std::size_t r, std::size_t c) const { return data_[r * cols_ + c]; }

    std::span<double> row(std::size_t r) { return {data_.data() + r * cols_, cols_}; }
    std::span<const double> row(std::size_t r) const { return {data_.data() + r * cols_, cols_}; }

    std::vector<double> col(std::size_t c) const {
        std::vector<double> out(rows_);
        for (std::size_t r = 0; r < rows_; ++r) out[r] = at(r, c);
        return out;
    }

    std::span<const double> flat() const { return data_; }
    std::span<double> flat() { return data_; }

    bool all_finite() const {
        return std::all_of(data_.begin(), data_.end(), [](double v) { return std::isfinite(v); });
    }

private:
    std::size_t rows_ = 0;
    std::size_t cols_ = 0;
    std::vector<double> data_;
};

enum class PoolingMode { mean, max, last };

inline const char* to_string(PoolingMode mode) {
    switch (mode) {
        case PoolingMode::mean: return "mean";
        case PoolingMode::max: return "max";
        case PoolingMode::last: return "last";
    }
    return "mean";
}

inline PoolingMode pooling_from_string(const std::string& s) {
    if (s == "mean") return PoolingMode::mean;
    if (s == "max") return PoolingMode::max;
    if (s == "last") return PoolingMode::last;
    throw invalid_input("unknown pooling mode: " + s);
}

// Per-token activations of one layer on one input: K rows (tokens) x M columns.
struct TokenActivations {
    Matrix data;

    TokenActivations() = default;
    explicit TokenActivations(Matrix m) : data(std::move(m)) {
        if (data.rows() < 1) throw invalid_input("TokenActivations: need at least one token");
        if (!data.all_finite()) throw invalid_input("TokenActivations: non-finite entry");
    }

    std::size_t tokens() const { return data.rows(); }
    std::size_t width() const { return data.cols(); }
};

// n samples x M activations for one layer, already pooled over tokens. This is
// the empirical distribution one estimator consumes.
struct ActivationMatrix {
    Matrix data;
    int layer_id = 0;
    PoolingMode pooling = PoolingMode::mean;

    ActivationMatrix() = default;
    ActivationMatrix(Matrix m, int layer, PoolingMode mode = PoolingMode::mean)
        : data(std::move(m)), layer_id(layer), pooling(mode) {
        if (data.rows() < 2) throw invalid_input("ActivationMatrix: need n >= 2 samples");
        if (!data.all_finite()) throw invalid_input("ActivationMatrix: non-finite entry");
    }

    std::size_t samples() const { return data.rows(); }
    std::size_t width() const { return data.cols(); }
};

// Reduce K token rows to one M-vector. Accumulation is always double precision
// since downstream estimators divide by small centered sums.
inline std::vector<double> pool(const TokenActivations& tokens, PoolingMode mode) {
    const Matrix& z = tokens.data;
    if (z.rows() == 0 || z.cols() == 0) throw invalid_input("pool: empty token matrix");
    const std::size_t k = z.rows(), m = z.cols();
    std::vector<double> out(m);
    switch (mode) {
        case PoolingMode::mean:
            for (std::size_t c = 0; c < m; ++c) {
                double sum = 0.0;
                for (std::size_t r = 0; r < k; ++r) sum += z.at(r, c);
                out[c] = sum / static_cast<double>(k);
            }
            break;
        case PoolingMode::max:
            for (std::size_t c = 0; c < m; ++c) {
                double best = z.at(0, c);
                for (std::size_t r = 1; r < k; ++r) best = std::max(best, z.at(r, c));
                out[c] = best;
            }
            break;
        case PoolingMode::last: {
            auto last = z.row(k - 1);
            out.assign(last.begin(), last.end());
            break;
        }
    }
    return out;
}

inline double mean_of(std::span<const double> v) {
    if (v.empty()) throw invalid_input("mean_of: empty vector");
    double sum = 0.0;
    for (double x : v) sum += x;
    return sum / static_cast<double>(v.size());
}

// Population standard deviation (divisor n).
inline double stddev_pop(std::span<const double> v) {
    double m = mean_of(v);
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    return std::sqrt(ss / static_cast<double>(v.size()));
}

}  // namespace act
