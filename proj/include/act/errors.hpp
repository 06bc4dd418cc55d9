#pragma once

#include <cstdio>
#include <stdexcept>
#include <string>

namespace act {

struct error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Malformed arguments: size mismatches, empty inputs, out-of-range quantiles.
struct invalid_input : error {
    using error::error;
};

// Bad wiring: unknown layer ids, unknown estimator names, width mismatches.
struct config_error : error {
    using error::error;
};

// Source samples carry no usable signal (zero variance).
struct degenerate_source : error {
    using error::error;
};

// Classifier fit produced a null direction (identical classes).
struct degenerate_classifier : error {
    using error::error;
};

// Folding requested for a support-gated map.
struct fold_unsupported : error {
    using error::error;
};

struct io_error : error {
    using error::error;
};

// Non-fatal diagnostics (e.g. dead-neuron fallbacks) are routed here so
// embedders can silence or redirect them.
using warn_fn = void (*)(const std::string&);

inline warn_fn& warn_handler() {
    static warn_fn handler = [](const std::string& msg) {
        std::fprintf(stderr, "warning: %s\n", msg.c_str());
    };
    return handler;
}

inline void warn(const std::string& msg) {
    if (warn_handler()) warn_handler()(msg);
}

}  // namespace act
