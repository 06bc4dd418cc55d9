#pragma once

// Umbrella header for the activation-transport toolkit.

#include "act/baselines.hpp"
#include "act/core.hpp"
#include "act/errors.hpp"
#include "act/eval.hpp"
#include "act/io.hpp"
#include "act/logistic.hpp"
#include "act/metrics.hpp"
#include "act/model.hpp"
#include "act/pipeline.hpp"
#include "act/rng.hpp"
#include "act/toymodel.hpp"
#include "act/transport.hpp"
