// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <string>

#include "ecc/autodiff/param_set.hpp"

namespace ecc::ad {

struct AdamConfig {
    double learning_rate = 1e-3;
    double beta1 = 0.9;
    double beta2 = 0.999;
    double epsilon = 1e-8;
};

// One bias-corrected Adam update using the accumulated Parameter::grad.
// Every gradient is checked before anything is written, so a rejected step
// leaves the set untouched. Parameters whose name starts with one of
// `frozen_prefixes` keep their values.
void adam_step(ParamSet& params, const AdamConfig& cfg, const std::vector<std::string>& frozen_prefixes = {});

} // namespace ecc::ad
