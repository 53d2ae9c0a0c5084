// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "ecc/pipeline/config.hpp"

namespace ecc::testing {

// Desk scenario with every count cut down so full runs take well under a second.
inline pipeline::TrainConfig tiny_config(std::uint64_t seed = 5)
{
    pipeline::TrainConfig c;
    c.seed = seed;
    c.estimation.covariance_samples = 60;
    c.encoder.width = 8;
    c.encoder.blocks = 1;
    c.cu.lstm_hidden = 8;
    c.cu.head_hidden = 16;
    c.stage1 = {.epochs = 2, .samples_per_epoch = 32, .batch_size = 16, .learning_rate = 1e-3,
                .validation_period = 1, .validation_samples = 16};
    c.stage2.epochs = 2;
    c.stage2.samples_per_epoch = 32;
    c.stage2.batch_size = 16;
    c.stage2.validation_period = 1;
    c.stage2.validation_samples = 16;
    c.quant.calibration_samples = 64;
    c.eval.test_samples = 20;
    c.eval.cdf_points = 11;
    c.eval.trajectory_points = 10;
    c.sync();
    c.validate();
    return c;
}

} // namespace ecc::testing
