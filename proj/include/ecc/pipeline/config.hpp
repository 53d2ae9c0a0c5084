// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <stdexcept>
#include <string>
#include <vector>

#include "ecc/channel/scenario.hpp"
#include "ecc/cloud/fusion.hpp"
#include "ecc/edge/encoder.hpp"

namespace ecc::pipeline {

class ConfigError : public std::invalid_argument {
public:
    using std::invalid_argument::invalid_argument;
};

struct EstimationConfig {
    std::size_t covariance_samples = 2000;
};

struct Stage1Settings {
    std::size_t epochs = 50;
    std::size_t samples_per_epoch = 256;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::size_t validation_period = 5;
    std::size_t validation_samples = 128;
};

struct Stage2Settings {
    std::size_t epochs = 40;
    std::size_t samples_per_epoch = 256;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    // Cosine decay from learning_rate to final_lr_fraction * learning_rate; 1 keeps it constant.
    double final_lr_fraction = 1.0;
    std::size_t validation_period = 5;
    std::size_t validation_samples = 128;
    bool freeze_encoders = false;  // split training: only the CU learns
    bool from_scratch = false;     // ignore Stage I encoders
    bool identity_quantizer = false;
};

struct QuantSettings {
    std::vector<int> bits{4, 10}; // 0 selects the identity (lossless embedding) reference
    double percentile = 99.0;
    std::size_t calibration_samples = 512;
};

struct EvalSettings {
    std::size_t test_samples = 500;
    std::size_t cdf_points = 101;
    std::size_t trajectory_points = 90;
    double trajectory_radius = 6.0;
    double trajectory_turns = 3.0;
};

// One schema shared by every CLI subcommand. Sections:
// [scenario] [estimation] [preprocess] [encoder] [cu] [train] [stage1] [stage2] [quant] [eval]
struct TrainConfig {
    channel::ScenarioConfig scenario = channel::ScenarioConfig::desk();
    EstimationConfig estimation;
    double norm_epsilon = 1e-8;
    double angle_epsilon = 1e-6;
    edge::EncoderConfig encoder;
    cloud::CuConfig cu;
    Stage1Settings stage1;
    Stage2Settings stage2;
    QuantSettings quant;
    EvalSettings eval;
    std::uint64_t seed = 1;

    // Copies shared dimensions into the encoder and CU configs and sets the
    // CU output map to the region center and half extent.
    void sync();
    void validate() const;
};

TrainConfig parse_config(const std::string& text);
TrainConfig load_config(const std::filesystem::path& path);
// Canonical INI rendering; parse_config(to_ini(c)) reproduces c.
std::string to_ini(const TrainConfig& cfg);

std::vector<int> parse_bits_list(const std::string& text);

} // namespace ecc::pipeline
