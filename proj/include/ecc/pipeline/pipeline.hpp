// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <vector>

#include "ecc/autodiff/param_set.hpp"
#include "ecc/channel/channel.hpp"
#include "ecc/estimation/lmmse.hpp"
#include "ecc/pipeline/config.hpp"

namespace ecc::pipeline {

// Seed streams; every sample seed is mix_seed(mix_seed(mix_seed(seed, stream), epoch), index).
enum class Stream : std::uint64_t {
    covariance = 1,
    stage1_train = 2,
    stage1_validation = 3,
    calibration = 4,
    stage2_train = 5,
    stage2_validation = 6,
    test = 7,
    trajectory = 8,
};

std::uint64_t stream_seed(std::uint64_t seed, Stream stream, std::uint64_t epoch = 0);

// One labeled snapshot after LMMSE estimation and preprocessing.
struct Sample {
    channel::Vec3 position{};
    std::vector<CsiTensor> estimates; // per BS, H-hat
    std::vector<ad::Tensor> features; // per BS, N_sc x 2 T N_r encoder input
    std::vector<double> gains;        // per BS, g
};

Sample make_sample(const TrainConfig& cfg, const std::vector<channel::BsSite>& sites,
                   const estimation::CovarianceBank& bank, const channel::Vec3& position,
                   const std::vector<CsiTensor>& observations);
Sample make_sample(const TrainConfig& cfg, const std::vector<channel::BsSite>& sites,
                   const estimation::CovarianceBank& bank, std::uint64_t sample_seed);
std::vector<Sample> make_samples(const TrainConfig& cfg, const estimation::CovarianceBank& bank, Stream stream,
                                 std::uint64_t epoch, std::size_t count);

estimation::CovarianceBank calibrate_covariance(const TrainConfig& cfg);

struct Stage1Record {
    std::size_t bs = 0;
    std::size_t epoch = 0; // 1-based count of completed epochs
    double train_loss = 0.0;
    double validation_loss = 0.0;
};

// Optional per-validation hook: receives the record and the current encoder + decoder.
using Stage1Hook = std::function<void(const Stage1Record&, const ad::ParamSet&)>;

struct Stage1Result {
    ad::ParamSet encoders; // every bs{l}/enc/... parameter
    std::vector<Stage1Record> history;
};

// Self-supervised training of every BS autoencoder; decoders are discarded.
Stage1Result run_stage1(const TrainConfig& cfg, const estimation::CovarianceBank& bank, const Stage1Hook& hook = {});

// Latent coefficients of BS `bs` over the given samples.
std::vector<double> collect_latents(const ad::ParamSet& encoders, const TrainConfig& cfg, std::size_t bs,
                                    const std::vector<Sample>& samples);

// Per-BS step sizes from the calibration stream.
std::vector<double> calibrate_quantizer(const ad::ParamSet& encoders, const TrainConfig& cfg,
                                        const estimation::CovarianceBank& bank, int bits);

// Quantizer attached to a trained model: bits == 0 means identity.
struct QuantSpec {
    int bits = 0;
    std::vector<double> steps; // one per BS
    bool identity() const { return bits == 0; }
};

struct Stage2Record {
    std::size_t epoch = 0; // 0 = before the first update
    double loss = 0.0;     // validation WMSE
    double mean_error = 0.0;
    double e90 = 0.0;
};

using Stage2Hook = std::function<void(const Stage2Record&, const ad::ParamSet&)>;

struct Stage2Result {
    ad::ParamSet params; // encoders and CU
    std::vector<Stage2Record> history;
};

// End-to-end training. `encoders` holds Stage I parameters, or is ignored
// when cfg.stage2.from_scratch is set.
Stage2Result run_stage2(const TrainConfig& cfg, const estimation::CovarianceBank& bank, const ad::ParamSet& encoders,
                        const QuantSpec& quant, const Stage2Hook& hook = {});

// Batched model forward (no codec framing) for a set of samples; returns final estimates.
std::vector<channel::Vec3> predict(const ad::ParamSet& params, const TrainConfig& cfg, const QuantSpec& quant,
                                   const std::vector<Sample>& samples);

// Per-BS payload of one sample through the real codec: encode -> messages.
std::vector<fronthaul::FronthaulMessage> edge_messages(const ad::ParamSet& params, const TrainConfig& cfg,
                                                       const QuantSpec& quant, const Sample& sample,
                                                       std::uint64_t snapshot_id);

// Full edge -> fronthaul -> CU path for one sample.
cloud::PositionEstimate localize(const ad::ParamSet& params, const TrainConfig& cfg, const QuantSpec& quant,
                                 const Sample& sample, std::uint64_t snapshot_id = 0);

// Step-size files: one line "bs,bits,step" per BS after a header.
void save_quant_spec(const std::filesystem::path& path, const QuantSpec& spec);
QuantSpec load_quant_spec(const std::filesystem::path& path);

} // namespace ecc::pipeline
