// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "ecc/eval/metrics.hpp"
#include "ecc/pipeline/pipeline.hpp"

namespace ecc::eval {

struct Model {
    ad::ParamSet params;
    pipeline::QuantSpec quant;
};

struct EvalReport {
    int bits = 0; // 0 = lossless-embedding reference
    std::vector<channel::Vec3> truth;
    std::vector<channel::Vec3> estimates;
    std::vector<double> errors;
    double mean_error = 0.0;
    double e90 = 0.0;
    std::vector<std::pair<double, double>> cdf;
    double eta = 0.0;       // D Q / (64 T N_r N_sc), 1 for the reference row
    double eta_total = 0.0; // including the gain field
    std::string config_echo;
};

// Payload ratios recomputed from the configured dimensions.
std::pair<double, double> payload_ratios(const pipeline::TrainConfig& cfg, int bits);

// Each sample goes through the edge encoder, fronthaul messages and CU inference.
EvalReport evaluate(const Model& model, const pipeline::TrainConfig& cfg, const std::vector<pipeline::Sample>& test);

struct TradeoffRow {
    int bits = 0;
    double eta = 0.0;
    double mean_error = 0.0;
    double e90 = 0.0;
};

std::vector<TradeoffRow> tradeoff_table(const std::vector<EvalReport>& reports);

struct TrajectoryReport {
    std::vector<channel::Vec3> points;
    std::vector<channel::Vec3> estimates;
    std::vector<double> errors;
    double mean_error = 0.0;
};

// Spiral around the region center: angle 2 pi turns t, radius r, height ramping
// linearly from z_min to z_max, t in [0, 1] over `count` points. The first
// point is center + (r, 0, z_min - center_z).
std::vector<channel::Vec3> spiral_trajectory(const pipeline::TrainConfig& cfg, std::size_t count);

TrajectoryReport trajectory_eval(const Model& model, const pipeline::TrainConfig& cfg,
                                 const estimation::CovarianceBank& bank);

// Writes <dir>/errors.csv, cdf.csv and summary.txt. Byte-identical on re-emission.
void emit_reports(const EvalReport& report, const std::filesystem::path& dir);
void emit_tradeoff(const std::vector<TradeoffRow>& rows, const std::filesystem::path& path);
void emit_trajectory(const TrajectoryReport& report, const std::filesystem::path& dir);
void emit_stage2_metrics(const std::vector<pipeline::Stage2Record>& history, const std::filesystem::path& path);
void emit_stage1_metrics(const std::vector<pipeline::Stage1Record>& history, const std::filesystem::path& path);

// Reads back a per-sample errors.csv and returns its error column.
std::vector<double> read_errors_csv(const std::filesystem::path& path);

std::string summary_text(const EvalReport& report);

} // namespace ecc::eval
