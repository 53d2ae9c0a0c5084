// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <vector>

#include "ecc/channel/scenario.hpp"
#include "ecc/csi_tensor.hpp"

namespace ecc::channel {

// Pilot-observation dataset file, little-endian:
//   "ECCDATA1" | L u32 | T u32 | N_r u32 | N_sc u32 | count u64 | noise variance f64 | seed u64
//   per record: UE position 3 x f64, then per BS the observation tensor as
//   interleaved (re, im) f32 pairs, t-major, then m, then n.
struct DatasetHeader {
    std::uint32_t num_bs = 0;
    std::uint32_t slots = 0;
    std::uint32_t antennas = 0;
    std::uint32_t subcarriers = 0;
    std::uint64_t count = 0;
    double noise_variance = 0.0;
    std::uint64_t seed = 0;

    friend bool operator==(const DatasetHeader&, const DatasetHeader&) = default;
};

struct DatasetRecord {
    Vec3 position{};
    std::vector<CsiTensor> observations;
};

struct Dataset {
    DatasetHeader header;
    std::vector<DatasetRecord> records;
};

// Records generated from the scenario with per-sample seeds mix_seed(seed, i).
Dataset generate_dataset(const ScenarioConfig& cfg, std::uint64_t seed, std::size_t count);

void write_dataset(std::ostream& out, const Dataset& data);
Dataset read_dataset(std::istream& in);
void save_dataset(const std::filesystem::path& path, const Dataset& data);
Dataset load_dataset(const std::filesystem::path& path);

} // namespace ecc::channel
