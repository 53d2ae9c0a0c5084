// SPDX-License-Identifier: Apache-2.0
#include "ecc/channel/dataset.hpp"

#include <fstream>

#include "ecc/channel/channel.hpp"
#include "ecc/io/binary.hpp"

namespace ecc::channel {

namespace {
constexpr std::string_view kMagic = "ECCDATA1";
}

Dataset generate_dataset(const ScenarioConfig& cfg, std::uint64_t seed, std::size_t count)
{
    const auto sites = make_sites(cfg);
    Dataset data;
    data.header = {static_cast<std::uint32_t>(cfg.num_bs), static_cast<std::uint32_t>(cfg.slots),
                   static_cast<std::uint32_t>(cfg.antennas()), static_cast<std::uint32_t>(cfg.subcarriers),
                   count, cfg.noise_variance, seed};
    data.records.reserve(count);
    for (std::size_t i = 0; i < count; ++i) {
        auto snap = make_snapshot(cfg, sites, mix_seed(seed, i));
        data.records.push_back({snap.position, std::move(snap.observations)});
    }
    return data;
}

void write_dataset(std::ostream& out, const Dataset& data)
{
    const auto& h = data.header;
    if (h.count != data.records.size()) throw std::invalid_argument("dataset: header count differs from records");
    io::put_magic(out, kMagic);
    io::put_le(out, h.num_bs);
    io::put_le(out, h.slots);
    io::put_le(out, h.antennas);
    io::put_le(out, h.subcarriers);
    io::put_le(out, h.count);
    io::put_le(out, h.noise_variance);
    io::put_le(out, h.seed);
    for (const auto& rec : data.records) {
        if (rec.observations.size() != h.num_bs) throw std::invalid_argument("dataset: record has wrong BS count");
        for (double c : rec.position) io::put_le(out, c);
        for (const auto& Y : rec.observations) {
            if (Y.slots() != h.slots || Y.antennas() != h.antennas || Y.subcarriers() != h.subcarriers)
                throw std::invalid_argument("dataset: observation shape differs from header");
            for (const auto& v : Y.values()) {
                io::put_le(out, static_cast<float>(v.real()));
                io::put_le(out, static_cast<float>(v.imag()));
            }
        }
    }
}

Dataset read_dataset(std::istream& in)
{
    Dataset data;
    auto& h = data.header;
    io::expect_magic(in, kMagic);
    h.num_bs = io::get_le<std::uint32_t>(in, "L");
    h.slots = io::get_le<std::uint32_t>(in, "T");
    h.antennas = io::get_le<std::uint32_t>(in, "N_r");
    h.subcarriers = io::get_le<std::uint32_t>(in, "N_sc");
    h.count = io::get_le<std::uint64_t>(in, "sample count");
    h.noise_variance = io::get_le<double>(in, "noise variance");
    h.seed = io::get_le<std::uint64_t>(in, "seed");
    data.records.resize(h.count);
    for (auto& rec : data.records) {
        for (double& c : rec.position) c = io::get_le<double>(in, "position");
        for (std::uint32_t l = 0; l < h.num_bs; ++l) {
            CsiTensor Y(h.slots, h.antennas, h.subcarriers);
            for (auto& v : Y.values()) {
                const float re = io::get_le<float>(in, "observation");
                const float im = io::get_le<float>(in, "observation");
                v = cdouble(re, im);
            }
            rec.observations.push_back(std::move(Y));
        }
    }
    return data;
}

void save_dataset(const std::filesystem::path& path, const Dataset& data)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("dataset: cannot open " + path.string());
    write_dataset(out, data);
    if (!out) throw std::runtime_error("dataset: write failed for " + path.string());
}

Dataset load_dataset(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("dataset: cannot open " + path.string());
    return read_dataset(in);
}

} // namespace ecc::channel
