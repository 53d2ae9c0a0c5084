// SPDX-License-Identifier: Apache-2.0
#include "ecc/autodiff/checkpoint.hpp"

#include <fstream>

#include "ecc/io/binary.hpp"

namespace ecc::ad {

namespace {
constexpr std::string_view kMagic = "ECCPARAM";
}

void write_checkpoint(std::ostream& out, const ParamSet& params, const std::string& prefix)
{
    io::put_magic(out, kMagic);
    io::put_le<std::uint8_t>(out, kCheckpointVersion);
    for (const auto& [name, p] : params) {
        if (!name.starts_with(prefix)) continue;
        io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(name.size()));
        out.write(name.data(), static_cast<std::streamsize>(name.size()));
        io::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(p.value.rank()));
        for (auto d : p.value.shape()) io::put_le<std::uint64_t>(out, d);
        for (double v : p.value.values()) io::put_le<double>(out, v);
    }
}

void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const std::string& prefix)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("checkpoint: cannot open " + path.string() + " for writing");
    write_checkpoint(out, params, prefix);
    if (!out) throw std::runtime_error("checkpoint: write failed for " + path.string());
}

ParamSet read_checkpoint(std::istream& in)
{
    try {
        io::expect_magic(in, kMagic);
        const auto version = io::get_le<std::uint8_t>(in, "version");
        if (version != kCheckpointVersion)
            throw FormatError("checkpoint: unsupported version " + std::to_string(version));
        ParamSet params;
        while (in.peek() != std::char_traits<char>::eof()) {
            const auto len = io::get_le<std::uint32_t>(in, "name length");
            std::string name(len, '\0');
            if (!in.read(name.data(), len)) throw FormatError("checkpoint: truncated name");
            const auto rank = io::get_le<std::uint32_t>(in, "rank");
            Shape shape(rank);
            for (auto& d : shape) d = io::get_le<std::uint64_t>(in, "dimension");
            std::vector<double> values(shape_size(shape));
            for (auto& v : values) v = io::get_le<double>(in, "value");
            params.add(name, Tensor(std::move(shape), std::move(values)));
        }
        return params;
    } catch (const io::FormatError& e) {
        throw FormatError(std::string("checkpoint: ") + e.what());
    }
}

ParamSet load_checkpoint(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("checkpoint: cannot open " + path.string());
    return read_checkpoint(in);
}

} // namespace ecc::ad
