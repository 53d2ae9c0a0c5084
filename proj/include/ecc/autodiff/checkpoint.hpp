// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <stdexcept>
#include <string>

#include "ecc/autodiff/param_set.hpp"

namespace ecc::ad {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Parameter checkpoint layout (little-endian):
//   "ECCPARAM" | version u8 | records until end of stream
//   record: name length u32 | name bytes | rank u32 | dims u64[rank] | f64 values
// Only values are stored; optimizer moments are not.
inline constexpr std::uint8_t kCheckpointVersion = 1;

// With a prefix, only parameters whose name starts with it are written.
// Names are stored in full and read back unchanged.
void write_checkpoint(std::ostream& out, const ParamSet& params, const std::string& prefix = {});
void save_checkpoint(const std::filesystem::path& path, const ParamSet& params, const std::string& prefix = {});

ParamSet read_checkpoint(std::istream& in);
ParamSet load_checkpoint(const std::filesystem::path& path);

} // namespace ecc::ad
