// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <array>
#include <bit>
#include <cstdint>
#include <cstring>
#include <istream>
#include <ostream>
#include <stdexcept>
#include <string>
#include <string_view>
#include <type_traits>

// Little-endian scalar I/O shared by the on-disk formats.
namespace ecc::io {

class FormatError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

template <typename T>
    requires std::is_arithmetic_v<T>
void put_le(std::ostream& out, T value)
{
    std::array<char, sizeof(T)> bytes;
    std::memcpy(bytes.data(), &value, sizeof(T));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    out.write(bytes.data(), sizeof(T));
}

template <typename T>
    requires std::is_arithmetic_v<T>
T get_le(std::istream& in, std::string_view what)
{
    std::array<char, sizeof(T)> bytes;
    if (!in.read(bytes.data(), sizeof(T))) throw FormatError("truncated input while reading " + std::string(what));
    if constexpr (std::endian::native == std::endian::big) std::reverse(bytes.begin(), bytes.end());
    T value;
    std::memcpy(&value, bytes.data(), sizeof(T));
    return value;
}

inline void put_magic(std::ostream& out, std::string_view magic) { out.write(magic.data(), magic.size()); }

inline void expect_magic(std::istream& in, std::string_view magic)
{
    std::string got(magic.size(), '\0');
    if (!in.read(got.data(), got.size()) || got != magic)
        throw FormatError("bad magic: expected '" + std::string(magic) + "'");
}

} // namespace ecc::io
