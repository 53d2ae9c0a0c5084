// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <stdexcept>
#include <vector>

namespace ecc {

using cdouble = std::complex<double>;

// Complex CSI block indexed (t, m, n): slot, antenna, subcarrier, t-major.
// Indices are zero-based.
class CsiTensor {
public:
    CsiTensor() = default;
    CsiTensor(std::size_t slots, std::size_t antennas, std::size_t subcarriers)
        : slots_(slots), antennas_(antennas), subcarriers_(subcarriers), data_(slots * antennas * subcarriers)
    {
    }

    std::size_t slots() const { return slots_; }
    std::size_t antennas() const { return antennas_; }
    std::size_t subcarriers() const { return subcarriers_; }
    std::size_t size() const { return data_.size(); }

    std::size_t offset(std::size_t t, std::size_t m, std::size_t n) const
    {
        return (t * antennas_ + m) * subcarriers_ + n;
    }
    cdouble& operator()(std::size_t t, std::size_t m, std::size_t n) { return data_[offset(t, m, n)]; }
    cdouble operator()(std::size_t t, std::size_t m, std::size_t n) const { return data_[offset(t, m, n)]; }

    std::span<cdouble> values() { return data_; }
    std::span<const cdouble> values() const { return data_; }

    bool same_shape(const CsiTensor& o) const
    {
        return slots_ == o.slots_ && antennas_ == o.antennas_ && subcarriers_ == o.subcarriers_;
    }

    friend bool operator==(const CsiTensor&, const CsiTensor&) = default;

private:
    std::size_t slots_ = 0;
    std::size_t antennas_ = 0;
    std::size_t subcarriers_ = 0;
    std::vector<cdouble> data_;
};

} // namespace ecc
