// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <span>
#include <stdexcept>
#include <vector>

#include "ecc/channel/channel.hpp"
#include "ecc/csi_tensor.hpp"

namespace ecc::estimation {

using CMatrix = Eigen::MatrixXcd;
using CVector = Eigen::VectorXcd;

class SingularSystem : public std::runtime_error {
public:
    SingularSystem(const std::string& what, std::optional<std::size_t> subcarrier)
        : std::runtime_error(what), subcarrier_(subcarrier)
    {
    }
    std::optional<std::size_t> subcarrier() const { return subcarrier_; }

private:
    std::optional<std::size_t> subcarrier_;
};

// (1/N) sum h h^H + loading * I, symmetrized to be exactly Hermitian.
CMatrix estimate_covariance(std::span<const CVector> realizations, double loading);

// Loading of 1e-6 * trace(R) / N_r.
double default_loading(const CMatrix& raw);

// h-hat = R x* (|x|^2 R + sigma^2 I)^{-1} y via a pivoted Hermitian LDL^T
// solve. `subcarrier` only labels errors.
CVector lmmse_estimate(const CVector& y, cdouble pilot, const CMatrix& covariance, double noise_variance,
                       std::optional<std::size_t> subcarrier = std::nullopt);

// Solve residual helper: returns s with (|x|^2 R + sigma^2 I) s = x* y; h-hat = R s.
CVector lmmse_solve(const CVector& y, cdouble pilot, const CMatrix& covariance, double noise_variance,
                    std::optional<std::size_t> subcarrier = std::nullopt);

// Closed-form per-vector MSE trace(R - R (R + sigma^2 I)^{-1} R) for |x| = 1.
double lmmse_mse(const CMatrix& covariance, double noise_variance);

// Long-term channel covariance per (BS l, subcarrier n).
class CovarianceBank {
public:
    CovarianceBank() = default;
    CovarianceBank(std::size_t num_bs, std::size_t subcarriers, std::size_t antennas, std::uint64_t samples);

    const CMatrix& at(std::size_t bs, std::size_t n) const { return matrices_[bs * subcarriers_ + n]; }
    CMatrix& at(std::size_t bs, std::size_t n) { return matrices_[bs * subcarriers_ + n]; }

    std::size_t num_bs() const { return num_bs_; }
    std::size_t subcarriers() const { return subcarriers_; }
    std::size_t antennas() const { return antennas_; }
    std::uint64_t calibration_samples() const { return samples_; }

    friend bool operator==(const CovarianceBank& a, const CovarianceBank& b);

private:
    std::size_t num_bs_ = 0;
    std::size_t subcarriers_ = 0;
    std::size_t antennas_ = 0;
    std::uint64_t samples_ = 0;
    std::vector<CMatrix> matrices_;
};

// Calibrates from clean channels at `samples` independent UE positions per BS.
CovarianceBank calibrate_bank(const channel::ScenarioConfig& cfg, std::uint64_t seed, std::size_t samples);

// Per-(t, n) LMMSE over one BS's observation tensor.
CsiTensor estimate_snapshot(const CsiTensor& observation, const std::vector<cdouble>& pilots,
                            const CovarianceBank& bank, std::size_t bs, double noise_variance);

// File layout, little-endian: "ECCCOV1" | L u32 | N_sc u32 | N_r u32 | samples u64 |
// per (l, n), l-major: N_r x N_r matrix, row-major, interleaved (re, im) f64.
void write_bank(std::ostream& out, const CovarianceBank& bank);
CovarianceBank read_bank(std::istream& in);
void save_bank(const std::filesystem::path& path, const CovarianceBank& bank);
CovarianceBank load_bank(const std::filesystem::path& path);

} // namespace ecc::estimation
