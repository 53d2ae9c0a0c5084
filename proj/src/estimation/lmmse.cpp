// SPDX-License-Identifier: Apache-2.0
#include "ecc/estimation/lmmse.hpp"

#include <Eigen/Cholesky>
#include <fstream>

#include "ecc/io/binary.hpp"

namespace ecc::estimation {

namespace {

constexpr std::string_view kMagic = "ECCCOV1";

// Pivoted LDL^T of |x|^2 R + sigma^2 I, rejecting numerically singular systems.
Eigen::LDLT<CMatrix> factor(cdouble pilot, const CMatrix& R, double noise_variance, std::optional<std::size_t> n)
{
    auto where = [&] { return n ? " at subcarrier " + std::to_string(*n) : std::string(); };
    if (std::abs(pilot) == 0.0) throw std::invalid_argument("lmmse: zero pilot" + where());
    if (noise_variance < 0.0) throw std::invalid_argument("lmmse: negative noise variance" + where());
    if (R.rows() != R.cols()) throw std::invalid_argument("lmmse: covariance is not square" + where());
    const CMatrix A = std::norm(pilot) * R + noise_variance * CMatrix::Identity(R.rows(), R.cols());
    Eigen::LDLT<CMatrix> ldlt(A);
    const auto d = ldlt.vectorD().cwiseAbs();
    const double scale = std::max(d.maxCoeff(), std::numeric_limits<double>::min());
    if (ldlt.info() != Eigen::Success || d.minCoeff() <= 1e-13 * scale)
        throw SingularSystem("lmmse: singular system (|x|^2 R + sigma^2 I not invertible)" + where(), n);
    return ldlt;
}

} // namespace

CMatrix estimate_covariance(std::span<const CVector> realizations, double loading)
{
    if (realizations.empty()) throw std::invalid_argument("estimate_covariance: no realizations");
    const auto n = realizations.front().size();
    CMatrix R = CMatrix::Zero(n, n);
    for (const auto& h : realizations) {
        if (h.size() != n) throw std::invalid_argument("estimate_covariance: realizations differ in length");
        R.noalias() += h * h.adjoint();
    }
    R /= static_cast<double>(realizations.size());
    R += loading * CMatrix::Identity(n, n);
    return (R + R.adjoint()) / 2.0;
}

double default_loading(const CMatrix& raw) { return 1e-6 * raw.trace().real() / static_cast<double>(raw.rows()); }

CVector lmmse_solve(const CVector& y, cdouble pilot, const CMatrix& covariance, double noise_variance,
                    std::optional<std::size_t> subcarrier)
{
    if (y.size() != covariance.rows()) throw std::invalid_argument("lmmse: observation length differs from covariance");
    return factor(pilot, covariance, noise_variance, subcarrier).solve(std::conj(pilot) * y);
}

CVector lmmse_estimate(const CVector& y, cdouble pilot, const CMatrix& covariance, double noise_variance,
                       std::optional<std::size_t> subcarrier)
{
    return covariance * lmmse_solve(y, pilot, covariance, noise_variance, subcarrier);
}

double lmmse_mse(const CMatrix& covariance, double noise_variance)
{
    const auto n = covariance.rows();
    const CMatrix A = covariance + noise_variance * CMatrix::Identity(n, n);
    const CMatrix err = covariance - covariance * A.ldlt().solve(covariance);
    return err.trace().real();
}

CovarianceBank::CovarianceBank(std::size_t num_bs, std::size_t subcarriers, std::size_t antennas, std::uint64_t samples)
    : num_bs_(num_bs), subcarriers_(subcarriers), antennas_(antennas), samples_(samples),
      matrices_(num_bs * subcarriers, CMatrix::Zero(antennas, antennas))
{
}

bool operator==(const CovarianceBank& a, const CovarianceBank& b)
{
    if (a.num_bs_ != b.num_bs_ || a.subcarriers_ != b.subcarriers_ || a.antennas_ != b.antennas_ ||
        a.samples_ != b.samples_)
        return false;
    for (std::size_t i = 0; i < a.matrices_.size(); ++i)
        if (a.matrices_[i] != b.matrices_[i]) return false;
    return true;
}

CovarianceBank calibrate_bank(const channel::ScenarioConfig& cfg, std::uint64_t seed, std::size_t samples)
{
    if (samples == 0) throw std::invalid_argument("calibrate_bank: need at least one realization");
    const auto sites = channel::make_sites(cfg);
    const std::size_t nr = cfg.antennas();
    CovarianceBank bank(cfg.num_bs, cfg.subcarriers, nr, samples);
    for (std::size_t l = 0; l < cfg.num_bs; ++l) {
        std::vector<std::vector<CVector>> per_n(cfg.subcarriers);
        for (std::size_t i = 0; i < samples; ++i) {
            channel::Rng rng(channel::mix_seed(channel::mix_seed(seed, l), i));
            const auto ue = channel::sample_ue_position(cfg.region, rng);
            const auto paths = channel::synth_paths(cfg, ue, sites[l], rng);
            for (std::size_t n = 0; n < cfg.subcarriers; ++n) {
                const auto h = channel::channel_freq_response(paths, cfg.subcarrier_frequency(n), sites[l].array);
                per_n[n].push_back(Eigen::Map<const CVector>(h.data(), static_cast<Eigen::Index>(nr)));
            }
        }
        for (std::size_t n = 0; n < cfg.subcarriers; ++n) {
            const CMatrix raw = estimate_covariance(per_n[n], 0.0);
            bank.at(l, n) = estimate_covariance(per_n[n], default_loading(raw));
        }
    }
    return bank;
}

CsiTensor estimate_snapshot(const CsiTensor& observation, const std::vector<cdouble>& pilots,
                            const CovarianceBank& bank, std::size_t bs, double noise_variance)
{
    if (bs >= bank.num_bs() || observation.subcarriers() != bank.subcarriers() ||
        observation.antennas() != bank.antennas() || pilots.size() != observation.subcarriers())
        throw std::invalid_argument("estimate_snapshot: observation, pilots and covariance bank disagree in shape");
    CsiTensor est(observation.slots(), observation.antennas(), observation.subcarriers());
    const auto nr = static_cast<Eigen::Index>(observation.antennas());
    CVector y(nr);
    for (std::size_t n = 0; n < observation.subcarriers(); ++n) {
        const CMatrix& R = bank.at(bs, n);
        const auto ldlt = factor(pilots[n], R, noise_variance, n);
        for (std::size_t t = 0; t < observation.slots(); ++t) {
            for (Eigen::Index m = 0; m < nr; ++m) y(m) = observation(t, static_cast<std::size_t>(m), n);
            const CVector h = R * ldlt.solve(std::conj(pilots[n]) * y);
            for (Eigen::Index m = 0; m < nr; ++m) est(t, static_cast<std::size_t>(m), n) = h(m);
        }
    }
    return est;
}

void write_bank(std::ostream& out, const CovarianceBank& bank)
{
    io::put_magic(out, kMagic);
    io::put_le(out, static_cast<std::uint32_t>(bank.num_bs()));
    io::put_le(out, static_cast<std::uint32_t>(bank.subcarriers()));
    io::put_le(out, static_cast<std::uint32_t>(bank.antennas()));
    io::put_le(out, bank.calibration_samples());
    for (std::size_t l = 0; l < bank.num_bs(); ++l)
        for (std::size_t n = 0; n < bank.subcarriers(); ++n) {
            const CMatrix& R = bank.at(l, n);
            for (Eigen::Index i = 0; i < R.rows(); ++i)
                for (Eigen::Index j = 0; j < R.cols(); ++j) {
                    io::put_le(out, R(i, j).real());
                    io::put_le(out, R(i, j).imag());
                }
        }
}

CovarianceBank read_bank(std::istream& in)
{
    io::expect_magic(in, kMagic);
    const auto L = io::get_le<std::uint32_t>(in, "L");
    const auto nsc = io::get_le<std::uint32_t>(in, "N_sc");
    const auto nr = io::get_le<std::uint32_t>(in, "N_r");
    const auto samples = io::get_le<std::uint64_t>(in, "calibration samples");
    CovarianceBank bank(L, nsc, nr, samples);
    for (std::size_t l = 0; l < L; ++l)
        for (std::size_t n = 0; n < nsc; ++n) {
            CMatrix& R = bank.at(l, n);
            for (Eigen::Index i = 0; i < R.rows(); ++i)
                for (Eigen::Index j = 0; j < R.cols(); ++j) {
                    const double re = io::get_le<double>(in, "covariance");
                    const double im = io::get_le<double>(in, "covariance");
                    R(i, j) = cdouble(re, im);
                }
        }
    return bank;
}

void save_bank(const std::filesystem::path& path, const CovarianceBank& bank)
{
    std::ofstream out(path, std::ios::binary);
    if (!out) throw std::runtime_error("covariance: cannot open " + path.string());
    write_bank(out, bank);
}

CovarianceBank load_bank(const std::filesystem::path& path)
{
    std::ifstream in(path, std::ios::binary);
    if (!in) throw std::runtime_error("covariance: cannot open " + path.string());
    return read_bank(in);
}

} // namespace ecc::estimation
