// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Cholesky>
#include <Eigen/Eigenvalues>
#include <cmath>
#include <random>
#include <sstream>

#include "ecc/estimation/lmmse.hpp"

using namespace ecc;
using namespace ecc::estimation;

namespace {

// Hermitian positive definite matrix with a spread spectrum.
CMatrix random_covariance(std::size_t n, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, 1.0);
    CMatrix A(n, n);
    for (Eigen::Index i = 0; i < A.size(); ++i) A.data()[i] = cdouble(g(rng), g(rng));
    CMatrix R = A * A.adjoint() / static_cast<double>(n);
    R += 0.05 * CMatrix::Identity(n, n);
    return R;
}

CVector cscg(const CMatrix& chol_lower, std::mt19937_64& rng)
{
    std::normal_distribution<double> g(0.0, std::sqrt(0.5));
    CVector w(chol_lower.rows());
    for (auto& v : w) v = cdouble(g(rng), g(rng));
    return chol_lower * w;
}

} // namespace

TEST_CASE("LMMSE Monte Carlo error matches the closed form and beats least squares")
{
    constexpr std::size_t kNr = 4;
    constexpr int kDraws = 10000;
    std::mt19937_64 rng(2718);
    const CMatrix R = random_covariance(kNr, rng);
    const CMatrix L = R.llt().matrixL();
    std::normal_distribution<double> g(0.0, 1.0);

    for (double sigma2 : {0.01, 0.1, 1.0}) {
        // Oracle written directly from the error covariance R - R (R + s I)^-1 R.
        const CMatrix K = R + sigma2 * CMatrix::Identity(kNr, kNr);
        const double oracle = (R - R * K.inverse() * R).trace().real();
        CHECK(lmmse_mse(R, sigma2) == doctest::Approx(oracle).epsilon(1e-10));

        double lmmse_acc = 0.0, diff_acc = 0.0, diff_sq = 0.0;
        for (int i = 0; i < kDraws; ++i) {
            const CVector h = cscg(L, rng);
            CVector w(kNr);
            for (auto& v : w) v = cdouble(g(rng), g(rng)) * std::sqrt(sigma2 / 2.0);
            const CVector y = h + w;
            const double e_lmmse = (lmmse_estimate(y, 1.0, R, sigma2) - h).squaredNorm();
            const double e_ls = (y - h).squaredNorm();
            lmmse_acc += e_lmmse;
            diff_acc += e_ls - e_lmmse;
            diff_sq += (e_ls - e_lmmse) * (e_ls - e_lmmse);
        }
        const double mse = lmmse_acc / kDraws;
        INFO("sigma2 = " << sigma2 << ", empirical " << mse << ", oracle " << oracle);
        CHECK(std::abs(mse - oracle) <= 0.05 * oracle);

        const double mean_diff = diff_acc / kDraws;
        const double se = std::sqrt((diff_sq / kDraws - mean_diff * mean_diff) / kDraws);
        CHECK(mean_diff >= -3.0 * se);
    }
}

TEST_CASE("LMMSE with a non-unit pilot")
{
    std::mt19937_64 rng(3);
    const CMatrix R = random_covariance(3, rng);
    const cdouble x = std::polar(1.7, -0.6);
    CVector y(3);
    y << cdouble(0.2, 0.1), cdouble(-1.0, 0.4), cdouble(0.3, -0.8);
    const double s2 = 0.3;
    const CMatrix K = std::norm(x) * R + s2 * CMatrix::Identity(3, 3);
    const CVector expected = R * std::conj(x) * K.inverse() * y;
    CHECK((lmmse_estimate(y, x, R, s2) - expected).norm() < 1e-12);
    // Noiseless, invertible R: the estimate collapses to y / x.
    CHECK((lmmse_estimate(y, x, R, 0.0) - y / x).norm() < 1e-10);
}

TEST_CASE("LMMSE error reporting")
{
    const CMatrix zero = CMatrix::Zero(2, 2);
    CVector y = CVector::Ones(2);
    try {
        lmmse_estimate(y, 1.0, zero, 0.0, 5);
        FAIL("expected SingularSystem");
    } catch (const SingularSystem& e) {
        REQUIRE(e.subcarrier().has_value());
        CHECK(*e.subcarrier() == 5);
    }
    CHECK_THROWS(lmmse_estimate(y, 0.0, CMatrix::Identity(2, 2), 0.1));
    CHECK_THROWS(lmmse_estimate(y, 1.0, CMatrix::Identity(3, 3), 0.1));
}

TEST_CASE("sample covariance")
{
    std::vector<CVector> hs;
    CVector a(2), b(2);
    a << cdouble(1, 0), cdouble(0, 1);
    b << cdouble(0, 2), cdouble(1, 0);
    hs = {a, b};
    const CMatrix R = estimate_covariance(hs, 0.0);
    const CMatrix expected = (a * a.adjoint() + b * b.adjoint()) / 2.0;
    CHECK((R - expected).norm() < 1e-15);
    CHECK((R - R.adjoint()).norm() == 0.0);

    const CMatrix loaded = estimate_covariance(hs, 0.5);
    CHECK((loaded - expected - 0.5 * CMatrix::Identity(2, 2)).norm() < 1e-15);
    CHECK(default_loading(expected) == doctest::Approx(1e-6 * expected.trace().real() / 2.0));
}

TEST_CASE("covariance bank calibration and file round trip")
{
    const auto cfg = channel::ScenarioConfig::desk();
    const auto bank = calibrate_bank(cfg, 11, 40);
    CHECK(bank.num_bs() == cfg.num_bs);
    CHECK(bank.subcarriers() == cfg.subcarriers);
    CHECK(bank.antennas() == cfg.antennas());
    for (std::size_t l = 0; l < bank.num_bs(); ++l)
        for (std::size_t n = 0; n < bank.subcarriers(); ++n) {
            const auto& R = bank.at(l, n);
            CHECK((R - R.adjoint()).norm() == 0.0);
            Eigen::SelfAdjointEigenSolver<CMatrix> es(R);
            CHECK(es.eigenvalues().minCoeff() > 0.0);
        }
    CHECK(calibrate_bank(cfg, 11, 40) == bank);

    std::stringstream buf;
    write_bank(buf, bank);
    CHECK(read_bank(buf) == bank);
    std::stringstream bad("XXXXXXX");
    CHECK_THROWS(read_bank(bad));
}

TEST_CASE("snapshot estimation reduces error relative to the raw observation")
{
    auto cfg = channel::ScenarioConfig::desk();
    cfg.noise_variance = 0.05;
    const auto sites = channel::make_sites(cfg);
    const auto bank = calibrate_bank(cfg, 21, 500);
    const auto pilots = channel::default_pilots(cfg);
    double raw = 0.0, est = 0.0;
    for (std::uint64_t s = 0; s < 40; ++s) {
        const auto snap = channel::make_snapshot(cfg, sites, s);
        for (std::size_t l = 0; l < cfg.num_bs; ++l) {
            const auto H = estimate_snapshot(snap.observations[l], pilots, bank, l, cfg.noise_variance);
            for (std::size_t i = 0; i < H.size(); ++i) {
                est += std::norm(H.values()[i] - snap.channels[l].values()[i]);
                raw += std::norm(snap.observations[l].values()[i] - snap.channels[l].values()[i]);
            }
        }
    }
    CHECK(est < raw);
}
