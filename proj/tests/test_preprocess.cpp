// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "ecc/preprocess/preprocess.hpp"

using namespace ecc;
using namespace ecc::preprocess;

namespace {

CsiTensor random_csi(std::size_t T, std::size_t M, std::size_t N, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    std::normal_distribution<double> g(0.0, 1.0);
    CsiTensor h(T, M, N);
    for (auto& v : h.values()) v = cdouble(g(rng), g(rng));
    return h;
}

double wrap(double a) { return std::remainder(a, 2.0 * std::numbers::pi); }

} // namespace

TEST_CASE("stacking and reshaping round trip exactly")
{
    const auto h = random_csi(3, 4, 5, 1);
    const auto S = stack_complex(h);
    CHECK(S.shape() == ad::Shape{3, 4, 5, 2});
    CHECK(unstack_complex(S) == h);
    const auto X = reshape_flatten(S);
    CHECK(X.shape() == ad::Shape{12, 5, 2});
    CHECK(reshape_unflatten(X, 3, 4) == S);
    // X[t N_r + m, n, c] = B[t, m, n, c]
    CHECK(X[((2 * 4 + 1) * 5 + 3) * 2 + 1] == h(2, 1, 3).imag());
    const auto F = to_features(X);
    CHECK(F.shape() == ad::Shape{5, 24});
    CHECK(F.at(3, 2 * (2 * 4 + 1) + 0) == h(2, 1, 3).real());
    CHECK(from_features(F, 12) == X);
    CHECK_THROWS_AS(reshape_unflatten(X, 5, 4), ad::ShapeError);
}

TEST_CASE("gain and normalization")
{
    const auto h = random_csi(2, 2, 8, 2);
    double e = 0.0;
    for (auto v : h.values()) e += std::norm(v);
    const double g = gain_indicator(h);
    CHECK(g == doctest::Approx(std::sqrt(e)));
    const auto n = normalize(h, g);
    CHECK(gain_indicator(n) == doctest::Approx(g / (g + kNormEpsilon)));
    CsiTensor zero(1, 2, 3);
    CHECK(gain_indicator(normalize(zero, 0.0)) == 0.0);
}

TEST_CASE("phase stabilization")
{
    const auto h = random_csi(2, 4, 8, 3);
    const std::size_t ref = select_ref_antenna(h);
    const auto s = phase_stabilize(h, ref);
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t n = 0; n < 8; ++n) {
            CHECK(std::abs(s(t, ref, n).imag()) < 1e-12);
            CHECK(s(t, ref, n).real() >= 0.0);
            for (std::size_t m = 0; m < 4; ++m) {
                CHECK(std::abs(std::abs(s(t, m, n)) - std::abs(h(t, m, n))) < 1e-12);
                for (std::size_t k = 0; k < 4; ++k) {
                    const double before = std::arg(h(t, m, n) * std::conj(h(t, k, n)));
                    const double after = std::arg(s(t, m, n) * std::conj(s(t, k, n)));
                    CHECK(std::abs(wrap(before - after)) < 1e-9);
                }
            }
        }
}

TEST_CASE("common phase nuisance is removed")
{
    const auto h = random_csi(2, 2, 8, 4);
    const auto base = preprocess::preprocess(h);
    for (double phi : {0.3, -2.0, 3.1}) {
        CsiTensor r = h;
        for (auto& v : r.values()) v *= std::polar(1.0, phi);
        const auto rotated = preprocess::preprocess(r);
        CHECK(rotated.ref_antenna == base.ref_antenna);
        CHECK(rotated.gain == doctest::Approx(base.gain));
        for (std::size_t i = 0; i < base.input.size(); ++i) CHECK(std::abs(rotated.input[i] - base.input[i]) < 1e-12);
    }
}

TEST_CASE("weak reference columns are left untouched")
{
    CsiTensor h(1, 2, 2);
    h(0, 0, 0) = cdouble(0.0, 1e-9);
    h(0, 1, 0) = cdouble(0.0, 1.0);
    h(0, 0, 1) = cdouble(0.0, 2.0);
    h(0, 1, 1) = cdouble(1.0, 1.0);
    const auto s = phase_stabilize(h, 0);
    CHECK(s(0, 1, 0) == h(0, 1, 0));
    CHECK(std::abs(s(0, 0, 1) - cdouble(2.0, 0.0)) < 1e-15);
}

TEST_CASE("reference antenna tie break")
{
    CsiTensor h(2, 4, 3);
    for (std::size_t t = 0; t < 2; ++t)
        for (std::size_t n = 0; n < 3; ++n) {
            h(t, 0, n) = 1.0;
            h(t, 1, n) = cdouble(0.0, 2.0);
            h(t, 2, n) = -2.0;
            h(t, 3, n) = cdouble(0.5, 0.5);
        }
    CHECK(select_ref_antenna(h) == 1);
    CsiTensor flat(1, 3, 2);
    for (auto& v : flat.values()) v = cdouble(0.6, 0.8);
    CHECK(select_ref_antenna(flat) == 0);
    CHECK(select_ref_antenna(CsiTensor(1, 3, 2)) == 0);
}
