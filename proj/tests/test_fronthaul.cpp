// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <random>
#include <set>

#include "ecc/fronthaul/message.hpp"
#include "ecc/fronthaul/payload.hpp"
#include "ecc/fronthaul/quantizer.hpp"

using namespace ecc::fronthaul;

namespace {

// Reference midrise quantizer written from the definition.
double reference_level(double y, int bits, double step)
{
    const double half = std::ldexp(1.0, bits - 1);
    const double j = std::clamp(std::floor(y / step), -half, half - 1.0);
    return (j + 0.5) * step;
}

} // namespace

TEST_CASE("payload ratios for the full-scale dimensions")
{
    const CsiDims dims{10, 8, 24};
    CHECK(lossless_csi_bits(dims) == 64u * 10 * 8 * 24);
    CHECK(embedding_bits(768, 10) == 7680u);
    // eta = D Q / (64 T N_r N_sc) = 768 Q / 122880 = Q / 160.
    CHECK(payload_ratio(768, 10, dims, kGainFieldBits, false) == 0.0625);
    CHECK(payload_ratio(768, 8, dims, kGainFieldBits, false) == 0.05);
    CHECK(payload_ratio(768, 6, dims, kGainFieldBits, false) == 0.0375);
    CHECK(payload_ratio(768, 4, dims, kGainFieldBits, false) == 0.025);
    CHECK(payload_ratio(768, 10, dims, kGainFieldBits, true) == doctest::Approx((7680.0 + 32.0) / 122880.0));
    CHECK_THROWS(payload_ratio(0, 10, dims, kGainFieldBits, false));
}

TEST_CASE("quantizer matches the midrise definition")
{
    std::mt19937_64 rng(77);
    for (int bits : {1, 2, 3, 4, 6, 10}) {
        const double step = 0.1 * bits;
        const QuantizerConfig q(bits, step);
        const double A = (std::ldexp(1.0, bits) - 1.0) * step / 2.0;
        CHECK(q.clip_amplitude() == doctest::Approx(A));
        std::uniform_real_distribution<double> u(-2.0 * A, 2.0 * A);
        std::set<double> levels;
        for (int i = 0; i < 4000; ++i) {
            const double y = u(rng);
            const double v = quantize(y, q);
            CHECK(v == reference_level(y, bits, step));
            levels.insert(v);
            if (std::abs(y) <= A) CHECK(std::abs(v - y) <= step / 2.0 + 1e-12);
            else CHECK(std::abs(v) == doctest::Approx(A));
            CHECK(quantize(v, q) == v); // idempotent on levels
            CHECK(quantize_index(y, q) == level_index(v, q));
        }
        CHECK(levels.size() <= q.level_count());
        CHECK(quantize(1e9, q) == doctest::Approx(A));
        CHECK(quantize(-1e9, q) == doctest::Approx(-A));
    }
    CHECK_THROWS(QuantizerConfig(0, 1.0));
    CHECK_THROWS(QuantizerConfig(4, 0.0));
    CHECK_THROWS(quantize(std::nan(""), QuantizerConfig(4, 1.0)));
}

TEST_CASE("level and index are inverse bijections")
{
    for (int bits : {1, 3, 5, 8, 12}) {
        const QuantizerConfig q(bits, 0.37);
        for (std::uint32_t k = 0; k < q.level_count(); ++k) {
            const double level = index_level(k, q);
            CHECK(level_index(level, q) == k);
            CHECK(level == doctest::Approx((static_cast<double>(k) - std::ldexp(1.0, bits - 1) + 0.5) * 0.37));
        }
        CHECK_THROWS(index_level(static_cast<std::uint32_t>(q.level_count()), q));
        CHECK_THROWS(level_index(0.01, q));
    }
}

TEST_CASE("bit packing")
{
    SUBCASE("layout is MSB first")
    {
        const std::vector<std::uint32_t> idx{0b101, 0b011, 0b111};
        const auto bytes = pack(idx, 3);
        // 101 011 111 + 7 pad bits -> 10101111 11000000
        REQUIRE(bytes.size() == 2);
        CHECK(bytes[0] == 0b10101111);
        CHECK(bytes[1] == 0b10000000);
    }
    SUBCASE("round trip for random indices")
    {
        std::mt19937_64 rng(9);
        for (int bits = 1; bits <= 32; ++bits) {
            const std::size_t count = 1 + rng() % 50;
            std::vector<std::uint32_t> idx(count);
            const std::uint64_t mask = (std::uint64_t{1} << bits) - 1;
            for (auto& v : idx) v = static_cast<std::uint32_t>(rng() & mask);
            const auto bytes = pack(idx, bits);
            CHECK(bytes.size() == payload_bytes(count, bits));
            CHECK(unpack(bytes, count, bits) == idx);
        }
    }
    SUBCASE("rejections")
    {
        CHECK_THROWS(pack(std::vector<std::uint32_t>{8}, 3));
        CHECK_THROWS_AS(unpack(std::vector<std::uint8_t>{0}, 3, 3), PayloadLengthMismatch);
        CHECK_THROWS_AS(unpack(std::vector<std::uint8_t>{0, 1}, 3, 3), MessageError);
    }
}

TEST_CASE("message encode, decode and wire format")
{
    std::mt19937_64 rng(4);
    std::normal_distribution<double> n(0.0, 1.0);
    for (int bits : {2, 4, 10}) {
        const QuantizerConfig q(bits, 4.0 / (std::ldexp(1.0, bits) - 1.0));
        std::vector<double> z(32);
        for (auto& v : z) v = n(rng);
        const auto msg = encode_message(z, 1.2345678901, q, 2, 99);
        CHECK(msg.payload.size() == payload_bytes(32, bits));
        CHECK(msg.payload_bits() == 32u * bits);
        const auto dec = decode_message(msg, q);
        CHECK(dec.bs_id == 2);
        CHECK(dec.snapshot_id == 99);
        CHECK(dec.gain == static_cast<double>(static_cast<float>(1.2345678901)));
        for (std::size_t i = 0; i < z.size(); ++i) CHECK(dec.latent[i] == quantize(z[i], q));

        // Already-quantized vectors survive a second pass unchanged.
        const auto again = decode_message(encode_message(dec.latent, dec.gain, q, 2, 99), q);
        CHECK(again.latent == dec.latent);

        // Fixed length independent of content.
        std::vector<double> big(32, 1e6);
        CHECK(encode_message(big, 0.0, q, 0, 0).payload.size() == msg.payload.size());

        const auto wire = serialize(msg);
        CHECK(wire.size() == kWireHeaderBytes + msg.payload.size());
        CHECK(deserialize(wire) == msg);

        auto bad = wire;
        bad[0] = 'X';
        CHECK_THROWS_AS(deserialize(bad), MalformedHeader);
        auto shortened = wire;
        shortened.pop_back();
        CHECK_THROWS_AS(deserialize(shortened), PayloadLengthMismatch);
        CHECK_THROWS_AS(deserialize(std::vector<std::uint8_t>(5)), MalformedHeader);
        CHECK_THROWS_AS(decode_message(msg, QuantizerConfig(bits == 2 ? 3 : 2, 1.0)), MalformedHeader);
    }
}

TEST_CASE("step calibration covers the requested fraction")
{
    std::vector<double> s;
    for (int i = 1; i <= 100; ++i) s.push_back(i % 2 ? i : -i);
    // Nearest-rank 99th percentile of |s| = 99, so Delta = 2 * 99 / (2^Q - 1).
    CHECK(calibrate_step(s, 4, 99.0) == doctest::Approx(198.0 / 15.0));
    CHECK(calibrate_step(s, 1, 100.0) == doctest::Approx(200.0));
    const double step = calibrate_step(s, 6, 90.0);
    const QuantizerConfig q(6, step);
    std::size_t inside = 0;
    for (double v : s) inside += std::abs(v) <= q.clip_amplitude() + 1e-12;
    CHECK(inside == 90);
    CHECK_THROWS(calibrate_step(std::vector<double>(4, 0.0), 4, 99.0));
}
