// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <Eigen/Dense>
#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecc/cloud/fusion.hpp"
#include "ecc/fronthaul/message.hpp"
#include "support.hpp"

using namespace ecc;
using ecc::testing::max_gradient_error;
using ecc::testing::random_tensor;

namespace {

cloud::CuConfig small_cu()
{
    cloud::CuConfig c;
    c.num_bs = 3;
    c.subcarriers = 3;
    c.latent_dim = 2;
    c.token_dim = 2;
    c.lstm_hidden = 4;
    c.head_hidden = 5;
    c.beta = 0.7;
    c.output_offset = {30.0, 30.0, 5.0};
    c.output_scale = {30.0, 30.0, 5.0};
    return c;
}

using Mat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

Mat as_mat(const ad::Tensor& t) { return Eigen::Map<const Mat>(t.data(), t.rows(), t.cols()); }

// Attention output from the definition, with optional zeroing of one value row.
Mat reference_cma(const ad::ParamSet& p, const Mat& B, const std::vector<double>& mask, const cloud::CuConfig& cfg,
                  long zero_row = -1)
{
    const Mat Q = B * as_mat(p.get("cu/wq").value);
    const Mat K = B * as_mat(p.get("cu/wk").value);
    Mat V = B * as_mat(p.get("cu/wv").value);
    Mat S = Q * K.transpose() / std::sqrt(static_cast<double>(cfg.model_dim()));
    for (Eigen::Index r = 0; r < S.rows(); ++r) {
        const double mx = S.row(r).maxCoeff();
        S.row(r) = (S.row(r).array() - mx).exp();
        S.row(r) /= S.row(r).sum();
    }
    Eigen::VectorXd d(B.rows());
    d(0) = 1.0;
    for (std::size_t l = 0; l < mask.size(); ++l) d(l + 1) = mask[l];
    if (zero_row >= 0) V.row(zero_row).setZero();
    return S * d.asDiagonal() * V;
}

} // namespace

TEST_CASE("mask lies on the simplex")
{
    const std::vector<double> g{0.2, 1.5, -0.4};
    const auto m = cloud::compute_mask(g, 2.0);
    double z = 0.0;
    for (double v : g) z += std::exp(2.0 * v);
    for (std::size_t i = 0; i < g.size(); ++i) {
        CHECK(m[i] > 0.0);
        CHECK(m[i] == doctest::Approx(std::exp(2.0 * g[i]) / z).epsilon(1e-14));
    }
    CHECK(std::accumulate(m.begin(), m.end(), 0.0) == doctest::Approx(1.0).epsilon(1e-15));
    const auto big = cloud::compute_mask(std::vector<double>{1e4, 1e4 - 1.0, 0.0}, 1.0);
    CHECK(std::accumulate(big.begin(), big.end(), 0.0) == doctest::Approx(1.0));
    CHECK(big[2] == 0.0);
    CHECK_THROWS(cloud::compute_mask(std::vector<double>{0.0, std::nan("")}, 1.0));
}

TEST_CASE("position loss weights")
{
    const auto w = cloud::wmse_weights(24);
    REQUIRE(w.size() == 24);
    for (std::size_t i = 0; i < 24; ++i) CHECK(w[i] == doctest::Approx(2.0 * (i + 1) / 600.0).epsilon(1e-15));
    for (std::size_t i = 1; i < 24; ++i) CHECK(w[i] > w[i - 1]);
    CHECK(std::abs(std::accumulate(w.begin(), w.end(), 0.0) - 1.0) < 1e-12);

    const cloud::Position truth{1, 2, 3};
    const std::vector<cloud::Position> est{{1, 2, 4}, {3, 2, 3}};
    // weights 1/3, 2/3; squared errors 1, 4
    CHECK(cloud::wmse_loss(truth, est) == doctest::Approx(1.0 / 3.0 + 8.0 / 3.0));

    ad::Graph g;
    auto p = g.constant(ad::Tensor(ad::Shape{2, 3}, std::vector<double>{1, 2, 3, 0, 0, 0}));
    std::vector<ad::Var> e{g.constant(ad::Tensor(ad::Shape{2, 3}, std::vector<double>{1, 2, 4, 0, 0, 0})),
                           g.constant(ad::Tensor(ad::Shape{2, 3}, std::vector<double>{3, 2, 3, 0, 0, 2}))};
    // sample 0 as above; sample 1 errors 0 and 4 -> 8/3; batch mean
    CHECK(cloud::wmse_loss(p, e).value()[0] == doctest::Approx((3.0 + 8.0 / 3.0) / 2.0));
}

TEST_CASE("channel-masked attention")
{
    const auto cfg = small_cu();
    std::mt19937_64 rng(17);
    ad::ParamSet p;
    cloud::init_cu(p, cfg, rng);
    const ad::Tensor B = random_tensor(cfg.num_bs + 1, cfg.model_dim(), rng);

    SUBCASE("output matches the definition")
    {
        const std::vector<double> mask{0.5, 0.3, 0.2};
        ad::Graph g;
        const auto r = cloud::cma_fuse(ad::Binder(g, std::as_const(p)), g.constant(B), mask, cfg);
        const Mat ref = reference_cma(p, as_mat(B), mask, cfg);
        CHECK((as_mat(r.output.value()) - ref).cwiseAbs().maxCoeff() < 1e-12);
        CHECK((as_mat(r.fused.value()) - ref.row(0)).cwiseAbs().maxCoeff() < 1e-12);
        for (std::size_t i = 0; i <= cfg.num_bs; ++i) {
            double s = 0.0;
            for (std::size_t j = 0; j <= cfg.num_bs; ++j) s += r.weights.value().at(i, j);
            CHECK(s == doctest::Approx(1.0));
        }
    }
    SUBCASE("a zero mask entry equals zeroing that value row")
    {
        const std::vector<double> mask{0.6, 0.0, 0.4};
        ad::Graph g;
        const auto r = cloud::cma_fuse(ad::Binder(g, std::as_const(p)), g.constant(B), mask, cfg);
        const Mat ref = reference_cma(p, as_mat(B), {0.6, 1.0, 0.4}, cfg, 2);
        CHECK((as_mat(r.output.value()) - ref).cwiseAbs().maxCoeff() < 1e-12);
    }
    SUBCASE("permuting BS rows and mask together leaves the fused token unchanged")
    {
        const std::vector<double> mask{0.1, 0.7, 0.2};
        const std::vector<std::size_t> perm{2, 0, 1};
        ad::Tensor Bp = B;
        std::vector<double> mp(3);
        for (std::size_t l = 0; l < 3; ++l) {
            for (std::size_t c = 0; c < cfg.model_dim(); ++c) Bp.at(l + 1, c) = B.at(perm[l] + 1, c);
            mp[l] = mask[perm[l]];
        }
        ad::Graph g;
        ad::Binder bind(g, std::as_const(p));
        const auto a = cloud::cma_fuse(bind, g.constant(B), mask, cfg);
        const auto b = cloud::cma_fuse(bind, g.constant(Bp), mp, cfg);
        for (std::size_t c = 0; c < cfg.model_dim(); ++c)
            CHECK(std::abs(a.fused.value()[c] - b.fused.value()[c]) < 1e-9);
    }
}

TEST_CASE("full CU network gradient")
{
    const auto cfg = small_cu();
    std::mt19937_64 rng(23);
    ad::ParamSet p;
    cloud::init_cu(p, cfg, rng);
    const std::size_t batch = 2;
    for (std::size_t l = 0; l < cfg.num_bs; ++l)
        p.add("in/" + std::to_string(l), random_tensor(batch, cfg.latent_length(), rng));
    const ad::Tensor gains = random_tensor(batch, cfg.num_bs, rng, 0.0, 2.0);
    const ad::Tensor truth = random_tensor(batch, 3, rng, 0.0, 10.0);

    const double err = max_gradient_error(p, [&](ad::Graph& g, ad::ParamSet& ps) {
        ad::Binder bind(g, ps);
        std::vector<ad::Var> lat;
        for (std::size_t l = 0; l < cfg.num_bs; ++l) lat.push_back(bind("in/" + std::to_string(l)));
        return cloud::wmse_loss(g.constant(truth), cloud::cu_forward(bind, lat, gains, cfg));
    });
    CHECK(err < 1e-4);
}

TEST_CASE("straight-through gradient equals the identity quantizer on a frozen forward")
{
    const auto cfg = small_cu();
    std::mt19937_64 rng(29);
    ad::ParamSet p;
    cloud::init_cu(p, cfg, rng);
    const int bits = 6;
    const double step = 0.05; // clip amplitude 1.575, latents drawn inside +-1
    std::vector<ad::Tensor> z;
    for (std::size_t l = 0; l < cfg.num_bs; ++l) z.push_back(random_tensor(2, cfg.latent_length(), rng));
    const ad::Tensor gains = random_tensor(2, cfg.num_bs, rng);
    const ad::Tensor truth = random_tensor(2, 3, rng);

    auto run = [&](bool ste) {
        ad::ParamSet ps = p;
        ps.zero_grad();
        ad::Graph g;
        ad::Binder bind(g, ps);
        std::vector<ad::Var> in, lat;
        for (std::size_t l = 0; l < cfg.num_bs; ++l) {
            in.push_back(g.input(z[l]));
            if (ste) {
                lat.push_back(ad::ste_quantize(in.back(), bits, step));
            } else {
                // Identity map whose forward value is pinned to the quantized latent.
                ad::Tensor shift = z[l];
                const fronthaul::QuantizerConfig q(bits, step);
                for (std::size_t i = 0; i < shift.size(); ++i) shift[i] = fronthaul::quantize(z[l][i], q) - z[l][i];
                lat.push_back(ad::add(in.back(), g.constant(shift)));
            }
        }
        auto loss = cloud::wmse_loss(g.constant(truth), cloud::cu_forward(bind, lat, gains, cfg));
        g.backward(loss);
        std::vector<ad::Tensor> grads;
        for (auto v : in) grads.push_back(v.grad());
        for (const auto& [name, prm] : ps) grads.push_back(prm.grad);
        return std::pair{loss.value()[0], grads};
    };
    const auto [la, ga] = run(true);
    const auto [lb, gb] = run(false);
    CHECK(std::abs(la - lb) < 1e-12);
    REQUIRE(ga.size() == gb.size());
    for (std::size_t i = 0; i < ga.size(); ++i)
        for (std::size_t k = 0; k < ga[i].size(); ++k) CHECK(std::abs(ga[i][k] - gb[i][k]) < 1e-12);
}

TEST_CASE("inference from fronthaul messages")
{
    const auto cfg = small_cu();
    std::mt19937_64 rng(31);
    ad::ParamSet p;
    cloud::init_cu(p, cfg, rng);
    const int bits = 8;
    std::vector<fronthaul::QuantizerConfig> qs;
    std::vector<fronthaul::FronthaulMessage> msgs;
    std::vector<std::vector<double>> decoded;
    std::vector<double> gains;
    for (std::size_t l = 0; l < cfg.num_bs; ++l) {
        qs.emplace_back(bits, 0.01 * (l + 1));
        const auto t = random_tensor(1, cfg.latent_length(), rng);
        const std::vector<double> z(t.values().begin(), t.values().end());
        msgs.push_back(fronthaul::encode_message(z, 0.5 + l, qs.back(), static_cast<std::uint16_t>(l), 42));
        const auto d = fronthaul::decode_message(msgs.back(), qs.back());
        decoded.push_back(d.latent);
        gains.push_back(d.gain);
    }

    const auto ref = cloud::infer_latents(decoded, gains, p, cfg);
    REQUIRE(ref.intermediate.size() == cfg.subcarriers);
    CHECK(ref.position == ref.intermediate.back());

    auto shuffled = msgs;
    std::reverse(shuffled.begin(), shuffled.end());
    const auto a = cloud::infer(msgs, p, qs, cfg);
    const auto b = cloud::infer(shuffled, p, qs, cfg);
    CHECK(a.position == ref.position);
    CHECK(b.position == ref.position);

    auto dup = msgs;
    dup[1].bs_id = 0;
    CHECK_THROWS(cloud::infer(dup, p, qs, cfg));
    auto stale = msgs;
    stale[2].snapshot_id = 41;
    CHECK_THROWS(cloud::infer(stale, p, qs, cfg));
    CHECK_THROWS(cloud::infer({msgs[0], msgs[1]}, p, qs, cfg));
}

TEST_CASE("untrained head is centered on the region")
{
    // With all head weights zero the estimate is the output offset.
    auto cfg = small_cu();
    std::mt19937_64 rng(37);
    ad::ParamSet p;
    cloud::init_cu(p, cfg, rng);
    for (auto& [name, prm] : p)
        if (name.starts_with("cu/head/out")) prm.value.fill(0.0);
    std::vector<std::vector<double>> z(cfg.num_bs, std::vector<double>(cfg.latent_length(), 0.3));
    const std::vector<double> gains(cfg.num_bs, 1.0);
    const auto est = cloud::infer_latents(z, gains, p, cfg);
    for (const auto& q : est.intermediate)
        for (int k = 0; k < 3; ++k) CHECK(q[k] == doctest::Approx(cfg.output_offset[k]));
}
