// SPDX-License-Identifier: Apache-2.0
#include "ecc/cloud/fusion.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace ecc::cloud {

using ad::Binder;
using ad::Tensor;
using ad::Var;

void init_cu(ad::ParamSet& params, const CuConfig& cfg, std::mt19937_64& rng)
{
    const std::size_t d = cfg.model_dim();
    params.add("cu/fusion_token", ad::glorot_uniform(1, d, rng));
    ad::add_dense(params, "cu/proj", cfg.latent_length(), d, rng);
    params.add("cu/wq", ad::glorot_uniform(d, d, rng));
    params.add("cu/wk", ad::glorot_uniform(d, d, rng));
    params.add("cu/wv", ad::glorot_uniform(d, d, rng));
    ad::add_lstm(params, "cu/lstm", cfg.token_dim, cfg.lstm_hidden, rng);
    ad::add_dense(params, "cu/head/hidden", cfg.lstm_hidden, cfg.head_hidden, rng);
    ad::add_dense(params, "cu/head/out", cfg.head_hidden, 3, rng);
}

std::vector<double> compute_mask(std::span<const double> gains, double beta)
{
    if (gains.empty()) throw std::invalid_argument("compute_mask: no gains");
    double top = -std::numeric_limits<double>::infinity();
    for (double g : gains) {
        if (!std::isfinite(g)) throw std::domain_error("compute_mask: non-finite gain");
        top = std::max(top, beta * g);
    }
    std::vector<double> m(gains.size());
    double total = 0.0;
    for (std::size_t l = 0; l < gains.size(); ++l) total += m[l] = std::exp(beta * gains[l] - top);
    for (double& v : m) v /= total;
    return m;
}

std::vector<double> wmse_weights(std::size_t subcarriers)
{
    std::vector<double> w(subcarriers);
    const double denom = static_cast<double>(subcarriers) * static_cast<double>(subcarriers + 1);
    for (std::size_t i = 0; i < subcarriers; ++i) w[i] = 2.0 * static_cast<double>(i + 1) / denom;
    return w;
}

Var tokenize(const Binder& bind, const std::vector<Var>& latents, const CuConfig& cfg)
{
    if (latents.size() != cfg.num_bs)
        throw std::invalid_argument("tokenize: expected " + std::to_string(cfg.num_bs) + " BS latents, got " +
                                    std::to_string(latents.size()));
    std::vector<Var> rows{bind("cu/fusion_token")};
    for (const Var& z : latents) {
        if (z.rows() != 1 || z.cols() != cfg.latent_length())
            throw ad::ShapeError("tokenize: latent " + ad::shape_string(z.value().shape()) + " is not 1 x D");
        rows.push_back(ad::dense(bind, "cu/proj", z));
    }
    return ad::concat_rows(rows);
}

namespace {

Tensor gate_column(std::span<const double> mask)
{
    Tensor gate(mask.size() + 1, 1);
    gate[0] = 1.0;
    std::copy(mask.begin(), mask.end(), gate.values().begin() + 1);
    return gate;
}

} // namespace

CmaResult cma_fuse(const Binder& bind, Var tokens, std::span<const double> mask, const CuConfig& cfg)
{
    const std::size_t d = cfg.model_dim();
    if (tokens.rows() != mask.size() + 1 || tokens.cols() != d)
        throw ad::ShapeError("cma_fuse: tokens " + ad::shape_string(tokens.value().shape()) + " do not match " +
                             std::to_string(mask.size()) + " mask entries and d_k=" + std::to_string(d));
    ad::Graph& g = bind.graph();
    Var q = ad::matmul(tokens, bind("cu/wq"));
    Var k = ad::matmul(tokens, bind("cu/wk"));
    Var v = ad::matmul(ad::scale_rows(tokens, g.constant(gate_column(mask))), bind("cu/wv"));
    Var weights = ad::softmax_rows(ad::scale(ad::matmul(q, ad::transpose(k)), 1.0 / std::sqrt(double(d))));
    Var out = ad::matmul(weights, v);
    return {out, weights, ad::slice_rows(out, 0, 1)};
}

std::vector<Var> freq_accumulate(const Binder& bind, Var fused, const CuConfig& cfg)
{
    if (fused.cols() != cfg.model_dim())
        throw ad::ShapeError("freq_accumulate: fused width " + std::to_string(fused.cols()) + " != N_sc d_f");
    ad::Graph& g = bind.graph();
    const std::size_t batch = fused.rows();
    ad::LstmState state{g.constant(Tensor(batch, cfg.lstm_hidden)), g.constant(Tensor(batch, cfg.lstm_hidden))};
    std::vector<Var> hidden;
    hidden.reserve(cfg.subcarriers);
    for (std::size_t n = 0; n < cfg.subcarriers; ++n) {
        state = ad::lstm_cell(bind, "cu/lstm", ad::slice_cols(fused, n * cfg.token_dim, cfg.token_dim), state);
        hidden.push_back(state.hidden);
    }
    return hidden;
}

Var regress(const Binder& bind, Var hidden, const CuConfig& cfg)
{
    ad::Graph& g = bind.graph();
    Var h = ad::relu(ad::dense(bind, "cu/head/hidden", hidden));
    Var y = ad::dense(bind, "cu/head/out", h);
    Tensor scale(3, 3), offset(1, 3);
    for (std::size_t i = 0; i < 3; ++i) {
        scale.at(i, i) = cfg.output_scale[i];
        offset[i] = cfg.output_offset[i];
    }
    return ad::add_row(ad::matmul(y, g.constant(std::move(scale))), g.constant(std::move(offset)));
}

Var wmse_loss(Var positions, const std::vector<Var>& estimates)
{
    if (estimates.empty()) throw std::invalid_argument("wmse_loss: no intermediate estimates");
    const auto w = wmse_weights(estimates.size());
    Var total;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        Var diff = ad::sub(estimates[i], positions);
        Var term = ad::scale(ad::row_sum(ad::mul(diff, diff)), w[i]);
        total = i == 0 ? term : ad::add(total, term);
    }
    return ad::mean(total);
}

double wmse_loss(const Position& truth, const std::vector<Position>& estimates)
{
    if (estimates.empty()) throw std::invalid_argument("wmse_loss: no intermediate estimates");
    const auto w = wmse_weights(estimates.size());
    double total = 0.0;
    for (std::size_t i = 0; i < estimates.size(); ++i) {
        double sq = 0.0;
        for (std::size_t k = 0; k < 3; ++k) sq += (truth[k] - estimates[i][k]) * (truth[k] - estimates[i][k]);
        total += w[i] * sq;
    }
    return total;
}

std::vector<Var> cu_forward(const Binder& bind, const std::vector<Var>& latents, const Tensor& gains,
                            const CuConfig& cfg)
{
    if (latents.size() != cfg.num_bs)
        throw std::invalid_argument("cu_forward: expected " + std::to_string(cfg.num_bs) + " BS latents");
    const std::size_t batch = latents.front().rows();
    if (gains.rows() != batch || gains.cols() != cfg.num_bs)
        throw ad::ShapeError("cu_forward: gains " + ad::shape_string(gains.shape()) + " are not B x L");
    std::vector<Var> projected;
    for (const Var& z : latents) {
        if (z.rows() != batch || z.cols() != cfg.latent_length())
            throw ad::ShapeError("cu_forward: latent " + ad::shape_string(z.value().shape()) + " is not B x D");
        projected.push_back(ad::dense(bind, "cu/proj", z));
    }
    Var token = bind("cu/fusion_token");
    std::vector<Var> fused;
    fused.reserve(batch);
    for (std::size_t b = 0; b < batch; ++b) {
        std::vector<Var> rows{token};
        for (const Var& p : projected) rows.push_back(ad::slice_rows(p, b, 1));
        std::vector<double> g(gains.values().begin() + b * cfg.num_bs, gains.values().begin() + (b + 1) * cfg.num_bs);
        fused.push_back(cma_fuse(bind, ad::concat_rows(rows), compute_mask(g, cfg.beta), cfg).fused);
    }
    std::vector<Var> out;
    for (Var s : freq_accumulate(bind, batch == 1 ? fused.front() : ad::concat_rows(fused), cfg))
        out.push_back(regress(bind, s, cfg));
    return out;
}

PositionEstimate infer_latents(const std::vector<std::vector<double>>& latents, std::span<const double> gains,
                               const ad::ParamSet& params, const CuConfig& cfg)
{
    if (latents.size() != cfg.num_bs || gains.size() != cfg.num_bs)
        throw std::invalid_argument("infer: expected " + std::to_string(cfg.num_bs) + " BS inputs");
    ad::Graph g;
    Binder bind(g, params);
    std::vector<Var> vars;
    for (const auto& z : latents) {
        if (z.size() != cfg.latent_length())
            throw ad::ShapeError("infer: latent length " + std::to_string(z.size()) + " != D");
        vars.push_back(g.constant(Tensor(ad::Shape{1, z.size()}, z)));
    }
    Tensor gain_row(ad::Shape{1, gains.size()}, std::vector<double>(gains.begin(), gains.end()));
    PositionEstimate est;
    for (Var p : cu_forward(bind, vars, gain_row, cfg))
        est.intermediate.push_back({p.value()[0], p.value()[1], p.value()[2]});
    est.position = est.intermediate.back();
    return est;
}

PositionEstimate infer(const std::vector<fronthaul::FronthaulMessage>& messages, const ad::ParamSet& params,
                       const std::vector<fronthaul::QuantizerConfig>& quantizers, const CuConfig& cfg)
{
    if (messages.size() != cfg.num_bs)
        throw std::invalid_argument("infer: expected " + std::to_string(cfg.num_bs) + " messages, got " +
                                    std::to_string(messages.size()));
    if (quantizers.size() != cfg.num_bs) throw std::invalid_argument("infer: one quantizer per BS required");
    std::vector<const fronthaul::FronthaulMessage*> by_bs(cfg.num_bs, nullptr);
    for (const auto& m : messages) {
        if (m.bs_id >= cfg.num_bs || by_bs[m.bs_id])
            throw std::invalid_argument("infer: unexpected or duplicate BS id " + std::to_string(m.bs_id));
        if (m.bits != messages.front().bits || m.length != messages.front().length ||
            m.snapshot_id != messages.front().snapshot_id)
            throw std::invalid_argument("infer: messages disagree on Q, D or snapshot");
        by_bs[m.bs_id] = &m;
    }
    std::vector<std::vector<double>> latents;
    std::vector<double> gains;
    for (std::size_t l = 0; l < cfg.num_bs; ++l) {
        auto decoded = fronthaul::decode_message(*by_bs[l], quantizers[l]);
        latents.push_back(std::move(decoded.latent));
        gains.push_back(decoded.gain);
    }
    return infer_latents(latents, gains, params, cfg);
}

} // namespace ecc::cloud
