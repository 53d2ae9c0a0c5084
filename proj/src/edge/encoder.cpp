// SPDX-License-Identifier: Apache-2.0
#include "ecc/edge/encoder.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ecc/autodiff/adam.hpp"
#include "ecc/channel/channel.hpp"
#include "ecc/preprocess/preprocess.hpp"

namespace ecc::edge {

using ad::Binder;
using ad::Var;

std::string encoder_prefix(std::size_t bs) { return "bs" + std::to_string(bs) + "/enc"; }
std::string decoder_prefix(std::size_t bs) { return "bs" + std::to_string(bs) + "/dec"; }

namespace {

void init_trunk(ad::ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out,
                const EncoderConfig& cfg, std::mt19937_64& rng)
{
    ad::add_dense(params, prefix + "/in", in, cfg.width, rng);
    for (std::size_t b = 0; b < cfg.blocks; ++b) {
        const std::string blk = prefix + "/block" + std::to_string(b);
        ad::add_conv1d(params, blk + "/conv0", cfg.width, cfg.width, cfg.kernel, rng);
        ad::add_conv1d(params, blk + "/conv1", cfg.width, cfg.width, cfg.kernel, rng);
    }
    ad::add_dense(params, prefix + "/out", cfg.width, out, rng);
}

Var trunk(const Binder& bind, const std::string& prefix, Var x, const EncoderConfig& cfg)
{
    Var h = ad::relu(ad::dense(bind, prefix + "/in", x));
    for (std::size_t b = 0; b < cfg.blocks; ++b) {
        const std::string blk = prefix + "/block" + std::to_string(b);
        Var inner = ad::relu(ad::conv1d(bind, blk + "/conv0", h, cfg.kernel, cfg.subcarriers));
        h = ad::add(h, ad::conv1d(bind, blk + "/conv1", inner, cfg.kernel, cfg.subcarriers));
    }
    return ad::dense(bind, prefix + "/out", h);
}

} // namespace

void init_encoder(ad::ParamSet& params, const std::string& prefix, const EncoderConfig& cfg, std::mt19937_64& rng)
{
    init_trunk(params, prefix, cfg.input_features(), cfg.latent_dim, cfg, rng);
}

void init_decoder(ad::ParamSet& params, const std::string& prefix, const EncoderConfig& cfg, std::mt19937_64& rng)
{
    init_trunk(params, prefix, cfg.latent_dim, cfg.input_features(), cfg, rng);
}

Var encode(const Binder& bind, const std::string& prefix, Var features, const EncoderConfig& cfg)
{
    if (features.cols() != cfg.input_features() || features.rows() % cfg.subcarriers != 0)
        throw ad::ShapeError("encode: features " + ad::shape_string(features.value().shape()) +
                             " do not match (B N_sc) x 2 T N_r with N_sc=" + std::to_string(cfg.subcarriers));
    return trunk(bind, prefix, features, cfg);
}

Var decode(const Binder& bind, const std::string& prefix, Var latent, const EncoderConfig& cfg)
{
    if (latent.cols() != cfg.latent_dim || latent.rows() % cfg.subcarriers != 0)
        throw ad::ShapeError("decode: latent " + ad::shape_string(latent.value().shape()) + " is not (B N_sc) x d_z");
    return trunk(bind, prefix, latent, cfg);
}

ad::Tensor encode(const ad::ParamSet& params, const std::string& prefix, const ad::Tensor& X, const EncoderConfig& cfg)
{
    const auto& s = X.shape();
    if (s.size() != 3 || s[0] != cfg.slots * cfg.antennas || s[1] != cfg.subcarriers || s[2] != 2)
        throw ad::ShapeError("encode: input " + ad::shape_string(s) + " is not (T N_r) x N_sc x 2");
    ad::Graph g;
    Binder bind(g, params);
    return encode(bind, prefix, g.constant(preprocess::to_features(X)), cfg).value();
}

ad::Tensor decode(const ad::ParamSet& params, const std::string& prefix, const ad::Tensor& Z, const EncoderConfig& cfg)
{
    ad::Graph g;
    Binder bind(g, params);
    const ad::Tensor features = decode(bind, prefix, g.constant(Z), cfg).value();
    return preprocess::from_features(features, cfg.slots * cfg.antennas);
}

CsiTensor reconstruct_csi(const ad::ParamSet& params, const std::string& prefix, const ad::Tensor& Z,
                          const EncoderConfig& cfg)
{
    return preprocess::unstack_complex(
        preprocess::reshape_unflatten(decode(params, prefix, Z, cfg), cfg.slots, cfg.antennas));
}

std::vector<double> vectorize_tokens(const ad::Tensor& Z)
{
    return std::vector<double>(Z.values().begin(), Z.values().end());
}

ad::Tensor unvectorize_tokens(std::span<const double> z, std::size_t subcarriers)
{
    if (subcarriers == 0 || z.size() % subcarriers != 0)
        throw ad::ShapeError("unvectorize_tokens: length " + std::to_string(z.size()) + " is not a multiple of N_sc");
    return ad::Tensor(ad::Shape{subcarriers, z.size() / subcarriers}, std::vector<double>(z.begin(), z.end()));
}

double cosine_loss(std::span<const cdouble> h, std::span<const cdouble> h_hat, double eps)
{
    if (h.size() != h_hat.size()) throw std::invalid_argument("cosine_loss: vectors differ in length");
    cdouble inner = 0.0;
    double nh = 0.0, nr = 0.0;
    for (std::size_t i = 0; i < h.size(); ++i) {
        inner += std::conj(h[i]) * h_hat[i];
        nh += std::norm(h[i]);
        nr += std::norm(h_hat[i]);
    }
    return -std::abs(inner) / (std::sqrt(nh) * std::sqrt(nr) + eps);
}

Var cosine_loss(Var recon, const ad::Tensor& target, std::size_t batch, double eps)
{
    ad::Graph& g = *recon.graph;
    if (recon.value().shape() != target.shape() || target.size() % batch != 0 || target.cols() % 2 != 0)
        throw ad::ShapeError("cosine_loss: reconstruction " + ad::shape_string(recon.value().shape()) +
                             " and target " + ad::shape_string(target.shape()) + " are incompatible");
    const std::size_t per = target.size() / batch;
    ad::Tensor re_coef = target.reshaped({batch, per});
    ad::Tensor im_coef(ad::Shape{batch, per});
    ad::Tensor target_norm(batch, 1);
    for (std::size_t b = 0; b < batch; ++b) {
        double energy = 0.0;
        for (std::size_t k = 0; k < per; k += 2) {
            const double hr = re_coef.at(b, k), hi = re_coef.at(b, k + 1);
            im_coef.at(b, k) = -hi;
            im_coef.at(b, k + 1) = hr;
            energy += hr * hr + hi * hi;
        }
        target_norm[b] = std::sqrt(energy);
    }
    Var r = ad::reshape(recon, batch, per);
    Var re = ad::row_sum(ad::mul(r, g.constant(std::move(re_coef))));
    Var im = ad::row_sum(ad::mul(r, g.constant(std::move(im_coef))));
    Var magnitude = ad::sqrt(ad::add(ad::mul(re, re), ad::mul(im, im)));
    Var recon_norm = ad::sqrt(ad::row_sum(ad::mul(r, r)));
    Var denom = ad::offset(ad::mul(recon_norm, g.constant(std::move(target_norm))), eps);
    return ad::scale(ad::mean(ad::div(magnitude, denom)), -1.0);
}

ad::Tensor stack_rows(const std::vector<const ad::Tensor*>& parts)
{
    if (parts.empty()) throw ad::ShapeError("stack_rows: nothing to stack");
    const std::size_t cols = parts.front()->cols();
    std::size_t rows = 0;
    for (const auto* p : parts) {
        if (p->cols() != cols) throw ad::ShapeError("stack_rows: column counts differ");
        rows += p->rows();
    }
    std::vector<double> values;
    values.reserve(rows * cols);
    for (const auto* p : parts) values.insert(values.end(), p->values().begin(), p->values().end());
    return ad::Tensor(ad::Shape{rows, cols}, std::move(values));
}

namespace {

std::vector<ad::Tensor> features_of(const std::vector<CsiTensor>& csi, double eps, double eps_angle)
{
    std::vector<ad::Tensor> out;
    out.reserve(csi.size());
    for (const auto& h : csi) out.push_back(preprocess::to_features(preprocess::preprocess(h, eps, eps_angle).input));
    return out;
}

} // namespace

ad::ParamSet stage1_train(const CsiProvider& data, const EncoderConfig& enc, const Stage1Config& cfg, std::size_t bs,
                          const Stage1Callback& on_epoch)
{
    std::mt19937_64 rng(channel::mix_seed(cfg.seed, 0x5747 + bs));
    ad::ParamSet params;
    init_encoder(params, encoder_prefix(bs), enc, rng);
    init_decoder(params, decoder_prefix(bs), enc, rng);
    const ad::AdamConfig adam{cfg.learning_rate};
    std::uint64_t step = 0;

    for (std::size_t epoch = 0; epoch < cfg.epochs; ++epoch) {
        const auto features = features_of(data(epoch), cfg.norm_epsilon, cfg.angle_epsilon);
        if (features.empty()) throw std::invalid_argument("stage1_train: empty epoch data");
        std::vector<std::size_t> order(features.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);

        double total = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            const std::size_t count = std::min(cfg.batch_size, order.size() - start);
            std::vector<const ad::Tensor*> batch;
            for (std::size_t i = 0; i < count; ++i) batch.push_back(&features[order[start + i]]);
            const ad::Tensor target = stack_rows(batch);

            ad::Graph g;
            Binder bind(g, params);
            Var z = encode(bind, encoder_prefix(bs), g.constant(target), enc);
            Var recon = decode(bind, decoder_prefix(bs), z, enc);
            Var loss = cosine_loss(recon, target, count);
            const double value = loss.value()[0];
            if (!std::isfinite(value))
                throw ad::NumericError("stage1: non-finite loss at step " + std::to_string(step) + " (BS " +
                                       std::to_string(bs) + ")");
            params.zero_grad();
            g.backward(loss);
            ad::adam_step(params, adam);
            total += value * static_cast<double>(count);
            ++step;
        }
        if (on_epoch) on_epoch({epoch, total / static_cast<double>(features.size())}, params);
    }

    ad::ParamSet encoder;
    const std::string prefix = encoder_prefix(bs);
    for (const auto& [name, p] : params)
        if (name.starts_with(prefix)) encoder.add(name, p.value);
    return encoder;
}

double stage1_loss(const ad::ParamSet& params, std::size_t bs, const std::vector<CsiTensor>& csi,
                   const EncoderConfig& enc, double norm_epsilon, double angle_epsilon)
{
    const auto features = features_of(csi, norm_epsilon, angle_epsilon);
    std::vector<const ad::Tensor*> all;
    for (const auto& f : features) all.push_back(&f);
    const ad::Tensor target = stack_rows(all);
    ad::Graph g;
    Binder bind(g, params);
    Var z = encode(bind, encoder_prefix(bs), g.constant(target), enc);
    Var recon = decode(bind, decoder_prefix(bs), z, enc);
    return cosine_loss(recon, target, features.size()).value()[0];
}

} // namespace ecc::edge
