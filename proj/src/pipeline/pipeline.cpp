// SPDX-License-Identifier: Apache-2.0
#include "ecc/pipeline/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <map>
#include <numbers>
#include <numeric>
#include <sstream>
#include <utility>

#include "ecc/autodiff/adam.hpp"
#include "ecc/cloud/fusion.hpp"
#include "ecc/edge/encoder.hpp"
#include "ecc/eval/metrics.hpp"
#include "ecc/fronthaul/message.hpp"
#include "ecc/preprocess/preprocess.hpp"

namespace ecc::pipeline {

using ad::Binder;
using ad::Var;

std::uint64_t stream_seed(std::uint64_t seed, Stream stream, std::uint64_t epoch)
{
    return channel::mix_seed(channel::mix_seed(seed, static_cast<std::uint64_t>(stream)), epoch);
}

Sample make_sample(const TrainConfig& cfg, const std::vector<channel::BsSite>& sites,
                   const estimation::CovarianceBank& bank, const channel::Vec3& position,
                   const std::vector<CsiTensor>& observations)
{
    if (observations.size() != sites.size()) throw std::invalid_argument("make_sample: one observation per BS required");
    const auto pilots = channel::default_pilots(cfg.scenario);
    Sample s;
    s.position = position;
    for (std::size_t l = 0; l < sites.size(); ++l) {
        CsiTensor est = estimation::estimate_snapshot(observations[l], pilots, bank, l, cfg.scenario.noise_variance);
        const auto pre = preprocess::preprocess(est, cfg.norm_epsilon, cfg.angle_epsilon);
        s.features.push_back(preprocess::to_features(pre.input));
        s.gains.push_back(pre.gain);
        s.estimates.push_back(std::move(est));
    }
    return s;
}

Sample make_sample(const TrainConfig& cfg, const std::vector<channel::BsSite>& sites,
                   const estimation::CovarianceBank& bank, std::uint64_t sample_seed)
{
    const auto snap = channel::make_snapshot(cfg.scenario, sites, sample_seed);
    return make_sample(cfg, sites, bank, snap.position, snap.observations);
}

std::vector<Sample> make_samples(const TrainConfig& cfg, const estimation::CovarianceBank& bank, Stream stream,
                                 std::uint64_t epoch, std::size_t count)
{
    const auto sites = channel::make_sites(cfg.scenario);
    const std::uint64_t base = stream_seed(cfg.seed, stream, epoch);
    std::vector<Sample> out;
    out.reserve(count);
    for (std::size_t i = 0; i < count; ++i) out.push_back(make_sample(cfg, sites, bank, channel::mix_seed(base, i)));
    return out;
}

estimation::CovarianceBank calibrate_covariance(const TrainConfig& cfg)
{
    return estimation::calibrate_bank(cfg.scenario, stream_seed(cfg.seed, Stream::covariance),
                                      cfg.estimation.covariance_samples);
}

namespace {

std::vector<CsiTensor> bs_estimates(const std::vector<Sample>& samples, std::size_t bs)
{
    std::vector<CsiTensor> out;
    out.reserve(samples.size());
    for (const auto& s : samples) out.push_back(s.estimates[bs]);
    return out;
}

} // namespace

Stage1Result run_stage1(const TrainConfig& cfg, const estimation::CovarianceBank& bank, const Stage1Hook& hook)
{
    // Epoch data is shared by the per-BS runs; each run reads its own BS slice.
    std::map<std::size_t, std::vector<Sample>> epochs;
    auto epoch_data = [&](std::size_t epoch) -> const std::vector<Sample>& {
        auto it = epochs.find(epoch);
        if (it == epochs.end())
            it = epochs.emplace(epoch, make_samples(cfg, bank, Stream::stage1_train, epoch, cfg.stage1.samples_per_epoch))
                     .first;
        return it->second;
    };
    const auto validation = make_samples(cfg, bank, Stream::stage1_validation, 0, cfg.stage1.validation_samples);

    edge::Stage1Config s1;
    s1.epochs = cfg.stage1.epochs;
    s1.batch_size = cfg.stage1.batch_size;
    s1.learning_rate = cfg.stage1.learning_rate;
    s1.seed = cfg.seed;
    s1.norm_epsilon = cfg.norm_epsilon;
    s1.angle_epsilon = cfg.angle_epsilon;

    Stage1Result result;
    for (std::size_t bs = 0; bs < cfg.scenario.num_bs; ++bs) {
        const auto val_csi = bs_estimates(validation, bs);
        auto on_epoch = [&](const edge::Stage1Epoch& e, const ad::ParamSet& params) {
            const std::size_t done = e.epoch + 1;
            if (done % cfg.stage1.validation_period != 0 && done != cfg.stage1.epochs) return;
            Stage1Record rec{bs, done, e.train_loss,
                             edge::stage1_loss(params, bs, val_csi, cfg.encoder, cfg.norm_epsilon, cfg.angle_epsilon)};
            result.history.push_back(rec);
            if (hook) hook(rec, params);
        };
        const auto provider = [&](std::size_t epoch) { return bs_estimates(epoch_data(epoch), bs); };
        const ad::ParamSet enc = edge::stage1_train(provider, cfg.encoder, s1, bs, on_epoch);
        for (const auto& [name, p] : enc) result.encoders.add(name, p.value);
    }
    return result;
}

namespace {

ad::Tensor batch_features(const std::vector<const Sample*>& batch, std::size_t bs)
{
    std::vector<const ad::Tensor*> parts;
    parts.reserve(batch.size());
    for (const auto* s : batch) parts.push_back(&s->features[bs]);
    return edge::stack_rows(parts);
}

// Edge encoders, quantizer and CU on a batch; returns the N_sc intermediate estimates (B x 3 each).
std::vector<Var> forward(const Binder& edge_bind, const Binder& cu_bind, const TrainConfig& cfg,
                         const QuantSpec& quant, const std::vector<const Sample*>& batch)
{
    ad::Graph& g = cu_bind.graph();
    const std::size_t count = batch.size();
    const std::size_t L = cfg.scenario.num_bs;
    std::vector<Var> latents;
    latents.reserve(L);
    for (std::size_t l = 0; l < L; ++l) {
        Var z = edge::encode(edge_bind, edge::encoder_prefix(l), g.constant(batch_features(batch, l)), cfg.encoder);
        z = ad::reshape(z, count, cfg.encoder.latent_length());
        if (!quant.identity()) z = ad::ste_quantize(z, quant.bits, quant.steps.at(l));
        latents.push_back(z);
    }
    ad::Tensor gains(count, L);
    for (std::size_t b = 0; b < count; ++b)
        for (std::size_t l = 0; l < L; ++l) gains.at(b, l) = batch[b]->gains[l];
    return cloud::cu_forward(cu_bind, latents, gains, cfg.cu);
}

ad::Tensor batch_positions(const std::vector<const Sample*>& batch)
{
    ad::Tensor p(batch.size(), 3);
    for (std::size_t b = 0; b < batch.size(); ++b)
        for (std::size_t k = 0; k < 3; ++k) p.at(b, k) = batch[b]->position[k];
    return p;
}

void check_quant(const QuantSpec& quant, const TrainConfig& cfg)
{
    if (!quant.identity() && quant.steps.size() != cfg.scenario.num_bs)
        throw std::invalid_argument("quantizer: one step size per BS required");
}

constexpr std::size_t kEvalChunk = 128;

// Batched forward without training; returns (final estimates, validation WMSE).
std::pair<std::vector<channel::Vec3>, double> evaluate_batches(const ad::ParamSet& params, const TrainConfig& cfg,
                                                               const QuantSpec& quant,
                                                               const std::vector<Sample>& samples)
{
    std::vector<channel::Vec3> out;
    out.reserve(samples.size());
    double loss = 0.0;
    for (std::size_t start = 0; start < samples.size(); start += kEvalChunk) {
        const std::size_t count = std::min(kEvalChunk, samples.size() - start);
        std::vector<const Sample*> batch;
        for (std::size_t i = 0; i < count; ++i) batch.push_back(&samples[start + i]);
        ad::Graph g;
        const Binder bind(g, params);
        const auto preds = forward(bind, bind, cfg, quant, batch);
        loss += cloud::wmse_loss(g.constant(batch_positions(batch)), preds).value()[0] * static_cast<double>(count);
        const ad::Tensor& last = preds.back().value();
        for (std::size_t b = 0; b < count; ++b) out.push_back({last.at(b, 0), last.at(b, 1), last.at(b, 2)});
    }
    return {std::move(out), loss / static_cast<double>(samples.size())};
}

} // namespace

std::vector<double> collect_latents(const ad::ParamSet& encoders, const TrainConfig& cfg, std::size_t bs,
                                    const std::vector<Sample>& samples)
{
    std::vector<double> values;
    for (std::size_t start = 0; start < samples.size(); start += kEvalChunk) {
        const std::size_t count = std::min(kEvalChunk, samples.size() - start);
        std::vector<const Sample*> batch;
        for (std::size_t i = 0; i < count; ++i) batch.push_back(&samples[start + i]);
        ad::Graph g;
        const Binder bind(g, encoders);
        const Var z = edge::encode(bind, edge::encoder_prefix(bs), g.constant(batch_features(batch, bs)), cfg.encoder);
        values.insert(values.end(), z.value().values().begin(), z.value().values().end());
    }
    return values;
}

std::vector<double> calibrate_quantizer(const ad::ParamSet& encoders, const TrainConfig& cfg,
                                        const estimation::CovarianceBank& bank, int bits)
{
    const auto samples = make_samples(cfg, bank, Stream::calibration, 0, cfg.quant.calibration_samples);
    std::vector<double> steps;
    for (std::size_t l = 0; l < cfg.scenario.num_bs; ++l)
        steps.push_back(fronthaul::calibrate_step(collect_latents(encoders, cfg, l, samples), bits, cfg.quant.percentile));
    return steps;
}

Stage2Result run_stage2(const TrainConfig& cfg, const estimation::CovarianceBank& bank, const ad::ParamSet& encoders,
                        const QuantSpec& quant, const Stage2Hook& hook)
{
    check_quant(quant, cfg);
    Stage2Result result;
    ad::ParamSet& params = result.params;
    const std::size_t L = cfg.scenario.num_bs;
    for (std::size_t l = 0; l < L; ++l) {
        const std::string prefix = edge::encoder_prefix(l);
        if (cfg.stage2.from_scratch) {
            std::mt19937_64 rng(channel::mix_seed(cfg.seed, 0x5747 + l));
            edge::init_encoder(params, prefix, cfg.encoder, rng);
        } else {
            std::size_t found = 0;
            for (const auto& [name, p] : encoders)
                if (name.starts_with(prefix + "/")) {
                    params.add(name, p.value);
                    ++found;
                }
            if (found == 0) throw std::invalid_argument("run_stage2: no Stage I encoder for BS " + std::to_string(l));
        }
    }
    std::mt19937_64 rng(channel::mix_seed(cfg.seed, 0xC0DE));
    cloud::init_cu(params, cfg.cu, rng);

    const auto validation = make_samples(cfg, bank, Stream::stage2_validation, 0, cfg.stage2.validation_samples);
    std::vector<channel::Vec3> val_truth;
    for (const auto& s : validation) val_truth.push_back(s.position);
    auto validate = [&](std::size_t epoch) {
        const auto [est, loss] = evaluate_batches(params, cfg, quant, validation);
        const auto summary = eval::summarize(eval::position_errors(val_truth, est));
        const Stage2Record rec{epoch, loss, summary.mean, summary.e90};
        result.history.push_back(rec);
        if (hook) hook(rec, params);
    };
    validate(0);

    ad::AdamConfig adam{cfg.stage2.learning_rate};
    const std::size_t batches_per_epoch =
        (cfg.stage2.samples_per_epoch + cfg.stage2.batch_size - 1) / cfg.stage2.batch_size;
    const double total_steps = static_cast<double>(std::max<std::size_t>(1, cfg.stage2.epochs * batches_per_epoch));
    const std::vector<std::string> frozen =
        cfg.stage2.freeze_encoders ? std::vector<std::string>{"bs"} : std::vector<std::string>{};
    std::uint64_t step = 0;
    for (std::size_t epoch = 0; epoch < cfg.stage2.epochs; ++epoch) {
        const auto samples = make_samples(cfg, bank, Stream::stage2_train, epoch, cfg.stage2.samples_per_epoch);
        std::vector<std::size_t> order(samples.size());
        std::iota(order.begin(), order.end(), 0);
        std::shuffle(order.begin(), order.end(), rng);
        for (std::size_t start = 0; start < order.size(); start += cfg.stage2.batch_size) {
            const std::size_t count = std::min(cfg.stage2.batch_size, order.size() - start);
            std::vector<const Sample*> batch;
            for (std::size_t i = 0; i < count; ++i) batch.push_back(&samples[order[start + i]]);
            ad::Graph g;
            const Binder train(g, params);
            const Binder fixed(g, std::as_const(params));
            const auto preds = forward(cfg.stage2.freeze_encoders ? fixed : train, train, cfg, quant, batch);
            const Var loss = cloud::wmse_loss(g.constant(batch_positions(batch)), preds);
            const double value = loss.value()[0];
            if (!std::isfinite(value))
                throw ad::NumericError("stage2: non-finite loss at epoch " + std::to_string(epoch + 1) + ", step " +
                                       std::to_string(step));
            params.zero_grad();
            g.backward(loss);
            const double progress = static_cast<double>(step) / total_steps;
            const double floor = cfg.stage2.final_lr_fraction;
            adam.learning_rate = cfg.stage2.learning_rate *
                                 (floor + (1.0 - floor) * 0.5 * (1.0 + std::cos(std::numbers::pi * progress)));
            ad::adam_step(params, adam, frozen);
            ++step;
        }
        const std::size_t done = epoch + 1;
        if (done % cfg.stage2.validation_period == 0 || done == cfg.stage2.epochs) validate(done);
    }
    return result;
}

std::vector<channel::Vec3> predict(const ad::ParamSet& params, const TrainConfig& cfg, const QuantSpec& quant,
                                   const std::vector<Sample>& samples)
{
    check_quant(quant, cfg);
    if (samples.empty()) return {};
    return evaluate_batches(params, cfg, quant, samples).first;
}

std::vector<fronthaul::FronthaulMessage> edge_messages(const ad::ParamSet& params, const TrainConfig& cfg,
                                                       const QuantSpec& quant, const Sample& sample,
                                                       std::uint64_t snapshot_id)
{
    check_quant(quant, cfg);
    if (quant.identity()) throw std::invalid_argument("edge_messages: the identity reference has no fronthaul codec");
    std::vector<fronthaul::FronthaulMessage> out;
    for (std::size_t l = 0; l < cfg.scenario.num_bs; ++l) {
        ad::Graph g;
        const Binder bind(g, params);
        const auto z = edge::encode(bind, edge::encoder_prefix(l), g.constant(sample.features[l]), cfg.encoder).value();
        out.push_back(fronthaul::encode_message(z.values(), sample.gains[l],
                                                fronthaul::QuantizerConfig(quant.bits, quant.steps[l]),
                                                static_cast<std::uint16_t>(l), snapshot_id));
    }
    return out;
}

cloud::PositionEstimate localize(const ad::ParamSet& params, const TrainConfig& cfg, const QuantSpec& quant,
                                 const Sample& sample, std::uint64_t snapshot_id)
{
    check_quant(quant, cfg);
    if (quant.identity()) {
        std::vector<std::vector<double>> latents;
        for (std::size_t l = 0; l < cfg.scenario.num_bs; ++l) {
            ad::Graph g;
            const Binder bind(g, params);
            const auto z = edge::encode(bind, edge::encoder_prefix(l), g.constant(sample.features[l]), cfg.encoder);
            latents.emplace_back(z.value().values().begin(), z.value().values().end());
        }
        return cloud::infer_latents(latents, sample.gains, params, cfg.cu);
    }
    std::vector<fronthaul::QuantizerConfig> quantizers;
    for (double step : quant.steps) quantizers.emplace_back(quant.bits, step);
    return cloud::infer(edge_messages(params, cfg, quant, sample, snapshot_id), params, quantizers, cfg.cu);
}

void save_quant_spec(const std::filesystem::path& path, const QuantSpec& spec)
{
    std::ofstream out(path);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << "bs,bits,step\n";
    char buf[64];
    for (std::size_t l = 0; l < spec.steps.size(); ++l) {
        std::snprintf(buf, sizeof buf, "%.17g", spec.steps[l]);
        out << l << ',' << spec.bits << ',' << buf << '\n';
    }
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

QuantSpec load_quant_spec(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (line != "bs,bits,step") throw std::runtime_error(path.string() + ": unexpected header");
    QuantSpec spec;
    spec.bits = -1;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream row(line);
        std::size_t bs = 0;
        int bits = 0;
        double step = 0.0;
        char c1 = 0, c2 = 0;
        if (!(row >> bs >> c1 >> bits >> c2 >> step) || c1 != ',' || c2 != ',' || bs != spec.steps.size())
            throw std::runtime_error(path.string() + ": malformed row '" + line + "'");
        if (spec.bits >= 0 && bits != spec.bits) throw std::runtime_error(path.string() + ": mixed bit widths");
        spec.bits = bits;
        spec.steps.push_back(step);
    }
    if (spec.steps.empty()) throw std::runtime_error(path.string() + ": no step sizes");
    return spec;
}

} // namespace ecc::pipeline
