// SPDX-License-Identifier: Apache-2.0
// Command-line driver for the positioning pipeline. Every subcommand works on
// one run directory (--out) and one configuration (--config).

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

#include "ecc/autodiff/checkpoint.hpp"
#include "ecc/channel/dataset.hpp"
#include "ecc/eval/evaluation.hpp"
#include "ecc/pipeline/pipeline.hpp"

namespace fs = std::filesystem;
using namespace ecc;

namespace {

constexpr const char* kHelpFooter = R"(Run directory layout and CSV columns:
  config.ini                     configuration echo
  covariance.bin                 per-(BS, subcarrier) channel covariances
  test_set.bin                   pilot observations of the test set
  stage1/encoders.ckpt           Stage I encoders (decoders discarded)
  stage1/metrics.csv             bs,epoch,train_loss,validation_loss
  quant/q<Q>.csv                 bs,bits,step
  stage2/q<Q>/model.ckpt         encoders and CU network
  stage2/q<Q>/metrics.csv        epoch,loss,mean_error,e90 (loss = validation WMSE)
  eval/q<Q>/errors.csv           index,x,y,z,x_hat,y_hat,z_hat,error_m
  eval/q<Q>/cdf.csv              error_m,cdf
  eval/q<Q>/summary.txt          mean error, e90 and payload ratio (2 decimals)
  tradeoff.csv                   quant_bits,eta_percent,mean_error_m,e90_m
  trajectory/q<Q>/trajectory.csv index,x,y,z,x_hat,y_hat,z_hat,error_m
  report.txt                     per-Q summary recomputed from eval/*/errors.csv
Q = 0 selects the lossless-embedding reference (identity quantizer).)";

struct Options {
    std::string config;
    std::uint64_t seed = 0;
    std::string out = "run";
    std::string quant_bits;
};

struct Context {
    pipeline::TrainConfig cfg;
    std::string config_text;
    fs::path out;
};

Context load_context(const Options& opt, CLI::App* sub)
{
    Context ctx;
    if (!opt.config.empty()) {
        std::ifstream in(opt.config);
        if (!in) throw std::runtime_error("cannot open config " + opt.config);
        std::ostringstream text;
        text << in.rdbuf();
        ctx.config_text = text.str();
        ctx.cfg = pipeline::parse_config(ctx.config_text);
    } else {
        ctx.cfg.sync();
    }
    if (sub->count("--seed")) ctx.cfg.seed = opt.seed;
    if (!opt.quant_bits.empty()) ctx.cfg.quant.bits = pipeline::parse_bits_list(opt.quant_bits);
    ctx.cfg.validate();
    if (ctx.config_text.empty()) ctx.config_text = pipeline::to_ini(ctx.cfg);
    ctx.out = opt.out;
    fs::create_directories(ctx.out);
    std::ofstream echo(ctx.out / "config.ini", std::ios::binary | std::ios::trunc);
    echo << ctx.config_text;
    if (sub->count("--seed")) echo << "\n; --seed " << ctx.cfg.seed << "\n";
    if (!opt.quant_bits.empty()) echo << "; --quant-bits " << opt.quant_bits << "\n";
    if (!echo) throw std::runtime_error("cannot write " + (ctx.out / "config.ini").string());
    return ctx;
}

void say(const std::string& msg) { std::cout << msg << std::endl; }

std::string two(double v)
{
    char buf[32];
    std::snprintf(buf, sizeof buf, "%.2f", v);
    return buf;
}

estimation::CovarianceBank bank_for(const Context& ctx)
{
    const fs::path path = ctx.out / "covariance.bin";
    if (fs::exists(path)) {
        auto bank = estimation::load_bank(path);
        const auto& s = ctx.cfg.scenario;
        if (bank.num_bs() != s.num_bs || bank.subcarriers() != s.subcarriers || bank.antennas() != s.antennas())
            throw std::runtime_error(path.string() + " does not match the configured dimensions");
        return bank;
    }
    say("calibrating covariance bank (" + std::to_string(ctx.cfg.estimation.covariance_samples) + " samples per BS)");
    auto bank = pipeline::calibrate_covariance(ctx.cfg);
    estimation::save_bank(path, bank);
    return bank;
}

ad::ParamSet encoders_for(const Context& ctx)
{
    const fs::path path = ctx.out / "stage1" / "encoders.ckpt";
    if (!fs::exists(path)) throw std::runtime_error(path.string() + " missing; run train-stage1 first");
    return ad::load_checkpoint(path);
}

fs::path quant_path(const Context& ctx, int bits) { return ctx.out / "quant" / ("q" + std::to_string(bits) + ".csv"); }
fs::path stage2_dir(const Context& ctx, int bits) { return ctx.out / "stage2" / ("q" + std::to_string(bits)); }

pipeline::QuantSpec quant_for(const Context& ctx, int bits)
{
    if (bits == 0 || ctx.cfg.stage2.identity_quantizer) return {};
    const fs::path path = quant_path(ctx, bits);
    if (!fs::exists(path)) throw std::runtime_error(path.string() + " missing; run calibrate-quant first");
    return pipeline::load_quant_spec(path);
}

eval::Model model_for(const Context& ctx, int bits)
{
    const fs::path path = stage2_dir(ctx, bits) / "model.ckpt";
    if (!fs::exists(path)) throw std::runtime_error(path.string() + " missing; run train-stage2 first");
    return {ad::load_checkpoint(path), quant_for(ctx, bits)};
}

std::vector<pipeline::Sample> test_set_for(const Context& ctx, const estimation::CovarianceBank& bank)
{
    const fs::path path = ctx.out / "test_set.bin";
    if (!fs::exists(path)) {
        say("generating test set (" + std::to_string(ctx.cfg.eval.test_samples) + " snapshots)");
        channel::save_dataset(path, channel::generate_dataset(ctx.cfg.scenario,
                                                              pipeline::stream_seed(ctx.cfg.seed, pipeline::Stream::test),
                                                              ctx.cfg.eval.test_samples));
    }
    const auto data = channel::load_dataset(path);
    const auto& s = ctx.cfg.scenario;
    if (data.header.num_bs != s.num_bs || data.header.slots != s.slots || data.header.antennas != s.antennas() ||
        data.header.subcarriers != s.subcarriers)
        throw std::runtime_error(path.string() + " does not match the configured dimensions");
    const auto sites = channel::make_sites(s);
    std::vector<pipeline::Sample> samples;
    for (const auto& r : data.records)
        samples.push_back(pipeline::make_sample(ctx.cfg, sites, bank, r.position, r.observations));
    return samples;
}

void cmd_gen_data(const Context& ctx)
{
    const fs::path path = ctx.out / "test_set.bin";
    channel::save_dataset(path, channel::generate_dataset(ctx.cfg.scenario,
                                                          pipeline::stream_seed(ctx.cfg.seed, pipeline::Stream::test),
                                                          ctx.cfg.eval.test_samples));
    say("wrote " + path.string());
}

void cmd_calibrate_cov(const Context& ctx)
{
    estimation::save_bank(ctx.out / "covariance.bin", pipeline::calibrate_covariance(ctx.cfg));
    say("wrote " + (ctx.out / "covariance.bin").string());
}

void cmd_train_stage1(const Context& ctx)
{
    const auto bank = bank_for(ctx);
    const fs::path dir = ctx.out / "stage1";
    fs::create_directories(dir / "checkpoints");
    const auto result = pipeline::run_stage1(ctx.cfg, bank, [&](const pipeline::Stage1Record& r, const ad::ParamSet& p) {
        say("stage1 bs " + std::to_string(r.bs) + " epoch " + std::to_string(r.epoch) + " train " +
            std::to_string(r.train_loss) + " validation " + std::to_string(r.validation_loss));
        ad::save_checkpoint(dir / "checkpoints" /
                                ("bs" + std::to_string(r.bs) + "_epoch" + std::to_string(r.epoch) + ".ckpt"),
                            p, "bs" + std::to_string(r.bs) + "/enc");
    });
    ad::save_checkpoint(dir / "encoders.ckpt", result.encoders);
    eval::emit_stage1_metrics(result.history, dir / "metrics.csv");
    say("wrote " + (dir / "encoders.ckpt").string());
}

void cmd_calibrate_quant(const Context& ctx)
{
    const auto bank = bank_for(ctx);
    const auto encoders = encoders_for(ctx);
    for (int bits : ctx.cfg.quant.bits) {
        if (bits == 0) continue;
        pipeline::QuantSpec spec{bits, pipeline::calibrate_quantizer(encoders, ctx.cfg, bank, bits)};
        fs::create_directories(ctx.out / "quant");
        pipeline::save_quant_spec(quant_path(ctx, bits), spec);
        say("wrote " + quant_path(ctx, bits).string());
    }
}

void cmd_train_stage2(const Context& ctx)
{
    const auto bank = bank_for(ctx);
    const ad::ParamSet encoders = ctx.cfg.stage2.from_scratch ? ad::ParamSet{} : encoders_for(ctx);
    for (int bits : ctx.cfg.quant.bits) {
        const fs::path dir = stage2_dir(ctx, bits);
        fs::create_directories(dir / "checkpoints");
        const auto quant = quant_for(ctx, bits);
        const auto result = pipeline::run_stage2(
            ctx.cfg, bank, encoders, quant, [&](const pipeline::Stage2Record& r, const ad::ParamSet& p) {
                say("stage2 q" + std::to_string(bits) + " epoch " + std::to_string(r.epoch) + " loss " +
                    std::to_string(r.loss) + " mean " + two(r.mean_error) + " m e90 " + two(r.e90) + " m");
                ad::save_checkpoint(dir / "checkpoints" / ("epoch" + std::to_string(r.epoch) + ".ckpt"), p);
            });
        ad::save_checkpoint(dir / "model.ckpt", result.params);
        eval::emit_stage2_metrics(result.history, dir / "metrics.csv");
        say("wrote " + (dir / "model.ckpt").string());
    }
}

std::vector<eval::EvalReport> evaluate_all(const Context& ctx)
{
    const auto bank = bank_for(ctx);
    const auto test = test_set_for(ctx, bank);
    std::vector<eval::EvalReport> reports;
    for (int bits : ctx.cfg.quant.bits) {
        auto report = eval::evaluate(model_for(ctx, bits), ctx.cfg, test);
        report.config_echo = ctx.config_text;
        eval::emit_reports(report, ctx.out / "eval" / ("q" + std::to_string(bits)));
        say("q" + std::to_string(bits) + ": mean " + two(report.mean_error) + " m, e90 " + two(report.e90) +
            " m, eta " + two(100.0 * report.eta) + " %");
        reports.push_back(std::move(report));
    }
    return reports;
}

void cmd_evaluate(const Context& ctx) { evaluate_all(ctx); }

void cmd_tradeoff(const Context& ctx)
{
    eval::emit_tradeoff(eval::tradeoff_table(evaluate_all(ctx)), ctx.out / "tradeoff.csv");
    say("wrote " + (ctx.out / "tradeoff.csv").string());
}

void cmd_trajectory(const Context& ctx)
{
    const auto bank = bank_for(ctx);
    for (int bits : ctx.cfg.quant.bits) {
        const auto report = eval::trajectory_eval(model_for(ctx, bits), ctx.cfg, bank);
        const fs::path dir = ctx.out / "trajectory" / ("q" + std::to_string(bits));
        eval::emit_trajectory(report, dir);
        say("q" + std::to_string(bits) + ": mean tracking error " + two(report.mean_error) + " m over " +
            std::to_string(report.points.size()) + " points");
    }
}

void cmd_report(const Context& ctx)
{
    std::string text = "quant_bits,samples,mean_error_m,e90_m,eta_percent\n";
    for (int bits : ctx.cfg.quant.bits) {
        const fs::path path = ctx.out / "eval" / ("q" + std::to_string(bits)) / "errors.csv";
        if (!fs::exists(path)) throw std::runtime_error(path.string() + " missing; run evaluate first");
        const auto errors = eval::read_errors_csv(path);
        const auto s = eval::summarize(errors);
        text += std::to_string(bits) + "," + std::to_string(errors.size()) + "," + two(s.mean) + "," + two(s.e90) +
                "," + two(100.0 * eval::payload_ratios(ctx.cfg, bits).first) + "\n";
    }
    std::ofstream out(ctx.out / "report.txt", std::ios::binary | std::ios::trunc);
    out << text;
    if (!out) throw std::runtime_error("cannot write report.txt");
    std::cout << text;
}

} // namespace

int main(int argc, char** argv)
{
    CLI::App app{"Cooperative multi-BS positioning with compressed fronthaul"};
    app.footer(kHelpFooter);
    app.require_subcommand(1);

    Options opt;
    struct Command {
        const char* name;
        const char* help;
        void (*run)(const Context&);
    };
    const Command commands[] = {
        {"gen-data", "Generate the pilot-observation test set", cmd_gen_data},
        {"calibrate-cov", "Calibrate the per-subcarrier channel covariance bank", cmd_calibrate_cov},
        {"train-stage1", "Self-supervised autoencoder training at every BS", cmd_train_stage1},
        {"calibrate-quant", "Calibrate per-BS quantizer step sizes for each Q", cmd_calibrate_quant},
        {"train-stage2", "End-to-end training of encoders and CU for each Q", cmd_train_stage2},
        {"evaluate", "Mean error, e90 and CDF on the test set for each Q", cmd_evaluate},
        {"tradeoff", "Payload/accuracy table over Q", cmd_tradeoff},
        {"trajectory", "Spiral trajectory tracking error for each Q", cmd_trajectory},
        {"report", "Summarize evaluation outputs into report.txt", cmd_report},
    };
    std::vector<std::pair<CLI::App*, const Command*>> subs;
    for (const auto& c : commands) {
        CLI::App* sub = app.add_subcommand(c.name, c.help);
        sub->add_option("--config", opt.config, "INI configuration file")->check(CLI::ExistingFile);
        sub->add_option("--seed", opt.seed, "Master seed (overrides [train] seed)");
        sub->add_option("--out", opt.out, "Run directory")->capture_default_str();
        sub->add_option("--quant-bits", opt.quant_bits, "Comma-separated Q list, 0 = identity reference");
        sub->footer(kHelpFooter);
        subs.emplace_back(sub, &c);
    }

    CLI11_PARSE(app, argc, argv);
    try {
        for (const auto& [sub, cmd] : subs)
            if (sub->parsed()) cmd->run(load_context(opt, sub));
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << std::endl;
        return 1;
    }
    return 0;
}
