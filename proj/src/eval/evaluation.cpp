// SPDX-License-Identifier: Apache-2.0
#include "ecc/eval/evaluation.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <numbers>
#include <sstream>
#include <stdexcept>
#include <tuple>

#include "ecc/fronthaul/payload.hpp"

namespace ecc::eval {

namespace {

std::string fmt(const char* pattern, double v)
{
    char buf[64];
    std::snprintf(buf, sizeof buf, pattern, v);
    return buf;
}

std::string num(double v) { return fmt("%.9g", v); }

void write_file(const std::filesystem::path& path, const std::string& text)
{
    if (path.has_parent_path()) std::filesystem::create_directories(path.parent_path());
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write " + path.string());
    out << text;
    out.flush();
    if (!out) throw std::runtime_error("write failed: " + path.string());
}

} // namespace

std::pair<double, double> payload_ratios(const pipeline::TrainConfig& cfg, int bits)
{
    if (bits == 0) return {1.0, 1.0};
    const fronthaul::CsiDims dims{cfg.scenario.slots, cfg.scenario.antennas(), cfg.scenario.subcarriers};
    const std::uint64_t D = cfg.encoder.latent_length();
    return {fronthaul::payload_ratio(D, bits, dims, fronthaul::kGainFieldBits, false),
            fronthaul::payload_ratio(D, bits, dims, fronthaul::kGainFieldBits, true)};
}

EvalReport evaluate(const Model& model, const pipeline::TrainConfig& cfg, const std::vector<pipeline::Sample>& test)
{
    if (test.empty()) throw std::invalid_argument("evaluate: empty test set");
    EvalReport r;
    r.bits = model.quant.bits;
    for (std::size_t i = 0; i < test.size(); ++i) {
        r.truth.push_back(test[i].position);
        r.estimates.push_back(pipeline::localize(model.params, cfg, model.quant, test[i], i).position);
    }
    r.errors = position_errors(r.truth, r.estimates);
    const auto s = summarize(r.errors);
    r.mean_error = s.mean;
    r.e90 = s.e90;
    r.cdf = error_cdf(r.errors, cfg.eval.cdf_points);
    std::tie(r.eta, r.eta_total) = payload_ratios(cfg, r.bits);
    r.config_echo = pipeline::to_ini(cfg);
    return r;
}

std::vector<TradeoffRow> tradeoff_table(const std::vector<EvalReport>& reports)
{
    std::vector<TradeoffRow> rows;
    for (const auto& r : reports) rows.push_back({r.bits, r.eta, r.mean_error, r.e90});
    return rows;
}

std::vector<channel::Vec3> spiral_trajectory(const pipeline::TrainConfig& cfg, std::size_t count)
{
    if (count == 0) throw std::invalid_argument("spiral_trajectory: no points");
    const auto& box = cfg.scenario.region;
    const auto c = box.center();
    std::vector<channel::Vec3> pts;
    for (std::size_t i = 0; i < count; ++i) {
        const double t = count == 1 ? 0.0 : static_cast<double>(i) / static_cast<double>(count - 1);
        const double angle = 2.0 * std::numbers::pi * cfg.eval.trajectory_turns * t;
        const channel::Vec3 p{c[0] + cfg.eval.trajectory_radius * std::cos(angle),
                              c[1] + cfg.eval.trajectory_radius * std::sin(angle),
                              box.z_min + (box.z_max - box.z_min) * t};
        if (!box.contains(p))
            throw std::out_of_range("spiral_trajectory: point " + std::to_string(i) + " lies outside the region");
        pts.push_back(p);
    }
    return pts;
}

TrajectoryReport trajectory_eval(const Model& model, const pipeline::TrainConfig& cfg,
                                 const estimation::CovarianceBank& bank)
{
    TrajectoryReport r;
    r.points = spiral_trajectory(cfg, cfg.eval.trajectory_points);
    const auto sites = channel::make_sites(cfg.scenario);
    const std::uint64_t base = pipeline::stream_seed(cfg.seed, pipeline::Stream::trajectory);
    for (std::size_t i = 0; i < r.points.size(); ++i) {
        const auto snap = channel::make_snapshot_at(cfg.scenario, sites, r.points[i], channel::mix_seed(base, i));
        const auto sample = pipeline::make_sample(cfg, sites, bank, snap.position, snap.observations);
        r.estimates.push_back(pipeline::localize(model.params, cfg, model.quant, sample, i).position);
    }
    r.errors = position_errors(r.points, r.estimates);
    r.mean_error = summarize(r.errors).mean;
    return r;
}

std::string summary_text(const EvalReport& report)
{
    std::string s;
    s += "quant_bits: " + std::to_string(report.bits) + (report.bits == 0 ? " (lossless embedding)\n" : "\n");
    s += "samples: " + std::to_string(report.errors.size()) + "\n";
    s += "mean_error_m: " + fmt("%.2f", report.mean_error) + "\n";
    s += "e90_m: " + fmt("%.2f", report.e90) + "\n";
    s += "eta_percent: " + fmt("%.2f", 100.0 * report.eta) + "\n";
    s += "eta_total_percent: " + fmt("%.2f", 100.0 * report.eta_total) + "\n";
    return s;
}

void emit_reports(const EvalReport& report, const std::filesystem::path& dir)
{
    std::string errors = "index,x,y,z,x_hat,y_hat,z_hat,error_m\n";
    for (std::size_t i = 0; i < report.errors.size(); ++i) {
        const auto& p = report.truth[i];
        const auto& q = report.estimates[i];
        errors += std::to_string(i) + "," + num(p[0]) + "," + num(p[1]) + "," + num(p[2]) + "," + num(q[0]) + "," +
                  num(q[1]) + "," + num(q[2]) + "," + fmt("%.17g", report.errors[i]) + "\n";
    }
    std::string cdf = "error_m,cdf\n";
    for (const auto& [x, f] : report.cdf) cdf += num(x) + "," + num(f) + "\n";
    write_file(dir / "errors.csv", errors);
    write_file(dir / "cdf.csv", cdf);
    write_file(dir / "summary.txt", summary_text(report));
    if (!report.config_echo.empty()) write_file(dir / "config.ini", report.config_echo);
}

void emit_tradeoff(const std::vector<TradeoffRow>& rows, const std::filesystem::path& path)
{
    std::string text = "quant_bits,eta_percent,mean_error_m,e90_m\n";
    for (const auto& r : rows)
        text += std::to_string(r.bits) + "," + fmt("%.2f", 100.0 * r.eta) + "," + fmt("%.4f", r.mean_error) + "," +
                fmt("%.4f", r.e90) + "\n";
    write_file(path, text);
}

void emit_trajectory(const TrajectoryReport& report, const std::filesystem::path& dir)
{
    std::string text = "index,x,y,z,x_hat,y_hat,z_hat,error_m\n";
    for (std::size_t i = 0; i < report.points.size(); ++i) {
        const auto& p = report.points[i];
        const auto& q = report.estimates[i];
        text += std::to_string(i) + "," + num(p[0]) + "," + num(p[1]) + "," + num(p[2]) + "," + num(q[0]) + "," +
                num(q[1]) + "," + num(q[2]) + "," + num(report.errors[i]) + "\n";
    }
    write_file(dir / "trajectory.csv", text);
    write_file(dir / "trajectory_summary.txt", "points: " + std::to_string(report.points.size()) +
                                                   "\nmean_tracking_error_m: " + fmt("%.2f", report.mean_error) + "\n");
}

void emit_stage2_metrics(const std::vector<pipeline::Stage2Record>& history, const std::filesystem::path& path)
{
    std::string text = "epoch,loss,mean_error,e90\n";
    for (const auto& r : history)
        text += std::to_string(r.epoch) + "," + num(r.loss) + "," + num(r.mean_error) + "," + num(r.e90) + "\n";
    write_file(path, text);
}

void emit_stage1_metrics(const std::vector<pipeline::Stage1Record>& history, const std::filesystem::path& path)
{
    std::string text = "bs,epoch,train_loss,validation_loss\n";
    for (const auto& r : history)
        text += std::to_string(r.bs) + "," + std::to_string(r.epoch) + "," + num(r.train_loss) + "," +
                num(r.validation_loss) + "\n";
    write_file(path, text);
}

std::vector<double> read_errors_csv(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw std::runtime_error("cannot open " + path.string());
    std::string line;
    std::getline(in, line);
    if (!line.ends_with(",error_m")) throw std::runtime_error(path.string() + ": missing error_m column");
    std::vector<double> errors;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        errors.push_back(std::stod(line.substr(line.rfind(',') + 1)));
    }
    return errors;
}

} // namespace ecc::eval
