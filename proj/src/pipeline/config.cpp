// SPDX-License-Identifier: Apache-2.0
#include "ecc/pipeline/config.hpp"

#include <boost/property_tree/ini_parser.hpp>
#include <boost/property_tree/ptree.hpp>
#include <charconv>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace ecc::pipeline {

namespace pt = boost::property_tree;

static_assert(std::is_same_v<std::uint64_t, std::size_t>, "seed fields share the size_t parser");

namespace {

template <class F>
void visit_fields(TrainConfig& c, F&& f)
{
    auto& s = c.scenario;
    f("scenario.num_bs", s.num_bs);
    f("scenario.slots", s.slots);
    f("scenario.array_rows", s.array_rows);
    f("scenario.array_cols", s.array_cols);
    f("scenario.subcarriers", s.subcarriers);
    f("scenario.subcarrier_spacing_hz", s.subcarrier_spacing_hz);
    f("scenario.first_subcarrier_hz", s.first_subcarrier_hz);
    f("scenario.carrier_hz", s.carrier_hz);
    f("scenario.antenna_spacing", s.antenna_spacing);
    f("scenario.x_min", s.region.x_min);
    f("scenario.x_max", s.region.x_max);
    f("scenario.y_min", s.region.y_min);
    f("scenario.y_max", s.region.y_max);
    f("scenario.z_min", s.region.z_min);
    f("scenario.z_max", s.region.z_max);
    f("scenario.bs_height", s.bs_height);
    f("scenario.bs_ring_factor", s.bs_ring_factor);
    f("scenario.bs_positions", s.bs_positions);
    f("scenario.noise_variance", s.noise_variance);
    f("scenario.paths_min", s.paths_min);
    f("scenario.paths_max", s.paths_max);
    f("scenario.blockage_probability", s.blockage_probability);
    f("scenario.blocked_gain", s.blocked_gain);
    f("scenario.reference_distance", s.reference_distance);
    f("scenario.reflection_min", s.reflection_min);
    f("scenario.reflection_max", s.reflection_max);
    f("estimation.covariance_samples", c.estimation.covariance_samples);
    f("preprocess.norm_epsilon", c.norm_epsilon);
    f("preprocess.angle_epsilon", c.angle_epsilon);
    f("encoder.latent_dim", c.encoder.latent_dim);
    f("encoder.width", c.encoder.width);
    f("encoder.blocks", c.encoder.blocks);
    f("encoder.kernel", c.encoder.kernel);
    f("cu.token_dim", c.cu.token_dim);
    f("cu.lstm_hidden", c.cu.lstm_hidden);
    f("cu.head_hidden", c.cu.head_hidden);
    f("cu.beta", c.cu.beta);
    f("train.seed", c.seed);
    f("stage1.epochs", c.stage1.epochs);
    f("stage1.samples_per_epoch", c.stage1.samples_per_epoch);
    f("stage1.batch_size", c.stage1.batch_size);
    f("stage1.learning_rate", c.stage1.learning_rate);
    f("stage1.validation_period", c.stage1.validation_period);
    f("stage1.validation_samples", c.stage1.validation_samples);
    f("stage2.epochs", c.stage2.epochs);
    f("stage2.samples_per_epoch", c.stage2.samples_per_epoch);
    f("stage2.batch_size", c.stage2.batch_size);
    f("stage2.learning_rate", c.stage2.learning_rate);
    f("stage2.final_lr_fraction", c.stage2.final_lr_fraction);
    f("stage2.validation_period", c.stage2.validation_period);
    f("stage2.validation_samples", c.stage2.validation_samples);
    f("stage2.freeze_encoders", c.stage2.freeze_encoders);
    f("stage2.from_scratch", c.stage2.from_scratch);
    f("stage2.identity_quantizer", c.stage2.identity_quantizer);
    f("quant.bits", c.quant.bits);
    f("quant.percentile", c.quant.percentile);
    f("quant.calibration_samples", c.quant.calibration_samples);
    f("eval.test_samples", c.eval.test_samples);
    f("eval.cdf_points", c.eval.cdf_points);
    f("eval.trajectory_points", c.eval.trajectory_points);
    f("eval.trajectory_radius", c.eval.trajectory_radius);
    f("eval.trajectory_turns", c.eval.trajectory_turns);
}

std::string trim(const std::string& s)
{
    const auto b = s.find_first_not_of(" \t");
    if (b == std::string::npos) return {};
    return s.substr(b, s.find_last_not_of(" \t") - b + 1);
}

std::vector<std::string> split(const std::string& s, char sep)
{
    std::vector<std::string> out;
    std::string item;
    std::istringstream in(s);
    while (std::getline(in, item, sep))
        if (!trim(item).empty()) out.push_back(trim(item));
    return out;
}

template <class T>
T parse_number(const std::string& key, const std::string& text)
{
    T value{};
    const std::string t = trim(text);
    const auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), value);
    if (ec != std::errc() || ptr != t.data() + t.size())
        throw ConfigError("config: cannot parse '" + text + "' for " + key);
    return value;
}

void parse_value(const std::string& key, const std::string& text, std::size_t& v)
{
    if (trim(text).starts_with("-")) throw ConfigError("config: " + key + " must be nonnegative");
    v = parse_number<std::size_t>(key, text);
}
void parse_value(const std::string& key, const std::string& text, double& v) { v = parse_number<double>(key, text); }
void parse_value(const std::string& key, const std::string& text, bool& v)
{
    const std::string t = trim(text);
    if (t == "true" || t == "1") v = true;
    else if (t == "false" || t == "0") v = false;
    else throw ConfigError("config: " + key + " must be true or false");
}
void parse_value(const std::string& key, const std::string& text, std::vector<int>& v)
{
    v.clear();
    for (const auto& item : split(text, ',')) v.push_back(parse_number<int>(key, item));
}
void parse_value(const std::string& key, const std::string& text, std::vector<channel::Vec3>& v)
{
    v.clear();
    for (const auto& point : split(text, ';')) {
        const auto coords = split(point, ',');
        if (coords.size() != 3) throw ConfigError("config: " + key + " entries must be x,y,z");
        v.push_back({parse_number<double>(key, coords[0]), parse_number<double>(key, coords[1]),
                     parse_number<double>(key, coords[2])});
    }
}

std::string format_double(double v)
{
    char buf[32];
    const auto [ptr, ec] = std::to_chars(buf, buf + sizeof buf, v);
    return std::string(buf, ptr);
}

std::string render(std::size_t v) { return std::to_string(v); }
std::string render(double v) { return format_double(v); }
std::string render(bool v) { return v ? "true" : "false"; }
std::string render(const std::vector<int>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i) out += (i ? "," : "") + std::to_string(v[i]);
    return out;
}
std::string render(const std::vector<channel::Vec3>& v)
{
    std::string out;
    for (std::size_t i = 0; i < v.size(); ++i)
        out += (i ? ";" : "") + format_double(v[i][0]) + "," + format_double(v[i][1]) + "," + format_double(v[i][2]);
    return out;
}

} // namespace

void TrainConfig::sync()
{
    encoder.slots = scenario.slots;
    encoder.antennas = scenario.antennas();
    encoder.subcarriers = scenario.subcarriers;
    cu.num_bs = scenario.num_bs;
    cu.subcarriers = scenario.subcarriers;
    cu.latent_dim = encoder.latent_dim;
    const auto c = scenario.region.center();
    const auto h = scenario.region.half_extent();
    for (std::size_t i = 0; i < 3; ++i) {
        cu.output_offset[i] = c[i];
        cu.output_scale[i] = h[i] > 0.0 ? h[i] : 1.0;
    }
}

void TrainConfig::validate() const
{
    scenario.validate();
    auto positive = [](std::size_t v, const char* name) {
        if (v == 0) throw ConfigError(std::string("config: ") + name + " must be positive");
    };
    positive(estimation.covariance_samples, "estimation.covariance_samples");
    positive(encoder.latent_dim, "encoder.latent_dim");
    positive(encoder.width, "encoder.width");
    positive(cu.token_dim, "cu.token_dim");
    positive(cu.lstm_hidden, "cu.lstm_hidden");
    positive(cu.head_hidden, "cu.head_hidden");
    if (encoder.kernel % 2 == 0) throw ConfigError("config: encoder.kernel must be odd");
    for (const auto* s : {&stage1.samples_per_epoch, &stage1.batch_size, &stage1.validation_period,
                          &stage1.validation_samples, &stage2.samples_per_epoch, &stage2.batch_size,
                          &stage2.validation_period, &stage2.validation_samples, &quant.calibration_samples,
                          &eval.test_samples, &eval.trajectory_points})
        positive(*s, "counts in [stage1], [stage2], [quant] and [eval]");
    if (eval.cdf_points < 2) throw ConfigError("config: eval.cdf_points must be at least 2");
    if (stage1.epochs > 0 && stage1.validation_period > stage1.epochs)
        throw ConfigError("config: stage1.validation_period exceeds stage1.epochs");
    if (stage2.epochs > 0 && stage2.validation_period > stage2.epochs)
        throw ConfigError("config: stage2.validation_period exceeds stage2.epochs");
    if (!(stage1.learning_rate > 0.0) || !(stage2.learning_rate > 0.0))
        throw ConfigError("config: learning rates must be positive");
    if (!(stage2.final_lr_fraction > 0.0 && stage2.final_lr_fraction <= 1.0))
        throw ConfigError("config: stage2.final_lr_fraction must lie in (0, 1]");
    if (!(quant.percentile > 0.0 && quant.percentile <= 100.0))
        throw ConfigError("config: quant.percentile must lie in (0, 100]");
    for (int q : quant.bits)
        if (q < 0 || q > 32) throw ConfigError("config: quant.bits entries must lie in 0..32");
    if (!std::isfinite(cu.beta)) throw ConfigError("config: cu.beta must be finite");
    if (!(eval.trajectory_radius >= 0.0) || !(eval.trajectory_turns > 0.0))
        throw ConfigError("config: trajectory radius and turns must be positive");
}

TrainConfig parse_config(const std::string& text)
{
    pt::ptree tree;
    std::istringstream in(text);
    try {
        pt::read_ini(in, tree);
    } catch (const pt::ini_parser_error& e) {
        throw ConfigError(std::string("config: ") + e.what());
    }
    TrainConfig cfg;
    std::set<std::string> known;
    visit_fields(cfg, [&](const std::string& key, auto& field) {
        known.insert(key);
        if (auto v = tree.get_optional<std::string>(pt::ptree::path_type(key, '.'))) parse_value(key, *v, field);
    });
    for (const auto& [section, body] : tree) {
        if (body.empty()) throw ConfigError("config: key '" + section + "' outside a section");
        for (const auto& [key, value] : body)
            if (!known.contains(section + "." + key)) throw ConfigError("config: unknown key " + section + "." + key);
    }
    cfg.sync();
    cfg.validate();
    return cfg;
}

TrainConfig load_config(const std::filesystem::path& path)
{
    std::ifstream in(path);
    if (!in) throw ConfigError("config: cannot open " + path.string());
    std::ostringstream text;
    text << in.rdbuf();
    return parse_config(text.str());
}

std::string to_ini(const TrainConfig& cfg)
{
    TrainConfig copy = cfg;
    std::string out, section;
    visit_fields(copy, [&](const std::string& key, auto& field) {
        const auto dot = key.find('.');
        const std::string sec = key.substr(0, dot);
        if (sec != section) {
            out += (section.empty() ? "[" : "\n[") + sec + "]\n";
            section = sec;
        }
        out += key.substr(dot + 1) + " = " + render(field) + "\n";
    });
    return out;
}

std::vector<int> parse_bits_list(const std::string& text)
{
    std::vector<int> bits;
    parse_value("--quant-bits", text, bits);
    if (bits.empty()) throw ConfigError("--quant-bits: empty list");
    for (int q : bits)
        if (q < 0 || q > 32) throw ConfigError("--quant-bits: entries must lie in 0..32");
    return bits;
}

} // namespace ecc::pipeline
