// SPDX-License-Identifier: Apache-2.0
#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/numpy.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include "ecc/cloud/fusion.hpp"
#include "ecc/edge/encoder.hpp"
#include "ecc/estimation/lmmse.hpp"
#include "ecc/eval/metrics.hpp"
#include "ecc/fronthaul/message.hpp"
#include "ecc/fronthaul/payload.hpp"
#include "ecc/fronthaul/quantizer.hpp"
#include "ecc/pipeline/config.hpp"
#include "ecc/preprocess/preprocess.hpp"

namespace py = pybind11;
using namespace ecc;

namespace {

using CArray = py::array_t<std::complex<double>, py::array::c_style | py::array::forcecast>;
using DArray = py::array_t<double, py::array::c_style | py::array::forcecast>;

CsiTensor to_csi(const CArray& a)
{
    if (a.ndim() != 3) throw py::value_error("expected a (T, N_r, N_sc) complex array");
    CsiTensor t(a.shape(0), a.shape(1), a.shape(2));
    std::copy(a.data(), a.data() + a.size(), t.values().begin());
    return t;
}

CArray from_csi(const CsiTensor& t)
{
    CArray a({t.slots(), t.antennas(), t.subcarriers()});
    std::copy(t.values().begin(), t.values().end(), a.mutable_data());
    return a;
}

DArray from_tensor(const ad::Tensor& t)
{
    DArray a(t.shape());
    std::copy(t.values().begin(), t.values().end(), a.mutable_data());
    return a;
}

std::vector<double> to_vector(const DArray& a) { return {a.data(), a.data() + a.size()}; }

std::span<const double> view(const DArray& a) { return {a.data(), static_cast<std::size_t>(a.size())}; }

py::bytes as_bytes(const std::vector<std::uint8_t>& v) { return {reinterpret_cast<const char*>(v.data()), v.size()}; }

} // namespace

PYBIND11_MODULE(_core, m)
{
    m.doc() = "Edge-cloud cooperative positioning: codec, preprocessing, estimation and metrics";

    py::register_exception<fronthaul::MessageError>(m, "MessageError", PyExc_ValueError);
    py::register_exception<pipeline::ConfigError>(m, "ConfigError", PyExc_ValueError);

    // Fronthaul
    py::class_<fronthaul::QuantizerConfig>(m, "Quantizer")
        .def(py::init<int, double>(), py::arg("bits"), py::arg("step"))
        .def_property_readonly("bits", &fronthaul::QuantizerConfig::bits)
        .def_property_readonly("step", &fronthaul::QuantizerConfig::step)
        .def_property_readonly("clip_amplitude", &fronthaul::QuantizerConfig::clip_amplitude)
        .def_property_readonly("level_count", &fronthaul::QuantizerConfig::level_count)
        .def("quantize", [](const fronthaul::QuantizerConfig& q, const DArray& x) {
            DArray out(std::vector<py::ssize_t>(x.shape(), x.shape() + x.ndim()));
            for (py::ssize_t i = 0; i < x.size(); ++i) out.mutable_data()[i] = fronthaul::quantize(x.data()[i], q);
            return out;
        })
        .def("index_of", [](const fronthaul::QuantizerConfig& q, double y) { return fronthaul::quantize_index(y, q); })
        .def("level_of", [](const fronthaul::QuantizerConfig& q, std::uint32_t k) { return fronthaul::index_level(k, q); });

    m.def("calibrate_step", [](const DArray& samples, int bits, double percentile) {
        return fronthaul::calibrate_step(view(samples), bits, percentile);
    }, py::arg("samples"), py::arg("bits"), py::arg("percentile") = 99.0);

    m.def("payload_ratio", [](std::uint64_t latent_length, int bits, std::uint64_t slots, std::uint64_t antennas,
                              std::uint64_t subcarriers, bool include_gain) {
        return fronthaul::payload_ratio(latent_length, bits, {slots, antennas, subcarriers}, fronthaul::kGainFieldBits,
                                        include_gain);
    }, py::arg("latent_length"), py::arg("bits"), py::arg("slots"), py::arg("antennas"), py::arg("subcarriers"),
          py::arg("include_gain") = false);

    m.def("encode_message", [](const DArray& latent, double gain, const fronthaul::QuantizerConfig& q, std::uint16_t bs_id,
                               std::uint64_t snapshot_id) {
        return as_bytes(fronthaul::serialize(fronthaul::encode_message(view(latent), gain, q, bs_id, snapshot_id)));
    }, py::arg("latent"), py::arg("gain"), py::arg("quantizer"), py::arg("bs_id") = 0, py::arg("snapshot_id") = 0);

    m.def("decode_message", [](py::bytes wire, const fronthaul::QuantizerConfig& q) {
        const std::string s = wire;
        const auto msg = fronthaul::deserialize({reinterpret_cast<const std::uint8_t*>(s.data()), s.size()});
        const auto d = fronthaul::decode_message(msg, q);
        py::dict out;
        out["bs_id"] = d.bs_id;
        out["snapshot_id"] = d.snapshot_id;
        out["latent"] = DArray(d.latent.size(), d.latent.data());
        out["gain"] = d.gain;
        return out;
    }, py::arg("wire"), py::arg("quantizer"));

    // Preprocessing and estimation
    m.def("preprocess", [](const CArray& csi) {
        const auto p = preprocess::preprocess(to_csi(csi));
        py::dict out;
        out["stabilized"] = from_csi(p.stabilized);
        out["gain"] = p.gain;
        out["ref_antenna"] = p.ref_antenna;
        out["input"] = from_tensor(p.input);
        return out;
    }, py::arg("csi"));
    m.def("gain_indicator", [](const CArray& csi) { return preprocess::gain_indicator(to_csi(csi)); });
    m.def("select_ref_antenna", [](const CArray& csi) { return preprocess::select_ref_antenna(to_csi(csi)); });

    m.def("lmmse_estimate", [](const estimation::CVector& y, std::complex<double> pilot, const estimation::CMatrix& R,
                               double noise_variance) { return estimation::lmmse_estimate(y, pilot, R, noise_variance); },
          py::arg("y"), py::arg("pilot"), py::arg("covariance"), py::arg("noise_variance"));
    m.def("lmmse_mse", &estimation::lmmse_mse, py::arg("covariance"), py::arg("noise_variance"));

    // Losses and fusion helpers
    m.def("cosine_loss", [](const CArray& h, const CArray& h_hat) {
        return edge::cosine_loss({h.data(), static_cast<std::size_t>(h.size())},
                                 {h_hat.data(), static_cast<std::size_t>(h_hat.size())});
    }, py::arg("h"), py::arg("h_hat"));
    m.def("wmse_weights", &cloud::wmse_weights, py::arg("subcarriers"));
    m.def("compute_mask", [](const DArray& g, double beta) { return cloud::compute_mask(view(g), beta); },
          py::arg("gains"), py::arg("beta") = 1.0);

    // Metrics
    m.def("nearest_rank", [](const DArray& v, double p) { return eval::nearest_rank(view(v), p); }, py::arg("values"),
          py::arg("percentile"));
    m.def("error_cdf", [](const DArray& v, std::size_t points) { return eval::error_cdf(view(v), points); },
          py::arg("errors"), py::arg("points") = 101);

    // Configuration
    m.def("normalize_config", [](const std::string& text) { return pipeline::to_ini(pipeline::parse_config(text)); },
          "Parses an INI configuration and returns its canonical rendering", py::arg("text"));
}
