// SPDX-License-Identifier: Apache-2.0
#include "ecc/preprocess/preprocess.hpp"

#include <cmath>
#include <stdexcept>

namespace ecc::preprocess {

double gain_indicator(const CsiTensor& csi)
{
    double energy = 0.0;
    for (const auto& v : csi.values()) energy += std::norm(v);
    return std::sqrt(energy);
}

CsiTensor normalize(const CsiTensor& csi, double gain, double eps)
{
    if (!(eps > 0.0)) throw std::invalid_argument("normalize: eps must be positive");
    CsiTensor out = csi;
    const double denom = gain + eps;
    for (auto& v : out.values()) v /= denom;
    return out;
}

std::size_t select_ref_antenna(const CsiTensor& csi)
{
    std::size_t best = 0;
    double best_energy = -1.0;
    for (std::size_t m = 0; m < csi.antennas(); ++m) {
        double energy = 0.0;
        for (std::size_t t = 0; t < csi.slots(); ++t)
            for (std::size_t n = 0; n < csi.subcarriers(); ++n) energy += std::norm(csi(t, m, n));
        energy /= static_cast<double>(csi.slots() * csi.subcarriers());
        if (energy > best_energy) {
            best_energy = energy;
            best = m;
        }
    }
    return best;
}

CsiTensor phase_stabilize(const CsiTensor& csi, std::size_t ref_antenna, double eps_angle)
{
    if (!(eps_angle > 0.0)) throw std::invalid_argument("phase_stabilize: eps_angle must be positive");
    if (ref_antenna >= csi.antennas()) throw std::out_of_range("phase_stabilize: reference antenna out of range");
    CsiTensor out = csi;
    for (std::size_t t = 0; t < csi.slots(); ++t)
        for (std::size_t n = 0; n < csi.subcarriers(); ++n) {
            const cdouble ref = csi(t, ref_antenna, n);
            if (std::abs(ref) < eps_angle) continue;
            const cdouble rot = std::polar(1.0, -std::arg(ref));
            for (std::size_t m = 0; m < csi.antennas(); ++m) out(t, m, n) = csi(t, m, n) * rot;
            // The reference entry becomes exactly real and nonnegative.
            out(t, ref_antenna, n) = cdouble(std::abs(ref), 0.0);
        }
    return out;
}

ad::Tensor stack_complex(const CsiTensor& csi)
{
    ad::Tensor out(ad::Shape{csi.slots(), csi.antennas(), csi.subcarriers(), 2});
    const auto v = csi.values();
    for (std::size_t i = 0; i < v.size(); ++i) {
        out[2 * i] = v[i].real();
        out[2 * i + 1] = v[i].imag();
    }
    return out;
}

CsiTensor unstack_complex(const ad::Tensor& stacked)
{
    const auto& s = stacked.shape();
    if (s.size() != 4 || s[3] != 2) throw ad::ShapeError("unstack_complex: expected T x N_r x N_sc x 2");
    CsiTensor out(s[0], s[1], s[2]);
    auto v = out.values();
    for (std::size_t i = 0; i < v.size(); ++i) v[i] = cdouble(stacked[2 * i], stacked[2 * i + 1]);
    return out;
}

ad::Tensor reshape_flatten(const ad::Tensor& stacked)
{
    const auto& s = stacked.shape();
    if (s.size() != 4 || s[3] != 2) throw ad::ShapeError("reshape_flatten: expected T x N_r x N_sc x 2");
    // Row (t N_r + m) of X is row (t, m) of B in t-major order, so the
    // row-major buffer is unchanged.
    return stacked.reshaped({s[0] * s[1], s[2], 2});
}

ad::Tensor reshape_unflatten(const ad::Tensor& flat, std::size_t slots, std::size_t antennas)
{
    const auto& s = flat.shape();
    if (s.size() != 3 || s[2] != 2 || s[0] != slots * antennas)
        throw ad::ShapeError("reshape_unflatten: expected (T N_r) x N_sc x 2");
    return flat.reshaped({slots, antennas, s[1], 2});
}

ad::Tensor to_features(const ad::Tensor& flat)
{
    const auto& s = flat.shape();
    if (s.size() != 3 || s[2] != 2) throw ad::ShapeError("to_features: expected (T N_r) x N_sc x 2");
    const std::size_t rows = s[0], nsc = s[1];
    ad::Tensor f(nsc, 2 * rows);
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t n = 0; n < nsc; ++n)
            for (std::size_t c = 0; c < 2; ++c) f.at(n, 2 * r + c) = flat[(r * nsc + n) * 2 + c];
    return f;
}

ad::Tensor from_features(const ad::Tensor& features, std::size_t rows)
{
    const std::size_t nsc = features.rows();
    if (features.cols() != 2 * rows) throw ad::ShapeError("from_features: column count is not 2 x rows");
    ad::Tensor flat(ad::Shape{rows, nsc, 2});
    for (std::size_t r = 0; r < rows; ++r)
        for (std::size_t n = 0; n < nsc; ++n)
            for (std::size_t c = 0; c < 2; ++c) flat[(r * nsc + n) * 2 + c] = features.at(n, 2 * r + c);
    return flat;
}

PreprocessedCsi preprocess(const CsiTensor& estimate, double eps, double eps_angle)
{
    PreprocessedCsi out;
    out.gain = gain_indicator(estimate);
    const CsiTensor normalized = normalize(estimate, out.gain, eps);
    out.ref_antenna = select_ref_antenna(normalized);
    out.stabilized = phase_stabilize(normalized, out.ref_antenna, eps_angle);
    out.input = reshape_flatten(stack_complex(out.stabilized));
    return out;
}

} // namespace ecc::preprocess
