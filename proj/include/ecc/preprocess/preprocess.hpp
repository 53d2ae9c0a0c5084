// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>

#include "ecc/autodiff/tensor.hpp"
#include "ecc/csi_tensor.hpp"

// Edge-side conditioning of estimated CSI before encoding.
namespace ecc::preprocess {

inline constexpr double kNormEpsilon = 1e-8;
inline constexpr double kAngleEpsilon = 1e-6;

// Frobenius norm over all (t, m, n).
double gain_indicator(const CsiTensor& csi);

// csi / (gain + eps).
CsiTensor normalize(const CsiTensor& csi, double gain, double eps = kNormEpsilon);

// Antenna with the largest mean energy over (t, n); ties go to the smallest index.
std::size_t select_ref_antenna(const CsiTensor& csi);

// Rotates every (t, n) column by minus the phase of the reference entry when
// its modulus is at least eps_angle; weaker columns are left as they are.
CsiTensor phase_stabilize(const CsiTensor& csi, std::size_t ref_antenna, double eps_angle = kAngleEpsilon);

// Real/imaginary stacking S: T x N_r x N_sc complex -> T x N_r x N_sc x 2 real.
ad::Tensor stack_complex(const CsiTensor& csi);
CsiTensor unstack_complex(const ad::Tensor& stacked);

// Reshape R: X[t N_r + m, n, c] = B[t, m, n, c], giving (T N_r) x N_sc x 2.
ad::Tensor reshape_flatten(const ad::Tensor& stacked);
ad::Tensor reshape_unflatten(const ad::Tensor& flat, std::size_t slots, std::size_t antennas);

// Encoder feature layout: one row per subcarrier, columns interleave (re, im)
// of each (t, m) row of X, i.e. F[n, 2 r + c] = X[r, n, c].
ad::Tensor to_features(const ad::Tensor& flat);
ad::Tensor from_features(const ad::Tensor& features, std::size_t rows);

struct PreprocessedCsi {
    CsiTensor stabilized; // H-tilde
    double gain = 0.0;    // g
    std::size_t ref_antenna = 0;
    ad::Tensor input;     // X = R(S(H-tilde)), (T N_r) x N_sc x 2
};

PreprocessedCsi preprocess(const CsiTensor& estimate, double eps = kNormEpsilon, double eps_angle = kAngleEpsilon);

} // namespace ecc::preprocess
