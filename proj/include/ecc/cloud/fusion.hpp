// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <array>
#include <optional>
#include <random>
#include <span>
#include <vector>

#include "ecc/autodiff/layers.hpp"
#include "ecc/fronthaul/message.hpp"

// Central-unit positioning network: per-BS token projection, channel-masked
// attention (CMA) across BS tokens, LSTM accumulation over subcarriers and a
// shared regression head producing one 3D estimate per subcarrier.
namespace ecc::cloud {

using Position = std::array<double, 3>;

struct CuConfig {
    std::size_t num_bs = 3;      // L
    std::size_t subcarriers = 8; // N_sc
    std::size_t latent_dim = 4;  // d_z
    std::size_t token_dim = 4;   // d_f
    std::size_t lstm_hidden = 32;
    std::size_t head_hidden = 64;
    double beta = 1.0; // mask temperature
    // Fixed affine map applied after the head: p = offset + scale * head(s).
    Position output_offset{0.0, 0.0, 0.0};
    Position output_scale{1.0, 1.0, 1.0};

    std::size_t latent_length() const { return subcarriers * latent_dim; } // D
    std::size_t model_dim() const { return subcarriers * token_dim; }     // N_sc d_f = d_k
};

// Parameter names, all under "cu/":
//   fusion_token (1 x d), proj/{w,b} (D x d), wq, wk, wv (d x d),
//   lstm/{wx,wh,b}, head/hidden/{w,b}, head/out/{w,b}
void init_cu(ad::ParamSet& params, const CuConfig& cfg, std::mt19937_64& rng);

// m = softmax(beta * g).
std::vector<double> compute_mask(std::span<const double> gains, double beta);

// WMSE weights w_i = 2 i / (N_sc (N_sc + 1)), i = 1..N_sc.
std::vector<double> wmse_weights(std::size_t subcarriers);

// Token matrix for one sample: row 0 the fusion token, row l the projection
// of BS l's dequantized latent (each latent 1 x D, in BS index order).
ad::Var tokenize(const ad::Binder& bind, const std::vector<ad::Var>& latents, const CuConfig& cfg);

struct CmaResult {
    ad::Var output;  // O, (L+1) x d
    ad::Var weights; // softmax(Q K^T / sqrt(d_k)), (L+1) x (L+1)
    ad::Var fused;   // fusion-token row of O, 1 x d
};

// O = softmax((B Wq)(B Wk)^T / sqrt(d_k)) M B Wv with M = diag(1, m_1..m_L).
CmaResult cma_fuse(const ad::Binder& bind, ad::Var tokens, std::span<const double> mask, const CuConfig& cfg);

// Runs the LSTM over the N_sc fused tokens. `fused` is B x (N_sc d_f), one
// sample per row, split subcarrier-major into tokens of length d_f.
std::vector<ad::Var> freq_accumulate(const ad::Binder& bind, ad::Var fused, const CuConfig& cfg);

// Shared head: ReLU hidden layer then affine to R^3 and the fixed output map.
ad::Var regress(const ad::Binder& bind, ad::Var hidden, const CuConfig& cfg);

// Batch mean of sum_i w_i |p - p_i|^2. positions is B x 3.
ad::Var wmse_loss(ad::Var positions, const std::vector<ad::Var>& estimates);
double wmse_loss(const Position& truth, const std::vector<Position>& estimates);

// Full CU forward for a batch. latents[l] is B x D (BS l), gains is B x L.
std::vector<ad::Var> cu_forward(const ad::Binder& bind, const std::vector<ad::Var>& latents,
                                const ad::Tensor& gains, const CuConfig& cfg);

struct PositionEstimate {
    Position position{};                // final estimate, last subcarrier
    std::vector<Position> intermediate; // one per subcarrier
};

// Decodes one message per BS (any arrival order), fuses them and regresses the position.
PositionEstimate infer(const std::vector<fronthaul::FronthaulMessage>& messages, const ad::ParamSet& params,
                       const std::vector<fronthaul::QuantizerConfig>& quantizers, const CuConfig& cfg);

// Same network on already dequantized latents (one D-vector per BS) and gains.
PositionEstimate infer_latents(const std::vector<std::vector<double>>& latents, std::span<const double> gains,
                               const ad::ParamSet& params, const CuConfig& cfg);

} // namespace ecc::cloud
