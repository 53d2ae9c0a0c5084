// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <functional>
#include <random>
#include <string>
#include <vector>

#include "ecc/autodiff/layers.hpp"
#include "ecc/csi_tensor.hpp"

namespace ecc::edge {

// Residual 1-D convolutional autoencoder over the subcarrier axis.
// encoder: 1x1 conv (2 T N_r -> width) + ReLU, `blocks` residual blocks
//          x + conv(ReLU(conv(x))), 1x1 conv (width -> latent_dim)
// decoder: the mirror image back to 2 T N_r features per subcarrier.
struct EncoderConfig {
    std::size_t slots = 2;
    std::size_t antennas = 2;
    std::size_t subcarriers = 8;
    std::size_t latent_dim = 4; // d_z
    std::size_t width = 32;
    std::size_t blocks = 3;
    std::size_t kernel = 3;

    std::size_t input_features() const { return 2 * slots * antennas; }
    std::size_t latent_length() const { return subcarriers * latent_dim; } // D
};

std::string encoder_prefix(std::size_t bs);
std::string decoder_prefix(std::size_t bs);

void init_encoder(ad::ParamSet& params, const std::string& prefix, const EncoderConfig& cfg, std::mt19937_64& rng);
void init_decoder(ad::ParamSet& params, const std::string& prefix, const EncoderConfig& cfg, std::mt19937_64& rng);

// features: (B N_sc) x (2 T N_r), B samples stacked; returns (B N_sc) x d_z.
ad::Var encode(const ad::Binder& bind, const std::string& prefix, ad::Var features, const EncoderConfig& cfg);
// latent: (B N_sc) x d_z; returns (B N_sc) x (2 T N_r).
ad::Var decode(const ad::Binder& bind, const std::string& prefix, ad::Var latent, const EncoderConfig& cfg);

// Single-sample evaluation: X is (T N_r) x N_sc x 2, result Z is N_sc x d_z.
ad::Tensor encode(const ad::ParamSet& params, const std::string& prefix, const ad::Tensor& X, const EncoderConfig& cfg);
// Z (N_sc x d_z) -> X-hat ((T N_r) x N_sc x 2).
ad::Tensor decode(const ad::ParamSet& params, const std::string& prefix, const ad::Tensor& Z, const EncoderConfig& cfg);
// Z -> reconstructed complex CSI via the inverse reshape and stacking.
CsiTensor reconstruct_csi(const ad::ParamSet& params, const std::string& prefix, const ad::Tensor& Z,
                          const EncoderConfig& cfg);

// Concatenates the rows of Z in subcarrier order: z = [z_1^T, ..., z_Nsc^T]^T.
std::vector<double> vectorize_tokens(const ad::Tensor& Z);
ad::Tensor unvectorize_tokens(std::span<const double> z, std::size_t subcarriers);

inline constexpr double kCosineEpsilon = 1e-8;

// -|<h, h-hat>| / (|h| |h-hat| + eps) with the Hermitian inner product.
double cosine_loss(std::span<const cdouble> h, std::span<const cdouble> h_hat, double eps = kCosineEpsilon);

// Batch-mean cosine loss on the feature layout: `recon` and `target` are
// (B N_sc) x (2 T N_r) with interleaved (re, im) pairs; each sample's
// N_sc rows form one vectorized CSI.
ad::Var cosine_loss(ad::Var recon, const ad::Tensor& target, std::size_t batch, double eps = kCosineEpsilon);

struct Stage1Config {
    std::size_t epochs = 50;
    std::size_t batch_size = 32;
    double learning_rate = 1e-3;
    std::uint64_t seed = 1;
    double norm_epsilon = 1e-8;
    double angle_epsilon = 1e-6;
};

struct Stage1Epoch {
    std::size_t epoch = 0;
    double train_loss = 0.0;
};

// Supplies the unlabeled estimated CSI of one BS for a given epoch.
using CsiProvider = std::function<std::vector<CsiTensor>(std::size_t epoch)>;
using Stage1Callback = std::function<void(const Stage1Epoch&, const ad::ParamSet&)>;

// Self-supervised local training of one BS autoencoder with the cosine
// loss; the bottleneck is continuous. Returns encoder parameters only.
ad::ParamSet stage1_train(const CsiProvider& data, const EncoderConfig& enc, const Stage1Config& cfg, std::size_t bs,
                          const Stage1Callback& on_epoch = {});

// Mean cosine loss of encoder+decoder over a CSI set.
double stage1_loss(const ad::ParamSet& params, std::size_t bs, const std::vector<CsiTensor>& csi,
                   const EncoderConfig& enc, double norm_epsilon = 1e-8, double angle_epsilon = 1e-6);

// Stacks per-sample (N_sc x F) feature matrices into one (B N_sc) x F tensor.
ad::Tensor stack_rows(const std::vector<const ad::Tensor*>& parts);

} // namespace ecc::edge
