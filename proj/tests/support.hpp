// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <random>

#include "ecc/autodiff/graph.hpp"
#include "ecc/autodiff/param_set.hpp"

namespace ecc::testing {

inline ad::Tensor random_tensor(std::size_t rows, std::size_t cols, std::mt19937_64& rng, double lo = -1.0,
                                double hi = 1.0)
{
    std::uniform_real_distribution<double> u(lo, hi);
    ad::Tensor t(rows, cols);
    for (auto& v : t.values()) v = u(rng);
    return t;
}

using LossBuilder = std::function<ad::Var(ad::Graph&, ad::ParamSet&)>;

inline double loss_value(ad::ParamSet& params, const LossBuilder& build)
{
    ad::Graph g;
    return build(g, params).value()[0];
}

// Largest relative error between reverse-mode gradients and central
// differences over every scalar of every parameter. Entries whose gradients
// are both below `floor` in magnitude are compared absolutely.
inline double max_gradient_error(ad::ParamSet& params, const LossBuilder& build, double h = 1e-5,
                                 double floor = 1e-6)
{
    params.zero_grad();
    {
        ad::Graph g;
        g.backward(build(g, params));
    }
    double worst = 0.0;
    for (auto& [name, p] : params) {
        const ad::Tensor analytic = p.grad;
        for (std::size_t i = 0; i < p.value.size(); ++i) {
            const double keep = p.value[i];
            p.value[i] = keep + h;
            const double up = loss_value(params, build);
            p.value[i] = keep - h;
            const double down = loss_value(params, build);
            p.value[i] = keep;
            const double numeric = (up - down) / (2.0 * h);
            const double denom = std::max({std::abs(analytic[i]), std::abs(numeric), floor});
            worst = std::max(worst, std::abs(analytic[i] - numeric) / denom);
        }
    }
    return worst;
}

} // namespace ecc::testing
