// SPDX-License-Identifier: Apache-2.0
#include "ecc/autodiff/adam.hpp"

#include <algorithm>
#include <cmath>

namespace ecc::ad {

void adam_step(ParamSet& params, const AdamConfig& cfg, const std::vector<std::string>& frozen_prefixes)
{
    for (const auto& [name, p] : params)
        if (!p.grad.all_finite()) throw NumericError("adam: non-finite gradient for parameter '" + name + "'");

    params.advance_step();
    const double t = static_cast<double>(params.step());
    const double c1 = 1.0 - std::pow(cfg.beta1, t);
    const double c2 = 1.0 - std::pow(cfg.beta2, t);
    for (auto& [name, p] : params) {
        const bool frozen = std::any_of(frozen_prefixes.begin(), frozen_prefixes.end(),
                                        [&](const std::string& pre) { return name.starts_with(pre); });
        if (frozen) continue;
        auto value = p.value.values();
        auto grad = p.grad.values();
        auto m = p.first_moment.values();
        auto v = p.second_moment.values();
        for (std::size_t i = 0; i < value.size(); ++i) {
            m[i] = cfg.beta1 * m[i] + (1.0 - cfg.beta1) * grad[i];
            v[i] = cfg.beta2 * v[i] + (1.0 - cfg.beta2) * grad[i] * grad[i];
            const double m_hat = m[i] / c1;
            const double v_hat = v[i] / c2;
            value[i] -= cfg.learning_rate * m_hat / (std::sqrt(v_hat) + cfg.epsilon);
        }
    }
}

} // namespace ecc::ad
