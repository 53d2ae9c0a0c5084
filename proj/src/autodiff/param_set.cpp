// SPDX-License-Identifier: Apache-2.0
#include "ecc/autodiff/param_set.hpp"

#include <cmath>

namespace ecc::ad {

Parameter& ParamSet::add(const std::string& name, Tensor init)
{
    if (params_.contains(name)) throw std::invalid_argument("param set: duplicate parameter '" + name + "'");
    Parameter p;
    p.grad = Tensor(init.shape());
    p.first_moment = Tensor(init.shape());
    p.second_moment = Tensor(init.shape());
    p.value = std::move(init);
    return params_.emplace(name, std::move(p)).first->second;
}

Parameter& ParamSet::get(const std::string& name)
{
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("param set: no parameter '" + name + "'");
    return it->second;
}

const Parameter& ParamSet::get(const std::string& name) const
{
    auto it = params_.find(name);
    if (it == params_.end()) throw std::out_of_range("param set: no parameter '" + name + "'");
    return it->second;
}

std::size_t ParamSet::scalar_count() const
{
    std::size_t n = 0;
    for (const auto& [name, p] : params_) n += p.value.size();
    return n;
}

void ParamSet::zero_grad()
{
    for (auto& [name, p] : params_) p.grad.fill(0.0);
}

void ParamSet::load_values_from(const ParamSet& other, const std::string& prefix_filter)
{
    for (auto& [name, p] : params_) {
        if (!prefix_filter.empty() && !name.starts_with(prefix_filter)) continue;
        if (!other.contains(name)) continue;
        const auto& src = other.get(name);
        if (src.value.shape() != p.value.shape())
            throw ShapeError("param set: shape mismatch loading '" + name + "': " +
                             shape_string(src.value.shape()) + " vs " + shape_string(p.value.shape()));
        p.value = src.value;
        p.first_moment.fill(0.0);
        p.second_moment.fill(0.0);
    }
}

bool operator==(const ParamSet& a, const ParamSet& b)
{
    if (a.params_.size() != b.params_.size()) return false;
    for (auto ia = a.params_.begin(), ib = b.params_.begin(); ia != a.params_.end(); ++ia, ++ib) {
        if (ia->first != ib->first || !(ia->second.value == ib->second.value)) return false;
    }
    return true;
}

Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng)
{
    const double limit = std::sqrt(6.0 / static_cast<double>(fan_in + fan_out));
    std::uniform_real_distribution<double> dist(-limit, limit);
    Tensor t(fan_in, fan_out);
    for (auto& v : t.values()) v = dist(rng);
    return t;
}

} // namespace ecc::ad
