// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstdint>
#include <map>
#include <random>
#include <string>

#include "ecc/autodiff/tensor.hpp"

namespace ecc::ad {

struct Parameter {
    Tensor value;
    Tensor grad;
    Tensor first_moment;
    Tensor second_moment;
};

// Named trainable tensors plus Adam state. Iteration order is the sorted
// name order, which fixes checkpoint layout and update order.
class ParamSet {
public:
    Parameter& add(const std::string& name, Tensor init);
    Parameter& get(const std::string& name);
    const Parameter& get(const std::string& name) const;
    bool contains(const std::string& name) const { return params_.contains(name); }
    std::size_t size() const { return params_.size(); }
    std::size_t scalar_count() const;

    void zero_grad();
    std::uint64_t step() const { return step_; }
    void advance_step() { ++step_; }
    void set_step(std::uint64_t s) { step_ = s; }

    // Copies values of every parameter present in both sets (names must match
    // shapes); optimizer moments are reset.
    void load_values_from(const ParamSet& other, const std::string& prefix_filter = {});

    auto begin() { return params_.begin(); }
    auto end() { return params_.end(); }
    auto begin() const { return params_.begin(); }
    auto end() const { return params_.end(); }

    friend bool operator==(const ParamSet& a, const ParamSet& b);

private:
    std::map<std::string, Parameter> params_;
    std::uint64_t step_ = 0;
};

// Uniform in +-sqrt(6/(fan_in+fan_out)).
Tensor glorot_uniform(std::size_t fan_in, std::size_t fan_out, std::mt19937_64& rng);

} // namespace ecc::ad
