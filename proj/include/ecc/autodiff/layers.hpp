// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <random>
#include <string>

#include "ecc/autodiff/ops.hpp"

// Composite layers built from the primitives in ops.hpp. Each layer owns the
// parameters registered under its name prefix:
//   dense   <p>/w (in x out), <p>/b (1 x out)
//   conv1d  <p>/w (kernel*in x out), <p>/b (1 x out)
//   lstm    <p>/wx (in x 4H), <p>/wh (H x 4H), <p>/b (1 x 4H), gate order i, f, g, o
namespace ecc::ad {

// Binds parameters either as trainable leaves or as frozen constants.
class Binder {
public:
    Binder(Graph& graph, ParamSet& params, bool trainable = true)
        : graph_(graph), params_(params), trainable_(trainable ? &params : nullptr)
    {
    }
    // Frozen binding: every parameter enters the graph as a constant.
    Binder(Graph& graph, const ParamSet& params) : graph_(graph), params_(params), trainable_(nullptr) {}

    Var operator()(const std::string& name) const
    {
        return trainable_ ? graph_.param(*trainable_, name) : graph_.frozen(params_, name);
    }
    Graph& graph() const { return graph_; }

private:
    Graph& graph_;
    const ParamSet& params_;
    ParamSet* trainable_;
};

void add_dense(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, std::mt19937_64& rng);
void add_conv1d(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, std::size_t kernel,
                std::mt19937_64& rng);
void add_lstm(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, std::mt19937_64& rng);

Var dense(const Binder& bind, const std::string& prefix, Var x);

// Same-padded convolution along rows. x stacks independent sequences of
// `length` rows each; channels run along columns.
Var conv1d(const Binder& bind, const std::string& prefix, Var x, std::size_t kernel, std::size_t length);

struct LstmState {
    Var hidden;
    Var cell;
};

LstmState lstm_cell(const Binder& bind, const std::string& prefix, Var x, const LstmState& prev);

} // namespace ecc::ad
