// SPDX-License-Identifier: Apache-2.0
#include "ecc/autodiff/layers.hpp"

namespace ecc::ad {

void add_dense(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, std::mt19937_64& rng)
{
    params.add(prefix + "/w", glorot_uniform(in, out, rng));
    params.add(prefix + "/b", Tensor(1, out));
}

void add_conv1d(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t out, std::size_t kernel,
                std::mt19937_64& rng)
{
    params.add(prefix + "/w", glorot_uniform(kernel * in, out, rng));
    params.add(prefix + "/b", Tensor(1, out));
}

void add_lstm(ParamSet& params, const std::string& prefix, std::size_t in, std::size_t hidden, std::mt19937_64& rng)
{
    params.add(prefix + "/wx", glorot_uniform(in, 4 * hidden, rng));
    params.add(prefix + "/wh", glorot_uniform(hidden, 4 * hidden, rng));
    Tensor bias(1, 4 * hidden);
    for (std::size_t j = hidden; j < 2 * hidden; ++j) bias[j] = 1.0;
    params.add(prefix + "/b", std::move(bias));
}

Var dense(const Binder& bind, const std::string& prefix, Var x)
{
    return add_row(matmul(x, bind(prefix + "/w")), bind(prefix + "/b"));
}

Var conv1d(const Binder& bind, const std::string& prefix, Var x, std::size_t kernel, std::size_t length)
{
    if (kernel % 2 == 0) throw ShapeError("conv1d: kernel width must be odd, got " + std::to_string(kernel));
    const long half = static_cast<long>(kernel / 2);
    std::vector<Var> taps;
    taps.reserve(kernel);
    for (long k = -half; k <= half; ++k) taps.push_back(k == 0 ? x : shift_rows(x, k, length));
    Var cols = kernel == 1 ? x : concat_cols(taps);
    return add_row(matmul(cols, bind(prefix + "/w")), bind(prefix + "/b"));
}

LstmState lstm_cell(const Binder& bind, const std::string& prefix, Var x, const LstmState& prev)
{
    Var gates = add_row(add(matmul(x, bind(prefix + "/wx")), matmul(prev.hidden, bind(prefix + "/wh"))),
                        bind(prefix + "/b"));
    const std::size_t h = prev.hidden.cols();
    if (gates.cols() != 4 * h)
        throw ShapeError("lstm_cell: gate width " + std::to_string(gates.cols()) + " != 4 x hidden " +
                         std::to_string(h));
    Var in_gate = sigmoid(slice_cols(gates, 0, h));
    Var forget_gate = sigmoid(slice_cols(gates, h, h));
    Var candidate = tanh(slice_cols(gates, 2 * h, h));
    Var out_gate = sigmoid(slice_cols(gates, 3 * h, h));
    Var cell = add(mul(forget_gate, prev.cell), mul(in_gate, candidate));
    return {mul(out_gate, tanh(cell)), cell};
}

} // namespace ecc::ad
