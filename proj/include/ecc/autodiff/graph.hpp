// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <cstddef>
#include <functional>
#include <string>
#include <vector>

#include "ecc/autodiff/param_set.hpp"
#include "ecc/autodiff/tensor.hpp"

namespace ecc::ad {

class Graph;

// Handle to a node of a Graph. Cheap to copy; only valid while the graph lives.
struct Var {
    Graph* graph = nullptr;
    std::size_t id = 0;

    const Tensor& value() const;
    const Tensor& grad() const;
    std::size_t rows() const { return value().rows(); }
    std::size_t cols() const { return value().cols(); }
};

// Tape of rank-2 operations recorded in execution order. Nodes are appended
// in topological order, so backward() is a single reverse sweep.
class Graph {
public:
    struct Node {
        std::string op;
        Tensor value;
        Tensor grad;
        bool needs_grad = false;
        Parameter* param = nullptr;
        std::function<void(Graph&, std::size_t)> backward;
    };

    Graph() = default;
    Graph(const Graph&) = delete;
    Graph& operator=(const Graph&) = delete;

    // Leaf without gradient.
    Var constant(Tensor value);
    // Leaf whose gradient is retained (used for input sensitivities).
    Var input(Tensor value);
    // Leaf bound to a parameter; backward() accumulates into Parameter::grad.
    Var param(ParamSet& params, const std::string& name);
    // Parameter value as a constant, for frozen sub-networks.
    Var frozen(const ParamSet& params, const std::string& name);

    Var record(std::string op, Tensor value, const std::vector<Var>& inputs,
               std::function<void(Graph&, std::size_t)> backward);

    // Seeds d(loss)/d(loss) = 1 and propagates to every leaf. The loss must be 1x1.
    void backward(Var loss);

    Node& node(std::size_t id) { return nodes_[id]; }
    const Node& node(std::size_t id) const { return nodes_[id]; }
    std::size_t size() const { return nodes_.size(); }
    bool needs_grad(Var v) const { return nodes_[v.id].needs_grad; }

    // Gradient buffer of a node, allocated on first use.
    Tensor& grad_buffer(std::size_t id);

    [[noreturn]] void shape_error(const std::string& op, const std::string& detail) const;

private:
    std::vector<Node> nodes_;
};

} // namespace ecc::ad
