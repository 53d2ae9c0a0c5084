// SPDX-License-Identifier: Apache-2.0
#include "ecc/autodiff/graph.hpp"

#include <algorithm>

namespace ecc::ad {

const Tensor& Var::value() const { return graph->node(id).value; }

const Tensor& Var::grad() const { return graph->grad_buffer(id); }

Var Graph::constant(Tensor value)
{
    if (value.rank() != 2) shape_error("constant", "leaf must be rank 2, got " + shape_string(value.shape()));
    nodes_.push_back(Node{"constant", std::move(value), {}, false, nullptr, {}});
    return Var{this, nodes_.size() - 1};
}

Var Graph::input(Tensor value)
{
    if (value.rank() != 2) shape_error("input", "leaf must be rank 2, got " + shape_string(value.shape()));
    nodes_.push_back(Node{"input", std::move(value), {}, true, nullptr, {}});
    return Var{this, nodes_.size() - 1};
}

Var Graph::param(ParamSet& params, const std::string& name)
{
    Parameter& p = params.get(name);
    if (p.value.rank() != 2) shape_error("param", "'" + name + "' must be rank 2");
    nodes_.push_back(Node{"param:" + name, p.value, {}, true, &p, {}});
    return Var{this, nodes_.size() - 1};
}

Var Graph::frozen(const ParamSet& params, const std::string& name)
{
    return constant(params.get(name).value);
}

Var Graph::record(std::string op, Tensor value, const std::vector<Var>& inputs,
                  std::function<void(Graph&, std::size_t)> backward)
{
    const bool needs = std::any_of(inputs.begin(), inputs.end(),
                                   [this](const Var& v) { return nodes_[v.id].needs_grad; });
    nodes_.push_back(Node{std::move(op), std::move(value), {}, needs, nullptr,
                          needs ? std::move(backward) : nullptr});
    return Var{this, nodes_.size() - 1};
}

Tensor& Graph::grad_buffer(std::size_t id)
{
    Node& n = nodes_[id];
    if (n.grad.shape() != n.value.shape()) n.grad = Tensor(n.value.shape());
    return n.grad;
}

void Graph::backward(Var loss)
{
    if (loss.graph != this) throw std::invalid_argument("backward: loss belongs to another graph");
    const Tensor& lv = nodes_[loss.id].value;
    if (lv.size() != 1) shape_error("backward", "loss must be 1x1, got " + shape_string(lv.shape()));
    grad_buffer(loss.id)[0] = 1.0;
    for (std::size_t i = loss.id + 1; i-- > 0;) {
        Node& n = nodes_[i];
        if (!n.needs_grad || n.grad.size() == 0) continue;
        if (n.backward) n.backward(*this, i);
        if (n.param) {
            auto dst = n.param->grad.values();
            const auto src = n.grad.values();
            for (std::size_t k = 0; k < dst.size(); ++k) dst[k] += src[k];
        }
    }
}

void Graph::shape_error(const std::string& op, const std::string& detail) const
{
    throw ShapeError(op + " (node #" + std::to_string(nodes_.size()) + "): " + detail);
}

} // namespace ecc::ad
