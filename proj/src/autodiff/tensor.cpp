// SPDX-License-Identifier: Apache-2.0
#include "ecc/autodiff/tensor.hpp"

#include <algorithm>
#include <cmath>

namespace ecc::ad {

std::string shape_string(const Shape& shape)
{
    std::string out = "[";
    for (std::size_t i = 0; i < shape.size(); ++i) {
        if (i) out += "x";
        out += std::to_string(shape[i]);
    }
    return out + "]";
}

Tensor::Tensor(Shape shape, std::vector<double> values)
    : shape_(std::move(shape)), values_(std::move(values))
{
    if (values_.size() != shape_size(shape_))
        throw ShapeError("tensor: " + std::to_string(values_.size()) + " values do not fill shape " +
                         shape_string(shape_));
}

std::size_t Tensor::rows() const
{
    if (rank() != 2) throw ShapeError("tensor: rows() needs rank 2, got " + shape_string(shape_));
    return shape_[0];
}

std::size_t Tensor::cols() const
{
    if (rank() != 2) throw ShapeError("tensor: cols() needs rank 2, got " + shape_string(shape_));
    return shape_[1];
}

Tensor Tensor::reshaped(Shape shape) const
{
    if (shape_size(shape) != size())
        throw ShapeError("reshape: cannot view " + shape_string(shape_) + " as " + shape_string(shape));
    return Tensor(std::move(shape), values_);
}

bool Tensor::all_finite() const
{
    return std::all_of(values_.begin(), values_.end(), [](double v) { return std::isfinite(v); });
}

} // namespace ecc::ad
