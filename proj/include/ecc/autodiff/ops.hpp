// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <vector>

#include "ecc/autodiff/graph.hpp"

// Differentiable primitives over rank-2 tensors. Every function validates
// shapes and throws ShapeError naming the op and the node index it would
// have created.
namespace ecc::ad {

Var matmul(Var a, Var b);
Var transpose(Var a);

Var add(Var a, Var b);
Var sub(Var a, Var b);
Var mul(Var a, Var b);
Var div(Var a, Var b);
// a (r x c) plus a 1 x c row broadcast over rows.
Var add_row(Var a, Var row);
// Each row i of a (r x c) multiplied by column entry col(i, 0), col is r x 1.
Var scale_rows(Var a, Var col);
// a (r x c) plus a 1 x 1 scalar node broadcast everywhere.
Var add_scalar(Var a, Var s);

Var scale(Var a, double factor);
Var offset(Var a, double shift);

Var tanh(Var a);
Var sigmoid(Var a);
Var relu(Var a);
Var sqrt(Var a);

// Row-wise softmax.
Var softmax_rows(Var a);

Var concat_rows(const std::vector<Var>& parts);
Var concat_cols(const std::vector<Var>& parts);
Var reshape(Var a, std::size_t rows, std::size_t cols);
Var slice_rows(Var a, std::size_t begin, std::size_t count);
Var slice_cols(Var a, std::size_t begin, std::size_t count);

// Shifts rows inside consecutive blocks of `segment` rows: output row r takes
// input row r + offset of the same block, or zero if that falls outside it.
Var shift_rows(Var a, long offset, std::size_t segment);

Var row_sum(Var a);
Var sum(Var a);
Var mean(Var a);

// Midrise quantizer forward, straight-through gradient inside [-A, A].
Var ste_quantize(Var a, int bits, double step);

} // namespace ecc::ad
