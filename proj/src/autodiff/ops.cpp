// SPDX-License-Identifier: Apache-2.0
#include "ecc/autodiff/ops.hpp"

#include <Eigen/Core>
#include <cmath>

#include "ecc/fronthaul/quantizer.hpp"

namespace ecc::ad {

namespace {

using RowMat = Eigen::Matrix<double, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;
using MapC = Eigen::Map<const RowMat>;
using Map = Eigen::Map<RowMat>;

MapC as_mat(const Tensor& t) { return MapC(t.data(), t.rows(), t.cols()); }
Map as_mat(Tensor& t) { return Map(t.data(), t.rows(), t.cols()); }

Graph& graph_of(std::initializer_list<Var> vars)
{
    Graph* g = vars.begin()->graph;
    for (const auto& v : vars)
        if (v.graph != g || g == nullptr) throw std::invalid_argument("autodiff: operands from different graphs");
    return *g;
}

std::string dims(const Tensor& t) { return shape_string(t.shape()); }

void require_same(Graph& g, const char* op, const Tensor& a, const Tensor& b)
{
    if (a.shape() != b.shape()) g.shape_error(op, "operand shapes " + dims(a) + " and " + dims(b) + " differ");
}

// Accumulates into the gradient of `id` only if that node participates.
template <typename F>
void accumulate(Graph& g, std::size_t id, F&& f)
{
    if (g.node(id).needs_grad) f(g.grad_buffer(id));
}

template <typename Fwd, typename Bwd>
Var unary(const char* op, Var a, Fwd fwd, Bwd dfdx)
{
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = fwd(x[i]);
    const std::size_t ia = a.id;
    return g.record(op, std::move(out), {a}, [ia, dfdx](Graph& gr, std::size_t self) {
        const Tensor& x = gr.node(ia).value;
        const Tensor& y = gr.node(self).value;
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t i = 0; i < x.size(); ++i) gx[i] += gy[i] * dfdx(x[i], y[i]);
        });
    });
}

} // namespace

Var matmul(Var a, Var b)
{
    Graph& g = graph_of({a, b});
    const Tensor& x = a.value();
    const Tensor& y = b.value();
    if (x.cols() != y.rows()) g.shape_error("matmul", "inner dimensions of " + dims(x) + " and " + dims(y) + " differ");
    Tensor out(x.rows(), y.cols());
    as_mat(out).noalias() = as_mat(x) * as_mat(y);
    const std::size_t ia = a.id, ib = b.id;
    return g.record("matmul", std::move(out), {a, b}, [ia, ib](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& ga) { as_mat(ga).noalias() += as_mat(gy) * as_mat(gr.node(ib).value).transpose(); });
        accumulate(gr, ib, [&](Tensor& gb) { as_mat(gb).noalias() += as_mat(gr.node(ia).value).transpose() * as_mat(gy); });
    });
}

Var transpose(Var a)
{
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    Tensor out(x.cols(), x.rows());
    as_mat(out) = as_mat(x).transpose();
    const std::size_t ia = a.id;
    return g.record("transpose", std::move(out), {a}, [ia](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& ga) { as_mat(ga) += as_mat(gy).transpose(); });
    });
}

Var add(Var a, Var b)
{
    Graph& g = graph_of({a, b});
    require_same(g, "add", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& y = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] += y[i];
    const std::size_t ia = a.id, ib = b.id;
    return g.record("add", std::move(out), {a, b}, [ia, ib](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        for (std::size_t id : {ia, ib})
            accumulate(gr, id, [&](Tensor& gx) {
                for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
            });
    });
}

Var sub(Var a, Var b)
{
    Graph& g = graph_of({a, b});
    require_same(g, "sub", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& y = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] -= y[i];
    const std::size_t ia = a.id, ib = b.id;
    return g.record("sub", std::move(out), {a, b}, [ia, ib](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
        });
        accumulate(gr, ib, [&](Tensor& gx) {
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] -= gy[i];
        });
    });
}

Var mul(Var a, Var b)
{
    Graph& g = graph_of({a, b});
    require_same(g, "mul", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& y = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] *= y[i];
    const std::size_t ia = a.id, ib = b.id;
    return g.record("mul", std::move(out), {a, b}, [ia, ib](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        const Tensor& x = gr.node(ia).value;
        const Tensor& y = gr.node(ib).value;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] * y[i];
        });
        accumulate(gr, ib, [&](Tensor& gyb) {
            for (std::size_t i = 0; i < gy.size(); ++i) gyb[i] += gy[i] * x[i];
        });
    });
}

Var div(Var a, Var b)
{
    Graph& g = graph_of({a, b});
    require_same(g, "div", a.value(), b.value());
    Tensor out = a.value();
    const Tensor& y = b.value();
    for (std::size_t i = 0; i < out.size(); ++i) out[i] /= y[i];
    const std::size_t ia = a.id, ib = b.id;
    return g.record("div", std::move(out), {a, b}, [ia, ib](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        const Tensor& q = gr.node(self).value;
        const Tensor& d = gr.node(ib).value;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i] / d[i];
        });
        accumulate(gr, ib, [&](Tensor& gd) {
            for (std::size_t i = 0; i < gy.size(); ++i) gd[i] -= gy[i] * q[i] / d[i];
        });
    });
}

Var add_row(Var a, Var row)
{
    Graph& g = graph_of({a, row});
    const Tensor& x = a.value();
    const Tensor& r = row.value();
    if (r.rows() != 1 || r.cols() != x.cols())
        g.shape_error("add_row", "row " + dims(r) + " does not broadcast over " + dims(x));
    Tensor out = x;
    as_mat(out).rowwise() += as_mat(r).row(0);
    const std::size_t ia = a.id, ir = row.id;
    return g.record("add_row", std::move(out), {a, row}, [ia, ir](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) { as_mat(gx) += as_mat(gy); });
        accumulate(gr, ir, [&](Tensor& grow) { as_mat(grow) += as_mat(gy).colwise().sum(); });
    });
}

Var scale_rows(Var a, Var col)
{
    Graph& g = graph_of({a, col});
    const Tensor& x = a.value();
    const Tensor& c = col.value();
    if (c.cols() != 1 || c.rows() != x.rows())
        g.shape_error("scale_rows", "column " + dims(c) + " does not match rows of " + dims(x));
    Tensor out = x;
    for (std::size_t r = 0; r < x.rows(); ++r) as_mat(out).row(r) *= c[r];
    const std::size_t ia = a.id, ic = col.id;
    return g.record("scale_rows", std::move(out), {a, col}, [ia, ic](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        const Tensor& x = gr.node(ia).value;
        const Tensor& c = gr.node(ic).value;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t r = 0; r < x.rows(); ++r) as_mat(gx).row(r) += c[r] * as_mat(gy).row(r);
        });
        accumulate(gr, ic, [&](Tensor& gc) {
            for (std::size_t r = 0; r < x.rows(); ++r) gc[r] += as_mat(gy).row(r).dot(as_mat(x).row(r));
        });
    });
}

Var add_scalar(Var a, Var s)
{
    Graph& g = graph_of({a, s});
    if (s.value().size() != 1) g.shape_error("add_scalar", "scalar operand has shape " + dims(s.value()));
    Tensor out = a.value();
    const double v = s.value()[0];
    for (auto& e : out.values()) e += v;
    const std::size_t ia = a.id, is = s.id;
    return g.record("add_scalar", std::move(out), {a, s}, [ia, is](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
        });
        accumulate(gr, is, [&](Tensor& gs) {
            for (std::size_t i = 0; i < gy.size(); ++i) gs[0] += gy[i];
        });
    });
}

Var scale(Var a, double factor)
{
    return unary("scale", a, [factor](double x) { return factor * x; },
                 [factor](double, double) { return factor; });
}

Var offset(Var a, double shift)
{
    return unary("offset", a, [shift](double x) { return x + shift; }, [](double, double) { return 1.0; });
}

Var tanh(Var a)
{
    return unary("tanh", a, [](double x) { return std::tanh(x); },
                 [](double, double y) { return 1.0 - y * y; });
}

Var sigmoid(Var a)
{
    return unary("sigmoid", a, [](double x) { return 1.0 / (1.0 + std::exp(-x)); },
                 [](double, double y) { return y * (1.0 - y); });
}

Var relu(Var a)
{
    return unary("relu", a, [](double x) { return x > 0.0 ? x : 0.0; },
                 [](double x, double) { return x > 0.0 ? 1.0 : 0.0; });
}

Var sqrt(Var a)
{
    return unary("sqrt", a, [](double x) { return std::sqrt(x); },
                 [](double, double y) { return 0.5 / y; });
}

Var softmax_rows(Var a)
{
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    Tensor out(x.shape());
    const std::size_t rows = x.rows(), cols = x.cols();
    for (std::size_t r = 0; r < rows; ++r) {
        double mx = x.at(r, 0);
        for (std::size_t c = 1; c < cols; ++c) mx = std::max(mx, x.at(r, c));
        double total = 0.0;
        for (std::size_t c = 0; c < cols; ++c) total += (out.at(r, c) = std::exp(x.at(r, c) - mx));
        for (std::size_t c = 0; c < cols; ++c) out.at(r, c) /= total;
    }
    const std::size_t ia = a.id;
    return g.record("softmax_rows", std::move(out), {a}, [ia](Graph& gr, std::size_t self) {
        const Tensor& y = gr.node(self).value;
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t r = 0; r < y.rows(); ++r) {
                double dot = 0.0;
                for (std::size_t c = 0; c < y.cols(); ++c) dot += gy.at(r, c) * y.at(r, c);
                for (std::size_t c = 0; c < y.cols(); ++c) gx.at(r, c) += y.at(r, c) * (gy.at(r, c) - dot);
            }
        });
    });
}

Var concat_rows(const std::vector<Var>& parts)
{
    if (parts.empty()) throw ShapeError("concat_rows: no operands");
    Graph& g = *parts.front().graph;
    const std::size_t cols = parts.front().cols();
    std::size_t rows = 0;
    for (const auto& p : parts) {
        if (p.graph != &g) throw std::invalid_argument("autodiff: operands from different graphs");
        if (p.cols() != cols) g.shape_error("concat_rows", "column counts differ: " + dims(p.value()));
        rows += p.rows();
    }
    Tensor out(rows, cols);
    std::vector<std::size_t> ids;
    std::size_t at = 0;
    for (const auto& p : parts) {
        std::copy(p.value().values().begin(), p.value().values().end(), out.values().begin() + at);
        at += p.value().size();
        ids.push_back(p.id);
    }
    return g.record("concat_rows", std::move(out), parts, [ids](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        std::size_t at = 0;
        for (std::size_t id : ids) {
            const std::size_t n = gr.node(id).value.size();
            accumulate(gr, id, [&](Tensor& gx) {
                for (std::size_t i = 0; i < n; ++i) gx[i] += gy[at + i];
            });
            at += n;
        }
    });
}

Var concat_cols(const std::vector<Var>& parts)
{
    if (parts.empty()) throw ShapeError("concat_cols: no operands");
    Graph& g = *parts.front().graph;
    const std::size_t rows = parts.front().rows();
    std::size_t cols = 0;
    for (const auto& p : parts) {
        if (p.graph != &g) throw std::invalid_argument("autodiff: operands from different graphs");
        if (p.rows() != rows) g.shape_error("concat_cols", "row counts differ: " + dims(p.value()));
        cols += p.cols();
    }
    Tensor out(rows, cols);
    std::vector<std::size_t> ids;
    std::size_t at = 0;
    for (const auto& p : parts) {
        as_mat(out).middleCols(at, p.cols()) = as_mat(p.value());
        at += p.cols();
        ids.push_back(p.id);
    }
    return g.record("concat_cols", std::move(out), parts, [ids](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        std::size_t at = 0;
        for (std::size_t id : ids) {
            const std::size_t c = gr.node(id).value.cols();
            accumulate(gr, id, [&](Tensor& gx) { as_mat(gx) += as_mat(gy).middleCols(at, c); });
            at += c;
        }
    });
}

Var reshape(Var a, std::size_t rows, std::size_t cols)
{
    Graph& g = graph_of({a});
    if (rows * cols != a.value().size())
        g.shape_error("reshape", "cannot view " + dims(a.value()) + " as [" + std::to_string(rows) + "x" +
                                     std::to_string(cols) + "]");
    const std::size_t ia = a.id;
    return g.record("reshape", a.value().reshaped({rows, cols}), {a}, [ia](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t i = 0; i < gy.size(); ++i) gx[i] += gy[i];
        });
    });
}

Var slice_rows(Var a, std::size_t begin, std::size_t count)
{
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    if (begin + count > x.rows())
        g.shape_error("slice_rows", "rows [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                        ") exceed " + dims(x));
    Tensor out(count, x.cols());
    as_mat(out) = as_mat(x).middleRows(begin, count);
    const std::size_t ia = a.id;
    return g.record("slice_rows", std::move(out), {a}, [ia, begin, count](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) { as_mat(gx).middleRows(begin, count) += as_mat(gy); });
    });
}

Var slice_cols(Var a, std::size_t begin, std::size_t count)
{
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    if (begin + count > x.cols())
        g.shape_error("slice_cols", "cols [" + std::to_string(begin) + ", " + std::to_string(begin + count) +
                                        ") exceed " + dims(x));
    Tensor out(x.rows(), count);
    as_mat(out) = as_mat(x).middleCols(begin, count);
    const std::size_t ia = a.id;
    return g.record("slice_cols", std::move(out), {a}, [ia, begin, count](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) { as_mat(gx).middleCols(begin, count) += as_mat(gy); });
    });
}

Var shift_rows(Var a, long offset, std::size_t segment)
{
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    if (segment == 0 || x.rows() % segment != 0)
        g.shape_error("shift_rows", "segment " + std::to_string(segment) + " does not tile " + dims(x));
    Tensor out(x.shape());
    const long seg = static_cast<long>(segment);
    for (std::size_t r = 0; r < x.rows(); ++r) {
        const long within = static_cast<long>(r % segment) + offset;
        if (within < 0 || within >= seg) continue;
        as_mat(out).row(r) = as_mat(x).row(static_cast<long>(r) + offset);
    }
    const std::size_t ia = a.id;
    return g.record("shift_rows", std::move(out), {a}, [ia, offset, segment](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        const long seg = static_cast<long>(segment);
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t r = 0; r < gy.rows(); ++r) {
                const long within = static_cast<long>(r % segment) + offset;
                if (within < 0 || within >= seg) continue;
                as_mat(gx).row(static_cast<long>(r) + offset) += as_mat(gy).row(r);
            }
        });
    });
}

Var row_sum(Var a)
{
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    Tensor out(x.rows(), 1);
    as_mat(out) = as_mat(x).rowwise().sum();
    const std::size_t ia = a.id;
    return g.record("row_sum", std::move(out), {a}, [ia](Graph& gr, std::size_t self) {
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) { as_mat(gx).colwise() += as_mat(gy).col(0); });
    });
}

Var sum(Var a)
{
    Graph& g = graph_of({a});
    double total = 0.0;
    for (double v : a.value().values()) total += v;
    const std::size_t ia = a.id;
    return g.record("sum", Tensor::scalar(total), {a}, [ia](Graph& gr, std::size_t self) {
        const double gy = gr.node(self).grad[0];
        accumulate(gr, ia, [&](Tensor& gx) {
            for (auto& v : gx.values()) v += gy;
        });
    });
}

Var mean(Var a)
{
    return scale(sum(a), 1.0 / static_cast<double>(a.value().size()));
}

Var ste_quantize(Var a, int bits, double step)
{
    const fronthaul::QuantizerConfig cfg(bits, step);
    Graph& g = graph_of({a});
    const Tensor& x = a.value();
    Tensor out(x.shape());
    for (std::size_t i = 0; i < x.size(); ++i) out[i] = fronthaul::quantize(x[i], cfg);
    const std::size_t ia = a.id;
    const double clip = cfg.clip_amplitude();
    return g.record("ste_quantize", std::move(out), {a}, [ia, clip](Graph& gr, std::size_t self) {
        const Tensor& x = gr.node(ia).value;
        const Tensor& gy = gr.node(self).grad;
        accumulate(gr, ia, [&](Tensor& gx) {
            for (std::size_t i = 0; i < x.size(); ++i)
                if (std::abs(x[i]) <= clip) gx[i] += gy[i];
        });
    });
}

} // namespace ecc::ad
