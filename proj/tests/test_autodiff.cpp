// SPDX-License-Identifier: Apache-2.0
#include <doctest.h>

#include <cmath>
#include <sstream>

#include "ecc/autodiff/adam.hpp"
#include "ecc/autodiff/checkpoint.hpp"
#include "ecc/autodiff/layers.hpp"
#include "ecc/autodiff/ops.hpp"
#include "ecc/fronthaul/quantizer.hpp"
#include "support.hpp"

using namespace ecc;
using namespace ecc::ad;
using ecc::testing::max_gradient_error;
using ecc::testing::random_tensor;

namespace {

constexpr double kTol = 1e-4;

// Projects an arbitrary output onto a fixed random direction so that every
// output entry carries a distinct upstream coefficient.
Var project(Graph& g, Var y, std::uint64_t seed)
{
    std::mt19937_64 rng(seed);
    return sum(mul(y, g.constant(random_tensor(y.rows(), y.cols(), rng))));
}

// Keeps entries away from zero so kinked or singular ops stay smooth under FD.
Tensor away_from_zero(Tensor t, double margin)
{
    for (auto& v : t.values()) v = (v < 0 ? -1.0 : 1.0) * (std::abs(v) + margin);
    return t;
}

template <class F>
double unary_check(F op, Tensor init, std::uint64_t seed = 7)
{
    ParamSet p;
    p.add("x", std::move(init));
    return max_gradient_error(p, [&](Graph& g, ParamSet& ps) { return project(g, op(g.param(ps, "x")), seed); });
}

template <class F>
double binary_check(F op, Tensor a, Tensor b, std::uint64_t seed = 11)
{
    ParamSet p;
    p.add("a", std::move(a));
    p.add("b", std::move(b));
    return max_gradient_error(p, [&](Graph& g, ParamSet& ps) {
        return project(g, op(g.param(ps, "a"), g.param(ps, "b")), seed);
    });
}

} // namespace

TEST_CASE("elementwise and matrix primitives match central differences")
{
    std::mt19937_64 rng(42);
    auto r = [&](std::size_t m, std::size_t n) { return random_tensor(m, n, rng); };

    CHECK(binary_check([](Var a, Var b) { return matmul(a, b); }, r(3, 4), r(4, 2)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return add(a, b); }, r(3, 4), r(3, 4)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return sub(a, b); }, r(3, 4), r(3, 4)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return mul(a, b); }, r(3, 4), r(3, 4)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return div(a, b); }, r(3, 4), away_from_zero(r(3, 4), 0.5)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return add_row(a, b); }, r(3, 4), r(1, 4)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return scale_rows(a, b); }, r(3, 4), r(3, 1)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return add_scalar(a, b); }, r(3, 4), r(1, 1)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return concat_rows({a, b, a}); }, r(2, 3), r(1, 3)) < kTol);
    CHECK(binary_check([](Var a, Var b) { return concat_cols({b, a}); }, r(2, 3), r(2, 2)) < kTol);

    CHECK(unary_check([](Var a) { return transpose(a); }, r(3, 5)) < kTol);
    CHECK(unary_check([](Var a) { return scale(a, -2.5); }, r(3, 5)) < kTol);
    CHECK(unary_check([](Var a) { return offset(a, 0.75); }, r(3, 5)) < kTol);
    CHECK(unary_check([](Var a) { return tanh(a); }, r(3, 5)) < kTol);
    CHECK(unary_check([](Var a) { return sigmoid(a); }, r(3, 5)) < kTol);
    CHECK(unary_check([](Var a) { return relu(a); }, away_from_zero(r(3, 5), 0.05)) < kTol);
    CHECK(unary_check([](Var a) { return sqrt(a); }, random_tensor(3, 5, rng, 0.2, 2.0)) < kTol);
    CHECK(unary_check([](Var a) { return softmax_rows(a); }, r(3, 5)) < kTol);
    CHECK(unary_check([](Var a) { return reshape(a, 5, 3); }, r(3, 5)) < kTol);
    CHECK(unary_check([](Var a) { return slice_rows(a, 1, 2); }, r(4, 3)) < kTol);
    CHECK(unary_check([](Var a) { return slice_cols(a, 1, 3); }, r(4, 5)) < kTol);
    CHECK(unary_check([](Var a) { return shift_rows(a, 1, 3); }, r(6, 2)) < kTol);
    CHECK(unary_check([](Var a) { return shift_rows(a, -2, 3); }, r(6, 2)) < kTol);
    CHECK(unary_check([](Var a) { return row_sum(a); }, r(4, 3)) < kTol);
    CHECK(unary_check([](Var a) { return mean(a); }, r(4, 3)) < kTol);
}

TEST_CASE("hand-derived gradients")
{
    SUBCASE("sum has unit gradient everywhere")
    {
        Graph g;
        auto x = g.input(Tensor(ad::Shape{2, 3}, 5.0));
        g.backward(sum(x));
        for (double v : x.grad().values()) CHECK(v == doctest::Approx(1.0));
    }
    SUBCASE("d/dx x^2 at 3 is 6")
    {
        Graph g;
        auto x = g.input(Tensor::scalar(3.0));
        g.backward(sum(mul(x, x)));
        CHECK(x.grad()[0] == doctest::Approx(6.0));
    }
    SUBCASE("mean divides by count")
    {
        Graph g;
        auto x = g.input(Tensor(ad::Shape{2, 2}, 1.0));
        g.backward(mean(x));
        for (double v : x.grad().values()) CHECK(v == doctest::Approx(0.25));
    }
}

TEST_CASE("three-layer network gradient")
{
    std::mt19937_64 rng(3);
    ParamSet p;
    add_dense(p, "l1", 4, 6, rng);
    add_dense(p, "l2", 6, 5, rng);
    add_dense(p, "l3", 5, 2, rng);
    const Tensor x = random_tensor(3, 4, rng);
    const double err = max_gradient_error(p, [&](Graph& g, ParamSet& ps) {
        Binder b(g, ps);
        auto h = tanh(dense(b, "l1", g.constant(x)));
        h = sigmoid(dense(b, "l2", h));
        return project(g, dense(b, "l3", h), 99);
    });
    CHECK(err < kTol);
}

TEST_CASE("conv1d and lstm gradients")
{
    std::mt19937_64 rng(5);
    ParamSet p;
    add_conv1d(p, "c", 2, 3, 3, rng);
    add_lstm(p, "r", 3, 4, rng);
    const Tensor x = random_tensor(8, 2, rng);
    const double err = max_gradient_error(p, [&](Graph& g, ParamSet& ps) {
        Binder b(g, ps);
        auto y = conv1d(b, "c", g.constant(x), 3, 4); // two sequences of four rows
        LstmState s{g.constant(Tensor(ad::Shape{1, 4})), g.constant(Tensor(ad::Shape{1, 4}))};
        for (std::size_t t = 0; t < 4; ++t) s = lstm_cell(b, "r", slice_rows(y, t, 1), s);
        return project(g, concat_cols({s.hidden, s.cell}), 17);
    });
    CHECK(err < kTol);
}

TEST_CASE("softmax rows sum to one and are invariant to a row shift")
{
    std::mt19937_64 rng(8);
    Graph g;
    const Tensor t = random_tensor(4, 6, rng, -30.0, 30.0);
    auto y = softmax_rows(g.constant(t));
    Tensor shifted = t;
    for (std::size_t c = 0; c < 6; ++c) shifted.at(2, c) += 500.0;
    auto y2 = softmax_rows(g.constant(shifted));
    for (std::size_t r = 0; r < 4; ++r) {
        double s = 0.0;
        for (std::size_t c = 0; c < 6; ++c) s += y.value().at(r, c);
        CHECK(s == doctest::Approx(1.0).epsilon(1e-12));
    }
    for (std::size_t c = 0; c < 6; ++c) CHECK(y2.value().at(2, c) == doctest::Approx(y.value().at(2, c)));
}

TEST_CASE("lstm with zero weights")
{
    // Every gate pre-activation is zero: i = f = o = 1/2, g = 0.
    ParamSet p;
    p.add("r/wx", Tensor(ad::Shape{2, 12}));
    p.add("r/wh", Tensor(ad::Shape{3, 12}));
    p.add("r/b", Tensor(ad::Shape{1, 12}));
    Graph g;
    Binder b(g, p);
    LstmState s{g.constant(Tensor(ad::Shape{1, 3})), g.constant(Tensor(ad::Shape{1, 3}, 0.8))};
    s = lstm_cell(b, "r", g.constant(Tensor(ad::Shape{1, 2}, 1.0)), s);
    for (std::size_t k = 0; k < 3; ++k) {
        CHECK(s.cell.value()[k] == doctest::Approx(0.4));
        CHECK(s.hidden.value()[k] == doctest::Approx(0.5 * std::tanh(0.4)));
    }
}

TEST_CASE("shape errors name the op and the node")
{
    Graph g;
    auto a = g.constant(Tensor(ad::Shape{2, 3}));
    auto b = g.constant(Tensor(ad::Shape{2, 3}));
    try {
        matmul(a, b);
        FAIL("expected ShapeError");
    } catch (const ShapeError& e) {
        const std::string msg = e.what();
        CHECK(msg.find("matmul") != std::string::npos);
        CHECK(msg.find("node #2") != std::string::npos);
    }
    CHECK_THROWS_AS(add(a, g.constant(Tensor(ad::Shape{3, 2}))), ShapeError);
    CHECK_THROWS_AS(g.backward(a), ShapeError);
}

TEST_CASE("adam")
{
    SUBCASE("zero gradient leaves values unchanged")
    {
        ParamSet p;
        p.add("w", Tensor::row({1.0, -2.0}));
        p.zero_grad();
        adam_step(p, {});
        CHECK(p.get("w").value == Tensor::row({1.0, -2.0}));
    }
    SUBCASE("first step moves each weight by the learning rate against its gradient sign")
    {
        // With bias correction m_hat = g and v_hat = g^2, so the step is lr * g / (|g| + eps).
        ParamSet p;
        p.add("w", Tensor::row({0.0, 0.0, 0.0}));
        p.zero_grad();
        auto& grad = p.get("w").grad;
        grad[0] = 3.0;
        grad[1] = -0.02;
        grad[2] = 400.0;
        adam_step(p, {.learning_rate = 0.1});
        CHECK(p.get("w").value[0] == doctest::Approx(-0.1).epsilon(1e-6));
        CHECK(p.get("w").value[1] == doctest::Approx(0.1).epsilon(1e-5));
        CHECK(p.get("w").value[2] == doctest::Approx(-0.1).epsilon(1e-6));
    }
    SUBCASE("repeated steps descend a quadratic")
    {
        ParamSet p;
        p.add("w", Tensor::row({2.0, -3.0}));
        double prev = 1e9;
        for (int i = 0; i < 50; ++i) {
            p.zero_grad();
            Graph g;
            auto w = g.param(p, "w");
            auto loss = sum(mul(w, w));
            const double now = loss.value()[0];
            CHECK(now <= prev);
            prev = now;
            g.backward(loss);
            adam_step(p, {.learning_rate = 0.05});
        }
        CHECK(prev < 13.0 * 0.5);
    }
    SUBCASE("non-finite gradient is rejected before any write")
    {
        ParamSet p;
        p.add("a", Tensor::row({1.0}));
        p.add("b", Tensor::row({1.0}));
        p.zero_grad();
        p.get("a").grad[0] = 1.0;
        p.get("b").grad[0] = std::nan("");
        try {
            adam_step(p, {});
            FAIL("expected NumericError");
        } catch (const NumericError& e) {
            CHECK(std::string(e.what()).find("'b'") != std::string::npos);
        }
        CHECK(p.get("a").value[0] == 1.0);
        CHECK(p.step() == 0);
    }
    SUBCASE("frozen prefixes keep their values")
    {
        ParamSet p;
        p.add("bs0/w", Tensor::row({1.0}));
        p.add("cu/w", Tensor::row({1.0}));
        p.zero_grad();
        p.get("bs0/w").grad[0] = 1.0;
        p.get("cu/w").grad[0] = 1.0;
        adam_step(p, {}, {"bs"});
        CHECK(p.get("bs0/w").value[0] == 1.0);
        CHECK(p.get("cu/w").value[0] < 1.0);
    }
}

TEST_CASE("straight-through quantizer")
{
    const int bits = 3;
    const double step = 0.25;
    const fronthaul::QuantizerConfig q(bits, step);
    const double A = q.clip_amplitude();
    CHECK(A == doctest::Approx(0.875));

    Graph g;
    auto x = g.input(Tensor::row({-2.0, -0.8, -0.1, 0.0, 0.3, 0.874, 0.876, 5.0}));
    auto y = ste_quantize(x, bits, step);
    const std::vector<double> levels{-0.875, -0.875, -0.125, 0.125, 0.375, 0.875, 0.875, 0.875};
    for (std::size_t i = 0; i < levels.size(); ++i) CHECK(y.value()[i] == doctest::Approx(levels[i]));

    g.backward(sum(scale(y, 2.0)));
    const std::vector<double> expect{0, 2, 2, 2, 2, 2, 0, 0};
    for (std::size_t i = 0; i < expect.size(); ++i) CHECK(x.grad()[i] == expect[i]);

    // Inside the clip range the gradient equals that of the identity map.
    Graph h;
    auto xi = h.input(Tensor::row({-0.5, 0.1, 0.6}));
    auto yi = ste_quantize(xi, bits, step);
    Graph k;
    auto xk = k.input(Tensor::row({-0.5, 0.1, 0.6}));
    std::mt19937_64 rng(1);
    const Tensor c = random_tensor(1, 3, rng);
    h.backward(sum(mul(yi, h.constant(c))));
    k.backward(sum(mul(xk, k.constant(c))));
    CHECK(xi.grad() == xk.grad());
}

TEST_CASE("checkpoint round trip")
{
    std::mt19937_64 rng(12);
    ParamSet p;
    add_dense(p, "bs0/enc", 3, 4, rng);
    add_dense(p, "cu/head", 4, 2, rng);
    p.add("cu/scalar", Tensor::scalar(-1.0 / 3.0));

    std::stringstream all;
    write_checkpoint(all, p);
    const ParamSet back = read_checkpoint(all);
    CHECK(back == p);

    std::stringstream some;
    write_checkpoint(some, p, "cu/");
    const ParamSet cu = read_checkpoint(some);
    CHECK(cu.size() == 3);
    CHECK(cu.contains("cu/head/w"));
    CHECK_FALSE(cu.contains("bs0/enc/w"));

    std::stringstream bad("NOTMAGIC\x01");
    CHECK_THROWS_AS(read_checkpoint(bad), FormatError);

    std::string truncated = all.str();
    truncated.resize(truncated.size() - 4);
    std::stringstream cut(truncated);
    CHECK_THROWS_AS(read_checkpoint(cut), FormatError);
}

TEST_CASE("initialization and gradients are deterministic for a seed")
{
    auto run = [] {
        std::mt19937_64 rng(2024);
        ParamSet p;
        add_dense(p, "d", 5, 3, rng);
        p.zero_grad();
        Graph g;
        Binder b(g, p);
        g.backward(project(g, tanh(dense(b, "d", g.constant(Tensor(ad::Shape{2, 5}, 0.3)))), 4));
        return p;
    };
    const ParamSet a = run();
    const ParamSet b = run();
    CHECK(a == b);
    CHECK(a.get("d/w").grad == b.get("d/w").grad);
}

TEST_CASE("glorot bounds")
{
    std::mt19937_64 rng(0);
    const Tensor w = glorot_uniform(10, 6, rng);
    const double limit = std::sqrt(6.0 / 16.0);
    for (double v : w.values()) CHECK(std::abs(v) <= limit);
}
