#include <doctest.h>

#include <algorithm>
#include <cstring>
#include <random>

#include "botstack/autodiff.hpp"
#include "botstack/error.hpp"
#include "botstack/grad_check.hpp"
#include "botstack/layers.hpp"
#include "botstack/ops.hpp"
#include "oracles.hpp"

using namespace botstack;

TEST_CASE("tensor shape and row-major layout") {
  Tensor t({3, 4});
  CHECK(t.size() == 12);
  CHECK(t.rows() == 3);
  CHECK(t.cols() == 4);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) t.set(i, j, 10.0 * i + j);
  for (std::size_t i = 0; i < 3; ++i)
    for (std::size_t j = 0; j < 4; ++j) {
      CHECK(t.at(i, j) == 10.0 * i + j);
      CHECK(t[i * 4 + j] == 10.0 * i + j);
    }
  CHECK_THROWS_AS(Tensor({2, 2}, std::vector<double>{1, 2, 3}), DimensionError);
  CHECK(Tensor().shape() == Shape{0});
  CHECK(Tensor::scalar(2).is_scalar());
}

TEST_CASE("matmul examples") {
  Tape tape;
  Var i2 = tape.constant(Tensor::identity(2));
  Var m = tape.constant(Tensor::matrix({{1, 2}, {3, 4}}));
  CHECK(tape.value(matmul(tape, i2, m)) == Tensor::matrix({{1, 2}, {3, 4}}));
  Var row = tape.constant(Tensor::matrix({{1, 2}}));
  Var col = tape.constant(Tensor::matrix({{3}, {4}}));
  CHECK(tape.value(matmul(tape, row, col)).item() == 11.0);
  CHECK_THROWS_AS(matmul(tape, m, tape.constant(Tensor({3, 2}))), DimensionError);
}

TEST_CASE("matmul agrees with the triple loop for all shapes up to 8x8x8") {
  std::mt19937_64 rng(7);
  for (std::size_t m = 1; m <= 8; ++m)
    for (std::size_t k = 1; k <= 8; ++k)
      for (std::size_t n = 1; n <= 8; ++n) {
        const Tensor a = oracle::random(rng, {m, k});
        const Tensor b = oracle::random(rng, {k, n});
        REQUIRE(max_abs_diff(kernels::matmul(a, b), oracle::matmul(a, b)) <= 1e-12);
      }
}

TEST_CASE("matmul_nt and matmul_tn match explicit transposes") {
  std::mt19937_64 rng(3);
  const Tensor a = oracle::random(rng, {5, 3});
  const Tensor b = oracle::random(rng, {4, 3});
  CHECK(max_abs_diff(kernels::matmul_nt(a, b), oracle::matmul(a, kernels::transpose(b))) < 1e-12);
  const Tensor c = oracle::random(rng, {5, 2});
  CHECK(max_abs_diff(kernels::matmul_tn(a, c), oracle::matmul(kernels::transpose(a), c)) < 1e-12);
}

TEST_CASE("matmul agrees with the triple loop at training-sized shapes") {
  std::mt19937_64 rng(9);
  const std::size_t shapes[][3] = {{128, 64, 256}, {128, 256, 64}, {64, 128, 256}, {512, 64, 1},
                                   {7040, 1, 256}, {33, 97, 65}, {980, 55, 64}};
  for (const auto& s : shapes) {
    const Tensor a = oracle::random(rng, {s[0], s[1]});
    const Tensor b = oracle::random(rng, {s[1], s[2]});
    const Tensor want = oracle::matmul(a, b);
    const double tol = 1e-13 * static_cast<double>(s[1]);
    INFO(s[0], "x", s[1], "x", s[2]);
    CHECK(max_abs_diff(kernels::matmul(a, b), want) <= tol);
    CHECK(max_abs_diff(kernels::matmul_nt(a, kernels::transpose(b)), want) <= tol);
    CHECK(max_abs_diff(kernels::matmul_tn(kernels::transpose(a), b), want) <= tol);
  }
}

TEST_CASE("strided gemm reads and writes sub-blocks only") {
  std::mt19937_64 rng(10);
  // A is the left 3 columns of a 4x5 buffer, B the right 2 columns of a 3x6
  // buffer, C the middle of a 4x7 buffer.
  const Tensor abuf = oracle::random(rng, {4, 5}), bbuf = oracle::random(rng, {3, 6});
  Tensor cbuf = oracle::random(rng, {4, 7});
  const Tensor before = cbuf;
  kernels::gemm(false, false, 4, 2, 3, 2.0, abuf.data().data(), 5, bbuf.data().data() + 4, 6, 0.5,
                cbuf.data().data() + 2, 7);
  for (std::size_t i = 0; i < 4; ++i)
    for (std::size_t j = 0; j < 7; ++j) {
      if (j < 2 || j >= 4) {
        CHECK(cbuf.at(i, j) == before.at(i, j));
        continue;
      }
      double acc = 0.0;
      for (std::size_t p = 0; p < 3; ++p) acc += abuf.at(i, p) * bbuf.at(p, 4 + j - 2);
      CHECK(std::abs(cbuf.at(i, j) - (2.0 * acc + 0.5 * before.at(i, j))) < 1e-13);
    }
}

TEST_CASE("elementwise examples") {
  Tape tape;
  Var a = tape.constant(Tensor::vector({1, 2}));
  Var b = tape.constant(Tensor::vector({3, 4}));
  CHECK(tape.value(add(tape, a, b)) == Tensor::vector({4, 6}));
  CHECK(tape.value(exp(tape, tape.constant(Tensor::vector({0, 0})))) == Tensor::vector({1, 1}));
  const Var ops[] = {a, b};
  CHECK(tape.value(elementwise(tape, ElementwiseKind::sub, ops)) == Tensor::vector({-2, -2}));
  CHECK(tape.value(relu(tape, tape.constant(Tensor::vector({-2, 0, 3})))) == Tensor::vector({0, 0, 3}));
  CHECK_THROWS_AS(log(tape, tape.constant(Tensor::vector({1, 0}))), DomainError);
  CHECK_THROWS_AS(log(tape, tape.constant(Tensor::vector({-1}))), DomainError);
}

TEST_CASE("broadcasting is limited to scalars and trailing rows") {
  Tape tape;
  Var m = tape.constant(Tensor::matrix({{1, 2, 3}, {4, 5, 6}}));
  CHECK(tape.value(add(tape, m, tape.constant(Tensor::vector({10, 20, 30})))) ==
        Tensor::matrix({{11, 22, 33}, {14, 25, 36}}));
  CHECK(tape.value(mul(tape, tape.constant(Tensor::scalar(2)), m)) == Tensor::matrix({{2, 4, 6}, {8, 10, 12}}));
  CHECK(tape.value(add(tape, tape.constant(Tensor::matrix({{1, 1, 1}})), m)) ==
        Tensor::matrix({{2, 3, 4}, {5, 6, 7}}));
  CHECK_THROWS_AS(add(tape, m, tape.constant(Tensor::vector({1, 2}))), DimensionError);
  CHECK_THROWS_AS(add(tape, m, tape.constant(Tensor::matrix({{1}, {2}}))), DimensionError);
}

TEST_CASE("mul gradient at (3, 5)") {
  Tape tape;
  Var x = tape.parameter(Tensor::scalar(3));
  Var y = tape.parameter(Tensor::scalar(5));
  const Gradients g = tape.backward(mul(tape, x, y));
  CHECK(g[x].item() == doctest::Approx(5.0).epsilon(1e-12));
  CHECK(g[y].item() == doctest::Approx(3.0).epsilon(1e-12));
  const double err = oracle::fd_error(
      [](Tape& t, const std::vector<Var>& v) { return mul(t, v[0], v[1]); }, {Tensor::scalar(3), Tensor::scalar(5)},
      1e-6);
  CHECK(err < 1e-8);
}

TEST_CASE("backward examples and errors") {
  {
    Tape tape;
    Var x = tape.parameter(Tensor::scalar(3));
    CHECK(tape.backward(mul(tape, x, x))[x].item() == 6.0);
  }
  {
    Tape tape;
    Var x = tape.parameter(Tensor::vector({-1, 2}));
    CHECK(tape.backward(sum(tape, relu(tape, x)))[x] == Tensor::vector({0, 1}));
  }
  {
    Tape tape;
    Var x = tape.parameter(Tensor::vector({1, 2}));
    CHECK_THROWS_AS(tape.backward(x), UsageError);
    Tape other;
    Var foreign = other.parameter(Tensor::scalar(1));
    CHECK_THROWS_AS(tape.backward(foreign), TapeError);
    CHECK_THROWS_AS(add(tape, x, foreign), TapeError);
  }
  {
    // Unreached parameters get zero gradients of their own shape.
    Tape tape;
    Var x = tape.parameter(Tensor::scalar(2));
    Var unused = tape.parameter(Tensor({2, 3}, 1.0));
    const Gradients g = tape.backward(mul(tape, x, x));
    CHECK(g[unused] == Tensor({2, 3}, 0.0));
  }
}

TEST_CASE("gradients from two paths accumulate") {
  Tape tape;
  Var x = tape.parameter(Tensor::scalar(2));
  Var a = mul(tape, x, x);          // x^2
  Var b = mul(tape, x, tape.constant(Tensor::scalar(3)));  // 3x
  const Gradients g = tape.backward(add(tape, a, b));
  CHECK(g[x].item() == doctest::Approx(7.0));
}

TEST_CASE("composite three-layer function matches finite differences") {
  std::mt19937_64 rng(11);
  const std::vector<Tensor> xs = {oracle::random(rng, {4, 3}), oracle::random(rng, {3, 5}), oracle::random(rng, {5}),
                                  oracle::random(rng, {5, 2})};
  const double err = oracle::fd_error(
      [](Tape& t, const std::vector<Var>& v) {
        Var h = tanh(t, add(t, matmul(t, v[0], v[1]), v[2]));
        Var o = sigmoid(t, matmul(t, h, v[3]));
        return mean(t, exp(t, o));
      },
      xs);
  CHECK(err < 1e-4);
}

TEST_CASE("every primitive passes grad_check on 100 random inputs") {
  std::mt19937_64 rng(5);
  using F = std::function<Var(Tape&, const std::vector<Var>&)>;
  const std::vector<std::pair<const char*, F>> unary = {
      {"neg", [](Tape& t, const std::vector<Var>& v) { return sum(t, neg(t, v[0])); }},
      {"exp", [](Tape& t, const std::vector<Var>& v) { return sum(t, exp(t, v[0])); }},
      {"log", [](Tape& t, const std::vector<Var>& v) { return sum(t, log(t, affine(t, v[0], 1.0, 3.0))); }},
      {"relu", [](Tape& t, const std::vector<Var>& v) { return sum(t, mul(t, relu(t, v[0]), v[0])); }},
      {"sigmoid", [](Tape& t, const std::vector<Var>& v) { return sum(t, sigmoid(t, v[0])); }},
      {"tanh", [](Tape& t, const std::vector<Var>& v) { return sum(t, tanh(t, v[0])); }},
      {"softmax", [](Tape& t, const std::vector<Var>& v) {
         return sum(t, mul(t, softmax(t, v[0]), t.constant(Tensor({3, 4}, std::vector<double>{1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12}))));
       }},
      {"mean", [](Tape& t, const std::vector<Var>& v) { return mean(t, mul(t, v[0], v[0])); }},
      {"slice", [](Tape& t, const std::vector<Var>& v) { return sum(t, exp(t, slice_cols(t, v[0], 1, 2))); }},
      {"reshape", [](Tape& t, const std::vector<Var>& v) {
         return sum(t, mul(t, reshape(t, v[0], {4, 3}), t.constant(Tensor({4, 3}, 0.5))));
       }},
  };
  const std::vector<std::pair<const char*, F>> binary = {
      {"add", [](Tape& t, const std::vector<Var>& v) { return sum(t, exp(t, add(t, v[0], v[1]))); }},
      {"sub", [](Tape& t, const std::vector<Var>& v) { return sum(t, exp(t, sub(t, v[0], v[1]))); }},
      {"mul", [](Tape& t, const std::vector<Var>& v) { return sum(t, mul(t, v[0], v[1])); }},
      {"matmul", [](Tape& t, const std::vector<Var>& v) { return sum(t, tanh(t, matmul(t, v[0], reshape(t, v[1], {4, 3})))); }},
      {"concat", [](Tape& t, const std::vector<Var>& v) {
         const Var parts[] = {v[0], v[1]};
         return sum(t, exp(t, concat_cols(t, parts)));
       }},
      {"row-broadcast", [](Tape& t, const std::vector<Var>& v) {
         return sum(t, tanh(t, mul(t, v[0], slice_cols(t, reshape(t, v[1], {1, 12}), 0, 4))));
       }},
  };
  for (const auto& [name, f] : unary) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) worst = std::max(worst, oracle::fd_error(f, {oracle::random(rng, {3, 4}, -2, 2)}));
    INFO(std::string(name));
    CHECK(worst < 1e-4);
  }
  for (const auto& [name, f] : binary) {
    double worst = 0.0;
    for (int trial = 0; trial < 100; ++trial) {
      worst = std::max(worst, oracle::fd_error(f, {oracle::random(rng, {3, 4}, -2, 2), oracle::random(rng, {3, 4}, -2, 2)}));
    }
    INFO(std::string(name));
    CHECK(worst < 1e-4);
  }
}

TEST_CASE("grad_check contract") {
  std::mt19937_64 rng(9);
  CHECK(grad_check([](Tape& t, Var x) { return sum(t, x); }, oracle::random(rng, {5})) < 1e-10);
  CHECK(grad_check([](Tape& t, Var x) { return sum(t, sigmoid(t, x)); }, oracle::random(rng, {6}, -2, 2), 1e-5) < 1e-6);
  const Tensor target = Tensor::matrix({{0, 1, 0}, {1, 0, 0}});
  CHECK(grad_check(
            [&](Tape& t, Var x) { return cross_entropy(t, softmax(t, x), t.constant(target)); },
            oracle::random(rng, {2, 3}, -2, 2)) < 1e-5);
  CHECK_THROWS_AS(grad_check([](Tape&, Var x) { return x; }, Tensor::vector({1, 2})), UsageError);
  CHECK_THROWS_AS(grad_check([](Tape& t, Var x) { return sum(t, x); }, Tensor::vector({1}), 1e-3), UsageError);
  CHECK_THROWS_AS(grad_check([](Tape& t, Var x) { return sum(t, x); }, Tensor::vector({1}), 1e-8), UsageError);
}

TEST_CASE("softmax stability and invariance") {
  Tape tape;
  const Tensor p = tape.value(softmax(tape, tape.constant(Tensor::vector({0, 0, 0}))));
  for (double v : p.data()) CHECK(v == doctest::Approx(1.0 / 3.0).epsilon(1e-15));
  const Tensor q = tape.value(softmax(tape, tape.constant(Tensor::vector({1000, 0}))));
  CHECK(q[0] == 1.0);
  CHECK(q[1] == doctest::Approx(0.0));
  CHECK(all_finite(q));

  std::mt19937_64 rng(2);
  for (int trial = 0; trial < 50; ++trial) {
    const Tensor z = oracle::random(rng, {4, 6}, -5, 5);
    Tensor shifted = z;
    for (double& v : shifted.data()) v += 3.25;
    const Tensor a = tape.value(softmax(tape, tape.constant(z)));
    const Tensor b = tape.value(softmax(tape, tape.constant(shifted)));
    CHECK(max_abs_diff(a, b) <= 1e-12);
    for (std::size_t r = 0; r < 4; ++r) {
      double s = 0.0;
      for (double v : a.row(r)) s += v;
      CHECK(std::abs(s - 1.0) <= 1e-12);
    }
  }
}

TEST_CASE("logistic results do not depend on buffer alignment") {
  std::mt19937_64 rng(17);
  std::uniform_real_distribution<double> u(-30.0, 30.0);
  std::vector<double> values(1037);
  for (double& v : values) v = u(rng);
  std::vector<double> reference(values.size());
  kernels::logistic(values.data(), reference.data(), values.size());
  for (std::size_t off = 1; off < 8; ++off) {
    std::vector<double> in(values.size() + off), out(values.size() + off);
    std::copy(values.begin(), values.end(), in.begin() + static_cast<std::ptrdiff_t>(off));
    kernels::logistic(in.data() + off, out.data() + off, values.size());
    CHECK(std::memcmp(out.data() + off, reference.data(), values.size() * sizeof(double)) == 0);
  }
  for (std::size_t i = 0; i < values.size(); ++i) CHECK(std::abs(reference[i] - oracle::sigmoid(values[i])) < 1e-15);
}
