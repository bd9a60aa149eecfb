#include <cmath>

#include "doctest.h"
#include "oracles.hpp"
#include "skilldisc/errors.hpp"
#include "skilldisc/nn.hpp"

using namespace skilldisc;
using namespace skilldisc::nn;

namespace {

const NetworkSpec kSmallTanh{{4, 8, Activation::tanh}, {8, 2, Activation::tanh}};

Vector vec(std::initializer_list<double> xs) {
  Vector v(static_cast<Eigen::Index>(xs.size()));
  Eigen::Index i = 0;
  for (double x : xs) v(i++) = x;
  return v;
}

}  // namespace

TEST_CASE("mlp_init shapes, zero biases and determinism") {
  Rng a(42), b(42);
  const auto p = mlp_init(kSmallTanh, a);
  REQUIRE(p.size() == 4);
  CHECK(p.at("layer0.weight").shape == std::vector<std::size_t>{4, 8});
  CHECK(p.at("layer0.bias").shape == std::vector<std::size_t>{8});
  CHECK(p.at("layer1.weight").shape == std::vector<std::size_t>{8, 2});
  CHECK(p.at("layer1.bias").shape == std::vector<std::size_t>{2});
  for (double x : p.at("layer0.bias").values) CHECK(x == 0.0);
  for (double x : p.at("layer1.bias").values) CHECK(x == 0.0);
  for (double x : p.at("layer0.weight").values) CHECK(std::abs(x) <= 0.5);
  CHECK(p == mlp_init(kSmallTanh, b));
}

TEST_CASE("mlp_init rejects mismatched layer sizes") {
  Rng rng(1);
  const NetworkSpec bad{{4, 8, Activation::relu}, {7, 2, Activation::identity}};
  CHECK_THROWS_AS(mlp_init(bad, rng), ContractError);
  CHECK_THROWS_AS(mlp_init(NetworkSpec{}, rng), ContractError);
}

TEST_CASE("forward special cases") {
  const NetworkSpec id{{3, 3, Activation::identity}};
  Rng rng(1);
  auto p = mlp_init(id, rng);
  for (auto& a : p.arrays()) std::fill(a.values.begin(), a.values.end(), 0.0);
  CHECK(evaluate(p, id, vec({1, 2, 3})).isZero());

  auto& w = p.at("layer0.weight").values;
  w[0] = w[4] = w[8] = 1.0;
  CHECK(evaluate(p, id, vec({1, -2, 3})) == vec({1, -2, 3}));
}

TEST_CASE("forward matches a straight-line re-implementation") {
  Rng rng(2024);
  const auto p = mlp_init(kSmallTanh, rng);
  for (int trial = 0; trial < 20; ++trial) {
    const Matrix x = oracle::random_matrix(rng, 1, 4, 2.0);
    const auto out = forward(p, kSmallTanh, x).output;
    const auto ref = oracle::mlp_reference(p, kSmallTanh, {x(0, 0), x(0, 1), x(0, 2), x(0, 3)});
    CHECK(std::abs(out(0, 0) - ref[0]) <= 1e-12);
    CHECK(std::abs(out(0, 1) - ref[1]) <= 1e-12);
  }
}

TEST_CASE("forward rejects a wrong input width") {
  Rng rng(1);
  const auto p = mlp_init(kSmallTanh, rng);
  CHECK_THROWS_AS(forward(p, kSmallTanh, Matrix::Zero(1, 5)), ContractError);
}

TEST_CASE("backward of a zero output gradient is zero") {
  Rng rng(3);
  const auto p = mlp_init(kSmallTanh, rng);
  const auto fwd = forward(p, kSmallTanh, oracle::random_matrix(rng, 5, 4));
  const auto g = backward(p, kSmallTanh, fwd.tape, Matrix::Zero(5, 2));
  for (const auto& a : g.params.arrays()) {
    for (double x : a.values) CHECK(x == 0.0);
  }
  CHECK(g.input.isZero());
}

TEST_CASE("backward matches central finite differences") {
  Rng rng(99);
  for (int trial = 0; trial < 10; ++trial) {
    const auto specs = oracle::random_small_spec(rng);
    const auto p = mlp_init(specs, rng);
    const Matrix x = oracle::random_matrix(rng, 3, specs.front().input_size);
    const Matrix w = oracle::random_matrix(rng, 3, specs.back().output_size);
    const auto check = oracle::finite_difference_check(p, specs, x, w);
    CHECK(static_cast<double>(check.matching) >= 0.99 * static_cast<double>(check.entries));
  }
}

TEST_CASE("input gradient matches finite differences") {
  Rng rng(5);
  const auto p = mlp_init(kSmallTanh, rng);
  Matrix x = oracle::random_matrix(rng, 1, 4);
  const Matrix w = oracle::random_matrix(rng, 1, 2);
  const auto fwd = forward(p, kSmallTanh, x);
  const auto g = backward(p, kSmallTanh, fwd.tape, w);
  const double h = 1e-6;
  for (int i = 0; i < 4; ++i) {
    Matrix up = x, down = x;
    up(0, i) += h;
    down(0, i) -= h;
    const double numeric =
        ((evaluate(p, kSmallTanh, up) - evaluate(p, kSmallTanh, down)).cwiseProduct(w)).sum() / (2 * h);
    CHECK(g.input(0, i) == doctest::Approx(numeric).epsilon(1e-6));
  }
}

TEST_CASE("gradients of a summed objective are the sum of per-input gradients") {
  Rng rng(8);
  const auto p = mlp_init(kSmallTanh, rng);
  const Matrix x = oracle::random_matrix(rng, 2, 4);
  const Matrix ones = Matrix::Ones(2, 2);
  const auto both = backward(p, kSmallTanh, forward(p, kSmallTanh, x).tape, ones);
  const Matrix r0 = x.row(0);
  const Matrix r1 = x.row(1);
  const auto g0 = backward(p, kSmallTanh, forward(p, kSmallTanh, r0).tape, Matrix::Ones(1, 2));
  const auto g1 = backward(p, kSmallTanh, forward(p, kSmallTanh, r1).tape, Matrix::Ones(1, 2));
  for (std::size_t k = 0; k < both.params.size(); ++k) {
    const auto& a = both.params.arrays()[k].values;
    for (std::size_t i = 0; i < a.size(); ++i) {
      CHECK(a[i] == doctest::Approx(g0.params.arrays()[k].values[i] + g1.params.arrays()[k].values[i]));
    }
  }
}

TEST_CASE("backward rejects a tape from another network") {
  Rng rng(4);
  const auto p = mlp_init(kSmallTanh, rng);
  const NetworkSpec other{{4, 2, Activation::tanh}};
  const auto q = mlp_init(other, rng);
  const auto tape = forward(q, other, Matrix::Zero(1, 4)).tape;
  CHECK_THROWS_AS(backward(p, kSmallTanh, tape, Matrix::Zero(1, 2)), ContractError);
  const auto own = forward(p, kSmallTanh, Matrix::Zero(1, 4)).tape;
  CHECK_THROWS_AS(backward(p, kSmallTanh, own, Matrix::Zero(2, 2)), ContractError);
}

TEST_CASE("adam first step on w^2/2") {
  ParameterSet p;
  p.add("w", {1}, {1.0});
  ParameterSet g;
  g.add("w", {1}, {1.0});
  auto opt = make_adam_state(p);
  adam_step(p, g, opt, 0.1);
  // m_hat = v_hat = 1 after bias correction, so the step is lr / (1 + eps).
  CHECK(std::abs(p.at("w").values[0] - (1.0 - 0.1 / (1.0 + 1e-8))) <= 1e-15);
  CHECK(p.at("w").values[0] == doctest::Approx(0.9));
  CHECK(opt.step == 1);
}

TEST_CASE("adam with zero gradients leaves parameters and is pure") {
  ParameterSet p;
  p.add("w", {2}, {1.5, -2.0});
  const ParameterSet zero = p.zeros_like();
  auto opt = make_adam_state(p);
  adam_step(p, zero, opt, 0.1);
  CHECK(p.at("w").values == Values{1.5, -2.0});
  CHECK(opt.step == 1);

  ParameterSet g;
  g.add("w", {2}, {0.3, -0.7});
  auto p1 = p, p2 = p;
  auto o1 = opt, o2 = opt;
  adam_step(p1, g, o1, 0.01);
  adam_step(p2, g, o2, 0.01);
  CHECK(p1 == p2);
  CHECK(o1.first_moment == o2.first_moment);
}

TEST_CASE("adam rejects non-finite gradients") {
  ParameterSet p;
  p.add("w", {1}, {1.0});
  ParameterSet g;
  g.add("w", {1}, {std::nan("")});
  auto opt = make_adam_state(p);
  CHECK_THROWS_AS(adam_step(p, g, opt, 0.1), NumericalError);
  CHECK(p.at("w").values[0] == 1.0);
  CHECK(opt.step == 0);
}

TEST_CASE("polyak update endpoints and midpoint") {
  ParameterSet target;
  target.add("w", {2}, {0.0, 0.0});
  ParameterSet online;
  online.add("w", {2}, {2.0, 2.0});

  auto t = target;
  polyak_update(t, online, 0.0);
  CHECK(t == target);
  polyak_update(t, online, 1.0);
  CHECK(t == online);
  t = target;
  polyak_update(t, online, 0.5);
  CHECK(t.at("w").values == Values{1.0, 1.0});

  t = online;
  polyak_update(t, online, 0.001);
  CHECK(t == online);

  ParameterSet other;
  other.add("v", {2}, {0.0, 0.0});
  CHECK_THROWS_AS(polyak_update(t, other, 0.5), ContractError);
}

TEST_CASE("log_softmax examples") {
  const Vector uniform = Vector::Zero(64);
  for (double x : log_softmax(uniform)) CHECK(x == doctest::Approx(-std::log(64.0)).epsilon(1e-12));
  const auto two = log_softmax(vec({0, 0}));
  CHECK(two(0) == doctest::Approx(-std::log(2.0)));
  const Vector logits = vec({0.3, -1.2, 2.5, 0.0});
  const Vector shifted = (logits.array() + 1000.0).matrix();
  CHECK((log_softmax(logits) - log_softmax(shifted)).cwiseAbs().maxCoeff() <= 1e-9);
}

TEST_CASE("exp(log_softmax) sums to one for arbitrary logits") {
  Rng rng(12);
  for (int trial = 0; trial < 200; ++trial) {
    const Matrix m = oracle::random_matrix(rng, 1, 1 + trial % 70, 50.0);
    const Vector v = m.row(0).transpose();
    CHECK(std::abs(log_softmax(v).array().exp().sum() - 1.0) <= 1e-12);
  }
}
