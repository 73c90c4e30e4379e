#include <doctest.h>

#include <cmath>
#include <random>
#include <thread>
#include <vector>

#include "vie/autodiff.hpp"

using namespace vie;
using namespace vie::ad;

TEST_SUITE("autodiff") {

TEST_CASE("evaluate: small expressions") {
  Graph g;
  CHECK(tanh(g.constant(0.0)).value() == 0.0);
  CHECK((exp(g.constant(1.0)) * 2.0).value() == doctest::Approx(5.43656365691809));
  const auto x = g.variable(0, 3.0);
  CHECK(pow(x, 2).value() == 9.0);
  CHECK((x * x).value() == 9.0);
}

TEST_CASE("evaluate: rebinding recomputes the tape") {
  Graph g;
  const auto x = g.variable(0, 1.0);
  const auto y = g.variable(1, 2.0);
  const auto f = sin(x) * y + x / y - cos(y);
  const std::vector<double> b{0.3, -1.7};
  CHECK(g.evaluate(f, b) ==
        doctest::Approx(std::sin(0.3) * -1.7 + 0.3 / -1.7 - std::cos(-1.7)).epsilon(1e-15));
  CHECK(f.value() == doctest::Approx(std::sin(0.3) * -1.7 + 0.3 / -1.7 - std::cos(-1.7)));
  CHECK_THROWS_AS(g.evaluate(f, std::vector<double>{1.0}), std::invalid_argument);
}

TEST_CASE("gradient: elementary derivatives") {
  Graph g;
  const auto x = g.variable(0, 3.0);
  CHECK(g.gradient(x * x, 1)[0] == 6.0);

  Graph h;
  const auto z = h.variable(0, 0.0);
  CHECK(h.gradient(tanh(z), 1)[0] == 1.0);
}

TEST_CASE("gradient: unused slots are zero") {
  Graph g;
  const auto x = g.variable(0, 2.0);
  g.variable(2, 5.0);
  const auto grad = g.gradient(exp(x), 4);
  REQUIRE(grad.size() == 4);
  CHECK(grad[0] == doctest::Approx(std::exp(2.0)));
  CHECK(grad[1] == 0.0);
  CHECK(grad[2] == 0.0);
  CHECK(grad[3] == 0.0);
}

TEST_CASE("gradient: chain rule through tanh(exp(x))") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(-2.0, 1.0);
  for (int k = 0; k < 20; ++k) {
    const double xv = u(rng);
    Graph g;
    const auto x = g.variable(0, xv);
    const double got = g.gradient(tanh(exp(x)), 1)[0];
    const double th = std::tanh(std::exp(xv));
    CHECK(got == doctest::Approx((1.0 - th * th) * std::exp(xv)).epsilon(1e-12));
  }
}

TEST_CASE("gradient: linear in the root") {
  std::mt19937_64 rng(8);
  std::normal_distribution<double> n01;
  for (int k = 0; k < 10; ++k) {
    Graph g;
    const auto x = g.variable(0, n01(rng));
    const auto y = g.variable(1, n01(rng));
    const auto f = tanh(x * y) + pow(x, 3) - sin(y);
    const auto h = exp(0.3 * x) / (2.0 + cos(x + y));
    const double a = n01(rng);
    const double b = n01(rng);
    const auto gf = g.gradient(f, 2);
    const auto gh = g.gradient(h, 2);
    const auto gc = g.gradient(a * f + b * h, 2);
    for (int i = 0; i < 2; ++i) {
      CHECK(gc[i] == doctest::Approx(a * gf[i] + b * gh[i]).epsilon(1e-13));
    }
  }
}

TEST_CASE("accumulate_gradient adds seeded contributions") {
  Graph g;
  const auto x = g.variable(0, 1.5);
  std::vector<double> acc{1.0, 0.0};
  g.accumulate_gradient(x * x, 2.0, acc);
  CHECK(acc[0] == doctest::Approx(1.0 + 2.0 * 3.0));
  CHECK(acc[1] == 0.0);
}

TEST_CASE("derivative: first and second order") {
  Graph g;
  const auto t = g.variable(0, 2.0);
  const auto d2 = g.derivative(pow(t, 3), t, 2);
  CHECK(d2.value() == 12.0);
  const std::vector<double> b{-0.5};
  CHECK(g.evaluate(d2, b) == doctest::Approx(-3.0));

  Graph h;
  const auto s = h.variable(0, 0.0);
  CHECK(h.derivative(tanh(s), s, 1).value() == 1.0);
}

TEST_CASE("derivative: products, quotients and trig") {
  Graph g;
  const double tv = 0.7;
  const auto t = g.variable(0, tv);
  const auto f = sin(t) * exp(t) / (1.0 + t * t);
  const auto d1 = g.derivative(f, t, 1);
  const auto d2 = g.derivative(f, t, 2);
  auto fv = [](double x) { return std::sin(x) * std::exp(x) / (1.0 + x * x); };
  const double h = 1e-4;
  CHECK(d1.value() == doctest::Approx((fv(tv + h) - fv(tv - h)) / (2 * h)).epsilon(1e-7));
  CHECK(d2.value() ==
        doctest::Approx((fv(tv + h) - 2 * fv(tv) + fv(tv - h)) / (h * h)).epsilon(1e-5));
}

TEST_CASE("derivative: result is differentiable in other variables") {
  // d/dw [d/dt tanh(w t)] = d/dw [w (1 - tanh^2(w t))]
  const double wv = 0.8;
  const double tv = 0.4;
  Graph g;
  const auto w = g.variable(0, wv);
  const auto t = g.variable(1, tv);
  const auto dt = g.derivative(tanh(w * t), t, 1);
  const double got = g.gradient(dt, 2)[0];
  auto dfdt = [&](double wx) {
    const double th = std::tanh(wx * tv);
    return wx * (1.0 - th * th);
  };
  const double h = 1e-5;
  CHECK(got == doctest::Approx((dfdt(wv + h) - dfdt(wv - h)) / (2 * h)).epsilon(1e-8));
}

TEST_CASE("derivative: argument errors") {
  Graph g;
  const auto t = g.variable(0, 1.0);
  const auto f = t * t;
  CHECK_THROWS_AS(g.derivative(f, t, 0), std::invalid_argument);
  CHECK_THROWS_AS(g.derivative(f, t, 3), std::invalid_argument);
  CHECK_THROWS_AS(g.derivative(f, f, 1), std::invalid_argument);
}

TEST_CASE("derivative: wrt a variable the output ignores is zero") {
  Graph g;
  const auto t = g.variable(0, 1.0);
  const auto s = g.variable(1, 2.0);
  CHECK(g.derivative(exp(s), t, 1).value() == 0.0);
  CHECK(g.derivative(exp(s), t, 2).value() == 0.0);
}

TEST_CASE("non-finite values raise NonFiniteError naming the node") {
  Graph g;
  const auto zero = g.constant(0.0);
  const auto one = g.constant(1.0);
  try {
    (void)(one / zero);
    FAIL("expected NonFiniteError");
  } catch (const NonFiniteError& e) {
    CHECK(e.op() == Op::div);
    CHECK(e.node() >= 0);
    CHECK(std::string(e.what()).find("div") != std::string::npos);
  }
  CHECK_THROWS_AS(exp(g.constant(1000.0)), NonFiniteError);

  Graph h;
  const auto x = h.variable(0, 1.0);
  const auto f = exp(x);
  CHECK_THROWS_AS(h.evaluate(f, std::vector<double>{800.0}), NonFiniteError);
}

TEST_CASE("mixing graphs is rejected") {
  Graph a;
  Graph b;
  const auto x = a.variable(0, 1.0);
  const auto y = b.variable(0, 1.0);
  CHECK_THROWS_AS(x + y, std::logic_error);
}

TEST_CASE("independent graphs on separate threads") {
  auto work = [](double seed) {
    Graph g;
    const auto t = g.variable(0, seed);
    double acc = 0.0;
    for (int k = 0; k < 200; ++k) {
      const auto f = tanh(t * static_cast<double>(k) * 0.01) * exp(-t);
      acc += g.derivative(f, t, 2).value();
    }
    return acc;
  };
  std::vector<double> serial(8);
  for (int i = 0; i < 8; ++i) serial[i] = work(0.1 * i);
  std::vector<double> threaded(8);
  std::vector<std::thread> pool;
  for (int i = 0; i < 8; ++i) pool.emplace_back([&, i] { threaded[i] = work(0.1 * i); });
  for (auto& th : pool) th.join();
  CHECK(threaded == serial);
}

}  // TEST_SUITE
