#include <doctest.h>

#include <cmath>
#include <random>

#include "vie/network.hpp"

using namespace vie;

TEST_SUITE("network") {

TEST_CASE("parameter count of the 1-40-40-2 network") {
  MlpConfig c;
  CHECK(c.parameter_count() == 1 * 40 + 40 + 40 * 40 + 40 + 40 * 2 + 2 + 1);
  CHECK(c.parameter_count() == 1803);
  CHECK(init_parameters(c).flatten().size() == 1803);
}

TEST_CASE("config validation") {
  CHECK_THROWS_AS((MlpConfig{{1, 2}, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MlpConfig{{2, 10, 2}, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MlpConfig{{1, 10, 3}, 0}.validate()), std::invalid_argument);
  CHECK_THROWS_AS((MlpConfig{{1, 0, 2}, 0}.validate()), std::invalid_argument);
  CHECK_NOTHROW((MlpConfig{{1, 3, 2}, 0}.validate()));
}

TEST_CASE("init: Glorot bounds, zero biases and theta, deterministic") {
  for (std::uint64_t seed : {0ULL, 1ULL, 99ULL}) {
    MlpConfig c;
    c.init_seed = seed;
    const auto p = init_parameters(c);
    CHECK(p.theta == 0.0);
    REQUIRE(p.layers.size() == 3);
    for (const auto& l : p.layers) {
      const double limit = std::sqrt(6.0 / static_cast<double>(l.in + l.out));
      for (const double b : l.biases) CHECK(b == 0.0);
      for (const double w : l.weights) CHECK(std::abs(w) < limit);
    }
    for (const double w : p.layers[0].weights) CHECK(std::abs(w) < 0.3824);
    CHECK(init_parameters(c) == p);
  }
  MlpConfig a;
  MlpConfig b;
  b.init_seed = 1;
  CHECK(!(init_parameters(a) == init_parameters(b)));
}

TEST_CASE("flatten and unflatten are inverse; theta is last") {
  MlpConfig c;
  c.init_seed = 5;
  auto p = init_parameters(c);
  p.theta = 0.123;
  p.layers[1].biases[3] = -0.5;
  const auto flat = p.flatten();
  CHECK(flat.back() == 0.123);
  CHECK(p.theta_slot() == flat.size() - 1);
  CHECK(ParameterSet::unflatten(flat, c) == p);
  // layer-major: first layer weights occupy the leading 40 slots, biases follow.
  CHECK(flat[0] == p.layers[0].weights[0]);
  CHECK(flat[40] == p.layers[0].biases[0]);
  CHECK(flat[80] == p.layers[1].weights[0]);

  CHECK_THROWS_AS(ParameterSet::unflatten(std::vector<double>(1802), c), std::invalid_argument);
  CHECK_THROWS_AS(ParameterSet::unflatten(std::vector<double>(1804), c), std::invalid_argument);
}

TEST_CASE("zero network outputs zero everywhere") {
  MlpConfig c;
  const auto p = ParameterSet::unflatten(std::vector<double>(c.parameter_count(), 0.0), c);
  for (const double t : {-1.0, 0.0, 0.37, 3.0, 10.0}) {
    const auto out = forward_value(p, t);
    CHECK(out.u == 0.0);
    CHECK(out.v == 0.0);
  }
}

TEST_CASE("outputs are bounded by the last layer") {
  MlpConfig c;
  c.init_seed = 3;
  const auto p = init_parameters(c);
  const auto& last = p.layers.back();
  double m = 0.0;
  for (const double w : last.weights) m = std::max(m, std::abs(w));
  for (const double t : {-50.0, -1.0, 0.0, 2.0, 50.0}) {
    const auto out = forward_value(p, t);
    CHECK(std::abs(out.u) <= 40.0 * m + std::abs(last.biases[0]));
    CHECK(std::abs(out.v) <= 40.0 * m + std::abs(last.biases[1]));
  }
}

TEST_CASE("graph forward matches the plain evaluation") {
  MlpConfig c;
  c.init_seed = 21;
  auto p = init_parameters(c);
  p.theta = 0.4;
  for (const double t : {-0.8, 0.0, 1.1, 2.9}) {
    ad::Graph g;
    const auto bound = bind_parameters(g, p);
    const auto out = forward(c, bound, g.variable(c.parameter_count(), t));
    const auto ref = forward_value(p, t);
    CHECK(out.u.value() == doctest::Approx(ref.u).epsilon(1e-14));
    CHECK(out.v.value() == doctest::Approx(ref.v).epsilon(1e-14));
    CHECK(bound.theta.value() == 0.4);
  }
}

TEST_CASE("input derivatives agree with finite differences") {
  MlpConfig c;
  c.init_seed = 17;
  const auto p = init_parameters(c);
  const auto n = c.parameter_count();
  std::mt19937_64 rng(4);
  std::uniform_real_distribution<double> pick(0.0, 3.0);
  for (int k = 0; k < 10; ++k) {
    const double t = pick(rng);
    ad::Graph g;
    const auto bound = bind_parameters(g, p);
    const auto in = g.variable(n, t);
    const auto out = forward(c, bound, in);
    const double du = g.derivative(out.u, in, 1).value();
    const double d2v = g.derivative(out.v, in, 2).value();
    const double h1 = 1e-5;
    const double fd_u = (forward_value(p, t + h1).u - forward_value(p, t - h1).u) / (2 * h1);
    const double h2 = 1e-3;
    const double fd_v2 =
        (forward_value(p, t + h2).v - 2 * forward_value(p, t).v + forward_value(p, t - h2).v) /
        (h2 * h2);
    CAPTURE(t);
    CHECK(du == doctest::Approx(fd_u).epsilon(1e-4));
    CHECK(d2v == doctest::Approx(fd_v2).epsilon(1e-3));
  }
}

TEST_CASE("d/dw of dv/dt agrees with finite differences") {
  MlpConfig c{{1, 6, 5, 2}, 8};
  const auto p = init_parameters(c);
  auto flat = p.flatten();
  const auto n = c.parameter_count();
  const double t = 0.6;
  auto dvdt = [&](const std::vector<double>& x) {
    ad::Graph g;
    const auto bound = bind_parameters(g, x);
    const auto in = g.variable(n, t);
    return g.derivative(forward(c, bound, in).v, in, 1).value();
  };
  ad::Graph g;
  const auto bound = bind_parameters(g, flat);
  const auto in = g.variable(n, t);
  const auto grad = g.gradient(g.derivative(forward(c, bound, in).v, in, 1), n);
  const double h = 1e-6;
  for (std::size_t i = 0; i + 1 < n; ++i) {
    auto xp = flat;
    auto xm = flat;
    xp[i] += h;
    xm[i] -= h;
    const double fd = (dvdt(xp) - dvdt(xm)) / (2 * h);
    CAPTURE(i);
    if (std::abs(fd) > 1e-6) {
      CHECK(grad[i] == doctest::Approx(fd).epsilon(1e-4));
    } else {
      CHECK(std::abs(grad[i] - fd) <= 1e-8);
    }
  }
}

TEST_CASE("non-finite parameters are reported") {
  MlpConfig c{{1, 3, 2}, 0};
  auto flat = init_parameters(c).flatten();
  flat[0] = std::numeric_limits<double>::infinity();
  ad::Graph g;
  CHECK_THROWS_AS(bind_parameters(g, flat), ad::NonFiniteError);
}

}  // TEST_SUITE
