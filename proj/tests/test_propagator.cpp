#include <doctest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "nlslab/error.hpp"
#include "nlslab/propagator.hpp"
#include "nlslab/spectral.hpp"

using namespace nlslab;
using std::numbers::pi;

namespace {

RadialField gaussian(const RadialGrid& g) {
  return RadialField::sample(g, [](double r) { return std::exp(-r * r); });
}

RadialField random_smooth(const RadialGrid& g, unsigned seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(-1.0, 1.0), w(0.3, 3.0);
  RadialField f(g);
  for (int j = 0; j < 5; ++j) {
    const cplx a(u(rng), u(rng));
    const double b = w(rng);
    for (std::size_t i = 0; i < g.n(); ++i) f.values[i] += a * std::exp(-b * g.nodes()[i] * g.nodes()[i]);
  }
  return f;
}

// Free Gaussian in d dimensions, closed form.
cplx free_gaussian(double r, double t, int d) {
  const cplx s(1.0, 4.0 * t);
  return std::pow(s, -0.5 * d) * std::exp(-r * r / s);
}

}  // namespace

TEST_CASE("free evolution: identity, closed form, unitarity, group law") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const RadialField f = gaussian(g);
  const RadialField same = free_evolve(f, 0.0);
  CHECK(norm(same - f, Space::l2()) == 0.0);

  const RadialField u = free_evolve(f, 0.5);
  double err = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i)
    err = std::max(err, std::abs(u.values[i] - free_gaussian(g.nodes()[i], 0.5, 5)));
  CHECK(err / std::abs(free_gaussian(0.0, 0.5, 5)) < 1e-8);

  const RadialField h = random_smooth(g, 9);
  const double n0 = norm(h, Space::l2());
  const RadialField v = free_evolve(h, 7.3);
  CHECK(std::abs(norm(v, Space::l2()) / n0 - 1.0) < 1e-10);
  CHECK(std::abs(norm(v, Space::h()) / norm(h, Space::h()) - 1.0) < 1e-10);
  const RadialField two = free_evolve(free_evolve(h, 1.2), 2.3);
  CHECK(norm(two - free_evolve(h, 3.5), Space::l2()) < 1e-10 * n0);
  CHECK(norm(free_evolve(v, -7.3) - h, Space::l2()) < 1e-10 * n0);
}

TEST_CASE("dispersive decay on a wide grid") {
  const RadialGrid g = build_grid(5, 320.0, 1536);
  const RadialField f = gaussian(g);
  std::vector<double> times;
  for (int i = 0; i <= 16; ++i) times.push_back(std::pow(30.0, i / 16.0));

  const DecayFit one = dispersive_decay_fit(f, 1.0, times);
  CHECK(one.max_trusted_time == doctest::Approx(30.0));
  CHECK(std::abs(one.slope + 2.5) < 0.05);
  CHECK(one.predicted == -2.5);
  // L^1 -> L^inf with the sharp constant (4 pi t)^{-d/2}.
  const double l1 = norm(f, Space::lq(1.0));
  for (const auto& row : one.rows)
    CHECK(row.norm <= std::pow(4.0 * pi * row.t, -2.5) * l1 * 1.01);

  const DecayFit two = dispersive_decay_fit(f, 2.0, times);
  CHECK(std::abs(two.slope) < 1e-6);

  const DecayFit r = dispersive_decay_fit(f, 20.0 / 19.0, times);
  CHECK(r.predicted == doctest::Approx(-2.25));
  CHECK(std::abs(r.slope + 2.25) < 0.05);
  CHECK(decay_csv(r).rfind("t,norm,fitted_slope,trust_flag\n", 0) == 0);
}

TEST_CASE("decay fit reports the trust window on a small grid") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const RadialField f = gaussian(g);
  std::vector<double> times{1, 2, 3, 4, 6, 8, 12, 16, 24, 30};
  const DecayFit fit = dispersive_decay_fit(f, 1.0, times);
  CHECK(fit.max_trusted_time < 30.0);
  CHECK(fit.max_trusted_time >= 4.0);
  CHECK_FALSE(fit.rows.back().trusted);
  try {
    dispersive_decay_fit(f, 1.0, {24.0, 30.0});
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::DomainEscape);
  }
}

TEST_CASE("direct resolvent") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const RadialField f = gaussian(g);
  ResolventSpec spec;
  spec.energy = -1.0;
  spec.epsilon = 0.0;
  const RadialField r = resolvent_direct(f, spec);
  CHECK(norm(r, Space::l2()) < norm(f, Space::l2()));
  spec.energy = 1.0;
  try {
    resolvent_direct(f, spec);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::SingularResolvent);
  }
  spec.epsilon = 0.1;
  CHECK(resolvent_direct(f, spec).finite());
}

TEST_CASE("time-integral resolvent agrees up to a global sign") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const RadialField f = gaussian(g);
  ResolventSpec spec;
  spec.energy = -1.0;
  spec.epsilon = 1e-3;
  spec.horizon = 1e3;
  const RadialField ti = resolvent_time_integral(f, spec);
  ResolventSpec exact = spec;
  exact.epsilon = 0.0;
  const SignedAgreement agree = agree_modulo_sign(ti, resolvent_direct(f, exact));
  CHECK(agree.relative_error < 1e-3);
  CHECK(agree.sign == -1);

  CHECK(norm(resolvent_time_integral(RadialField(g), spec), Space::l2()) == 0.0);

  ResolventSpec short_spec = spec;
  short_spec.horizon = 0.5;
  try {
    resolvent_time_integral(f, short_spec);
    CHECK(false);
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::TruncationNotConverged);
  }
}

TEST_CASE("resolvent symbol quadrature") {
  for (double k : {0.0, 0.7, 2.0, 5.0}) {
    for (double e : {-1.0, 0.5}) {
      const double eps = 0.05;
      const cplx closed = cplx(0.0, -1.0) / cplx(eps, k * k - e);
      const cplx num = resolvent_symbol_quadrature(e, k, eps, 1e3);
      CHECK(std::abs(num - closed) < 1e-6 * std::abs(closed));
      const cplx closed_minus = cplx(0.0, 1.0) / cplx(eps, e - k * k);
      CHECK(std::abs(resolvent_symbol_quadrature(e, k, eps, 1e3, Side::Minus) - closed_minus) <
            1e-6 * std::abs(closed_minus));
    }
  }
}

TEST_CASE("double Duhamel integral against the second antiderivative") {
  // For g(u) = (1+u)^{-d/2} and a rectangle [0,a]x[0,b]:
  // int int g(s1+s2) = P(a+b) - P(a) - P(b) + P(0) with P'' = g.
  auto closed5 = [](double a, double b) {
    auto P = [](double u) { return 4.0 / 3.0 * std::pow(1.0 + u, -0.5); };
    return P(a + b) - P(a) - P(b) + P(0.0);
  };
  auto closed4 = [](double a, double b) {
    auto P = [](double u) { return -std::log1p(u); };
    return P(a + b) - P(a) - P(b) + P(0.0);
  };
  for (double h : {0.5, 3.0, 1e3, 1e6}) {
    CHECK(double_duhamel_convergence(5, 2.0 * h, h) == doctest::Approx(closed5(h, h)).epsilon(1e-10));
    CHECK(double_duhamel_convergence(4, 2.0 * h, h) == doctest::Approx(closed4(h, h)).epsilon(1e-10));
  }
  CHECK(double_duhamel_convergence(5, 2.0, 10.0) == doctest::Approx(closed5(10.0, 2.0)).epsilon(1e-10));
  CHECK(double_duhamel_convergence(5, 100.0, 0.0) == 0.0);
  CHECK(double_duhamel_convergence(5, 1e9, 1e9) == doctest::Approx(4.0 / 3.0).epsilon(1e-4));

  const std::vector<double> hs{1e3, 1e4, 1e5, 1e6};
  CHECK(double_duhamel_growth(5, 0.0, hs).bounded);
  CHECK(double_duhamel_growth(6, 0.0, hs).bounded);
  CHECK_FALSE(double_duhamel_growth(4, 0.0, hs).bounded);
  CHECK_FALSE(double_duhamel_growth(3, 0.0, hs).bounded);
  const auto g4 = double_duhamel_growth(4, 0.0, hs);
  CHECK(g4.values.back() > 2.0 * g4.values.front());
}
