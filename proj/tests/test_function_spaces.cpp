#include <doctest.h>

#include <cmath>

#include "nlslab/error.hpp"
#include "nlslab/function_spaces.hpp"
#include "nlslab/ground_state.hpp"
#include "nlslab/spectral.hpp"

using namespace nlslab;

namespace {

const RadialGrid& reference_grid() {
  static const RadialGrid g = build_grid(5, 40.0, 1024);
  return g;
}

Exponent ex(long long n, long long d = 1) { return Exponent::of(Rational(n, d)); }

const NlsParams kFocusing = NlsParams::make(5, 2.0, -1);

Trajectory soliton_run(const RadialGrid& g, double omega, double t_end, double dt, std::size_t every) {
  const GroundState gs = solve_ground_state(kFocusing, omega, g, 1e-10);
  return evolve(gs.profile, kFocusing, t_end, dt, every, {});
}

}  // namespace

TEST_CASE("admissible pairs") {
  CHECK(admissible_check(Exponent::infinity(), ex(2), 5));
  CHECK(admissible_check(ex(2), ex(10, 3), 5));
  CHECK(admissible_check(ex(12, 5), ex(3), 5));
  CHECK_FALSE(admissible_check(ex(2), ex(3), 5));
  CHECK_FALSE(admissible_check(ex(1), ex(5), 5));
  CHECK(ex(12, 5).str() == "12/5");
  CHECK(Exponent::infinity().str() == "inf");
  CHECK(ex(3).dual() == ex(3, 2));
}

TEST_CASE("exponent table for d=5, p=2") {
  const ExponentTable t = default_exponents(5, 2.0);
  CHECK_FALSE(t.from_search);
  CHECK(t.q0 == ex(12, 5));
  CHECK(t.r0 == ex(3));
  CHECK(t.big_q0 == ex(3));
  CHECK(t.big_q == ex(20, 9));
  CHECK(t.big_r == ex(20, 19));
  CHECK(t.valid());
  CHECK(Rational(1, 2) + t.big_q.inv == Rational(19, 20));
  CHECK(t.big_r.inv == Rational(19, 20));
}

TEST_CASE("exponent search") {
  for (auto [d, p] : {std::pair{5, 1.9}, {5, 2.25}, {6, 1.8}, {7, 1.7}, {9, 1.5}}) {
    CAPTURE(d);
    CAPTURE(p);
    const ExponentTable t = default_exponents(d, p);
    CHECK(t.from_search);
    CHECK(t.valid());
  }
  for (auto [d, p] : {std::pair{5, 1.5}, {5, 1.8}, {5, 7.0 / 3.0}, {4, 2.0}}) {
    try {
      default_exponents(d, p);
      FAIL("expected no-solution");
    } catch (const Error& e) {
      CHECK(e.kind() == ErrorKind::NoSolution);
    }
  }
  CHECK(to_rational(7.0 / 3.0) == Rational(7, 3));
  CHECK_THROWS_AS(to_rational(M_PI), Error);
}

TEST_CASE("Strichartz norms") {
  const RadialGrid& g = reference_grid();
  const RadialField f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  const Trajectory lin = evolve(f, NlsParams::linear(5), 2.0, 1e-2, 10, {});
  double sup = 0.0;
  for (const RadialField& u : lin.fields) sup = std::max(sup, norm(u, Space::l2()));
  const NormReport r = strichartz_norm(lin, Exponent::infinity(), ex(2), false, {0.0, 2.0});
  CHECK(r.value == sup);
  CHECK(r.value == doctest::Approx(norm(f, Space::l2())).epsilon(1e-10));

  const Trajectory zero = evolve(RadialField(g), NlsParams::linear(5), 1.0, 1e-2, 10, {});
  CHECK(strichartz_norm(zero, ex(12, 5), ex(3), true, {0.0, 1.0}).value == 0.0);

  try {
    strichartz_norm(lin, ex(12, 5), ex(3), false, {0.0, 2.0});
    const Trajectory sparse = evolve(f, NlsParams::linear(5), 2.0, 1e-2, 50, {});
    strichartz_norm(sparse, ex(12, 5), ex(3), false, {0.0, 2.0});
    FAIL("expected undersampled-interval");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::UndersampledInterval);
  }
  CHECK_THROWS_AS(strichartz_norm(lin, ex(2), ex(3), false, {0.0, 1.0}), Error);

  const Trajectory sol = soliton_run(g, 1.0 / 9.0, 8.0, 2.5e-3, 40);
  REQUIRE(sol.completed());
  const double a = strichartz_norm(sol, ex(12, 5), ex(3), true, {0.0, 4.0}).value;
  const double b = strichartz_norm(sol, ex(12, 5), ex(3), true, {0.0, 8.0}).value;
  CHECK(b / a == doctest::Approx(std::pow(2.0, 5.0 / 12.0)).epsilon(0.05));
}

TEST_CASE("bilinear and smoothing norms") {
  const RadialGrid& g = reference_grid();
  const Trajectory sol = soliton_run(g, 1.0 / 3.0, 1.0, 1e-3, 100);
  const NormReport coarse = bilinear_norm(sol, 2, -2, {0.0, 1.0});
  CHECK(coarse.value > 0.0);
  CHECK(coarse.ratio == coarse.value / coarse.bound);
  const Trajectory fine = soliton_run(build_grid(5, 40.0, 2048), 1.0 / 3.0, 1.0, 1e-3, 100);
  const NormReport refined = bilinear_norm(fine, 2, -2, {0.0, 1.0});
  CHECK(refined.ratio == doctest::Approx(coarse.ratio).epsilon(0.1));

  double prev = kInf;
  for (int m : {0, -1, -2}) {
    const double v = bilinear_norm(sol, 2, m, {0.0, 1.0}).value;
    CHECK(v < prev);
    prev = v;
  }
  CHECK_THROWS_AS(bilinear_norm(sol, -2, 2, {0.0, 1.0}), Error);

  const RadialField hi = lp_project(RadialField::sample(g, [](double r) { return std::exp(-r * r / 4.0); }),
                                    DyadicBand::at(3));
  Trajectory synth;
  synth.params = kFocusing;
  for (int i = 0; i <= 8; ++i) {
    synth.times.push_back(i / 8.0);
    synth.fields.push_back(hi);
  }
  CHECK(bilinear_norm(synth, 3, -3, {0.0, 1.0}).value < 1e-8 * bilinear_norm(synth, 3, 3, {0.0, 1.0}).value);

  const ExponentTable table = default_exponents(5, 2.0);
  const SmoothingProfile sp = smoothing_profile(sol, {0, 1, 2, 3}, {0.0, 1.0}, table);
  REQUIRE(sp.rows.size() == 4);
  CHECK(sp.slope <= -1.0);
  const SmoothingProfile cascade = smoothing_profile(synth, {1}, {0.0, 1.0}, table);
  CHECK(cascade.rows[0].value > 0.0);

  const RadialField f = RadialField::sample(g, [](double r) { return std::exp(-r * r); });
  const Trajectory lin = evolve(f, NlsParams::linear(5), 1.0, 1e-2, 10, {});
  for (const NormReport& r : smoothing_profile(lin, {0, 1, 2}, {0.0, 1.0}, table).rows) CHECK(r.value == 0.0);
  CHECK_THROWS_AS(smoothing_profile(lin, {-1}, {0.0, 1.0}, table), Error);

  const std::string csv = norm_csv(sp.rows);
  CHECK(csv.rfind("norm,interval,value,bound_shape_value,ratio\n", 0) == 0);
}

TEST_CASE("fixed time estimate ratio") {
  const RadialGrid& g = reference_grid();
  const ExponentTable table = default_exponents(5, 2.0);
  CHECK(ffix_ratio(RadialField(g), kFocusing, table) == 0.0);
  const RadialField f = random_smooth_field(g, 7);
  const double r1 = ffix_ratio(f, kFocusing, table);
  const double r2 = ffix_ratio(cplx(2.0) * f, kFocusing, table);
  CHECK(std::abs(r2 - r1) < 1e-8 * r1);

  const double coarse = ffix_family_max(g, kFocusing, table, 100, 1);
  const double fine = ffix_family_max(build_grid(5, 40.0, 2048), kFocusing, table, 100, 1);
  CHECK(coarse > 0.0);
  CHECK(fine == doctest::Approx(coarse).epsilon(0.05));
}
