#include <doctest.h>

#include <cmath>
#include <numbers>

#include "nlslab/dynamics.hpp"
#include "nlslab/error.hpp"
#include "nlslab/propagator.hpp"
#include "nlslab/spectral.hpp"

using namespace nlslab;
using std::numbers::pi;

namespace {

RadialField gaussian(const RadialGrid& g, double amp, double a = 1.0) {
  return RadialField::sample(g, [=](double r) { return amp * std::exp(-a * r * r); });
}

double rel_l2(const RadialField& a, const RadialField& b) {
  return norm(a - b, Space::l2()) / norm(b, Space::l2());
}

double hdiff(const RadialField& a, const RadialField& b) { return h_norm(hankel_forward(a - b)); }

}  // namespace

TEST_CASE("equation parameters and conformance flags") {
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  CHECK(p.mass_supercritical());
  CHECK(p.energy_subcritical());
  CHECK(p.high_dimension());
  CHECK(p.conformant());
  CHECK(p.theta == 1.0);
  CHECK(p.mu() == -1.0);
  CHECK_FALSE(NlsParams::make(3, 3.0, 1).conformant());
  CHECK_FALSE(NlsParams::make(5, 1.5, -1).mass_supercritical());
  CHECK_FALSE(NlsParams::make(5, 3.0, -1).energy_subcritical());
  CHECK(NlsParams::make(5, 1.5, -1).theta == doctest::Approx(0.5));
  CHECK(NlsParams::linear(5).mu() == 0.0);
  CHECK_THROWS_AS(NlsParams::make(2, 2.0, -1), Error);
  CHECK_THROWS_AS(NlsParams::make(5, 1.0, -1), Error);
  CHECK_THROWS_AS(NlsParams::make(5, 2.0, 0), Error);
}

TEST_CASE("power nonlinearity obeys the three pointwise bounds") {
  for (double p : {1.5, 2.0, 7.0 / 3.0, 3.0}) {
    const PowerBoundCheck c = sample_power_bounds(NlsParams::make(5, p, -1), 20000, 17);
    CAPTURE(p);
    CHECK(c.holds());
    // |F| = |z|^p and |F'| = p |z|^(p-1) are attained exactly.
    CHECK(c.value == doctest::Approx(1.0 / (2.0 * p)));
    CHECK(c.derivative == doctest::Approx(0.5));
  }
}

TEST_CASE("nonlinearity is pointwise mu |u|^(p-1) u") {
  const RadialGrid g = build_grid(5, 40.0, 256);
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialField zero(g);
  CHECK(norm(nonlinearity(zero, p), Space::l2()) == 0.0);
  const cplx c(0.3, -1.2);
  const RadialField f = RadialField::sample(g, [&](double) { return c; });
  const RadialField F = nonlinearity(f, p);
  for (const cplx& z : F.values) CHECK(std::abs(z - (-std::abs(c) * c)) < 1e-15);
  CHECK(norm(nonlinearity(f, NlsParams::linear(5)), Space::l2()) == 0.0);
}

TEST_CASE("conserved quantities of a Gaussian") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const NlsParams defocusing = NlsParams::make(5, 2.0, 1);
  const Conserved zero = conserved(RadialField(g), defocusing);
  CHECK(zero.mass == 0.0);
  CHECK(zero.hamiltonian == 0.0);

  const RadialField u = gaussian(g, 1.0);
  const Conserved c = conserved(u, defocusing);
  CHECK(c.mass == doctest::Approx(std::pow(pi / 2.0, 2.5)).epsilon(1e-10));
  CHECK(c.mass == doctest::Approx(3.0925).epsilon(1e-4));
  // |grad e^{-r^2}|^2 = 4 r^2 e^{-2r^2}; int over R^5 = 4 c_5 Gamma(7/2) / (2 * 2^(7/2)).
  const double grad = 4.0 * (8.0 * pi * pi / 3.0) * std::tgamma(3.5) / (2.0 * std::pow(2.0, 3.5));
  const double cubic = std::pow(pi / 3.0, 2.5);
  const double kinetic = conserved(u, NlsParams::linear(5)).hamiltonian;
  CHECK(std::abs(kinetic - 0.5 * grad) < 1e-6 * 0.5 * grad);
  CHECK(std::abs((c.hamiltonian - kinetic) - cubic / 3.0) < 1e-6 * cubic / 3.0);
}

TEST_CASE("Strang step: linear limit, mass, local order") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  SolverState s;
  s.field = gaussian(g, 2.0);
  s.dt = 1e-3;

  const SolverState lin = step(s, NlsParams::linear(5));
  const RadialField free = free_evolve(s.field, s.dt);
  double diff = 0.0;
  for (std::size_t i = 0; i < g.n(); ++i) diff = std::max(diff, std::abs(lin.field.values[i] - free.values[i]));
  CHECK(diff == 0.0);
  CHECK(lin.t == doctest::Approx(1e-3));

  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const double m0 = conserved(s.field, p).mass;
  const SolverState next = step(s, p);
  CHECK(std::abs(conserved(next.field, p).mass - m0) < 1e-12 * m0);

  // One step against two half steps: the gap shrinks like dt^3.
  auto local_error = [&](double dt) {
    SolverState a = s, b = s;
    a.dt = dt;
    b.dt = dt / 2;
    a = step(a, p);
    b = step(step(b, p), p);
    return hdiff(a.field, b.field);
  };
  const double ratio = local_error(2e-2) / local_error(1e-2);
  CHECK(ratio == doctest::Approx(8.0).epsilon(0.15));

  SolverState bad = s;
  bad.dt = 0.0;
  CHECK_THROWS_AS(step(bad, p), Error);
}

TEST_CASE("evolve: sampling, caps, termination") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialField u0 = gaussian(g, 2.0);

  const Trajectory tr = evolve(u0, p, 0.105, 1e-3, 20);
  CHECK(tr.completed());
  REQUIRE(tr.size() == 7);
  CHECK(tr.times.front() == 0.0);
  CHECK(tr.times.back() == 0.105);
  for (std::size_t i = 1; i < tr.size(); ++i) CHECK(tr.times[i] > tr.times[i - 1]);
  CHECK(tr.times[1] == doctest::Approx(0.02));
  CHECK(tr.energy() > 0.0);
  CHECK(tr.energy() < kInf);
  for (const auto& d : tr.diagnostics) CHECK(std::abs(d.mass / tr.baselines.mass - 1.0) < 1e-11);

  const Trajectory zero = evolve(u0, p, 0.0, 1e-3, 5);
  CHECK(zero.size() == 1);

  CHECK(stability_cap(u0, p) == doctest::Approx(1e-2 / 3.0));
  CHECK(stability_cap(u0, NlsParams::linear(5)) == kInf);
  try {
    evolve(u0, p, 1.0, 1e-2, 10);
    FAIL("expected step-too-large");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::StepTooLarge);
  }
  CHECK_NOTHROW(evolve(u0, NlsParams::linear(5), 0.1, 0.05, 1));
  CHECK_THROWS_AS(evolve(u0, p, 1.0, 1e-3, 0), Error);
  EvolveOptions bad;
  bad.order = 3;
  CHECK_THROWS_AS(evolve(u0, p, 0.01, 1e-3, 1, bad), Error);
}

TEST_CASE("small focusing data stays small") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialField u0 = gaussian(g, 1e-2);
  const Trajectory tr = evolve(u0, p, 50.0, 9e-3, 200);
  CHECK(tr.completed());
  for (const auto& d : tr.diagnostics) CHECK(d.h_norm <= 2.0 * tr.baselines.h_norm);
}

TEST_CASE("negative Hamiltonian data blows up") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialField u0 = gaussian(g, 30.0);
  REQUIRE(conserved(u0, p).hamiltonian < 0.0);
  EvolveOptions o;
  o.monitor_every = 1;
  const Trajectory tr = evolve(u0, p, 10.0, stability_cap(u0, p), 1000, o);
  CHECK(tr.termination == Termination::Blowup);
  CHECK(tr.t_stop < 10.0);
  CHECK(tr.times.back() == tr.t_stop);
  REQUIRE(tr.monitor.size() > 100);
  for (std::size_t i = tr.monitor.size() - 100; i < tr.monitor.size(); ++i)
    CHECK(tr.monitor[i].h_norm > tr.monitor[i - 1].h_norm);
  CHECK(termination_name(tr.termination) == "blowup");
}

TEST_CASE("time-step convergence: second order for Strang, fourth for the composition") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialField u0 = gaussian(g, 2.0);
  auto final_state = [&](double dt, int order) {
    EvolveOptions o;
    o.order = order;
    return evolve(u0, p, 0.4, dt, 100000, o).fields.back();
  };
  const RadialField a = final_state(2e-3, 2), b = final_state(1e-3, 2), c = final_state(5e-4, 2);
  // Richardson reference from the two finest runs.
  const RadialField ref = (4.0 / 3.0) * c - (1.0 / 3.0) * b;
  CHECK(hdiff(a, ref) / hdiff(b, ref) == doctest::Approx(4.0).epsilon(0.1));

  const RadialField a4 = final_state(2e-3, 4), b4 = final_state(1e-3, 4), c4 = final_state(5e-4, 4);
  CHECK(hdiff(a4, b4) / hdiff(b4, c4) == doctest::Approx(16.0).epsilon(0.15));
}

TEST_CASE("Duhamel consistency along a trajectory") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  EvolveOptions o;
  o.track_duhamel = true;
  const Trajectory tr = evolve(gaussian(g, 2.0), p, 1.0, 1e-3, 250, o);
  REQUIRE(tr.duhamel.size() == tr.size());
  for (std::size_t i = 0; i < tr.size(); ++i)
    for (std::size_t j = i + 1; j < tr.size(); ++j) CHECK(duhamel_defect(tr, i, j) < 1e-5);
  CHECK(duhamel_defect(tr, 0, 0) < 1e-12);
  const Trajectory plain = evolve(gaussian(g, 2.0), p, 0.01, 1e-3, 5);
  CHECK_THROWS_AS(duhamel_defect(plain, 0, 1), Error);
}

TEST_CASE("Crank-Nicolson oracle") {
  CHECK(oracle_potential_coefficient(5) == 2.0);
  CHECK(oracle_potential_coefficient(3) == 0.0);
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const RadialField u0 = gaussian(g, 1.0);
  OracleOptions o;
  const double dt = oracle_dt_cap(o.h);

  const Trajectory free = oracle_evolve(u0, NlsParams::linear(5), 1.0, dt, o);
  CHECK(rel_l2(free.fields.back(), free_evolve(u0, 1.0)) < 1e-4);
  CHECK(free.times.back() == 1.0);

  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialField v0 = gaussian(g, 2.0);
  const Trajectory cn = oracle_evolve(v0, p, 0.5, dt, o);
  const Trajectory ss = evolve(v0, p, 0.5, 1e-3, 500);
  CHECK(rel_l2(ss.fields.back(), cn.fields.back()) < 1e-4);

  CHECK_THROWS_AS(oracle_evolve(u0, p, 1.0, 2.0 * dt, o), Error);
  OracleOptions starved = o;
  starved.max_iterations = 1;
  try {
    oracle_evolve(v0, p, 0.01, dt, starved);
    FAIL("expected fixed-point-not-converged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::FixedPointNotConverged);
  }
}

TEST_CASE("flow stability probe") {
  const RadialGrid g = build_grid(5, 40.0, 1024);
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialField u0 = gaussian(g, 1.0);
  const StabilityReport none = flow_stability_probe(u0, RadialField(g), p, 0.2, 1e-3, 50);
  for (double r : none.ratios) CHECK(r == 0.0);
  CHECK_FALSE(none.truncated);

  const RadialField d1 = gaussian(g, 1e-4, 2.0), d2 = gaussian(g, 5e-5, 2.0);
  const StabilityReport a = flow_stability_probe(u0, d1, p, 1.0, 1e-3, 250);
  const StabilityReport b = flow_stability_probe(u0, d2, p, 1.0, 1e-3, 250);
  REQUIRE(a.ratios.size() == 5);
  CHECK(a.ratios.front() == doctest::Approx(1.0));
  for (std::size_t i = 0; i < a.ratios.size(); ++i) {
    CHECK(a.ratios[i] < 10.0);
    CHECK(a.ratios[i] == doctest::Approx(b.ratios[i]).epsilon(0.01));
  }
}
