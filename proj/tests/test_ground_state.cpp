#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <string>

#include "nlslab/error.hpp"
#include "nlslab/field_io.hpp"
#include "nlslab/ground_state.hpp"
#include "nlslab/spectral.hpp"

using namespace nlslab;

namespace {

const RadialGrid& reference_grid() {
  static const RadialGrid g = build_grid(5, 40.0, 1024);
  return g;
}

double hdiff(const RadialField& a, const RadialField& b) { return h_norm(hankel_forward(a - b)); }

}  // namespace

TEST_CASE("ground state at omega = 1") {
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const GroundState gs = solve_ground_state(p, 1.0, reference_grid(), 1e-9);
  CHECK(gs.residual <= 1e-9);
  CHECK(gs.positive);
  CHECK(gs.monotone);
  CHECK(gs.iterations > 0);
  CHECK(gs.seed == "exp(-r^2)");
  CHECK(gs.pairing_q < 1e-6);
  CHECK(gs.pairing_rdr < 1e-6);
  for (const cplx& z : gs.profile.values) CHECK(z.imag() == 0.0);
  // Independent recomputation from the nodal profile carries one extra round trip.
  CHECK(ground_state_residual(gs.profile, p, 1.0) < 1e-6);
  CHECK(ground_state_residual(gs.profile, p, 1.1) > 1.0);
}

TEST_CASE("ground state preconditions and degenerate seeds") {
  const RadialGrid& g = reference_grid();
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  GroundStateOptions zero;
  zero.initial = RadialField(g);
  try {
    solve_ground_state(p, 1.0, g, 1e-9, zero);
    FAIL("expected collapsed-to-zero");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::CollapsedToZero);
  }
  CHECK_THROWS_AS(solve_ground_state(NlsParams::make(5, 2.0, 1), 1.0, g, 1e-9), Error);
  CHECK_THROWS_AS(solve_ground_state(p, 0.0, g, 1e-9), Error);
  CHECK_THROWS_AS(solve_ground_state(NlsParams::make(5, 3.0, -1), 1.0, g, 1e-9), Error);
  GroundStateOptions capped;
  capped.max_iterations = 3;
  try {
    solve_ground_state(p, 1.0, g, 1e-9, capped);
    FAIL("expected not-converged");
  } catch (const Error& e) {
    CHECK(e.kind() == ErrorKind::NotConverged);
  }
}

TEST_CASE("scaling covariance of the ground state family") {
  const RadialGrid& g = reference_grid();
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const GroundState one = solve_ground_state(p, 1.0, g, 1e-10);
  for (double omega : {4.0, 1.0 / 3.0}) {
    CAPTURE(omega);
    const GroundState gs = solve_ground_state(p, omega, g, 1e-9);
    const RadialField scaled = rescale_ground_state(one.profile, p, omega);
    const double rel = hdiff(gs.profile, scaled) / h_norm(hankel_forward(gs.profile));
    CHECK(rel < 1e-6);
    const double q0 = evaluate(hankel_forward(gs.profile), {0.0})[0].real();
    const double q1 = evaluate(hankel_forward(one.profile), {0.0})[0].real();
    CHECK(q0 == doctest::Approx(omega * q1).epsilon(1e-6));
  }
}

TEST_CASE("soliton orbit") {
  const RadialGrid& g = reference_grid();
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const GroundState gs = solve_ground_state(p, 1.0 / 3.0, g, 1e-10);

  CHECK(soliton_orbit_check(gs, p, 0.0, 1e-3).max_deviation == 0.0);

  EvolveOptions o;
  o.order = 4;
  const OrbitCheck orbit = soliton_orbit_check(gs, p, 5.0, 1e-3, 250, o);
  CHECK(orbit.trajectory.completed());
  CHECK(orbit.max_deviation < 1e-4);

  const OrbitCheck a = soliton_orbit_check(gs, p, 1.0, 1e-3, 250, o);
  const OrbitCheck b = soliton_orbit_check(gs, p, 1.0, 1e-3, 250, o, 0.7);
  CHECK(std::abs(a.max_deviation - b.max_deviation) < 1e-10);
}

TEST_CASE("ground state persistence") {
  const NlsParams p = NlsParams::make(5, 2.0, -1);
  const RadialGrid g = build_grid(5, 20.0, 256);
  const GroundState gs = solve_ground_state(p, 1.0, g, 1e-9);
  const std::string dir = (std::filesystem::temp_directory_path() / "nlslab_gs_test").string();
  save_ground_state(gs, p, dir);
  const RadialField back = read_field(dir + "/ground_state.bin");
  CHECK(back.grid == g);
  CHECK(back.values == gs.profile.values);
  std::ifstream in(dir + "/ground_state.manifest");
  std::string text((std::istreambuf_iterator<char>(in)), std::istreambuf_iterator<char>());
  CHECK(text.find("omega=1\n") != std::string::npos);
  CHECK(text.find("residual=") != std::string::npos);
  std::filesystem::remove_all(dir);
}
