#include <doctest.h>

#include <cmath>

#include "nlslab/asymptotics.hpp"
#include "nlslab/error.hpp"
#include "nlslab/ground_state.hpp"
#include "nlslab/propagator.hpp"

using namespace nlslab;

namespace {

const RadialGrid& reference_grid() {
  static const RadialGrid g = build_grid(5, 40.0, 1024);
  return g;
}

const ProbeFamily& probes() {
  static const ProbeFamily pf = hermite_probes(reference_grid());
  return pf;
}

RadialField gaussian(double amp) {
  return RadialField::sample(reference_grid(), [amp](double r) { return amp * std::exp(-r * r); });
}

double hn(const RadialField& f) { return h_norm(hankel_forward(f)); }

// eps = 1e-2 focusing Gaussian, short enough that no reflected wave has come back.
const Trajectory& small_data() {
  static const Trajectory tr = [] {
    EvolveOptions o;
    o.track_duhamel = true;
    return evolve(gaussian(1e-2), NlsParams::make(5, 2.0, -1), 8.0, 5e-3, 20, o);
  }();
  return tr;
}

const GroundState& soliton_profile() {
  static const GroundState gs = solve_ground_state(NlsParams::make(5, 2.0, -1), 1.0 / 3.0, reference_grid(), 1e-10);
  return gs;
}

DecompositionSeries fixed_series(const RadialField& v) {
  DecompositionSeries s;
  s.times = {0.0};
  s.v_fields = {v};
  s.v_h_norms = {hn(v)};
  return s;
}

}  // namespace

TEST_CASE("probe family is H-orthonormal") {
  const ProbeFamily& pf = probes();
  REQUIRE(pf.size() == 32);
  double worst = 0.0;
  for (std::size_t a = 0; a < pf.size(); ++a)
    for (std::size_t b = 0; b <= a; ++b)
      worst = std::max(worst, std::abs(inner_h(pf.spectra[a], pf.spectra[b]) - (a == b ? 1.0 : 0.0)));
  CHECK(worst < 1e-12);
  CHECK(pf.description.find("32") != std::string::npos);
  CHECK_THROWS_AS(hermite_probes(reference_grid(), 0), Error);
}

TEST_CASE("linear run reduces to the trivial decomposition") {
  const RadialField f = gaussian(1.0);
  const Trajectory tr = evolve(f, NlsParams::linear(5), 2.0, 1e-2, 10, {});
  const RadiationEstimate est = extract_radiation(tr, probes(), late_window(tr, 0.5));
  CHECK(est.converged);
  CHECK(est.cauchy_defect < 1e-12);
  CHECK(hn(est.u_plus - f) < 1e-10);
  const DecompositionSeries s = weakly_bound(tr, est);
  for (double v : s.v_h_norms) CHECK(v < 1e-10);
  CHECK(s.duhamel_residuals.empty());
}

TEST_CASE("small data scatters") {
  const Trajectory& tr = small_data();
  REQUIRE(tr.completed());
  const RadiationEstimate est = extract_radiation(tr, probes(), late_window(tr, 0.25));
  CHECK(est.converged);
  CHECK(est.cauchy_defect < 1e-4);
  const double shift = hn(est.u_plus - tr.fields.front());
  CHECK(shift > 0.0);
  CHECK(shift < 1e-3);

  const DecompositionSeries s = weakly_bound(tr, est);
  const double e = s.energy;
  CHECK(s.u_plus_h_norm * s.u_plus_h_norm <= e + 1e-6);
  for (double v : s.v_h_norms) CHECK(v <= 2.0 * std::sqrt(e) + 1e-6);
  REQUIRE(s.duhamel_residuals.size() == tr.size());
  for (double r : s.duhamel_residuals) CHECK(r < 1e-4);

  const LocalizationProfile sp = spatial_profile(s, {2.0, 5.0, 10.0, 20.0});
  for (const SpatialRow& row : sp.spatial) CHECK(row.tail < 1e-4);

  const ConcentrationReport cr = mass_concentration_track(tr, {{2.0, 10.0}});
  CHECK_FALSE(cr.any_fired);

  const std::size_t n = tr.size();
  const UniquenessProbe up = uniqueness_probe(tr, probes(), {n - 20, n - 11}, {n - 10, n - 1});
  CHECK(up.holds());
}

TEST_CASE("frequency profile") {
  const GroundState& gs = soliton_profile();
  const std::vector<int> bands{-4, -3, -2, -1, 0, 1, 2, 3, 4};
  const LocalizationProfile q = frequency_profile(fixed_series(gs.profile), bands);
  CHECK(q.high_exponent > 2.0);
  CHECK(q.low_exponent > 0.0);
  // Dyadic norms are monotone in N.
  double prev_low = 0.0, prev_high = kInf;
  for (const DyadicRow& r : q.dyadic) {
    if (r.j <= 0) {
      CHECK(r.low >= prev_low);
      prev_low = r.low;
    }
    if (r.j >= 0) {
      CHECK(r.high <= prev_high);
      prev_high = r.high;
    }
  }

  const RadialField zero(reference_grid());
  const LocalizationProfile z = frequency_profile(fixed_series(zero), bands);
  for (const DyadicRow& r : z.dyadic) {
    if (r.j <= 0) CHECK(r.low == 0.0);
    if (r.j >= 0) CHECK(r.high == 0.0);
  }
  CHECK(std::isnan(z.high_exponent));

  const RadialField band = lp_project(gaussian(1.0), DyadicBand::at(0));
  const LocalizationProfile b = frequency_profile(fixed_series(band), {-4, 4});
  const double scale = hn(band);
  for (const DyadicRow& r : b.dyadic) {
    if (r.j == -4) CHECK(r.low < 1e-6 * scale);
    if (r.j == 4) CHECK(r.high < 1e-6 * scale);
  }
}

TEST_CASE("spatial profile and mass concentration of the soliton") {
  const GroundState& gs = soliton_profile();
  const LocalizationProfile sp = spatial_profile(fixed_series(gs.profile), {20.0, 2.0, 10.0});
  REQUIRE(sp.spatial.size() == 3);
  CHECK(sp.spatial[0].radius == 2.0);
  for (std::size_t i = 1; i < sp.spatial.size(); ++i) CHECK(sp.spatial[i].tail <= sp.spatial[i - 1].tail);
  CHECK(sp.spatial.back().tail < 1e-6);
  CHECK_THROWS_AS(spatial_profile(fixed_series(gs.profile), {40.0}), Error);

  Trajectory tr;
  tr.times = {0.0, 1.0};
  tr.fields = {gs.profile, std::exp(cplx(0.0, 1.0 / 3.0)) * gs.profile};
  const ConcentrationReport cr = mass_concentration_track(tr, {{2.0, 10.0}}, 0.1, 1.0);
  CHECK(cr.any_fired);
  CHECK(cr.min_enlarged_fraction > 0.9);
  for (const ConcentrationRow& r : cr.rows) CHECK(r.clears);

  Trajectory empty;
  empty.times = {0.0};
  empty.fields = {RadialField(reference_grid())};
  CHECK_FALSE(mass_concentration_track(empty, {{2.0, 10.0}}).any_fired);
}

TEST_CASE("petite indicators") {
  const Trajectory zero = evolve(RadialField(reference_grid()), NlsParams::linear(5), 1.0, 1e-2, 10, {});
  const RadiationEstimate ez = extract_radiation(zero, probes(), late_window(zero, 0.25));
  const PetiteReport pz = petite_report(zero, ez, {2.0, 5.0, 10.0, 20.0});
  CHECK(pz.radiation == 0.0);
  CHECK(pz.tail_score == 0.0);
  CHECK(pz.gradient_tail_score == 0.0);
  CHECK(pz.precompactness == 0.0);
  CHECK(pz.radius == 20.0);

  const Trajectory& tr = small_data();
  const RadiationEstimate est = extract_radiation(tr, probes(), late_window(tr, 0.25));
  const PetiteReport ps = petite_report(tr, est, {2.0, 5.0, 10.0, 20.0, 30.0});
  CHECK(ps.radius == 20.0);
  CHECK(ps.radiation == doctest::Approx(1.0).epsilon(1e-2));
  CHECK(ps.tail_score > 1e-3);
  CHECK(petite_csv(ps).find("tail_score") != std::string::npos);
  CHECK_THROWS_AS(petite_report(tr, est, {30.0}), Error);
}

TEST_CASE("Riemann-Lebesgue decay") {
  const RadialGrid wide = build_grid(5, 320.0, 1536);
  const RadialField f = RadialField::sample(wide, [](double r) { return std::exp(-r * r); });
  std::vector<double> times;
  for (int i = 0; i <= 15; ++i) times.push_back(2.0 * i);
  const DecayTable tab = riemann_lebesgue_check(f, 10.0 / 3.0, times);
  CHECK_FALSE(tab.domain_escape);
  CHECK(tab.monotone);
  CHECK(tab.values.back() < 0.05 * tab.values.front());
  // Closed form: |e^{it Delta} e^{-r^2}| = (1+16t^2)^{-5/4} exp(-r^2/(1+16t^2)).
  const double t = 30.0, s = 1.0 + 16.0 * t * t, q = 10.0 / 3.0;
  const double exact = std::pow(s, -1.25) * std::pow(std::pow(M_PI * s / q, 2.5), 1.0 / q);
  CHECK(tab.values.back() == doctest::Approx(exact).epsilon(1e-6));

  CHECK_THROWS_AS(riemann_lebesgue_check(f, 2.0, times), Error);
  CHECK_THROWS_AS(riemann_lebesgue_check(f, 4.0, times), Error);
  const DecayTable z = riemann_lebesgue_check(RadialField(wide), 3.0, {0.0, 1.0});
  for (double v : z.values) CHECK(v == 0.0);
}

TEST_CASE("profile csv is long format") {
  const LocalizationProfile p = spatial_profile(fixed_series(gaussian(1.0)), {1.0});
  const std::string csv = profile_csv(p);
  CHECK(csv.rfind("t,key,value\n", 0) == 0);
  CHECK(csv.find("0,tail_R=1,") != std::string::npos);
}
