#include "nlslab/asymptotics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <sstream>

#include "nlslab/error.hpp"
#include "nlslab/propagator.hpp"

namespace nlslab {

namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

double safe_ratio(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

double mass_of(const RadialField& f) {
  const auto& w = f.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::norm(f.values[i]);
  return s;
}

// Slope of log y against log x over the positive entries.
double log_slope(const std::vector<double>& x, const std::vector<double>& y) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    if (!(y[i] > 0.0)) continue;
    const double lx = std::log(x[i]), ly = std::log(y[i]);
    sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly;
    ++n;
  }
  const double den = n * sxx - sx * sx;
  if (n < 2 || den <= 0.0) return kNaN;
  return (n * sxy - sx * sy) / den;
}

}  // namespace

ProbeFamily hermite_probes(const RadialGrid& grid, std::size_t count, double width) {
  if (count == 0) throw Error(ErrorKind::InvalidArgument, "probe count must be positive");
  if (!(width > 0.0)) throw Error(ErrorKind::InvalidArgument, "probe width must be positive");
  const double alpha = grid.nu();
  const auto& r = grid.nodes();
  ProbeFamily fam;
  fam.width = width;
  std::vector<std::vector<double>> lag(count, std::vector<double>(r.size()));
  for (std::size_t i = 0; i < r.size(); ++i) {
    const double x = r[i] * r[i] / (width * width);
    double l0 = 1.0, l1 = 1.0 + alpha - x;
    for (std::size_t k = 0; k < count; ++k) {
      double v;
      if (k == 0) v = l0;
      else if (k == 1) v = l1;
      else {
        const double l2 = ((2.0 * (k - 1) + 1.0 + alpha - x) * l1 - (k - 1 + alpha) * l0) / double(k);
        l0 = l1;
        l1 = l2;
        v = l2;
      }
      lag[k][i] = v * std::exp(-0.5 * x);
    }
  }
  for (std::size_t k = 0; k < count; ++k) {
    RadialField f(grid);
    for (std::size_t i = 0; i < r.size(); ++i) f.values[i] = lag[k][i];
    SpectralField F = hankel_forward(f);
    for (int pass = 0; pass < 2; ++pass)
      for (const SpectralField& e : fam.spectra) F -= inner_h(F, e) * e;
    const double nrm = h_norm(F);
    if (!(nrm > 1e-12)) throw Error(ErrorKind::InsufficientResolution, "probe family is degenerate on this grid");
    F *= 1.0 / nrm;
    fam.spectra.push_back(std::move(F));
  }
  std::ostringstream d;
  d << count << " Laguerre-Gaussian probes L_k^(" << alpha << ")(r^2/" << width * width << ") exp(-r^2/"
    << 2 * width * width << "), H-orthonormal";
  fam.description = d.str();
  return fam;
}

Window late_window(const Trajectory& traj, double fraction) {
  if (traj.size() < 2) throw Error(ErrorKind::InvalidArgument, "late window needs at least two samples");
  if (!(fraction > 0.0 && fraction <= 1.0)) throw Error(ErrorKind::InvalidArgument, "late fraction must be in (0,1]");
  const std::size_t n = traj.size();
  std::size_t count = static_cast<std::size_t>(std::ceil(fraction * n));
  count = std::clamp<std::size_t>(count, 2, n);
  return {n - count, n - 1};
}

namespace {

SpectralField back_propagate(const Trajectory& traj, std::size_t i) {
  return free_evolve(hankel_forward(traj.fields[i]), -traj.times[i]);
}

}  // namespace

RadiationEstimate extract_radiation(const Trajectory& traj, const ProbeFamily& probes, const Window& window,
                                    double tolerance) {
  if (window.last >= traj.size() || window.first > window.last)
    throw Error(ErrorKind::InvalidArgument, "radiation window outside the trajectory");
  if (probes.size() == 0) throw Error(ErrorKind::InvalidArgument, "empty probe family");
  require_same_grid(traj.grid(), probes.spectra.front().grid, "extract_radiation");
  RadiationEstimate est;
  est.window = window;
  est.tolerance = tolerance;
  std::vector<SpectralField> back;
  for (std::size_t i = window.first; i <= window.last; ++i) {
    back.push_back(back_propagate(traj, i));
    est.times.push_back(traj.times[i]);
    std::vector<cplx> row;
    for (const SpectralField& e : probes.spectra) row.push_back(inner_h(back.back(), e));
    est.pairings.push_back(std::move(row));
  }
  const std::size_t n = est.pairings.size(), k = probes.size();
  const std::size_t quarter = std::max<std::size_t>(1, n / 4);
  const std::size_t half = std::max<std::size_t>(2, n / 2);
  est.extrapolated.assign(k, 0.0);
  for (std::size_t s = n - quarter; s < n; ++s)
    for (std::size_t j = 0; j < k; ++j) est.extrapolated[j] += est.pairings[s][j] / double(quarter);
  for (std::size_t a = n - std::min(half, n); a < n; ++a)
    for (std::size_t b = a + 1; b < n; ++b)
      for (std::size_t j = 0; j < k; ++j)
        est.cauchy_defect = std::max(est.cauchy_defect, std::abs(est.pairings[a][j] - est.pairings[b][j]));
  est.converged = est.cauchy_defect <= tolerance;
  if (!est.converged) warn("radiation pairings not Cauchy: defect " + std::to_string(est.cauchy_defect));

  SpectralField up(traj.grid());
  for (std::size_t j = 0; j < k; ++j) up += est.extrapolated[j] * probes.spectra[j];
  est.u_plus = hankel_inverse(up);
  for (const SpectralField& b : back) est.backprop_distance.push_back(h_norm(b - up));
  return est;
}

DecompositionSeries weakly_bound(const Trajectory& traj, const RadiationEstimate& est) {
  require_same_grid(traj.grid(), est.u_plus.grid, "weakly_bound");
  DecompositionSeries series;
  series.energy = traj.energy();
  const SpectralField up = hankel_forward(est.u_plus);
  series.u_plus_h_norm = h_norm(up);
  const bool tracked = traj.duhamel.size() == traj.size();
  for (std::size_t i = 0; i < traj.size(); ++i) {
    const SpectralField V = hankel_forward(traj.fields[i]) - free_evolve(up, traj.times[i]);
    series.times.push_back(traj.times[i]);
    series.v_h_norms.push_back(h_norm(V));
    series.v_fields.push_back(hankel_inverse(V));
    // v(t) - e^{it Delta}(u(0) - u_+) + i e^{it Delta} D(t): u_+ cancels.
    if (tracked) series.duhamel_residuals.push_back(duhamel_defect(traj, 0, i));
  }
  return series;
}

namespace {

std::size_t late_start(const DecompositionSeries& series, double fraction) {
  const std::size_t n = series.times.size();
  if (n == 0) return 0;
  std::size_t count = static_cast<std::size_t>(std::ceil(fraction * n));
  count = std::clamp<std::size_t>(count, 1, n);
  return n - count;
}

}  // namespace

LocalizationProfile frequency_profile(const DecompositionSeries& series, const std::vector<int>& bands,
                                      const LocalizationKnobs& knobs) {
  LocalizationProfile prof;
  prof.knobs = knobs;
  std::vector<double> lx, ly, hx, hy;
  for (std::size_t i = late_start(series, knobs.late_fraction); i < series.times.size(); ++i) {
    const SpectralField V = hankel_forward(series.v_fields[i]);
    for (int j : bands) {
      DyadicRow row;
      row.t = series.times[i];
      row.j = j;
      row.n = std::ldexp(1.0, j);
      row.low = j <= 0 ? h_norm(lp_project(V, DyadicBand::below(j))) : kNaN;
      row.high = j >= 0 ? h_norm(lp_project(V, DyadicBand::at_least(j))) : kNaN;
      if (j < 0) lx.push_back(row.n), ly.push_back(row.low);
      if (j > 0) hx.push_back(row.n), hy.push_back(row.high);
      prof.dyadic.push_back(row);
    }
  }
  prof.low_exponent = log_slope(lx, ly);
  const double hs = log_slope(hx, hy);
  prof.high_exponent = std::isnan(hs) ? kNaN : -hs;
  return prof;
}

LocalizationProfile spatial_profile(const DecompositionSeries& series, const std::vector<double>& radii,
                                    const LocalizationKnobs& knobs) {
  LocalizationProfile prof;
  prof.knobs = knobs;
  prof.low_exponent = prof.high_exponent = kNaN;
  if (series.v_fields.empty()) return prof;
  const double rmax = series.v_fields.front().grid.rmax();
  for (double r : radii)
    if (!(r >= 0.0) || r >= rmax) throw Error(ErrorKind::RadiusOutOfRange, "spatial profile radius " + std::to_string(r) + " not below rmax");
  std::vector<double> sorted = radii;
  std::sort(sorted.begin(), sorted.end());
  for (std::size_t i = late_start(series, knobs.late_fraction); i < series.times.size(); ++i) {
    const RadialField& v = series.v_fields[i];
    for (double r : sorted) {
      SpatialRow row;
      row.t = series.times[i];
      row.radius = r;
      row.tail = tail(v, r, false);
      row.gradient_tail = tail(v, r, true);
      prof.spatial.push_back(row);
    }
  }
  return prof;
}

ConcentrationReport mass_concentration_track(const Trajectory& traj,
                                             const std::vector<std::pair<double, double>>& radii_pairs,
                                             double threshold_fraction, double late_fraction) {
  ConcentrationReport rep;
  if (traj.size() == 0) return rep;
  const double m0 = mass_of(traj.fields.front());
  rep.mu1 = threshold_fraction * std::sqrt(m0);
  const double rmax = traj.grid().rmax();
  for (const auto& [r, r2] : radii_pairs)
    if (!(r >= 0.0 && r <= r2 && r2 < rmax))
      throw Error(ErrorKind::RadiusOutOfRange, "concentration radii must satisfy 0 <= R <= R' < rmax");
  std::size_t count = static_cast<std::size_t>(std::ceil(late_fraction * traj.size()));
  count = std::clamp<std::size_t>(count, 1, traj.size());
  for (std::size_t i = traj.size() - count; i < traj.size(); ++i) {
    const RadialField& u = traj.fields[i];
    const double total = tail(u, 0.0, false);
    for (const auto& [r, r2] : radii_pairs) {
      ConcentrationRow row;
      row.t = traj.times[i];
      row.radius = r;
      row.enlarged_radius = r2;
      row.total_mass = total;
      row.ball_mass = total - tail(u, r, false);
      row.enlarged_mass = total - tail(u, r2, false);
      row.fires = total > 0.0 && row.ball_mass >= rep.mu1 * rep.mu1;
      row.clears = row.enlarged_mass >= 0.5 * total && total > 0.0;
      if (row.fires) {
        rep.any_fired = true;
        rep.min_enlarged_fraction = std::min(rep.min_enlarged_fraction, row.enlarged_mass / total);
      }
      rep.rows.push_back(row);
    }
  }
  if (!rep.any_fired) rep.min_enlarged_fraction = kNaN;
  return rep;
}

PetiteReport petite_report(const Trajectory& traj, const RadiationEstimate& est, const std::vector<double>& radii,
                           const LocalizationKnobs& knobs) {
  PetiteReport rep;
  const RadialGrid& g = traj.grid();
  double rstar = -1.0;
  for (double r : radii)
    if (r > 0.0 && r <= 0.5 * g.rmax()) rstar = std::max(rstar, r);
  if (rstar < 0.0) throw Error(ErrorKind::RadiusOutOfRange, "petite report needs a radius in (0, rmax/2]");
  rep.radius = rstar;
  rep.window = est.window;
  rep.window_start = traj.times[est.window.first];
  rep.window_end = traj.times[est.window.last];

  const SpectralField U0 = hankel_forward(traj.fields.front());
  rep.radiation_raw = h_norm(hankel_forward(est.u_plus));
  rep.radiation = safe_ratio(rep.radiation_raw, h_norm(U0));

  const double inv_mu1 = 1.0 / knobs.mu1;
  const int jcut = static_cast<int>(std::lround(std::log2(inv_mu1)));
  for (std::size_t i = est.window.first; i <= est.window.last; ++i) {
    const RadialField& u = traj.fields[i];
    const SpectralField U = hankel_forward(u);
    const double m = tail(u, 0.0, false);
    const double hn = h_norm(U);
    rep.tail_score = std::max(rep.tail_score, safe_ratio(tail(u, rstar, false), m));
    rep.gradient_tail_score = std::max(rep.gradient_tail_score, safe_ratio(tail(u, rstar, true), hn * hn));
    const double hi = h_norm(lp_project(U, DyadicBand::at_least(jcut)));
    const double far = inv_mu1 < g.rmax() ? tail(u, inv_mu1, false) : 0.0;
    rep.precompactness = std::max(rep.precompactness, safe_ratio(hi, hn) + safe_ratio(far, m));
  }
  return rep;
}

DecayTable riemann_lebesgue_check(const RadialField& f, double q, const std::vector<double>& times) {
  const int d = f.grid.dim();
  if (!(q > 2.0 && q <= 2.0 * d / (d - 2.0) + 1e-12))
    throw Error(ErrorKind::UnsupportedExponent, "Riemann-Lebesgue check needs 2 < q <= 2d/(d-2)");
  DecayTable tab;
  tab.q = q;
  const SpectralField F = hankel_forward(f);
  bool trusted = true;
  double prev = kInf;
  for (double t : times) {
    const RadialField u = hankel_inverse(free_evolve(F, t));
    trusted = trusted && !escaped(u);
    const double v = norm(u, Space::lq(q));
    tab.times.push_back(t);
    tab.values.push_back(v);
    tab.trusted.push_back(trusted);
    if (!trusted) tab.domain_escape = true;
    if (trusted && v > 0.0 && !(v < prev)) tab.monotone = false;
    prev = v;
  }
  return tab;
}

UniquenessProbe uniqueness_probe(const Trajectory& traj, const ProbeFamily& probes, const Window& a,
                                 const Window& b) {
  if (!(a.last < b.first || b.last < a.first)) throw Error(ErrorKind::InvalidArgument, "uniqueness windows overlap");
  const RadiationEstimate ea = extract_radiation(traj, probes, a, kInf);
  const RadiationEstimate eb = extract_radiation(traj, probes, b, kInf);
  UniquenessProbe out;
  out.difference = h_norm(hankel_forward(ea.u_plus - eb.u_plus));
  out.bound = 2.0 * (ea.cauchy_defect + eb.cauchy_defect);
  return out;
}

namespace {

void put(std::ostringstream& out, double t, const std::string& key, double value) {
  out << t << ',' << key << ',' << value << '\n';
}

}  // namespace

std::string profile_csv(const LocalizationProfile& profile) {
  std::ostringstream out;
  out << std::setprecision(17) << "t,key,value\n";
  double last = 0.0;
  for (const DyadicRow& r : profile.dyadic) {
    if (!std::isnan(r.low)) put(out, r.t, "low_j=" + std::to_string(r.j), r.low);
    if (!std::isnan(r.high)) put(out, r.t, "high_j=" + std::to_string(r.j), r.high);
    last = r.t;
  }
  for (const SpatialRow& r : profile.spatial) {
    std::ostringstream key;
    key << std::setprecision(17) << r.radius;
    put(out, r.t, "tail_R=" + key.str(), r.tail);
    put(out, r.t, "gradient_tail_R=" + key.str(), r.gradient_tail);
    last = r.t;
  }
  if (!std::isnan(profile.low_exponent)) put(out, last, "fit_low_exponent", profile.low_exponent);
  if (!std::isnan(profile.high_exponent)) put(out, last, "fit_high_exponent", profile.high_exponent);
  return out.str();
}

std::string petite_csv(const PetiteReport& report) {
  std::ostringstream out;
  out << std::setprecision(17) << "t,key,value\n";
  const double t = report.window_end;
  put(out, t, "radiation", report.radiation);
  put(out, t, "radiation_raw", report.radiation_raw);
  put(out, t, "tail_score", report.tail_score);
  put(out, t, "gradient_tail_score", report.gradient_tail_score);
  put(out, t, "precompactness", report.precompactness);
  put(out, t, "radius", report.radius);
  put(out, t, "window_start", report.window_start);
  return out.str();
}

}  // namespace nlslab
