#include "nlslab/function_spaces.hpp"

#include <cmath>
#include <iomanip>
#include <limits>
#include <numeric>
#include <random>
#include <sstream>

#include "nlslab/error.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

double Exponent::value() const {
  if (is_infinite()) return kInf;
  return boost::rational_cast<double>(Rational(1) / inv);
}

std::string Exponent::str() const {
  if (is_infinite()) return "inf";
  const Rational q = Rational(1) / inv;
  std::ostringstream out;
  out << q.numerator();
  if (q.denominator() != 1) out << '/' << q.denominator();
  return out.str();
}

bool admissible_check(const Exponent& q, const Exponent& r, int dim) {
  const Rational half(1, 2);
  if (q.inv < Rational(0) || q.inv > half || r.inv < Rational(0) || r.inv > half) return false;
  return 2 * q.inv + dim * r.inv == Rational(dim, 2);
}

ExponentTable validate_exponents(ExponentTable t) {
  const Rational pm1 = t.p - 1;
  const Rational half(1, 2);
  const Rational sob(t.dim - 2, 2 * t.dim);  // 1 / (2d/(d-2))
  t.admissible = admissible_check(t.q0, t.r0, t.dim);
  t.admis = t.r0.inv + pm1 * t.big_q0.inv == t.r0.dual().inv;
  t.irq = half + pm1 * t.big_q.inv == t.big_r.inv;
  const auto strictly_inside = [&](const Exponent& e) { return e.inv > sob && e.inv < half; };
  t.ranges = strictly_inside(t.big_q0) && strictly_inside(t.big_q) && t.big_r.inv <= Rational(1) &&
             t.big_r.inv > Rational(t.dim + 4, 2 * t.dim);
  return t;
}

namespace {

// Smallest-denominator fraction in (lo, hi) (closed at hi when hi_closed),
// ties broken towards the midpoint.
bool search_fraction(Rational lo, Rational hi, bool hi_closed, Rational& out) {
  const Rational mid = (lo + hi) / 2;
  for (long long den = 1; den <= 240; ++den) {
    bool found = false;
    Rational best;
    for (long long num = 1; num < den; ++num) {
      if (std::gcd(num, den) != 1) continue;
      const Rational x(num, den);
      if (!(x > lo) || x > hi || (!hi_closed && x == hi)) continue;
      if (!found || abs(x - mid) < abs(best - mid)) best = x, found = true;
    }
    if (found) {
      out = best;
      return true;
    }
  }
  return false;
}

}  // namespace

ExponentTable default_exponents(int dim, Rational p) {
  const Rational lower = 1 + Rational(4, dim);
  if (dim < 5 || !(p > lower) || !(p < 1 + Rational(4, dim - 2)))
    throw Error(ErrorKind::NoSolution, "exponents need d >= 5 and 1 + 4/d < p < 1 + 4/(d-2)");
  ExponentTable t;
  t.dim = dim;
  t.p = p;
  if (dim == 5 && p == Rational(2)) {
    t.q0 = Exponent::of(Rational(12, 5));
    t.r0 = Exponent::of(Rational(3));
    t.big_q0 = Exponent::of(Rational(3));
    t.big_q = Exponent::of(Rational(20, 9));
    t.big_r = Exponent::of(Rational(20, 19));
  } else {
    const Rational pm1 = p - 1;
    const Rational half(1, 2);
    const Rational sob(dim - 2, 2 * dim);
    // 1/r0 = (1 - (p-1)/Q0)/2 and 1/q0 = d (p-1) / (4 Q0) <= 1/2.
    Rational x;
    const Rational xcap = std::min(half, Rational(2, dim) / pm1);
    if (!search_fraction(sob, xcap, xcap < half, x))
      throw Error(ErrorKind::NoSolution, "no Q0 with small denominator");
    // 2/d < (p-1)/Q <= 1/2 keeps 1 <= R < 2d/(d+4).
    Rational y;
    const Rational ylo = std::max(sob, Rational(2, dim) / pm1);
    const Rational yhi = std::min(half, half / pm1);
    if (!search_fraction(ylo, yhi, yhi < half, y)) throw Error(ErrorKind::NoSolution, "no Q with small denominator");
    t.big_q0 = {x};
    t.r0 = {(1 - pm1 * x) / 2};
    t.q0 = {Rational(dim) * pm1 * x / 4};
    t.big_q = {y};
    t.big_r = {half + pm1 * y};
    t.from_search = true;
  }
  t = validate_exponents(t);
  if (!t.valid()) throw Error(ErrorKind::NoSolution, "exponent search produced an invalid table");
  return t;
}

Rational to_rational(double x, long long max_denominator) {
  if (!std::isfinite(x)) throw Error(ErrorKind::InvalidArgument, "exponent must be finite");
  // Continued fraction convergents.
  long long h0 = 0, h1 = 1, k0 = 1, k1 = 0;
  double v = x;
  for (int it = 0; it < 64; ++it) {
    const double a = std::floor(v);
    const long long ai = static_cast<long long>(a);
    const long long h2 = ai * h1 + h0, k2 = ai * k1 + k0;
    if (k2 > max_denominator) break;
    h0 = h1, h1 = h2, k0 = k1, k1 = k2;
    if (std::abs(static_cast<double>(h1) / k1 - x) <= 1e-12 * std::max(1.0, std::abs(x))) return Rational(h1, k1);
    const double frac = v - a;
    if (frac < 1e-15) break;
    v = 1.0 / frac;
  }
  throw Error(ErrorKind::InvalidArgument, "exponent is not a fraction with denominator <= " + std::to_string(max_denominator));
}

ExponentTable default_exponents(int dim, double p) { return default_exponents(dim, to_rational(p)); }

double japanese_bracket(double x) { return std::sqrt(1.0 + x * x); }

namespace {

constexpr double kSlack = 1e-9;

std::vector<std::size_t> samples_in(const Trajectory& traj, const Interval& I) {
  if (!(I.b >= I.a)) throw Error(ErrorKind::InvalidArgument, "interval end before start");
  std::vector<std::size_t> idx;
  for (std::size_t i = 0; i < traj.size(); ++i)
    if (traj.times[i] >= I.a - kSlack && traj.times[i] <= I.b + kSlack) idx.push_back(i);
  const double needed = 8.0 * I.length();
  if (idx.empty() || (idx.size() > 0 && static_cast<double>(idx.size() - 1) < needed - kSlack) ||
      (I.length() > 0 && (traj.times[idx.front()] > I.a + kSlack || traj.times[idx.back()] < I.b - kSlack)))
    throw Error(ErrorKind::UndersampledInterval, "fewer than 8 samples per unit time on the interval");
  return idx;
}

// (int g^q dt)^(1/q) by trapezoid, sup for q = inf.
double time_norm(const std::vector<double>& t, const std::vector<double>& g, const Exponent& q) {
  if (q.is_infinite()) {
    double m = 0.0;
    for (double v : g) m = std::max(m, v);
    return m;
  }
  const double qv = q.value();
  double s = 0.0;
  for (std::size_t i = 1; i < t.size(); ++i)
    s += 0.5 * (t[i] - t[i - 1]) * (std::pow(g[i], qv) + std::pow(g[i - 1], qv));
  return std::pow(s, 1.0 / qv);
}

double space_norm(const RadialField& f, const Exponent& r, bool derivative) {
  const double rv = r.value();
  return norm(f, derivative ? Space::w1q(rv) : Space::lq(rv));
}

double safe_ratio(double a, double b) { return b == 0.0 ? 0.0 : a / b; }

}  // namespace

NormReport strichartz_norm(const Trajectory& traj, const Exponent& q, const Exponent& r, bool derivative,
                           const Interval& interval) {
  if (!admissible_check(q, r, traj.params.dim))
    throw Error(ErrorKind::UnsupportedExponent, "(" + q.str() + ", " + r.str() + ") is not admissible");
  const auto idx = samples_in(traj, interval);
  std::vector<double> t, g;
  for (std::size_t i : idx) {
    t.push_back(traj.times[i]);
    g.push_back(space_norm(traj.fields[i], r, derivative));
  }
  NormReport rep;
  rep.name = std::string(derivative ? "L^" + q.str() + "_t W^{1," + r.str() + "}" : "L^" + q.str() + "_t L^" + r.str());
  rep.interval = interval;
  rep.value = time_norm(t, g, q);
  rep.bound = q.is_infinite() ? 1.0 : std::pow(japanese_bracket(interval.length()), 1.0 / q.value());
  rep.ratio = safe_ratio(rep.value, rep.bound);
  return rep;
}

NormReport bilinear_norm(const Trajectory& traj, int n_band, int m_band, const Interval& interval) {
  if (m_band > n_band) throw Error(ErrorKind::InvalidArgument, "bilinear norm needs M <= N");
  const auto idx = samples_in(traj, interval);
  const auto& w = traj.grid().weights();
  std::vector<double> t, g;
  for (std::size_t i : idx) {
    const SpectralField U = hankel_forward(traj.fields[i]);
    const RadialField un = hankel_inverse(lp_project(U, DyadicBand::at(n_band)));
    const RadialField um = hankel_inverse(lp_project(U, DyadicBand::at(m_band)));
    double s = 0.0;
    for (std::size_t k = 0; k < w.size(); ++k) s += w[k] * std::norm(un.values[k]) * std::norm(um.values[k]);
    t.push_back(traj.times[i]);
    g.push_back(std::sqrt(s));
  }
  const double n = std::ldexp(1.0, n_band), m = std::ldexp(1.0, m_band);
  const int d = traj.params.dim;
  NormReport rep;
  rep.name = "bilinear N" + DyadicBand::at(n_band).label() + " M" + DyadicBand::at(m_band).label();
  rep.interval = interval;
  rep.value = time_norm(t, g, Exponent::of(Rational(2)));
  rep.bound = std::sqrt(japanese_bracket(interval.length())) * std::pow(m, 0.5 * (d - 2)) /
              (japanese_bracket(n) * japanese_bracket(m));
  rep.ratio = safe_ratio(rep.value, rep.bound);
  return rep;
}

SmoothingProfile smoothing_profile(const Trajectory& traj, const std::vector<int>& bands, const Interval& interval,
                                   const ExponentTable& table) {
  for (int j : bands)
    if (j < 0) throw Error(ErrorKind::InvalidArgument, "smoothing profile needs bands N >= 1");
  const auto idx = samples_in(traj, interval);
  const Exponent qd = table.q0.dual(), rd = table.r0.dual();
  std::vector<double> t;
  std::vector<SpectralField> nl;
  for (std::size_t i : idx) {
    t.push_back(traj.times[i]);
    nl.push_back(hankel_forward(nonlinearity(traj.fields[i], traj.params)));
  }
  SmoothingProfile prof;
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  int used = 0;
  for (int j : bands) {
    std::vector<double> g;
    for (const SpectralField& F : nl) g.push_back(norm(hankel_inverse(lp_project(F, DyadicBand::at(j))), Space::lq(rd.value())));
    NormReport rep;
    rep.name = "P_" + DyadicBand::at(j).label() + " F(u) in L^" + qd.str() + "_t L^" + rd.str();
    rep.interval = interval;
    rep.value = time_norm(t, g, qd);
    rep.bound = 1.0 / japanese_bracket(std::ldexp(1.0, j));
    rep.ratio = safe_ratio(rep.value, rep.bound);
    prof.rows.push_back(rep);
    if (rep.value > 0.0) {
      const double lx = j * std::log(2.0), ly = std::log(rep.value);
      sx += lx, sy += ly, sxx += lx * lx, sxy += lx * ly, ++used;
    }
  }
  const double den = used * sxx - sx * sx;
  prof.slope = used >= 2 && den > 0 ? (used * sxy - sx * sy) / den : 0.0;
  return prof;
}

double ffix_ratio(const RadialField& f, const NlsParams& params, const ExponentTable& table) {
  const double h = h_norm(hankel_forward(f));
  if (h == 0.0) return 0.0;
  const RadialField F = nonlinearity(f, params);
  return norm(F, Space::w1q(table.big_r.value())) / std::pow(h, params.p);
}

RadialField random_smooth_field(const RadialGrid& grid, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  std::uniform_real_distribution<double> width(0.5, 3.0);
  cplx amp[4];
  double s[4];
  for (int k = 0; k < 4; ++k) {
    const double re = normal(rng);
    const double im = normal(rng);
    amp[k] = cplx(re, im);
    s[k] = width(rng);
  }
  return RadialField::sample(grid, [&](double r) {
    cplx v = 0.0;
    for (int k = 0; k < 4; ++k) v += amp[k] * std::exp(-(r / s[k]) * (r / s[k]));
    return v;
  });
}

double ffix_family_max(const RadialGrid& grid, const NlsParams& params, const ExponentTable& table,
                       std::size_t draws, std::uint64_t seed) {
  double m = 0.0;
  for (std::size_t i = 0; i < draws; ++i) m = std::max(m, ffix_ratio(random_smooth_field(grid, seed + i), params, table));
  return m;
}

std::string norm_csv(const std::vector<NormReport>& reports) {
  std::ostringstream out;
  out << std::setprecision(17) << "norm,interval,value,bound_shape_value,ratio\n";
  for (const NormReport& r : reports)
    out << '"' << r.name << "\",\"[" << r.interval.a << "," << r.interval.b << "]\"," << r.value << ',' << r.bound
        << ',' << r.ratio << '\n';
  return out.str();
}

}  // namespace nlslab
