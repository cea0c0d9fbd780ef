#include "nlslab/spectral.hpp"

#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>

#include "nlslab/error.hpp"
#include "nlslab/kernels.hpp"

namespace nlslab {

namespace {

void apply_kernel(const double* a, std::size_t n, const CVec& x, CVec& y) {
  std::vector<double> xr(n), xi(n), yr(n), yi(n);
  for (std::size_t i = 0; i < n; ++i) {
    xr[i] = x[i].real();
    xi[i] = x[i].imag();
  }
  kernels::matvec(a, n, n, xr.data(), xi.data(), yr.data(), yi.data());
  y.resize(n);
  for (std::size_t i = 0; i < n; ++i) y[i] = cplx(yr[i], yi[i]);
}

bool outside_range(int j) {
  return j < DyadicBand::kMinExponent || j > DyadicBand::kMaxExponent;
}

double below_multiplier(int j, double k) {
  if (j > DyadicBand::kMaxExponent) return 1.0;
  if (j < DyadicBand::kMinExponent) return 0.0;
  return bump(k / std::ldexp(1.0, j));
}

}  // namespace

SpectralField hankel_forward(const RadialField& f) {
  const RadialGrid& g = f.grid;
  if (!g.valid() || f.values.size() != g.n())
    throw Error(ErrorKind::GridMismatch, "hankel_forward: field does not match grid");
  const std::size_t n = g.n();
  CVec x(n), y;
  const auto& rs = g.rscale();
  for (std::size_t i = 0; i < n; ++i) x[i] = rs[i] * f.values[i];
  apply_kernel(g.transform(), n, x, y);
  const auto& ks = g.kscale();
  for (std::size_t m = 0; m < n; ++m) y[m] *= ks[m];
  return SpectralField(g, std::move(y));
}

RadialField hankel_inverse(const SpectralField& F) {
  const RadialGrid& g = F.grid;
  if (!g.valid() || F.coeffs.size() != g.n())
    throw Error(ErrorKind::GridMismatch, "hankel_inverse: field does not match grid");
  const std::size_t n = g.n();
  CVec x(n), y;
  const auto& ks = g.kscale();
  for (std::size_t m = 0; m < n; ++m) x[m] = F.coeffs[m] / ks[m];
  apply_kernel(g.transform(), n, x, y);
  const auto& rs = g.rscale();
  for (std::size_t i = 0; i < n; ++i) y[i] /= rs[i];
  return RadialField(g, std::move(y));
}

double bump(double x) {
  x = std::abs(x);
  if (x <= 1.0) return 1.0;
  if (x >= 2.0) return 0.0;
  const double s = x - 1.0;
  return std::exp(1.0 - 1.0 / (1.0 - s * s));
}

double DyadicBand::n_value() const { return std::ldexp(1.0, j); }

std::string DyadicBand::label() const {
  switch (kind) {
    case Kind::Below: return "<=2^" + std::to_string(j);
    case Kind::At: return "=2^" + std::to_string(j);
    case Kind::Above: return ">2^" + std::to_string(j);
    case Kind::Range: return "(2^" + std::to_string(m) + ",2^" + std::to_string(j) + "]";
  }
  return "?";
}

double band_multiplier(const DyadicBand& band, double k) {
  switch (band.kind) {
    case DyadicBand::Kind::Below: return below_multiplier(band.j, k);
    case DyadicBand::Kind::Above: return 1.0 - below_multiplier(band.j, k);
    case DyadicBand::Kind::At: return below_multiplier(band.j, k) - below_multiplier(band.j - 1, k);
    case DyadicBand::Kind::Range: return below_multiplier(band.j, k) - below_multiplier(band.m, k);
  }
  return 0.0;
}

SpectralField lp_project(const SpectralField& F, const DyadicBand& band) {
  bool clamped = outside_range(band.j);
  if (band.kind == DyadicBand::Kind::Range) clamped = clamped || outside_range(band.m);
  if (band.kind == DyadicBand::Kind::At) clamped = clamped || outside_range(band.j - 1);
  if (clamped) warn("dyadic band " + band.label() + " outside 2^-20..2^20, clamped");
  if (band.kind == DyadicBand::Kind::Range) {
    // Kept as a difference of two projections so that the identity
    // P_{M<.<=N} = P_{<=N} - P_{<=M} holds coefficient by coefficient.
    SpectralField out = F;
    const auto& k = F.grid.knodes();
    for (std::size_t m = 0; m < k.size(); ++m)
      out.coeffs[m] = F.coeffs[m] * below_multiplier(band.j, k[m]) -
                      F.coeffs[m] * below_multiplier(band.m, k[m]);
    return out;
  }
  return apply_symbol(F, [&band](double k) { return band_multiplier(band, k); });
}

RadialField lp_project(const RadialField& f, const DyadicBand& band) {
  return hankel_inverse(lp_project(hankel_forward(f), band));
}

double l2_norm(const SpectralField& F) {
  const auto& w = F.grid.kweights();
  double s = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) s += w[m] * std::norm(F.coeffs[m]);
  return std::sqrt(s);
}

double h_norm(const SpectralField& F) {
  const auto& w = F.grid.kweights();
  const auto& k = F.grid.knodes();
  double s = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) s += w[m] * (1.0 + k[m] * k[m]) * std::norm(F.coeffs[m]);
  return std::sqrt(s);
}

double hdot_norm(const SpectralField& F, double s) {
  const auto& w = F.grid.kweights();
  const auto& k = F.grid.knodes();
  double acc = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m)
    acc += w[m] * std::pow(k[m], 2.0 * s) * std::norm(F.coeffs[m]);
  return std::sqrt(acc);
}

cplx inner_h(const SpectralField& a, const SpectralField& b) {
  require_same_grid(a.grid, b.grid, "inner_h");
  const auto& w = a.grid.kweights();
  const auto& k = a.grid.knodes();
  cplx s = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m)
    s += w[m] * (1.0 + k[m] * k[m]) * a.coeffs[m] * std::conj(b.coeffs[m]);
  return s;
}

cplx inner_l2(const RadialField& a, const RadialField& b) {
  require_same_grid(a.grid, b.grid, "inner_l2");
  const auto& w = a.grid.weights();
  cplx s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * a.values[i] * std::conj(b.values[i]);
  return s;
}

double lq_power(const std::vector<double>& density, const RadialGrid& grid, double q) {
  const auto& w = grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(density[i], q);
  return s;
}

namespace {

double lq_of_abs(const std::vector<double>& a, const RadialGrid& grid, double q) {
  if (std::isinf(q)) {
    double m = 0.0;
    for (double v : a) m = std::max(m, v);
    return m;
  }
  return std::pow(lq_power(a, grid, q), 1.0 / q);
}

std::vector<double> abs_values(const CVec& v) {
  std::vector<double> a(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) a[i] = std::abs(v[i]);
  return a;
}

void check_q(double q) {
  if (!(q >= 1.0)) throw Error(ErrorKind::UnsupportedExponent, "Lq requires 1 <= q <= inf");
}

}  // namespace

CVec radial_derivative(const SpectralField& F) {
  const RadialGrid& g = F.grid;
  const std::size_t n = g.n();
  const auto& d = g.derivative_matrix();
  std::vector<double> xr(n), xi(n), yr(n), yi(n);
  for (std::size_t m = 0; m < n; ++m) {
    xr[m] = F.coeffs[m].real();
    xi[m] = F.coeffs[m].imag();
  }
  kernels::matvec(d.data(), n, n, xr.data(), xi.data(), yr.data(), yi.data());
  CVec out(n);
  for (std::size_t i = 0; i < n; ++i) out[i] = cplx(yr[i], yi[i]);
  return out;
}

CVec radial_derivative(const RadialField& f) { return radial_derivative(hankel_forward(f)); }

double norm(const RadialField& f, const Space& space) {
  switch (space.kind) {
    case Space::Kind::L2: {
      const auto& w = f.grid.weights();
      double s = 0.0;
      for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::norm(f.values[i]);
      return std::sqrt(s);
    }
    case Space::Kind::Lq:
      check_q(space.exponent);
      return lq_of_abs(abs_values(f.values), f.grid, space.exponent);
    case Space::Kind::H: return h_norm(hankel_forward(f));
    case Space::Kind::Hdot:
      if (!std::isfinite(space.exponent))
        throw Error(ErrorKind::UnsupportedExponent, "Hdot requires finite s");
      return hdot_norm(hankel_forward(f), space.exponent);
    case Space::Kind::W1q: {
      check_q(space.exponent);
      const double a = lq_of_abs(abs_values(f.values), f.grid, space.exponent);
      const double b = lq_of_abs(abs_values(radial_derivative(f)), f.grid, space.exponent);
      return a + b;
    }
  }
  return 0.0;
}

double radial_integral(const RadialGrid& grid, const std::vector<double>& density, double radius,
                       bool vanishes_at_rmax) {
  const std::size_t n = grid.n();
  const double rmax = grid.rmax();
  if (!(radius >= 0.0) || radius > rmax)
    throw Error(ErrorKind::RadiusOutOfRange, "radius must lie in [0, rmax]");
  std::vector<double> v(n + 4);
  v[0] = density[2];
  v[1] = density[1];
  v[2] = density[0];
  for (std::size_t i = 0; i < n; ++i) v[i + 3] = density[i];
  v[n + 3] = 0.0;

  const auto& x = grid.abscissae();
  const auto& cells = grid.cell_rules(vanishes_at_rmax);
  double total = 0.0;
  for (const auto& cell : cells) {
    if (cell.b <= radius) continue;
    double full = 0.0;
    for (int s = 0; s < 8; ++s) full += cell.w[s] * v[cell.first + static_cast<std::size_t>(s)];
    full = std::max(full, 0.0);
    if (cell.a >= radius) {
      total += full;
      continue;
    }
    using Rule = boost::math::quadrature::gauss<double, 8>;
    const double a = radius, b = cell.b;
    const double half = 0.5 * (b - a), mid = 0.5 * (b + a);
    double part = 0.0;
    auto add = [&](double t, double wq) {
      const double r = mid + half * t;
      double p = 0.0;
      for (int s = 0; s < 8; ++s) {
        double l = 1.0;
        const double xs = x[cell.first + static_cast<std::size_t>(s)];
        for (int u = 0; u < 8; ++u) {
          if (u == s) continue;
          const double xu = x[cell.first + static_cast<std::size_t>(u)];
          l *= (r - xu) / (xs - xu);
        }
        p += l * v[cell.first + static_cast<std::size_t>(s)];
      }
      part += wq * half * grid.sphere_area() * std::pow(r, grid.dim() - 1) * p;
    };
    const auto& ab = Rule::abscissa();
    const auto& wt = Rule::weights();
    for (std::size_t q = 0; q < ab.size(); ++q) {
      if (ab[q] == 0.0) {
        add(0.0, wt[q]);
      } else {
        add(ab[q], wt[q]);
        add(-ab[q], wt[q]);
      }
    }
    total += std::clamp(part, 0.0, full);
  }
  return total;
}

double tail(const RadialField& f, double radius, bool with_gradient) {
  const double rmax = f.grid.rmax();
  if (!(radius >= 0.0) || radius >= rmax)
    throw Error(ErrorKind::RadiusOutOfRange, "tail radius must lie in [0, rmax)");
  std::vector<double> dens(f.size());
  for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = std::norm(f.values[i]);
  double t = radial_integral(f.grid, dens, radius, true);
  if (with_gradient) {
    const CVec d = radial_derivative(f);
    for (std::size_t i = 0; i < dens.size(); ++i) dens[i] = std::norm(d[i]);
    t += radial_integral(f.grid, dens, radius, false);
  }
  return t;
}

CVec evaluate(const SpectralField& F, const std::vector<double>& radii) {
  const RadialGrid& g = F.grid;
  const double nu = g.nu();
  const double c = boost::math::tgamma(nu + 1.0) * std::pow(2.0, nu);
  const auto& k = g.knodes();
  const auto& w = g.kweights();
  CVec out(radii.size());
  for (std::size_t i = 0; i < radii.size(); ++i) {
    const double r = radii[i];
    if (r < 0.0 || r > g.rmax()) throw Error(ErrorKind::RadiusOutOfRange, "evaluate: radius outside [0, rmax]");
    cplx s = 0.0;
    for (std::size_t m = 0; m < k.size(); ++m) {
      const double x = k[m] * r;
      const double phi = x == 0.0 ? 1.0 : c * std::pow(x, -nu) * boost::math::cyl_bessel_j(nu, x);
      s += w[m] * phi * F.coeffs[m];
    }
    out[i] = s;
  }
  return out;
}

}  // namespace nlslab
