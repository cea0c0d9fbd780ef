#include "nlslab/propagator.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <sstream>

#include "nlslab/error.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

SpectralField free_evolve(const SpectralField& F, double t) {
  return apply_symbol(F, [t](double k) { return std::polar(1.0, -t * k * k); });
}

RadialField free_evolve(const RadialField& f, double t) {
  if (t == 0.0) return f;
  return hankel_inverse(free_evolve(hankel_forward(f), t));
}

double boundary_mass_fraction(const RadialField& u) {
  const double mass = tail(u, 0.0, false);
  if (mass == 0.0) return 0.0;
  return tail(u, 0.9 * u.grid.rmax(), false) / mass;
}

bool escaped(const RadialField& u) { return boundary_mass_fraction(u) >= 0.01; }

namespace {

struct LineFit {
  double slope = 0.0;
  double intercept = 0.0;
};

LineFit least_squares(const std::vector<double>& x, const std::vector<double>& y) {
  const double n = static_cast<double>(x.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    sx += x[i];
    sy += y[i];
    sxx += x[i] * x[i];
    sxy += x[i] * y[i];
  }
  const double den = n * sxx - sx * sx;
  LineFit fit;
  fit.slope = den == 0.0 ? 0.0 : (n * sxy - sx * sy) / den;
  fit.intercept = (sy - fit.slope * sx) / n;
  return fit;
}

}  // namespace

DecayFit dispersive_decay_fit(const RadialField& f, double r, const std::vector<double>& times) {
  if (!(r >= 1.0 && r <= 2.0)) throw Error(ErrorKind::UnsupportedExponent, "decay fit needs r in [1,2]");
  for (double t : times)
    if (!(t > 0.0)) throw Error(ErrorKind::InvalidArgument, "decay fit times must be positive");
  DecayFit fit;
  fit.r = r;
  fit.dual = r == 1.0 ? kInf : r / (r - 1.0);
  fit.predicted = -f.grid.dim() * (1.0 / r - 0.5);

  const SpectralField F = hankel_forward(f);
  bool trusted = true;
  std::vector<double> lx, ly;
  for (double t : times) {
    const RadialField u = hankel_inverse(free_evolve(F, t));
    trusted = trusted && !escaped(u);
    DecayRow row;
    row.t = t;
    row.norm = norm(u, Space::lq(fit.dual));
    row.trusted = trusted;
    if (trusted) {
      fit.max_trusted_time = t;
      lx.push_back(std::log(t));
      ly.push_back(std::log(row.norm));
    }
    fit.rows.push_back(row);
  }
  if (lx.size() < 2) {
    std::ostringstream msg;
    msg << "fewer than two trustworthy times; max trustworthy time " << fit.max_trusted_time;
    throw Error(ErrorKind::DomainEscape, msg.str());
  }
  const LineFit line = least_squares(lx, ly);
  fit.slope = line.slope;
  fit.constant = std::exp(line.intercept);
  for (auto& row : fit.rows) row.fitted_slope = fit.slope;
  return fit;
}

std::string decay_csv(const DecayFit& fit) {
  std::ostringstream out;
  out << std::setprecision(17);
  out << "t,norm,fitted_slope,trust_flag\n";
  for (const auto& row : fit.rows)
    out << row.t << ',' << row.norm << ',' << row.fitted_slope << ',' << (row.trusted ? 1 : 0) << '\n';
  return out.str();
}

RadialField resolvent_direct(const RadialField& f, const ResolventSpec& spec) {
  if (spec.epsilon < 0.0) throw Error(ErrorKind::InvalidArgument, "resolvent epsilon must be >= 0");
  if (spec.energy >= 0.0 && spec.epsilon == 0.0)
    throw Error(ErrorKind::SingularResolvent, "E >= 0 needs a positive epsilon");
  const double e = spec.energy;
  const double shift = spec.side == Side::Plus ? spec.epsilon : -spec.epsilon;
  return hankel_inverse(apply_symbol(hankel_forward(f), [e, shift](double k) {
    return 1.0 / cplx(k * k - e, -shift);
  }));
}

namespace {

// -i s int_0^T e^{i s a t} e^{-eps t} chi(t/T) dt by composite Simpson.
cplx mode_integral(double a, double eps, double horizon, double s) {
  const double hmax = std::min(0.01, 0.1 / (std::abs(a) + eps));
  std::size_t steps = static_cast<std::size_t>(std::ceil(horizon / hmax));
  if (steps % 2) ++steps;
  const double h = horizon / static_cast<double>(steps);
  const cplx rate(-eps, s * a);
  const cplx step = std::exp(rate * h);
  cplx z = 1.0;
  cplx sum = 0.0;
  const double half = 0.5 * horizon;
  for (std::size_t j = 0; j <= steps; ++j) {
    if (j % 1024 == 0) z = std::exp(rate * (h * static_cast<double>(j)));
    const double t = h * static_cast<double>(j);
    const double w = (j == 0 || j == steps) ? 1.0 : (j % 2 ? 4.0 : 2.0);
    const double chi = t <= half ? 1.0 : bump(t / half);
    sum += w * chi * z;
    z *= step;
  }
  return cplx(0.0, -s) * (h / 3.0) * sum;
}

SpectralField time_integral_at(const SpectralField& F, const ResolventSpec& spec, double eps,
                               double horizon, std::size_t kept) {
  SpectralField out(F.grid);
  const double s = spec.side == Side::Plus ? 1.0 : -1.0;
  const auto& k = F.grid.knodes();
  for (std::size_t m = 0; m < kept; ++m) {
    if (F.coeffs[m] == 0.0) continue;
    out.coeffs[m] = mode_integral(spec.energy - k[m] * k[m], eps, horizon, s) * F.coeffs[m];
  }
  return out;
}

SpectralField extrapolated(const SpectralField& F, const ResolventSpec& spec, double horizon,
                           std::size_t kept) {
  if (spec.epsilon == 0.0) return time_integral_at(F, spec, 0.0, horizon, kept);
  const SpectralField a = time_integral_at(F, spec, spec.epsilon, horizon, kept);
  const SpectralField b = time_integral_at(F, spec, 0.5 * spec.epsilon, horizon, kept);
  return cplx(2.0) * b - a;
}

}  // namespace

cplx resolvent_symbol_quadrature(double energy, double k, double epsilon, double horizon, Side side) {
  if (!(horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  return mode_integral(energy - k * k, epsilon, horizon, side == Side::Plus ? 1.0 : -1.0);
}

RadialField resolvent_time_integral(const RadialField& f, const ResolventSpec& spec) {
  if (!(spec.horizon > 0.0)) throw Error(ErrorKind::InvalidArgument, "horizon must be positive");
  if (spec.epsilon < 0.0) throw Error(ErrorKind::InvalidArgument, "resolvent epsilon must be >= 0");
  if (spec.energy >= 0.0 && spec.epsilon == 0.0)
    throw Error(ErrorKind::SingularResolvent, "E >= 0 needs a positive epsilon");
  const SpectralField F = hankel_forward(f);
  const auto& w = F.grid.kweights();
  double total = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) total += w[m] * std::norm(F.coeffs[m]);
  if (total == 0.0) return RadialField(f.grid);

  const double drop = std::pow(1e-2 * spec.tolerance, 2) * total;
  std::size_t kept = w.size();
  double above = 0.0;
  while (kept > 0 && above + w[kept - 1] * std::norm(F.coeffs[kept - 1]) <= drop) {
    above += w[kept - 1] * std::norm(F.coeffs[kept - 1]);
    --kept;
  }

  const SpectralField once = extrapolated(F, spec, spec.horizon, kept);
  const SpectralField twice = extrapolated(F, spec, 2.0 * spec.horizon, kept);
  const double change = l2_norm(twice - once) / l2_norm(twice);
  if (change > spec.tolerance) {
    std::ostringstream msg;
    msg << "doubling T changes the result by " << change << " (tolerance " << spec.tolerance << ")";
    throw Error(ErrorKind::TruncationNotConverged, msg.str());
  }
  return hankel_inverse(twice);
}

SignedAgreement agree_modulo_sign(const RadialField& a, const RadialField& b) {
  const double nb = norm(b, Space::l2());
  const double plus = norm(a - b, Space::l2());
  const double minus = norm(a + b, Space::l2());
  SignedAgreement out;
  out.sign = minus < plus ? -1 : 1;
  out.relative_error = (nb == 0.0 ? std::min(plus, minus) : std::min(plus, minus) / nb);
  return out;
}

double duhamel_bracket(double x) { return 1.0 + std::abs(x); }

double double_duhamel_convergence(int d, double t, double horizon) {
  if (d < 3) throw Error(ErrorKind::InvalidDimension, "double Duhamel needs d >= 3");
  if (horizon <= 0.0) return 0.0;
  // With s1 = t' - t in [0, a] and s2 = t - t'' in [0, b] the integrand depends
  // on u = s1 + s2 only; the rectangle contributes the segment length w(u).
  const double a = horizon;
  const double b = std::min(horizon, std::max(t, 0.0));
  if (b <= 0.0) return 0.0;
  const double lo = std::min(a, b), hi = std::max(a, b);
  auto weight = [&](double u) { return std::max(0.0, std::min({u, lo, a + b - u})); };
  auto g = [d](double u) { return std::pow(duhamel_bracket(u), -0.5 * d); };
  using Rule = boost::math::quadrature::gauss<double, 20>;
  double total = 0.0;
  // Breakpoints at the kinks of w, panels growing geometrically in 1 + u.
  const double cuts[] = {0.0, lo, hi, a + b};
  for (int piece = 0; piece < 3; ++piece) {
    double x0 = cuts[piece];
    const double x1 = cuts[piece + 1];
    while (x0 < x1) {
      const double next = std::min(x1, x0 + std::max(0.5, 0.5 * (1.0 + x0)));
      total += Rule::integrate([&](double u) { return weight(u) * g(u); }, x0, next);
      x0 = next;
    }
  }
  return total;
}

DuhamelGrowth double_duhamel_growth(int d, double t, const std::vector<double>& horizons) {
  DuhamelGrowth out;
  out.horizons = horizons;
  for (double h : horizons) out.values.push_back(double_duhamel_convergence(d, std::max(t, h), h));
  out.bounded = horizons.size() >= 3;
  for (std::size_t i = 2; i < out.values.size(); ++i) {
    const double prev = out.values[i - 1] - out.values[i - 2];
    const double cur = out.values[i] - out.values[i - 1];
    if (cur > 0.5 * prev) out.bounded = false;
  }
  return out;
}

}  // namespace nlslab
