#include "nlslab/ground_state.hpp"

#include <cmath>
#include <filesystem>
#include <fstream>
#include <iomanip>

#include "nlslab/error.hpp"
#include "nlslab/field_io.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

namespace {

double mass_of(const RadialField& f) {
  const auto& w = f.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::norm(f.values[i]);
  return s;
}

double gradient_sq(const SpectralField& F) {
  const auto& w = F.grid.kweights();
  const auto& k = F.grid.knodes();
  double s = 0.0;
  for (std::size_t m = 0; m < w.size(); ++m) s += w[m] * k[m] * k[m] * std::norm(F.coeffs[m]);
  return s;
}

double power_integral(const RadialField& f, double q) {
  const auto& w = f.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(f.values[i]), q);
  return s;
}

RadialField focusing_term(const RadialField& q, double p) {
  RadialField out(q.grid);
  for (std::size_t i = 0; i < q.size(); ++i) out.values[i] = std::pow(std::abs(q.values[i]), p - 1.0) * q.values[i];
  return out;
}

}  // namespace

double ground_state_residual(const RadialField& q, const NlsParams& params, double omega) {
  const SpectralField Q = hankel_forward(q);
  SpectralField R = hankel_forward(focusing_term(q, params.p));
  const auto& k = R.grid.knodes();
  for (std::size_t m = 0; m < k.size(); ++m) R.coeffs[m] -= (omega + k[m] * k[m]) * Q.coeffs[m];
  return h_norm(R);
}

GroundState solve_ground_state(const NlsParams& params, double omega, const RadialGrid& grid, double tol,
                               const GroundStateOptions& options) {
  params.validate();
  if (params.sign != -1 || !params.nonlinear)
    throw Error(ErrorKind::InvalidArgument, "ground states need the focusing sign");
  if (!(omega > 0.0)) throw Error(ErrorKind::InvalidArgument, "ground states need omega > 0");
  if (!params.energy_subcritical())
    throw Error(ErrorKind::InvalidArgument, "ground states need an energy-subcritical exponent");
  if (!(tol > 0.0)) throw Error(ErrorKind::InvalidArgument, "tolerance must be positive");

  GroundState gs;
  gs.omega = omega;
  RadialField q;
  if (options.initial) {
    require_same_grid(options.initial->grid, grid, "solve_ground_state");
    q = *options.initial;
    gs.seed = "user";
  } else {
    q = RadialField::sample(grid, [](double r) { return std::exp(-r * r); });
  }
  const double p = params.p;
  const double gamma = p / (p - 1.0);
  const auto& k = grid.knodes();
  const auto& w = grid.kweights();

  // The iterate lives in the coefficients: re-transforming q would add round-off
  // that the k^3 weight of the H residual amplifies to ~1e-8.
  SpectralField Q = hankel_forward(q);
  for (std::size_t it = 0;; ++it) {
    const SpectralField N = hankel_forward(focusing_term(q, p));
    double a = 0.0, b = 0.0;
    SpectralField R = N;
    for (std::size_t m = 0; m < k.size(); ++m) {
      const double sym = omega + k[m] * k[m];
      a += w[m] * sym * std::norm(Q.coeffs[m]);
      b += w[m] * std::real(std::conj(Q.coeffs[m]) * N.coeffs[m]);
      R.coeffs[m] -= sym * Q.coeffs[m];
    }
    if (!(a > 1e-300) || !(b > 0.0) || !std::isfinite(a / b))
      throw Error(ErrorKind::CollapsedToZero, "Petviashvili iteration reached the zero profile");
    gs.residual = h_norm(R);
    gs.iterations = it;
    if (gs.residual <= tol) break;
    if (it >= options.max_iterations)
      throw Error(ErrorKind::NotConverged, "Petviashvili iteration hit the cap with residual " + std::to_string(gs.residual) + " at omega = " + std::to_string(omega));
    const double factor = std::pow(a / b, gamma);
    for (std::size_t m = 0; m < k.size(); ++m) Q.coeffs[m] = factor * N.coeffs[m].real() / (omega + k[m] * k[m]);
    q = hankel_inverse(Q);
  }

  gs.profile = q;
  const auto& v = q.values;
  const double peak = std::abs(v.front());
  const double slack = 1e-12 * peak;
  gs.positive = gs.monotone = true;
  for (std::size_t i = 0; i < v.size(); ++i) {
    if (!(v[i].real() > -slack)) gs.positive = false;
    if (i + 1 < v.size() && v[i + 1].real() > v[i].real() + slack) gs.monotone = false;
  }
  if (!gs.positive || !gs.monotone) warn("ground state at omega = " + std::to_string(omega) + " is suspect (not positive and decreasing)");

  const int d = grid.dim();
  const double grad = gradient_sq(Q);
  const double pot = power_integral(q, p + 1.0);
  const double mass = mass_of(q);
  // <gse, Q>: -|grad Q|^2 + int Q^(p+1) - omega |Q|^2 = 0.
  gs.pairing_q = std::abs(-grad + pot - omega * mass) / (grad + pot + omega * mass);
  // <gse, r dQ/dr>: (d-2)/2 |grad Q|^2 - d/(p+1) int Q^(p+1) + d omega/2 |Q|^2 = 0.
  const double t1 = 0.5 * (d - 2) * grad, t2 = d / (p + 1.0) * pot, t3 = 0.5 * d * omega * mass;
  gs.pairing_rdr = std::abs(t1 - t2 + t3) / (t1 + t2 + t3);
  return gs;
}

RadialField rescale_ground_state(const RadialField& q, const NlsParams& params, double factor) {
  if (!(factor > 0.0)) throw Error(ErrorKind::InvalidArgument, "rescale factor must be positive");
  const RadialGrid& g = q.grid;
  const double s = std::sqrt(factor);
  const double amp = std::pow(factor, 1.0 / (params.p - 1.0));
  std::vector<double> radii;
  for (double r : g.nodes()) radii.push_back(std::min(s * r, g.rmax()));
  const CVec vals = evaluate(hankel_forward(q), radii);
  RadialField out(g);
  for (std::size_t i = 0; i < radii.size(); ++i)
    out.values[i] = s * g.nodes()[i] >= g.rmax() ? 0.0 : amp * vals[i];
  return out;
}

OrbitCheck soliton_orbit_check(const GroundState& gs, const NlsParams& params, double t_end, double dt,
                               std::size_t sample_every, const EvolveOptions& options, double alpha) {
  const RadialField q = std::polar(1.0, alpha) * gs.profile;
  OrbitCheck out;
  out.trajectory = evolve(q, params, t_end, dt, sample_every, options);
  const SpectralField Q = hankel_forward(q);
  for (std::size_t i = 0; i < out.trajectory.size(); ++i) {
    SpectralField diff = hankel_forward(out.trajectory.fields[i]);
    const cplx phase = std::polar(1.0, gs.omega * out.trajectory.times[i]);
    for (std::size_t m = 0; m < diff.size(); ++m) diff.coeffs[m] -= phase * Q.coeffs[m];
    out.max_deviation = std::max(out.max_deviation, h_norm(diff));
  }
  return out;
}

void save_ground_state(const GroundState& gs, const NlsParams& params, const std::string& dir) {
  std::filesystem::create_directories(dir);
  write_field(dir + "/ground_state.bin", gs.profile);
  std::ofstream out(dir + "/ground_state.manifest");
  if (!out) throw Error(ErrorKind::Io, "cannot write manifest in " + dir);
  out << std::setprecision(17);
  out << "d=" << params.dim << "\np=" << params.p << "\nomega=" << gs.omega << "\nresidual=" << gs.residual
      << "\niterations=" << gs.iterations << "\nseed=" << gs.seed << "\npositive=" << gs.positive
      << "\nmonotone=" << gs.monotone << "\nrmax=" << gs.profile.grid.rmax() << "\nn=" << gs.profile.grid.n() << "\n";
}

}  // namespace nlslab
