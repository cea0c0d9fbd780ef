#include "nlslab/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>

#include "nlslab/error.hpp"
#include "nlslab/kernels.hpp"
#include "nlslab/propagator.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

NlsParams NlsParams::make(int dim, double p, int sign) {
  NlsParams params;
  params.dim = dim;
  params.p = p;
  params.sign = sign;
  params.c0 = 2.0 * p;
  params.theta = std::min(p - 1.0, 1.0);
  params.validate();
  return params;
}

NlsParams NlsParams::linear(int dim) {
  NlsParams params = make(dim, 2.0, 1);
  params.nonlinear = false;
  return params;
}

bool NlsParams::mass_supercritical() const { return p > 1.0 + 4.0 / dim; }
bool NlsParams::energy_subcritical() const { return p < 1.0 + 4.0 / (dim - 2); }
bool NlsParams::high_dimension() const { return dim >= 5; }
bool NlsParams::conformant() const {
  return mass_supercritical() && energy_subcritical() && high_dimension();
}

void NlsParams::validate() const {
  if (dim < 3) throw Error(ErrorKind::InvalidArgument, "equation.d must be at least 3");
  if (!(p > 1.0) || !std::isfinite(p)) throw Error(ErrorKind::InvalidArgument, "equation.p must exceed 1");
  if (sign != 1 && sign != -1) throw Error(ErrorKind::InvalidArgument, "equation.sign must be +1 or -1");
}

cplx power_nonlinearity(cplx z, const NlsParams& params) {
  const double m = std::abs(z);
  if (m == 0.0) return 0.0;
  return params.mu() * std::pow(m, params.p - 1.0) * z;
}

namespace {

// F_z and F_zbar of mu |z|^(p-1) z.
void differential(cplx z, double p, double mu, cplx& a, cplx& b) {
  const double m = std::abs(z);
  if (m == 0.0) {
    a = b = 0.0;
    return;
  }
  a = mu * 0.5 * (p + 1.0) * std::pow(m, p - 1.0);
  b = mu * 0.5 * (p - 1.0) * std::pow(m, p - 3.0) * z * z;
}

}  // namespace

PowerBoundCheck sample_power_bounds(const NlsParams& params, std::size_t draws, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> gauss;
  std::uniform_real_distribution<double> scale(-3.0, 3.0);
  const double p = params.p, mu = params.sign, th = params.theta;
  PowerBoundCheck out;
  auto draw = [&] { return std::pow(10.0, scale(rng)) * cplx(gauss(rng), gauss(rng)); };
  for (std::size_t s = 0; s < draws; ++s) {
    const cplx z = draw();
    cplx w = draw();
    // Every other pair is close, where the Holder bound is tight.
    if (s % 2) w = z + 1e-3 * std::abs(z) * cplx(gauss(rng), gauss(rng));
    const double mz = std::abs(z), mw = std::abs(w);
    if (mz == 0.0 || z == w) continue;
    const double fz = std::abs(mu * std::pow(mz, p - 1.0) * z);
    out.value = std::max(out.value, fz / (params.c0 * std::pow(mz, p)));
    cplx az, bz, aw, bw;
    differential(z, p, mu, az, bz);
    differential(w, p, mu, aw, bw);
    out.derivative = std::max(out.derivative, (std::abs(az) + std::abs(bz)) / (params.c0 * std::pow(mz, p - 1.0)));
    const double diff = std::abs(az - aw) + std::abs(bz - bw);
    const double bound = params.c0 * std::pow(std::abs(z - w), th) * std::pow(mz + mw, p - 1.0 - th);
    out.holder = std::max(out.holder, diff / bound);
  }
  return out;
}

RadialField nonlinearity(const RadialField& f, const NlsParams& params) {
  RadialField out(f.grid);
  for (std::size_t i = 0; i < f.size(); ++i) out.values[i] = power_nonlinearity(f.values[i], params);
  return out;
}

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

double potential_term(const RadialField& f, const NlsParams& params) {
  if (params.mu() == 0.0) return 0.0;
  const auto& w = f.grid.weights();
  double s = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) s += w[i] * std::pow(std::abs(f.values[i]), params.p + 1.0);
  return params.mu() / (params.p + 1.0) * s;
}

SampleDiagnostics diagnose(const RadialField& f, const SpectralField& F, const NlsParams& params) {
  SampleDiagnostics d;
  d.mass = mass_of(f);
  d.hamiltonian = 0.5 * gradient_sq(F) + potential_term(f, params);
  d.h_norm = h_norm(F);
  return d;
}

}  // namespace

Conserved conserved(const RadialField& f, const NlsParams& params) {
  const SampleDiagnostics d = diagnose(f, hankel_forward(f), params);
  return {d.mass, d.hamiltonian};
}

Baselines baselines_of(const RadialField& f, const NlsParams& params) {
  const SampleDiagnostics d = diagnose(f, hankel_forward(f), params);
  return {d.mass, d.hamiltonian, d.h_norm};
}

namespace {

void nonlinear_phase(RadialField& u, const NlsParams& params, double tau) {
  if (params.mu() == 0.0) return;
  kernels::phase_rotate(u.values.data(), u.size(), params.p, params.mu() * tau);
}

CVec free_phases(const RadialGrid& g, double tau) {
  const auto& k = g.knodes();
  CVec ph(k.size());
  for (std::size_t m = 0; m < k.size(); ++m) ph[m] = std::polar(1.0, -tau * k[m] * k[m]);
  return ph;
}

void linear_step(RadialField& u, const CVec& phases) {
  SpectralField U = hankel_forward(u);
  for (std::size_t m = 0; m < phases.size(); ++m) U.coeffs[m] *= phases[m];
  u = hankel_inverse(U);
}

// Triple-jump composition of symmetric steps; order 2 is a single Strang step.
std::vector<double> composition(int order) {
  if (order != 2 && order != 4 && order != 6 && order != 8)
    throw Error(ErrorKind::InvalidArgument, "integrator order must be 2, 4, 6 or 8");
  std::vector<double> c{1.0};
  for (int k = 1; 2 * k < order; ++k) {
    const double g1 = 1.0 / (2.0 - std::pow(2.0, 1.0 / (2 * k + 1)));
    const double g0 = 1.0 - 2.0 * g1;
    std::vector<double> next;
    for (double s : {g1, g0, g1})
      for (double x : c) next.push_back(s * x);
    c = std::move(next);
  }
  return c;
}

bool all_finite(const CVec& v) {
  for (const cplx& z : v)
    if (!std::isfinite(z.real()) || !std::isfinite(z.imag())) return false;
  return true;
}

}  // namespace

SolverState step(const SolverState& state, const NlsParams& params) {
  if (!(state.dt > 0.0)) throw Error(ErrorKind::InvalidArgument, "step: dt must be positive");
  SolverState next = state;
  nonlinear_phase(next.field, params, 0.5 * state.dt);
  linear_step(next.field, free_phases(state.field.grid, state.dt));
  nonlinear_phase(next.field, params, 0.5 * state.dt);
  next.t = state.t + state.dt;
  if (!next.field.finite()) throw Error(ErrorKind::NanDetected, "non-finite field at t = " + std::to_string(next.t));
  return next;
}

double stability_cap(const RadialField& u0, const NlsParams& params) {
  if (params.mu() == 0.0) return kInf;
  double sup = 0.0;
  for (const cplx& z : u0.values) sup = std::max(sup, std::abs(z));
  return 1e-2 / (1.0 + std::pow(sup, params.p - 1.0));
}

std::string termination_name(Termination t) {
  switch (t) {
    case Termination::Completed: return "completed";
    case Termination::Blowup: return "blowup";
    case Termination::Unstable: return "unstable";
  }
  return "unknown";
}

double Trajectory::energy() const {
  double e = 0.0;
  for (const auto& d : diagnostics) e = std::max(e, d.h_norm * d.h_norm);
  return e;
}

namespace {

// Moments m_k = int_0^1 e^{xs} s^k ds, k = 0, 1, 2.
void moments(cplx x, cplx m[3]) {
  if (std::abs(x) < 2.0) {
    m[0] = m[1] = m[2] = 0.0;
    cplx term = 1.0;  // x^n / n!
    for (int n = 0; n < 40; ++n) {
      for (int k = 0; k < 3; ++k) m[k] += term / double(n + k + 1);
      term *= x / double(n + 1);
    }
    return;
  }
  const cplx ex = std::exp(x);
  m[0] = (ex - 1.0) / x;
  m[1] = (ex - m[0]) / x;
  m[2] = (ex - 2.0 * m[1]) / x;
}

// Filon weights for int_0^h e^{i lambda s} g(s) ds. The first panel uses the
// line through g(0), g(h); later panels the quadratic through g(-h), g(0), g(h).
struct FilonWeights {
  cplx lin0, lin1, q_prev, q0, q1;
};

FilonWeights filon_weights(double lambda, double h) {
  cplx m[3];
  moments(cplx(0.0, lambda * h), m);
  FilonWeights w;
  w.lin0 = h * (m[0] - m[1]);
  w.lin1 = h * m[1];
  w.q_prev = h * 0.5 * (m[2] - m[1]);
  w.q0 = h * (m[0] - m[2]);
  w.q1 = h * 0.5 * (m[2] + m[1]);
  return w;
}

struct DuhamelAccumulator {
  std::vector<FilonWeights> weights;
  SpectralField sum, before, prev;
  bool first = true;

  DuhamelAccumulator(const RadialGrid& g, double dt) : sum(g) {
    const auto& k = g.knodes();
    for (std::size_t m = 0; m < k.size(); ++m) weights.push_back(filon_weights(k[m] * k[m], dt));
  }

  // Adds the panel [s, s + dt] given F(u(s + dt)).
  void add(double s, const SpectralField& next) {
    const auto& k = sum.grid.knodes();
    for (std::size_t m = 0; m < k.size(); ++m) {
      const FilonWeights& w = weights[m];
      const cplx phase = std::polar(1.0, s * k[m] * k[m]);
      const cplx panel = first ? w.lin0 * prev.coeffs[m] + w.lin1 * next.coeffs[m]
                               : w.q_prev * before.coeffs[m] + w.q0 * prev.coeffs[m] + w.q1 * next.coeffs[m];
      sum.coeffs[m] += phase * panel;
    }
    first = false;
    before = std::move(prev);
    prev = next;
  }
};

struct Monitor {
  int top = 0;
  double limit_h = 0.0;
  double limit_fraction = 0.5;

  double band_fraction(const SpectralField& U) const {
    const auto& w = U.grid.kweights();
    const auto& k = U.grid.knodes();
    const DyadicBand band = DyadicBand::above(top - 2);
    double all = 0.0, fine = 0.0;
    for (std::size_t m = 0; m < w.size(); ++m) {
      const double g = w[m] * k[m] * k[m] * std::norm(U.coeffs[m]);
      const double mult = band_multiplier(band, k[m]);
      all += g;
      fine += g * mult * mult;
    }
    return all == 0.0 ? 0.0 : fine / all;
  }
};

std::vector<double> sponge_profile(const RadialGrid& g, double strength, double dt) {
  const auto& r = g.nodes();
  const double start = 0.9 * g.rmax(), width = 0.1 * g.rmax();
  std::vector<double> damp(r.size(), 1.0);
  for (std::size_t i = 0; i < r.size(); ++i) {
    if (r[i] <= start) continue;
    const double s = (r[i] - start) / width;
    damp[i] = std::exp(-strength * dt * s * s);
  }
  return damp;
}

}  // namespace

Trajectory evolve(const RadialField& u0, const NlsParams& params, double t_end, double dt,
                  std::size_t sample_every, const EvolveOptions& options) {
  params.validate();
  if (!u0.grid.valid() || u0.size() != u0.grid.n())
    throw Error(ErrorKind::GridMismatch, "evolve: field does not match its grid");
  if (!u0.finite()) throw Error(ErrorKind::NanDetected, "evolve: initial data not finite");
  if (!(dt > 0.0) || !(t_end >= 0.0)) throw Error(ErrorKind::InvalidArgument, "evolve: need dt > 0 and t_end >= 0");
  if (sample_every == 0) throw Error(ErrorKind::InvalidArgument, "evolve: sample_every must be positive");
  const double cap = stability_cap(u0, params);
  if (dt > cap * (1.0 + 1e-12))
    throw Error(ErrorKind::StepTooLarge, "dt = " + std::to_string(dt) + " exceeds the cap " + std::to_string(cap));

  const RadialGrid& g = u0.grid;
  const std::vector<double> stages = composition(options.order);
  const std::size_t nsteps = t_end == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = nsteps == 0 ? dt : t_end / static_cast<double>(nsteps);

  Trajectory traj;
  traj.params = params;
  traj.dt = h;
  traj.order = options.order;
  traj.sponge = options.sponge;
  traj.dealias = options.dealias;
  traj.baselines = baselines_of(u0, params);

  std::vector<CVec> phases;
  for (double c : stages) phases.push_back(free_phases(g, c * h));
  const std::vector<double> damp = options.sponge ? sponge_profile(g, options.sponge_strength, h) : std::vector<double>();
  const double kcut = 2.0 / 3.0 * g.knodes().back();

  Monitor mon;
  mon.top = static_cast<int>(std::floor(std::log2(g.knodes().back())));
  mon.limit_h = options.blowup_factor * traj.baselines.h_norm;
  mon.limit_fraction = options.band_fraction;

  std::unique_ptr<DuhamelAccumulator> duh;
  if (options.track_duhamel) {
    duh = std::make_unique<DuhamelAccumulator>(g, h);
    duh->prev = hankel_forward(nonlinearity(u0, params));
  }

  RadialField u = u0;
  auto record = [&](double t, const SpectralField& U) {
    traj.times.push_back(t);
    traj.fields.push_back(u);
    traj.diagnostics.push_back(diagnose(u, U, params));
    if (duh) traj.duhamel.push_back(duh->sum);
  };
  record(0.0, hankel_forward(u));

  for (std::size_t n = 1; n <= nsteps; ++n) {
    for (std::size_t s = 0; s < stages.size(); ++s) {
      nonlinear_phase(u, params, 0.5 * stages[s] * h);
      linear_step(u, phases[s]);
      nonlinear_phase(u, params, 0.5 * stages[s] * h);
    }
    if (options.sponge)
      for (std::size_t i = 0; i < damp.size(); ++i) u.values[i] *= damp[i];
    if (options.dealias) {
      SpectralField U = hankel_forward(u);
      const auto& k = g.knodes();
      for (std::size_t m = 0; m < k.size(); ++m)
        if (k[m] > kcut) U.coeffs[m] = 0.0;
      u = hankel_inverse(U);
    }
    const double t = n == nsteps ? t_end : static_cast<double>(n) * h;
    if (!all_finite(u.values)) {
      traj.termination = Termination::Unstable;
      traj.t_stop = t;
      return traj;
    }
    if (duh) duh->add(static_cast<double>(n - 1) * h, hankel_forward(nonlinearity(u, params)));

    const bool sample = n % sample_every == 0 || n == nsteps;
    const bool check = sample || (options.monitor_every > 0 && n % options.monitor_every == 0);
    if (!check) continue;
    const SpectralField U = hankel_forward(u);
    const double hn = h_norm(U);
    const double frac = mon.band_fraction(U);
    if (options.monitor_every > 0) traj.monitor.push_back({t, hn, frac});
    const bool blown = hn > mon.limit_h || frac > mon.limit_fraction;
    if (sample || blown) record(t, U);
    if (blown) {
      traj.termination = Termination::Blowup;
      traj.t_stop = t;
      return traj;
    }
  }
  traj.t_stop = traj.times.back();
  return traj;
}

double duhamel_defect(const Trajectory& traj, std::size_t i, std::size_t j) {
  if (traj.duhamel.size() != traj.size())
    throw Error(ErrorKind::InvalidArgument, "duhamel_defect: trajectory was run without Duhamel tracking");
  if (i >= traj.size() || j >= traj.size()) throw Error(ErrorKind::InvalidArgument, "duhamel_defect: sample index");
  const SpectralField Ui = hankel_forward(traj.fields[i]);
  SpectralField R = hankel_forward(traj.fields[j]);
  const auto& k = R.grid.knodes();
  const double ti = traj.times[i], tj = traj.times[j];
  const cplx I(0.0, 1.0);
  for (std::size_t m = 0; m < k.size(); ++m) {
    const double k2 = k[m] * k[m];
    R.coeffs[m] -= std::polar(1.0, -(tj - ti) * k2) * Ui.coeffs[m];
    R.coeffs[m] += I * std::polar(1.0, -tj * k2) * (traj.duhamel[j].coeffs[m] - traj.duhamel[i].coeffs[m]);
  }
  return h_norm(R);
}

double oracle_potential_coefficient(int dim) { return 0.25 * (dim - 1) * (dim - 3); }

double oracle_dt_cap(double h) {
  const double kmax = M_PI / h;
  return 0.5 / (kmax * kmax);
}

namespace {

// Crank-Nicolson for i w_t + w_rr - V w = mu |u|^(p-1) w on r_j = j h,
// j = 1..J-1, with w_0 = w_J = 0.
class CrankNicolson {
 public:
  CrankNicolson(int dim, double rmax, std::size_t cells, double dt, const NlsParams& params,
                const OracleOptions& options)
      : params_(params), options_(options), J_(cells), h_(rmax / cells), dt_(dt) {
    const std::size_t m = J_ - 1;
    r_.resize(m);
    pot_.resize(m);
    radial_power_.resize(m);
    const double a = 0.5 * (dim - 1);
    const double vcoef = oracle_potential_coefficient(dim);
    for (std::size_t j = 0; j < m; ++j) {
      r_[j] = h_ * (j + 1);
      pot_[j] = vcoef / (r_[j] * r_[j]);
      radial_power_[j] = std::pow(r_[j], -a * (params.p - 1.0));
    }
    // Thomas factorization of I - (i dt / 2) A, A = D2 - V.
    const cplx half(0.0, 0.5 * dt_);
    off_ = -half / (h_ * h_);
    cprime_.resize(m);
    inv_denom_.resize(m);
    for (std::size_t j = 0; j < m; ++j) {
      const cplx diag = 1.0 + half * (2.0 / (h_ * h_) + pot_[j]);
      inv_denom_[j] = 1.0 / (j == 0 ? diag : diag - off_ * cprime_[j - 1]);
      cprime_[j] = off_ * inv_denom_[j];
    }
  }

  const std::vector<double>& radii() const { return r_; }
  double h() const { return h_; }

  // prev holds w at the previous step (empty on the first), used for the
  // extrapolated starting guess of the fixed-point iteration.
  void advance(CVec& w, CVec& prev) const {
    const std::size_t m = w.size();
    const cplx half(0.0, 0.5 * dt_);
    CVec base(m), next(m), rhs(m);
    for (std::size_t j = 0; j < m; ++j) {
      const cplx left = j > 0 ? w[j - 1] : 0.0;
      const cplx right = j + 1 < m ? w[j + 1] : 0.0;
      const cplx aw = (left - 2.0 * w[j] + right) / (h_ * h_) - pot_[j] * w[j];
      base[j] = w[j] + half * aw;
      next[j] = prev.empty() ? w[j] : 2.0 * w[j] - prev[j];
    }
    const double mu = params_.mu();
    const bool quadratic = params_.p == 2.0;
    for (std::size_t it = 0; it < options_.max_iterations; ++it) {
      for (std::size_t j = 0; j < m; ++j) {
        const cplx wm = 0.5 * (w[j] + next[j]);
        const double mod = std::abs(wm);
        const double amp = mu == 0.0 ? 0.0 : mu * (quadratic ? mod : std::pow(mod, params_.p - 1.0)) * radial_power_[j];
        rhs[j] = base[j] - cplx(0.0, dt_ * amp) * wm;
      }
      solve(rhs);
      double change = 0.0, scale = 0.0;
      for (std::size_t j = 0; j < m; ++j) {
        change = std::max(change, std::norm(rhs[j] - next[j]));
        scale = std::max(scale, std::norm(rhs[j]));
      }
      next.swap(rhs);
      const double tol = options_.tolerance;
      if (mu == 0.0 || change <= tol * tol * std::max(scale, 1e-300)) {
        prev.swap(w);
        w.swap(next);
        return;
      }
    }
    throw Error(ErrorKind::FixedPointNotConverged, "Crank-Nicolson fixed-point iteration did not converge");
  }

 private:
  void solve(CVec& d) const {
    const std::size_t m = d.size();
    d[0] *= inv_denom_[0];
    for (std::size_t j = 1; j < m; ++j) d[j] = (d[j] - off_ * d[j - 1]) * inv_denom_[j];
    for (std::size_t j = m - 1; j-- > 0;) d[j] -= cprime_[j] * d[j + 1];
  }

  NlsParams params_;
  OracleOptions options_;
  std::size_t J_;
  double h_, dt_;
  std::vector<double> r_, pot_, radial_power_;
  cplx off_;
  CVec cprime_, inv_denom_;
};

// Runs one resolution and returns w at the sample steps.
std::vector<CVec> run_cn(const RadialField& u0, const NlsParams& params, double t_end, double dt,
                         std::size_t cells, const OracleOptions& options) {
  const RadialGrid& g = u0.grid;
  const std::size_t nsteps = t_end == 0.0 ? 0 : static_cast<std::size_t>(std::ceil(t_end / dt - 1e-9));
  const double h = nsteps == 0 ? dt : t_end / static_cast<double>(nsteps);
  CrankNicolson cn(g.dim(), g.rmax(), cells, h, params, options);
  const auto& r = cn.radii();
  const CVec u = evaluate(hankel_forward(u0), r);
  const double a = 0.5 * (g.dim() - 1);
  CVec w(r.size());
  for (std::size_t j = 0; j < r.size(); ++j) w[j] = std::pow(r[j], a) * u[j];

  std::vector<CVec> out{w};
  CVec prev;
  std::size_t next_sample = 1;
  for (std::size_t n = 1; n <= nsteps; ++n) {
    cn.advance(w, prev);
    while (next_sample <= options.samples &&
           n == static_cast<std::size_t>(std::llround(double(nsteps) * next_sample / options.samples))) {
      out.push_back(w);
      ++next_sample;
    }
  }
  while (out.size() < options.samples + 1) out.push_back(w);
  return out;
}

// Local 8-point Lagrange interpolation of the even extension of u from
// r_j = j h (j >= 1) onto the grid nodes; u(rmax) = 0.
CVec interpolate_even(const CVec& u, double h, const std::vector<double>& targets) {
  const long J = static_cast<long>(u.size()) + 1;  // u holds j = 1..J-1
  auto value = [&](long j) -> cplx {
    const long a = std::labs(j);
    if (a >= J) return 0.0;
    return u[static_cast<std::size_t>(a - 1)];
  };
  CVec out(targets.size());
  for (std::size_t t = 0; t < targets.size(); ++t) {
    const double x = targets[t] / h;
    long start = static_cast<long>(std::floor(x)) - 3;
    start = std::min(start, J - 7);
    std::vector<long> idx;
    for (long j = start; idx.size() < 8; ++j)
      if (j != 0) idx.push_back(j);
    cplx s = 0.0;
    for (std::size_t a = 0; a < idx.size(); ++a) {
      double l = 1.0;
      for (std::size_t b = 0; b < idx.size(); ++b)
        if (a != b) l *= (x - idx[b]) / double(idx[a] - idx[b]);
      s += l * value(idx[a]);
    }
    out[t] = s;
  }
  return out;
}

}  // namespace

Trajectory oracle_evolve(const RadialField& u0, const NlsParams& params, double t_end, double dt,
                         const OracleOptions& options) {
  params.validate();
  if (!(options.h > 0.0) || options.samples == 0) throw Error(ErrorKind::InvalidArgument, "oracle: need h > 0 and samples >= 1");
  const RadialGrid& g = u0.grid;
  const std::size_t cells = static_cast<std::size_t>(std::llround(g.rmax() / options.h));
  if (cells < 16) throw Error(ErrorKind::InsufficientResolution, "oracle: fewer than 16 cells");
  const double h = g.rmax() / cells;
  const double cap = oracle_dt_cap(h);
  if (dt > cap * (1.0 + 1e-12))
    throw Error(ErrorKind::StepTooLarge, "oracle dt exceeds 0.5 / k_max^2 = " + std::to_string(cap));

  std::vector<CVec> coarse = run_cn(u0, params, t_end, dt, cells, options);
  if (options.richardson) {
    const std::vector<CVec> fine = run_cn(u0, params, t_end, 0.25 * dt, 2 * cells, options);
    for (std::size_t s = 0; s < coarse.size(); ++s)
      for (std::size_t j = 0; j < coarse[s].size(); ++j)
        coarse[s][j] = (4.0 * fine[s][2 * j + 1] - coarse[s][j]) / 3.0;
  }

  Trajectory traj;
  traj.params = params;
  traj.dt = dt;
  traj.baselines = baselines_of(u0, params);
  const double a = 0.5 * (g.dim() - 1);
  for (std::size_t s = 0; s < coarse.size(); ++s) {
    CVec u(coarse[s].size());
    for (std::size_t j = 0; j < u.size(); ++j) u[j] = coarse[s][j] * std::pow(h * (j + 1), -a);
    RadialField f(g, interpolate_even(u, h, g.nodes()));
    if (s == 0) f = u0;
    traj.times.push_back(t_end * double(s) / double(options.samples));
    traj.diagnostics.push_back(diagnose(f, hankel_forward(f), params));
    traj.fields.push_back(std::move(f));
  }
  traj.t_stop = t_end;
  return traj;
}

StabilityReport flow_stability_probe(const RadialField& u0, const RadialField& perturbation,
                                     const NlsParams& params, double t_end, double dt,
                                     std::size_t sample_every, const EvolveOptions& options) {
  require_same_grid(u0.grid, perturbation.grid, "flow_stability_probe");
  const double size = h_norm(hankel_forward(perturbation));
  const Trajectory a = evolve(u0, params, t_end, dt, sample_every, options);
  StabilityReport report;
  if (size == 0.0) {
    report.times = a.times;
    report.ratios.assign(a.size(), 0.0);
    report.truncated = !a.completed();
    return report;
  }
  const Trajectory b = evolve(u0 + perturbation, params, t_end, dt, sample_every, options);
  const std::size_t common = std::min(a.size(), b.size());
  for (std::size_t i = 0; i < common; ++i) {
    report.times.push_back(a.times[i]);
    report.ratios.push_back(h_norm(hankel_forward(b.fields[i] - a.fields[i])) / size);
  }
  report.truncated = !a.completed() || !b.completed();
  return report;
}

}  // namespace nlslab
