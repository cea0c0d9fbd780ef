#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "nlslab/field.hpp"

namespace nlslab {

// i u_t + Delta u = F(u), F(z) = mu |z|^(p-1) z.
struct NlsParams {
  int dim = 5;
  double p = 2.0;
  int sign = -1;          // mu: +1 defocusing, -1 focusing
  bool nonlinear = true;  // false switches F off (the linear flow)
  double c0 = 4.0;
  double theta = 1.0;

  // Fills c0 = 2p and theta = min(p-1, 1). Throws invalid-argument on d < 3,
  // p <= 1 or sign not in {+1,-1}.
  static NlsParams make(int dim, double p, int sign);
  static NlsParams linear(int dim);

  double mu() const { return nonlinear ? static_cast<double>(sign) : 0.0; }
  bool mass_supercritical() const;
  bool energy_subcritical() const;
  bool high_dimension() const;
  bool conformant() const;
  void validate() const;
};

cplx power_nonlinearity(cplx z, const NlsParams& params);

// Worst ratios of the three power bounds |F| <= C0|z|^p, |F'| <= C0|z|^(p-1),
// |F'(z)-F'(w)| <= C0|z-w|^theta (|z|+|w|)^(p-1-theta) over random pairs,
// each divided by c0. F' is the real-linear differential, with norm |F_z|+|F_zbar|.
struct PowerBoundCheck {
  double value = 0.0;
  double derivative = 0.0;
  double holder = 0.0;
  bool holds() const { return value <= 1.0 && derivative <= 1.0 && holder <= 1.0; }
};
PowerBoundCheck sample_power_bounds(const NlsParams& params, std::size_t draws, std::uint64_t seed);

RadialField nonlinearity(const RadialField& f, const NlsParams& params);

struct Conserved {
  double mass = 0.0;
  double hamiltonian = 0.0;
};
Conserved conserved(const RadialField& f, const NlsParams& params);

struct Baselines {
  double mass = 0.0;
  double hamiltonian = 0.0;
  double h_norm = 0.0;
};

struct SolverState {
  double t = 0.0;
  RadialField field;
  double dt = 1e-3;
  Baselines baselines;
};

Baselines baselines_of(const RadialField& f, const NlsParams& params);

// One Strang step: half nonlinear phase, free flow over dt, half nonlinear phase.
// Throws nan-detected when the result is not finite.
SolverState step(const SolverState& state, const NlsParams& params);

// dt <= 1e-2 / (1 + ||u0||_inf^(p-1)) for nonlinear runs; inf for linear ones.
double stability_cap(const RadialField& u0, const NlsParams& params);

enum class Termination { Completed, Blowup, Unstable };
std::string termination_name(Termination t);

struct SampleDiagnostics {
  double mass = 0.0;
  double hamiltonian = 0.0;
  double h_norm = 0.0;
};

struct MonitorRow {
  double t = 0.0;
  double h_norm = 0.0;
  double band_fraction = 0.0;
};

struct EvolveOptions {
  // Order of the symmetric composition of Strang steps: 2, 4, 6 or 8.
  int order = 2;
  // Blow-up checks every k steps; 0 checks at samples only.
  std::size_t monitor_every = 0;
  double blowup_factor = 1e3;
  double band_fraction = 0.5;
  // Accumulate D(t) = int_0^t e^{-is Delta} F(u(s)) ds in spectral space.
  bool track_duhamel = false;
  // Smooth damping on the outer 10% of radii.
  bool sponge = false;
  double sponge_strength = 5.0;
  // Zero coefficients above 2/3 of the largest frequency after each step.
  bool dealias = false;
};

struct Trajectory {
  NlsParams params;
  double dt = 0.0;
  int order = 2;
  bool sponge = false;
  bool dealias = false;
  Baselines baselines;
  std::vector<double> times;
  std::vector<RadialField> fields;
  std::vector<SampleDiagnostics> diagnostics;
  std::vector<SpectralField> duhamel;  // D(t_i), only when tracked
  std::vector<MonitorRow> monitor;
  Termination termination = Termination::Completed;
  double t_stop = 0.0;

  std::size_t size() const { return times.size(); }
  bool completed() const { return termination == Termination::Completed; }
  const RadialGrid& grid() const { return fields.front().grid; }
  // sup_i ||u(t_i)||_H^2
  double energy() const;
};

// Samples at t = 0, every sample_every steps and at t_end. The step count is
// ceil(t_end / dt); dt is shrunk so the steps land on t_end exactly.
Trajectory evolve(const RadialField& u0, const NlsParams& params, double t_end, double dt,
                  std::size_t sample_every, const EvolveOptions& options = {});

// || u(t_j) - e^{i(t_j-t_i)Delta} u(t_i) + i e^{it_j Delta}(D(t_j) - D(t_i)) ||_H
double duhamel_defect(const Trajectory& traj, std::size_t i, std::size_t j);

struct OracleOptions {
  double h = 0.04;          // finite-difference spacing
  bool richardson = true;   // combine h and h/2 runs as (4 u_{h/2} - u_h) / 3
  std::size_t max_iterations = 60;
  double tolerance = 1e-13;
  std::size_t samples = 1;  // equally spaced samples after t = 0
};

// (d-1)(d-3)/4, the inverse-square potential left by w = r^((d-1)/2) u.
double oracle_potential_coefficient(int dim);

// Largest oracle step for spacing h: 0.5 / k_max^2 with k_max = pi / h.
double oracle_dt_cap(double h);

// Crank-Nicolson on w = r^((d-1)/2) u with Dirichlet ends, fixed-point
// iteration for the nonlinear term. Samples are interpolated back to the grid
// nodes of u0. dt belongs to spacing h and must not exceed its cap; the h/2
// run uses dt/4.
Trajectory oracle_evolve(const RadialField& u0, const NlsParams& params, double t_end, double dt,
                         const OracleOptions& options = {});

struct StabilityReport {
  std::vector<double> times;
  std::vector<double> ratios;
  bool truncated = false;
};

StabilityReport flow_stability_probe(const RadialField& u0, const RadialField& perturbation,
                                     const NlsParams& params, double t_end, double dt,
                                     std::size_t sample_every, const EvolveOptions& options = {});

}  // namespace nlslab
