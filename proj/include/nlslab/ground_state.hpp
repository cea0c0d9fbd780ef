#pragma once

#include <cstddef>
#include <optional>
#include <string>

#include "nlslab/dynamics.hpp"

namespace nlslab {

struct GroundState {
  double omega = 1.0;
  RadialField profile;
  double residual = 0.0;     // ||Delta Q + |Q|^(p-1) Q - omega Q||_H
  std::size_t iterations = 0;
  bool positive = false;
  bool monotone = false;     // false marks the profile as suspect
  double pairing_q = 0.0;    // relative defect of the identity from pairing with Q
  double pairing_rdr = 0.0;  // relative defect of the identity from pairing with r dQ/dr
  std::string seed = "exp(-r^2)";
};

struct GroundStateOptions {
  std::size_t max_iterations = 10000;
  // Seed of the iteration; exp(-r^2) when empty.
  std::optional<RadialField> initial;
};

// Petviashvili iteration Q <- M^gamma (omega - Delta)^{-1} |Q|^(p-1) Q with
// gamma = p/(p-1) and M the stabilizing factor, run on spectral coefficients.
GroundState solve_ground_state(const NlsParams& params, double omega, const RadialGrid& grid,
                               double tol, const GroundStateOptions& options = {});

// ||Delta Q + |Q|^(p-1) Q - omega Q||_H with the spectral Laplacian.
double ground_state_residual(const RadialField& q, const NlsParams& params, double omega);

// omega^(1/(p-1)) Q(sqrt(omega) r) sampled on the nodes of q (zero past rmax).
RadialField rescale_ground_state(const RadialField& q, const NlsParams& params, double factor);

struct OrbitCheck {
  double max_deviation = 0.0;
  Trajectory trajectory;
};

// max_t ||u(t) - Q e^{i omega t}||_H for u(0) = e^{i alpha} Q.
OrbitCheck soliton_orbit_check(const GroundState& gs, const NlsParams& params, double t_end, double dt,
                               std::size_t sample_every = 100, const EvolveOptions& options = {},
                               double alpha = 0.0);

// Field file plus key=value manifest (omega, p, d, residual, ...).
void save_ground_state(const GroundState& gs, const NlsParams& params, const std::string& dir);

}  // namespace nlslab
