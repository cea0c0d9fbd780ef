#pragma once

#include <cstddef>
#include <string>
#include <utility>
#include <vector>

#include "nlslab/dynamics.hpp"
#include "nlslab/spectral.hpp"

namespace nlslab {

// Laguerre-Gaussian functions L_k^(nu)(r^2/s^2) exp(-r^2/(2 s^2)), k < count,
// orthonormalized in H (two passes of modified Gram-Schmidt).
struct ProbeFamily {
  std::vector<SpectralField> spectra;
  double width = 1.0;
  std::string description;
  std::size_t size() const { return spectra.size(); }
};
ProbeFamily hermite_probes(const RadialGrid& grid, std::size_t count = 32, double width = 1.0);

// Inclusive range of sample indices.
struct Window {
  std::size_t first = 0;
  std::size_t last = 0;
  std::size_t size() const { return last - first + 1; }
};
// The last `fraction` of the samples (at least two).
Window late_window(const Trajectory& traj, double fraction);

struct RadiationEstimate {
  RadialField u_plus;
  Window window;
  std::vector<double> times;
  std::vector<std::vector<cplx>> pairings;  // [sample][probe]: <e^{-it Delta} u(t), phi_k>_H
  std::vector<cplx> extrapolated;           // mean over the last quarter of the window
  double cauchy_defect = 0.0;               // max |p_k(t_n) - p_k(t_m)| over the last half
  double tolerance = 1e-4;
  bool converged = true;
  // ||e^{-it Delta} u(t) - u_plus||_H at the window samples.
  std::vector<double> backprop_distance;
};

// Not converged (cauchy_defect above tolerance) is reported through the flag
// and a warning, never thrown.
RadiationEstimate extract_radiation(const Trajectory& traj, const ProbeFamily& probes, const Window& window,
                                    double tolerance = 1e-4);

struct DecompositionSeries {
  std::vector<double> times;
  std::vector<RadialField> v_fields;
  std::vector<double> v_h_norms;
  // ||u(t) - e^{it Delta}(u(0) - i D(t))||_H, only for trajectories that tracked D.
  std::vector<double> duhamel_residuals;
  double energy = 0.0;
  double u_plus_h_norm = 0.0;
};

// v(t_i) = u(t_i) - e^{it_i Delta} u_plus for every sample.
DecompositionSeries weakly_bound(const Trajectory& traj, const RadiationEstimate& est);

// Proof-internal smallness parameters exposed as named knobs. eta3 is fitted.
struct LocalizationKnobs {
  double mu0 = 1.0 / 4.0;
  double mu1 = 1.0 / 16.0;
  double mu2 = 1.0 / 64.0;
  double mu3 = 1.0 / 256.0;
  double mu4 = 1.0 / 20.0;
  double late_fraction = 0.25;
};

struct DyadicRow {
  double t = 0.0;
  int j = 0;
  double n = 1.0;
  double low = 0.0;   // ||P_{<=N} v||_H, filled for N <= 1
  double high = 0.0;  // ||P_{>=N} v||_H, filled for N >= 1
};

struct SpatialRow {
  double t = 0.0;
  double radius = 0.0;
  double tail = 0.0;
  double gradient_tail = 0.0;  // int_{|x|>R} |v|^2 + |grad v|^2
};

struct LocalizationProfile {
  std::vector<DyadicRow> dyadic;
  std::vector<SpatialRow> spatial;
  // log-log slopes: ||P_{<=N} v|| ~ N^low_exponent as N -> 0 and
  // ||P_{>=N} v|| ~ N^{-high_exponent} as N -> inf. NaN when there is nothing to fit.
  double low_exponent = 0.0;
  double high_exponent = 0.0;
  LocalizationKnobs knobs;
};

// Dyadic exponents j with N = 2^j; rows use the samples in the late fraction.
LocalizationProfile frequency_profile(const DecompositionSeries& series, const std::vector<int>& bands,
                                      const LocalizationKnobs& knobs = {});
LocalizationProfile spatial_profile(const DecompositionSeries& series, const std::vector<double>& radii,
                                    const LocalizationKnobs& knobs = {});

struct ConcentrationRow {
  double t = 0.0;
  double radius = 0.0;
  double enlarged_radius = 0.0;
  double ball_mass = 0.0;
  double enlarged_mass = 0.0;
  double total_mass = 0.0;
  bool fires = false;   // ball mass >= mu1^2
  bool clears = false;  // enlarged mass >= half the total
};

struct ConcentrationReport {
  std::vector<ConcentrationRow> rows;
  double mu1 = 0.0;
  bool any_fired = false;
  double min_enlarged_fraction = 1.0;  // over rows that fired
};

// mu1 = threshold_fraction * sqrt(M(u(0))).
ConcentrationReport mass_concentration_track(const Trajectory& traj,
                                             const std::vector<std::pair<double, double>>& radii_pairs,
                                             double threshold_fraction = 0.1, double late_fraction = 0.25);

struct PetiteReport {
  double radiation = 0.0;            // ||u_+||_H / ||u(0)||_H
  double tail_score = 0.0;           // max late tail(u, R*) / M
  double gradient_tail_score = 0.0;  // max late (tail + gradient tail)(u, R*) / ||u||_H^2
  double precompactness = 0.0;       // max late ||P_{>=1/mu1} u||_H/||u||_H + tail(u, 1/mu1)/M
  double radius = 0.0;               // R*
  double radiation_raw = 0.0;        // ||u_+||_H
  Window window;
  double window_start = 0.0;
  double window_end = 0.0;
};

// R* is the largest radius in `radii` not above rmax/2.
PetiteReport petite_report(const Trajectory& traj, const RadiationEstimate& est, const std::vector<double>& radii,
                           const LocalizationKnobs& knobs = {});

struct DecayTable {
  double q = 0.0;
  std::vector<double> times;
  std::vector<double> values;
  std::vector<bool> trusted;
  bool domain_escape = false;
  bool monotone = true;  // strictly decreasing over trusted times
};

// ||e^{it Delta} f||_{L^q} over times, 2 < q <= 2d/(d-2).
DecayTable riemann_lebesgue_check(const RadialField& f, double q, const std::vector<double>& times);

struct UniquenessProbe {
  double difference = 0.0;  // ||u_+(w1) - u_+(w2)||_H
  double bound = 0.0;       // 2 (defect1 + defect2)
  bool holds() const { return difference <= bound; }
};
UniquenessProbe uniqueness_probe(const Trajectory& traj, const ProbeFamily& probes, const Window& a,
                                 const Window& b);

// Long-format CSV: t,key,value.
std::string profile_csv(const LocalizationProfile& profile);
std::string petite_csv(const PetiteReport& report);

}  // namespace nlslab
