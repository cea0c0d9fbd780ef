#pragma once

#include <string>
#include <vector>

#include "nlslab/field.hpp"

namespace nlslab {

// e^{it Delta}: multiplier e^{-itk^2}.
SpectralField free_evolve(const SpectralField& F, double t);
RadialField free_evolve(const RadialField& f, double t);

// Fraction of the mass sitting beyond 0.9 rmax.
double boundary_mass_fraction(const RadialField& u);
// The guard used by every decay measurement: at least 1% of the mass past 0.9 rmax.
bool escaped(const RadialField& u);

struct DecayRow {
  double t = 0.0;
  double norm = 0.0;
  double fitted_slope = 0.0;
  bool trusted = false;
};

struct DecayFit {
  double r = 1.0;
  double dual = 0.0;           // r' (inf when r = 1)
  double slope = 0.0;          // least squares slope of log norm vs log t
  double constant = 0.0;       // exp(intercept)
  double predicted = 0.0;      // -d (1/r - 1/2)
  double max_trusted_time = 0.0;
  std::vector<DecayRow> rows;
};

// Throws domain-escape when fewer than two requested times are trustworthy.
DecayFit dispersive_decay_fit(const RadialField& f, double r, const std::vector<double>& times);
std::string decay_csv(const DecayFit& fit);

enum class Side { Plus, Minus };

struct ResolventSpec {
  double energy = -1.0;
  double epsilon = 1e-3;
  Side side = Side::Plus;
  double horizon = 1e3;
  double tolerance = 1e-4;
};

// (k^2 - E - i eps)^{-1} for Side::Plus, (k^2 - E + i eps)^{-1} for Side::Minus.
RadialField resolvent_direct(const RadialField& f, const ResolventSpec& spec);

// -i int_0^T e^{iEt} e^{-eps t} e^{it Delta} f dt (Side::Plus) or its time
// reversed twin, with a smooth cutoff on [T/2, T], composite Simpson per mode
// and Richardson extrapolation eps -> 0. Modes carrying less than
// (1e-2 tol)^2 of the spectral energy are dropped.
RadialField resolvent_time_integral(const RadialField& f, const ResolventSpec& spec);

// The same quadrature for a single frequency, without extrapolation in eps.
cplx resolvent_symbol_quadrature(double energy, double k, double epsilon, double horizon,
                                 Side side = Side::Plus);

struct SignedAgreement {
  int sign = 1;
  double relative_error = 0.0;
};
// min over s in {+1,-1} of ||a - s b|| / ||b||.
SignedAgreement agree_modulo_sign(const RadialField& a, const RadialField& b);

// Bracket used for the double Duhamel kernel: <x> = 1 + |x|.
double duhamel_bracket(double x);

// int_t^{t+H} int_{max(t-H,0)}^t <t'-t''>^{-d/2} dt'' dt'.
double double_duhamel_convergence(int d, double t, double horizon);

struct DuhamelGrowth {
  std::vector<double> horizons;
  std::vector<double> values;
  bool bounded = false;
};

// Bounded when successive increments shrink geometrically (ratio <= 1/2).
DuhamelGrowth double_duhamel_growth(int d, double t, const std::vector<double>& horizons);

}  // namespace nlslab
