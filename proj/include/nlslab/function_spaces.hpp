#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include <boost/rational.hpp>

#include "nlslab/dynamics.hpp"

namespace nlslab {

using Rational = boost::rational<long long>;

// An exponent in [1, inf] stored through its reciprocal, so inf is exact.
struct Exponent {
  Rational inv{1, 2};
  static Exponent of(Rational q) { return {Rational(1) / q}; }
  static Exponent infinity() { return {Rational(0)}; }
  bool is_infinite() const { return inv.numerator() == 0; }
  Exponent dual() const { return {Rational(1) - inv}; }
  double value() const;
  std::string str() const;
  bool operator==(const Exponent& o) const { return inv == o.inv; }
};

// 2/q + d/r = d/2 with 2 <= q, r <= inf, exactly.
bool admissible_check(const Exponent& q, const Exponent& r, int dim);

struct ExponentTable {
  int dim = 5;
  Rational p{2};
  Exponent q0, r0, big_q0, big_q, big_r;
  bool from_search = false;
  // Validation results, each computed in exact arithmetic.
  bool admissible = false;  // (q0, r0)
  bool admis = false;       // 1/r0 + (p-1)/Q0 = 1/r0'
  bool irq = false;         // 1/2 + (p-1)/Q = 1/R
  bool ranges = false;      // 2 < Q0, Q < 2d/(d-2), 1 <= R < 2d/(d+4)
  bool valid() const { return admissible && admis && irq && ranges; }
};

ExponentTable validate_exponents(ExponentTable table);

// (5, 2) returns the reference table (12/5, 3, 3, 20/9, 20/19). Otherwise 1/Q0 and 1/Q are searched over
// fractions with denominators up to 240, smallest denominator first, ties
// broken towards the middle of the feasible interval. Throws no-solution
// outside d >= 5, 1 + 4/d < p < 1 + 4/(d-2).
ExponentTable default_exponents(int dim, Rational p);
// p must be a fraction with denominator at most 1000.
ExponentTable default_exponents(int dim, double p);
Rational to_rational(double x, long long max_denominator = 1000);

struct Interval {
  double a = 0.0;
  double b = 0.0;
  double length() const { return b - a; }
};

struct NormReport {
  std::string name;
  Interval interval;
  double value = 0.0;
  double bound = 0.0;  // the shape the estimate predicts, without its constant
  double ratio = 0.0;  // value / bound
};

// <x> = (1 + x^2)^(1/2)
double japanese_bracket(double x);

// (int_I ||u(t)||_{X}^q dt)^(1/q) by the trapezoid rule over the samples in I,
// X = L^r or W^{1,r}; sup for q = inf. Bound shape <|I|>^(1/q).
NormReport strichartz_norm(const Trajectory& traj, const Exponent& q, const Exponent& r, bool derivative,
                           const Interval& interval);

// || |P_N u| |P_M u| ||_{L^2_{t,x}} against <|I|>^(1/2) M^((d-2)/2) / (<N><M>).
NormReport bilinear_norm(const Trajectory& traj, int n_band, int m_band, const Interval& interval);

struct SmoothingProfile {
  std::vector<NormReport> rows;
  double slope = 0.0;  // least squares slope of log value against log N
};

// ||P_N F(u)||_{L^{q0'}_t L^{r0'}_x} for N = 2^j, j >= 0.
SmoothingProfile smoothing_profile(const Trajectory& traj, const std::vector<int>& bands, const Interval& interval,
                                   const ExponentTable& table);

// ||F(f)||_{W^{1,R}} / ||f||_H^p, 0 for f = 0.
double ffix_ratio(const RadialField& f, const NlsParams& params, const ExponentTable& table);

// Sums of four complex Gaussians a_k exp(-(r/s_k)^2) with a_k standard complex
// normal and s_k uniform in [0.5, 3].
RadialField random_smooth_field(const RadialGrid& grid, std::uint64_t seed);
double ffix_family_max(const RadialGrid& grid, const NlsParams& params, const ExponentTable& table,
                       std::size_t draws, std::uint64_t seed);

// norm,interval,value,bound_shape_value,ratio
std::string norm_csv(const std::vector<NormReport>& reports);

}  // namespace nlslab
