#pragma once

#include <limits>
#include <string>
#include <vector>

#include "nlslab/field.hpp"

namespace nlslab {

SpectralField hankel_forward(const RadialField& f);
RadialField hankel_inverse(const SpectralField& F);

// Multiply every coefficient by symbol(k_m).
template <class Symbol>
SpectralField apply_symbol(SpectralField F, Symbol&& symbol) {
  const auto& k = F.grid.knodes();
  for (std::size_t m = 0; m < k.size(); ++m) F.coeffs[m] *= symbol(k[m]);
  return F;
}

// Smooth cutoff: 1 on [0,1], 0 on [2,inf).
double bump(double x);

// Dyadic band with N = 2^j. Range(M, N) stores M = 2^m.
struct DyadicBand {
  enum class Kind { Below, At, Above, Range };
  Kind kind = Kind::Below;
  int j = 0;
  int m = 0;

  static constexpr int kMinExponent = -20;
  static constexpr int kMaxExponent = 20;

  static DyadicBand below(int j) { return {Kind::Below, j, 0}; }
  static DyadicBand at(int j) { return {Kind::At, j, 0}; }
  static DyadicBand above(int j) { return {Kind::Above, j, 0}; }
  // P_{M < . <= N}
  static DyadicBand range(int m, int j) { return {Kind::Range, j, m}; }
  // P_{>= N} in the paper's convention is P_{> N/2}.
  static DyadicBand at_least(int j) { return above(j - 1); }
  // P_{< N} is P_{<= N/2}.
  static DyadicBand less_than(int j) { return below(j - 1); }

  double n_value() const;
  std::string label() const;
};

double band_multiplier(const DyadicBand& band, double k);
RadialField lp_project(const RadialField& f, const DyadicBand& band);
SpectralField lp_project(const SpectralField& F, const DyadicBand& band);

struct Space {
  enum class Kind { L2, Lq, H, Hdot, W1q };
  Kind kind = Kind::L2;
  double exponent = 2.0;

  static Space l2() { return {Kind::L2, 2.0}; }
  static Space lq(double q) { return {Kind::Lq, q}; }
  static Space h() { return {Kind::H, 1.0}; }
  static Space hdot(double s) { return {Kind::Hdot, s}; }
  static Space w1q(double q) { return {Kind::W1q, q}; }
};

constexpr double kInf = std::numeric_limits<double>::infinity();

// L^q norms use the node quadrature; L^inf is the max over nodes, a lower
// bound on the continuum sup. Gradients are spectral.
double norm(const RadialField& f, const Space& space);
double h_norm(const SpectralField& F);
double l2_norm(const SpectralField& F);
double hdot_norm(const SpectralField& F, double s);
cplx inner_h(const SpectralField& a, const SpectralField& b);
cplx inner_l2(const RadialField& a, const RadialField& b);

// Pointwise quadrature sum of |f|^q with the node weights.
double lq_power(const std::vector<double>& density, const RadialGrid& grid, double q);

// d/dr at the nodes.
CVec radial_derivative(const SpectralField& F);
CVec radial_derivative(const RadialField& f);

// c_d * int_R^rmax g(r) r^(d-1) dr for a nodal density g, using local degree-7
// interpolation on each cell. vanishes_at_rmax adds the boundary value g=0.
double radial_integral(const RadialGrid& grid, const std::vector<double>& density, double radius,
                       bool vanishes_at_rmax);

// int_{|x|>R} |f|^2 (+ |grad f|^2).
double tail(const RadialField& f, double radius, bool with_gradient);

// Sum of the Fourier-Bessel series at arbitrary radii in [0, rmax].
CVec evaluate(const SpectralField& F, const std::vector<double>& radii);

}  // namespace nlslab
