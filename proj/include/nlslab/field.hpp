#pragma once

#include <complex>
#include <vector>

#include "nlslab/grid.hpp"

namespace nlslab {

using cplx = std::complex<double>;
using CVec = std::vector<cplx>;

// Complex samples of a radial profile at the grid nodes.
struct RadialField {
  RadialGrid grid;
  CVec values;

  RadialField() = default;
  RadialField(RadialGrid g, CVec v);
  explicit RadialField(RadialGrid g);

  template <class Fn>
  static RadialField sample(const RadialGrid& g, Fn&& fn) {
    RadialField f(g);
    const auto& r = g.nodes();
    for (std::size_t i = 0; i < r.size(); ++i) f.values[i] = cplx(fn(r[i]));
    return f;
  }

  std::size_t size() const { return values.size(); }
  bool finite() const;

  RadialField& operator+=(const RadialField& o);
  RadialField& operator-=(const RadialField& o);
  RadialField& operator*=(cplx s);
};

RadialField operator+(RadialField a, const RadialField& b);
RadialField operator-(RadialField a, const RadialField& b);
RadialField operator*(cplx s, RadialField a);

// Coefficients at the dual frequencies; they approximate the Fourier transform
// of the profile at k_m.
struct SpectralField {
  RadialGrid grid;
  CVec coeffs;

  SpectralField() = default;
  SpectralField(RadialGrid g, CVec c);
  explicit SpectralField(RadialGrid g);

  std::size_t size() const { return coeffs.size(); }

  SpectralField& operator+=(const SpectralField& o);
  SpectralField& operator-=(const SpectralField& o);
  SpectralField& operator*=(cplx s);
};

SpectralField operator+(SpectralField a, const SpectralField& b);
SpectralField operator-(SpectralField a, const SpectralField& b);
SpectralField operator*(cplx s, SpectralField a);

void require_same_grid(const RadialGrid& a, const RadialGrid& b, const char* where);

}  // namespace nlslab
