#pragma once

#include <cstddef>
#include <memory>
#include <vector>

namespace nlslab {

struct GridData;

// Bessel-zero collocation grid for radial functions on the ball of radius rmax
// in dimension dim. Instances are shared: build_grid returns the cached grid
// for a given (dim, rmax, n).
class RadialGrid {
 public:
  RadialGrid() = default;

  bool valid() const { return data_ != nullptr; }
  int dim() const;
  double rmax() const;
  std::size_t n() const;
  double nu() const;

  const std::vector<double>& nodes() const;
  const std::vector<double>& weights() const;
  const std::vector<double>& knodes() const;
  const std::vector<double>& kweights() const;

  // Surface area of the unit sphere, c_d = 2 pi^(d/2) / Gamma(d/2).
  double sphere_area() const;
  // Exact volume of the ball of radius rmax.
  double ball_volume() const;

  // Symmetric orthogonal kernel and the diagonal scalings of the transform:
  // F = kscale * T (rscale * f).
  const double* transform() const;
  const std::vector<double>& rscale() const;
  const std::vector<double>& kscale() const;

  // Row-major n x n map from spectral coefficients to d/dr at the nodes.
  // Built on first use.
  const std::vector<double>& derivative_matrix() const;

  // Per-cell stencil weights for integrating a nodal density against c_d r^(d-1).
  struct CellRule {
    std::size_t first;   // first stencil index into the augmented abscissae
    double a, b;         // cell bounds
    double w[8];         // weights on the stencil values for the full cell
  };
  // with_end: the density is known to vanish at rmax.
  const std::vector<CellRule>& cell_rules(bool with_end) const;
  // Augmented abscissae: three mirrored nodes, the nodes, then rmax.
  const std::vector<double>& abscissae() const;

  bool operator==(const RadialGrid& other) const;
  bool operator!=(const RadialGrid& other) const { return !(*this == other); }

 private:
  friend RadialGrid build_grid(int dim, double rmax, std::size_t n);
  std::shared_ptr<const GridData> data_;
};

RadialGrid build_grid(int dim, double rmax, std::size_t n);

}  // namespace nlslab
