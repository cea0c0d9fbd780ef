#include "nlslab/grid.hpp"

#include <Eigen/Dense>
#include <boost/math/quadrature/gauss.hpp>
#include <boost/math/special_functions/bessel.hpp>
#include <boost/math/special_functions/gamma.hpp>

#include <algorithm>
#include <cmath>
#include <cstring>
#include <future>
#include <map>
#include <mutex>
#include <numbers>
#include <tuple>

#include "nlslab/error.hpp"

namespace nlslab {

struct GridData {
  int dim = 0;
  double rmax = 0.0;
  std::size_t n = 0;
  double nu = 0.0;
  double sphere = 0.0;
  double volume = 0.0;
  std::vector<double> zeros;  // j_1 .. j_n
  std::vector<double> jnext;  // |J_{nu+1}(j_m)|
  std::vector<double> nodes, weights, knodes, kweights, rscale, kscale;
  std::vector<double> kernel;
  std::vector<double> aug;

  mutable std::once_flag deriv_once;
  mutable std::vector<double> deriv;
  mutable std::once_flag cells_once[2];
  mutable std::vector<RadialGrid::CellRule> cells[2];
};

namespace {

using boost::math::cyl_bessel_j;

void correct_end_weights(GridData& g) {
  // Match the two lowest even moments of r^(d-1) on [0, rmax] with the last
  // two weights; the natural Fourier-Bessel weights undercount the ball.
  const std::size_t n = g.n;
  const double R = g.rmax;
  const int d = g.dim;
  double s0 = 0.0, s1 = 0.0;
  for (std::size_t i = 0; i + 2 < n; ++i) {
    const double x = g.nodes[i] / R;
    s0 += g.weights[i];
    s1 += g.weights[i] * x * x;
  }
  const double e0 = g.sphere * std::pow(R, d) / d;
  const double e1 = g.sphere * std::pow(R, d) / (d + 2);
  const double xa = g.nodes[n - 2] / R, xb = g.nodes[n - 1] / R;
  const double a2 = xa * xa, b2 = xb * xb;
  const double r0 = e0 - s0, r1 = e1 - s1;
  const double det = b2 - a2;
  const double wa = (r0 * b2 - r1) / det;
  const double wb = (r1 - r0 * a2) / det;
  if (wa > 0.0 && wb > 0.0) {
    g.weights[n - 2] = wa;
    g.weights[n - 1] = wb;
    return;
  }
  const double only = r0 - g.weights[n - 2];
  if (only > 0.0) g.weights[n - 1] = only;
}

void build_kernel(GridData& g) {
  const std::size_t n = g.n;
  const double S = g.zeros.size() > n ? g.zeros[n] : 0.0;
  Eigen::MatrixXd t(n, n);
  for (std::size_t m = 0; m < n; ++m) {
    for (std::size_t i = m; i < n; ++i) {
      const double v = 2.0 / S * cyl_bessel_j(g.nu, g.zeros[m] * g.zeros[i] / S) /
                       (g.jnext[m] * g.jnext[i]);
      t(m, i) = v;
      t(i, m) = v;
    }
  }
  // One Newton-Schulz step pulls the sampled kernel onto the orthogonal group.
  Eigen::MatrixXd t2 = t * t;
  t2 = -t2;
  t2.diagonal().array() += 3.0;
  Eigen::MatrixXd q = 0.5 * (t * t2);
  Eigen::MatrixXd sym = 0.5 * (q + q.transpose());
  g.kernel.resize(n * n);
  for (std::size_t i = 0; i < n; ++i)
    for (std::size_t j = 0; j < n; ++j) g.kernel[i * n + j] = sym(i, j);
}

std::shared_ptr<const GridData> make_grid(int dim, double rmax, std::size_t n) {
  auto g = std::make_shared<GridData>();
  g->dim = dim;
  g->rmax = rmax;
  g->n = n;
  g->nu = dim / 2.0 - 1.0;
  g->sphere = 2.0 * std::pow(std::numbers::pi, dim / 2.0) / boost::math::tgamma(dim / 2.0);
  g->volume = g->sphere * std::pow(rmax, dim) / dim;

  g->zeros.resize(n + 1);
  boost::math::cyl_bessel_j_zero(g->nu, 1, static_cast<unsigned>(n + 1), g->zeros.begin());
  const double S = g->zeros[n];
  const double V = S / rmax;

  g->jnext.resize(n);
  g->nodes.resize(n);
  g->knodes.resize(n);
  g->weights.resize(n);
  g->kweights.resize(n);
  const double twopi_d = std::pow(2.0 * std::numbers::pi, -dim);
  for (std::size_t i = 0; i < n; ++i) {
    const double z = g->zeros[i];
    g->jnext[i] = std::abs(cyl_bessel_j(g->nu + 1.0, z));
    g->nodes[i] = z / V;
    g->knodes[i] = z / rmax;
    const double jj = g->jnext[i] * g->jnext[i];
    g->weights[i] = g->sphere * std::pow(g->nodes[i], 2.0 * g->nu) * 2.0 / (V * V * jj);
    g->kweights[i] =
        twopi_d * g->sphere * 2.0 / (rmax * rmax * jj) * std::pow(g->knodes[i], 2.0 * g->nu);
  }
  correct_end_weights(*g);
  g->rscale.resize(n);
  g->kscale.resize(n);
  for (std::size_t i = 0; i < n; ++i) {
    g->rscale[i] = std::sqrt(g->weights[i]);
    g->kscale[i] = 1.0 / std::sqrt(g->kweights[i]);
  }
  build_kernel(*g);

  g->aug.reserve(n + 4);
  for (int i = 2; i >= 0; --i) g->aug.push_back(-g->nodes[static_cast<std::size_t>(i)]);
  for (double r : g->nodes) g->aug.push_back(r);
  g->aug.push_back(rmax);
  return g;
}

using Key = std::tuple<int, double, std::size_t>;

std::mutex cache_mutex;
std::map<Key, std::shared_future<std::shared_ptr<const GridData>>> cache;

}  // namespace

RadialGrid build_grid(int dim, double rmax, std::size_t n) {
  if (dim < 3) throw Error(ErrorKind::InvalidDimension, "dim must be >= 3, got " + std::to_string(dim));
  if (n < 16) throw Error(ErrorKind::InsufficientResolution, "n must be >= 16, got " + std::to_string(n));
  if (!(rmax > 0.0) || !std::isfinite(rmax))
    throw Error(ErrorKind::InvalidArgument, "rmax must be positive and finite");

  std::promise<std::shared_ptr<const GridData>> promise;
  std::shared_future<std::shared_ptr<const GridData>> future;
  bool builder = false;
  {
    std::lock_guard<std::mutex> lock(cache_mutex);
    const Key key{dim, rmax, n};
    auto it = cache.find(key);
    if (it == cache.end()) {
      future = promise.get_future().share();
      cache.emplace(key, future);
      builder = true;
    } else {
      future = it->second;
    }
  }
  if (builder) {
    try {
      promise.set_value(make_grid(dim, rmax, n));
    } catch (...) {
      {
        std::lock_guard<std::mutex> lock(cache_mutex);
        cache.erase(Key{dim, rmax, n});
      }
      promise.set_exception(std::current_exception());
    }
  }
  RadialGrid grid;
  grid.data_ = future.get();
  return grid;
}

int RadialGrid::dim() const { return data_->dim; }
double RadialGrid::rmax() const { return data_->rmax; }
std::size_t RadialGrid::n() const { return data_->n; }
double RadialGrid::nu() const { return data_->nu; }
const std::vector<double>& RadialGrid::nodes() const { return data_->nodes; }
const std::vector<double>& RadialGrid::weights() const { return data_->weights; }
const std::vector<double>& RadialGrid::knodes() const { return data_->knodes; }
const std::vector<double>& RadialGrid::kweights() const { return data_->kweights; }
double RadialGrid::sphere_area() const { return data_->sphere; }
double RadialGrid::ball_volume() const { return data_->volume; }
const double* RadialGrid::transform() const { return data_->kernel.data(); }
const std::vector<double>& RadialGrid::rscale() const { return data_->rscale; }
const std::vector<double>& RadialGrid::kscale() const { return data_->kscale; }
const std::vector<double>& RadialGrid::abscissae() const { return data_->aug; }

bool RadialGrid::operator==(const RadialGrid& other) const {
  if (data_ == other.data_) return true;
  if (!data_ || !other.data_) return false;
  return data_->dim == other.data_->dim && data_->rmax == other.data_->rmax &&
         data_->n == other.data_->n;
}

const std::vector<double>& RadialGrid::derivative_matrix() const {
  const GridData& g = *data_;
  std::call_once(g.deriv_once, [&g] {
    const std::size_t n = g.n;
    const double c = boost::math::tgamma(g.nu + 1.0) * std::pow(2.0, g.nu);
    g.deriv.assign(n * n, 0.0);
    for (std::size_t i = 0; i < n; ++i) {
      for (std::size_t m = 0; m < n; ++m) {
        const double x = g.knodes[m] * g.nodes[i];
        g.deriv[i * n + m] = -g.kweights[m] * g.knodes[m] * c * std::pow(x, -g.nu) *
                             cyl_bessel_j(g.nu + 1.0, x);
      }
    }
  });
  return g.deriv;
}

const std::vector<RadialGrid::CellRule>& RadialGrid::cell_rules(bool with_end) const {
  const GridData& g = *data_;
  const int slot = with_end ? 1 : 0;
  std::call_once(g.cells_once[slot], [&g, slot, with_end] {
    using Rule = boost::math::quadrature::gauss<double, 8>;
    const auto& x = g.aug;
    const std::size_t last = with_end ? x.size() - 1 : x.size() - 2;
    std::vector<CellRule>& cells = g.cells[slot];
    cells.resize(g.n + 1);
    for (std::size_t c = 0; c <= g.n; ++c) {
      CellRule rule{};
      rule.a = c == 0 ? 0.0 : g.nodes[c - 1];
      rule.b = c == g.n ? g.rmax : g.nodes[c];
      const std::ptrdiff_t centre = static_cast<std::ptrdiff_t>(c) + 2;
      std::ptrdiff_t first = std::clamp<std::ptrdiff_t>(centre - 3, 0,
                                                        static_cast<std::ptrdiff_t>(last) - 7);
      rule.first = static_cast<std::size_t>(first);
      std::fill(std::begin(rule.w), std::end(rule.w), 0.0);
      const double half = 0.5 * (rule.b - rule.a);
      const double mid = 0.5 * (rule.b + rule.a);
      auto add = [&](double t, double wq) {
        const double r = mid + half * t;
        const double jac = wq * half * g.sphere * std::pow(r, g.dim - 1);
        for (int s = 0; s < 8; ++s) {
          double l = 1.0;
          const double xs = x[rule.first + static_cast<std::size_t>(s)];
          for (int u = 0; u < 8; ++u) {
            if (u == s) continue;
            const double xu = x[rule.first + static_cast<std::size_t>(u)];
            l *= (r - xu) / (xs - xu);
          }
          rule.w[s] += jac * l;
        }
      };
      const auto& ab = Rule::abscissa();
      const auto& wt = Rule::weights();
      for (std::size_t q = 0; q < ab.size(); ++q) {
        if (ab[q] == 0.0) {
          add(0.0, wt[q]);
        } else {
          add(ab[q], wt[q]);
          add(-ab[q], wt[q]);
        }
      }
      cells[c] = rule;
    }
  });
  return g.cells[slot];
}

}  // namespace nlslab
