#include "dk/bernstein.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace dk {

namespace {

double binomial(int n, int k) {
  if (k < 0 || k > n) return 0.0;
  k = std::min(k, n - k);
  double c = 1.0;
  for (int i = 1; i <= k; ++i) c = c * static_cast<double>(n - k + i) / static_cast<double>(i);
  return c;
}

// Tensor product of per-axis arrays (each of length n+1), first axis fastest.
Vec tensor(const std::vector<Vec>& axes, std::size_t size) {
  const std::size_t d = axes.size();
  const std::size_t m = axes.front().size();
  Vec out(size);
  for (std::size_t flat = 0; flat < size; ++flat) {
    std::size_t rest = flat;
    double v = 1.0;
    for (std::size_t k = 0; k < d; ++k) {
      v *= axes[k][rest % m];
      rest /= m;
    }
    out[flat] = v;
  }
  return out;
}

}  // namespace

// ------------------------------------------------------------ BernsteinGrid

BernsteinGrid::BernsteinGrid(Box box, int degree) : box_(std::move(box)), degree_(degree) {
  if (!box_.is_cube()) throw std::invalid_argument("BernsteinGrid: box must be a cube [a,b]^d");
  if (box_.dimension() > kMaxBernsteinDimension)
    throw std::invalid_argument("BernsteinGrid: dimension " + std::to_string(box_.dimension()) + " exceeds cap " +
                                std::to_string(kMaxBernsteinDimension));
  if (degree < 1 || degree > kMaxBernsteinDegree)
    throw std::invalid_argument("BernsteinGrid: degree must be in [1, " + std::to_string(kMaxBernsteinDegree) + "]");
  size_ = 1;
  for (int k = 0; k < box_.dimension(); ++k) size_ *= static_cast<std::size_t>(degree_ + 1);
}

std::vector<int> BernsteinGrid::multi_index(std::size_t flat) const {
  if (flat >= size_) throw std::out_of_range("BernsteinGrid::multi_index: flat index out of range");
  std::vector<int> j(static_cast<std::size_t>(dimension()));
  for (auto& jk : j) {
    jk = static_cast<int>(flat % static_cast<std::size_t>(degree_ + 1));
    flat /= static_cast<std::size_t>(degree_ + 1);
  }
  return j;
}

std::size_t BernsteinGrid::flat_index(std::span<const int> j) const {
  if (j.size() != static_cast<std::size_t>(dimension()))
    throw std::invalid_argument("BernsteinGrid: multi-index has wrong length");
  std::size_t flat = 0;
  std::size_t stride = 1;
  for (int jk : j) {
    if (jk < 0 || jk > degree_) throw std::invalid_argument("BernsteinGrid: multi-index entry out of [0, n]");
    flat += static_cast<std::size_t>(jk) * stride;
    stride *= static_cast<std::size_t>(degree_ + 1);
  }
  return flat;
}

Vec BernsteinGrid::node(std::size_t flat) const {
  const auto j = multi_index(flat);
  Vec x(j.size());
  const double a = box_.lower[0];
  const double b = box_.upper[0];
  for (std::size_t k = 0; k < j.size(); ++k) x[k] = a + j[k] * (b - a) / degree_;
  return x;
}

void BernsteinGrid::check_point(std::span<const double> x) const {
  if (x.size() != static_cast<std::size_t>(dimension()))
    throw std::invalid_argument("BernsteinGrid: point has wrong dimension");
  if (!box_.contains(x)) throw std::domain_error("BernsteinGrid: point outside the box");
}

Vec BernsteinGrid::axis_derivative(double xk, int order) const {
  const int n = degree_;
  Vec out(static_cast<std::size_t>(n + 1), 0.0);
  if (order > n) return out;
  const double a = box_.lower[0];
  const double len = box_.upper[0] - a;
  const double t = (xk - a) / len;
  const int m = n - order;
  Vec base(static_cast<std::size_t>(m + 1));
  for (int i = 0; i <= m; ++i) base[static_cast<std::size_t>(i)] = binomial(m, i) * std::pow(t, i) * std::pow(1.0 - t, m - i);
  if (order == 0) return base;
  // d^r/dt^r b_{j,n} = n!/(n-r)! sum_i (-1)^(r-i) C(r,i) b_{j-i,n-r}
  double scale = 1.0;
  for (int i = 0; i < order; ++i) scale *= static_cast<double>(n - i) / len;
  for (int j = 0; j <= n; ++j) {
    double s = 0.0;
    for (int i = 0; i <= order; ++i) {
      const int idx = j - i;
      if (idx < 0 || idx > m) continue;
      const double sign = ((order - i) % 2 == 0) ? 1.0 : -1.0;
      s += sign * binomial(order, i) * base[static_cast<std::size_t>(idx)];
    }
    out[static_cast<std::size_t>(j)] = scale * s;
  }
  return out;
}

double BernsteinGrid::basis(std::span<const int> j, std::span<const double> x) const {
  check_point(x);
  flat_index(j);  // validates
  double v = 1.0;
  const double a = box_.lower[0];
  const double len = box_.upper[0] - a;
  for (std::size_t k = 0; k < j.size(); ++k) {
    const double t = (x[k] - a) / len;
    v *= binomial(degree_, j[k]) * std::pow(t, j[k]) * std::pow(1.0 - t, degree_ - j[k]);
  }
  return v;
}

Vec BernsteinGrid::basis_all(std::span<const double> x) const {
  check_point(x);
  std::vector<Vec> axes;
  for (double xk : x) axes.push_back(axis_derivative(xk, 0));
  return tensor(axes, size_);
}

Vec BernsteinGrid::basis_all_derivative(std::span<const double> x, std::span<const int> orders) const {
  check_point(x);
  if (orders.size() != x.size()) throw std::invalid_argument("basis_all_derivative: orders has wrong length");
  std::vector<Vec> axes;
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (orders[k] < 0) throw std::invalid_argument("basis_all_derivative: negative order");
    axes.push_back(axis_derivative(x[k], orders[k]));
  }
  return tensor(axes, size_);
}

Vec BernsteinGrid::basis_all_gradients(std::span<const double> x) const {
  const std::size_t d = x.size();
  Vec out(size_ * d);
  std::vector<int> orders(d, 0);
  for (std::size_t k = 0; k < d; ++k) {
    orders.assign(d, 0);
    orders[k] = 1;
    const Vec part = basis_all_derivative(x, orders);
    for (std::size_t j = 0; j < size_; ++j) out[j * d + k] = part[j];
  }
  return out;
}

Vec BernsteinGrid::basis_all_laplacians(std::span<const double> x) const {
  const std::size_t d = x.size();
  Vec out(size_, 0.0);
  std::vector<int> orders(d, 0);
  for (std::size_t k = 0; k < d; ++k) {
    orders.assign(d, 0);
    orders[k] = 2;
    const Vec part = basis_all_derivative(x, orders);
    for (std::size_t j = 0; j < size_; ++j) out[j] += part[j];
  }
  return out;
}

// ------------------------------------------------------ BernsteinPolynomial

BernsteinPolynomial::BernsteinPolynomial(BernsteinGrid grid, Vec coefficients)
    : grid_(std::move(grid)), coefficients_(std::move(coefficients)) {
  if (coefficients_.size() != grid_.size())
    throw std::invalid_argument("BernsteinPolynomial: need one coefficient per grid point");
}

double BernsteinPolynomial::value(std::span<const double> x) const {
  const Vec phi = grid_.basis_all(x);
  double s = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) s += coefficients_[j] * phi[j];
  return s;
}

double BernsteinPolynomial::derivative(std::span<const double> x, std::span<const int> orders) const {
  const Vec phi = grid_.basis_all_derivative(x, orders);
  double s = 0.0;
  for (std::size_t j = 0; j < phi.size(); ++j) s += coefficients_[j] * phi[j];
  return s;
}

Vec BernsteinPolynomial::gradient(std::span<const double> x) const {
  const std::size_t d = x.size();
  const Vec g = grid_.basis_all_gradients(x);
  Vec out(d, 0.0);
  for (std::size_t j = 0; j < coefficients_.size(); ++j)
    for (std::size_t k = 0; k < d; ++k) out[k] += coefficients_[j] * g[j * d + k];
  return out;
}

double BernsteinPolynomial::laplacian(std::span<const double> x) const {
  const Vec l = grid_.basis_all_laplacians(x);
  double s = 0.0;
  for (std::size_t j = 0; j < l.size(); ++j) s += coefficients_[j] * l[j];
  return s;
}

BernsteinPolynomial bernstein_operator(const BernsteinGrid& grid, const ScalarField& g) {
  Vec c(grid.size());
  for (std::size_t j = 0; j < grid.size(); ++j) {
    c[j] = g(grid.node(j));
    if (!std::isfinite(c[j]))
      throw std::domain_error("bernstein_operator: non-finite sample at grid point " + std::to_string(j));
  }
  return BernsteinPolynomial(grid, std::move(c));
}

// ---------------------------------------------------------- discretization

Vec discretize_weights(const BernsteinGrid& grid, const AtomicMeasure& mu) {
  if (mu.dimension() != grid.dimension()) throw std::invalid_argument("discretize: dimension mismatch");
  Vec z(grid.size(), 0.0);
  for (std::size_t i = 0; i < mu.size(); ++i) {
    if (!grid.box().contains(mu.location(i)))
      throw std::domain_error("discretize: atom " + std::to_string(i) + " lies outside the grid box");
    const Vec phi = grid.basis_all(mu.location(i));
    for (std::size_t j = 0; j < z.size(); ++j) z[j] += mu.weight(i) * phi[j];
  }
  return z;
}

AtomicMeasure grid_measure(const BernsteinGrid& grid, std::span<const double> z) {
  if (z.size() != grid.size()) throw std::invalid_argument("grid_measure: need one weight per grid point");
  AtomicMeasure out(grid.dimension());
  for (std::size_t j = 0; j < z.size(); ++j) {
    if (z[j] < 0.0 || !std::isfinite(z[j])) throw std::domain_error("grid_measure: weights must be finite and >= 0");
    if (z[j] > 0.0) out.add_atom(grid.node(j), z[j]);
  }
  return out;
}

AtomicMeasure discretize_measure(const BernsteinGrid& grid, const AtomicMeasure& mu) {
  return grid_measure(grid, discretize_weights(grid, mu));
}

// ----------------------------------------------------------- BernsteinLift

BernsteinLift::BernsteinLift(BernsteinGrid grid, FunctionalPtr base)
    : Functional(grid.dimension(), Smoothness{base ? base->smoothness().k : 0, std::numeric_limits<int>::max()}),
      grid_(std::move(grid)),
      base_(std::move(base)) {
  if (!base_) throw std::invalid_argument("BernsteinLift: null functional");
  if (base_->dimension() != grid_.dimension()) throw std::invalid_argument("BernsteinLift: dimension mismatch");
}

double BernsteinLift::outer(std::span<const double> z) const { return base_->value(grid_measure(grid_, z)); }

Vec BernsteinLift::first_derivative_coefficients(const AtomicMeasure& mu) const {
  const AtomicMeasure chi = discretize_measure(grid_, mu);
  Vec c(grid_.size());
  for (std::size_t j = 0; j < c.size(); ++j) c[j] = base_->first_derivative(chi, grid_.node(j));
  return c;
}

Vec BernsteinLift::second_derivative_coefficients(const AtomicMeasure& mu) const {
  const AtomicMeasure chi = discretize_measure(grid_, mu);
  const std::size_t m = grid_.size();
  std::vector<Vec> nodes(m);
  for (std::size_t j = 0; j < m; ++j) nodes[j] = grid_.node(j);
  Vec c(m * m);
  for (std::size_t j = 0; j < m; ++j)
    for (std::size_t i = 0; i < m; ++i) c[j * m + i] = base_->second_derivative(chi, nodes[j], nodes[i]);
  return c;
}

BernsteinPolynomial BernsteinLift::first_derivative_polynomial(const AtomicMeasure& mu) const {
  return BernsteinPolynomial(grid_, first_derivative_coefficients(mu));
}

double BernsteinLift::do_value(const AtomicMeasure& mu) const { return outer(coordinates(mu)); }

double BernsteinLift::do_first(const AtomicMeasure& mu, std::span<const double> x) const {
  return first_derivative_polynomial(mu).value(x);
}

void BernsteinLift::do_first_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                      std::span<double> out) const {
  const Vec g = first_derivative_polynomial(mu).gradient(x);
  std::copy(g.begin(), g.end(), out.begin());
}

double BernsteinLift::do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const {
  return first_derivative_polynomial(mu).laplacian(x);
}

double BernsteinLift::do_second(const AtomicMeasure& mu, std::span<const double> x,
                                std::span<const double> y) const {
  const Vec c = second_derivative_coefficients(mu);
  const Vec px = grid_.basis_all(x);
  const Vec py = grid_.basis_all(y);
  const std::size_t m = grid_.size();
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < m; ++i) row += c[j * m + i] * py[i];
    s += px[j] * row;
  }
  return s;
}

void BernsteinLift::do_second_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                       std::span<const double> y, std::span<double> out) const {
  const Vec c = second_derivative_coefficients(mu);
  const Vec gx = grid_.basis_all_gradients(x);
  const Vec py = grid_.basis_all(y);
  const std::size_t m = grid_.size();
  const std::size_t d = x.size();
  std::fill(out.begin(), out.end(), 0.0);
  for (std::size_t j = 0; j < m; ++j) {
    double row = 0.0;
    for (std::size_t i = 0; i < m; ++i) row += c[j * m + i] * py[i];
    for (std::size_t k = 0; k < d; ++k) out[k] += gx[j * d + k] * row;
  }
}

double BernsteinLift::do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const {
  const Vec c = second_derivative_coefficients(mu);
  const Vec g = grid_.basis_all_gradients(x);
  const std::size_t m = grid_.size();
  const std::size_t d = x.size();
  double s = 0.0;
  for (std::size_t j = 0; j < m; ++j) {
    for (std::size_t i = 0; i < m; ++i) {
      double dot = 0.0;
      for (std::size_t k = 0; k < d; ++k) dot += g[j * d + k] * g[i * d + k];
      s += c[j * m + i] * dot;
    }
  }
  return s;
}

FunctionalPtr lift_functional(const BernsteinGrid& grid, FunctionalPtr F) {
  return std::make_shared<BernsteinLift>(grid, std::move(F));
}

// ------------------------------------------------------------------ cutoff

AtomicMeasure cutoff_measure(const SmoothFunction& psi, const AtomicMeasure& mu) {
  if (psi.dimension() != mu.dimension()) throw std::invalid_argument("cutoff_measure: dimension mismatch");
  AtomicMeasure out(mu.dimension());
  for (std::size_t i = 0; i < mu.size(); ++i) {
    const double w = mu.weight(i) * psi.eval(mu.location(i));
    if (w < 0.0) throw std::domain_error("cutoff_measure: cutoff is negative at atom " + std::to_string(i));
    if (w > 0.0) out.add_atom(mu.location(i), w);
  }
  return out;
}

CutoffFunctional::CutoffFunctional(SmoothFunction psi, FunctionalPtr base)
    : Functional(psi.dimension(), base ? base->smoothness() : Smoothness{}), psi_(std::move(psi)), base_(std::move(base)) {
  if (!base_) throw std::invalid_argument("CutoffFunctional: null functional");
  if (base_->dimension() != psi_.dimension()) throw std::invalid_argument("CutoffFunctional: dimension mismatch");
  auto supp = psi_.support();
  if (!supp) throw std::invalid_argument("CutoffFunctional: cutoff must have compact support");
  support_ = *supp;
}

bool CutoffFunctional::inside(std::span<const double> x) const {
  for (std::size_t k = 0; k < x.size(); ++k) {
    if (!(x[k] > support_.lower[k] && x[k] < support_.upper[k])) return false;
  }
  return true;
}

double CutoffFunctional::do_value(const AtomicMeasure& mu) const { return base_->value(cutoff_measure(psi_, mu)); }

double CutoffFunctional::do_first(const AtomicMeasure& mu, std::span<const double> x) const {
  if (!inside(x)) return 0.0;
  return base_->first_derivative(cutoff_measure(psi_, mu), x) * psi_.eval(x);
}

void CutoffFunctional::do_first_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                         std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (!inside(x)) return;
  const AtomicMeasure theta = cutoff_measure(psi_, mu);
  const double f1 = base_->first_derivative(theta, x);
  const Vec g1 = base_->first_derivative_gradient(theta, x);
  const double p = psi_.eval(x);
  const Vec gp = psi_.gradient(x);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = g1[k] * p + f1 * gp[k];
}

double CutoffFunctional::do_first_laplacian(const AtomicMeasure& mu, std::span<const double> x) const {
  if (!inside(x)) return 0.0;
  const AtomicMeasure theta = cutoff_measure(psi_, mu);
  const double f1 = base_->first_derivative(theta, x);
  const Vec g1 = base_->first_derivative_gradient(theta, x);
  const double l1 = base_->first_derivative_laplacian(theta, x);
  const Vec gp = psi_.gradient(x);
  double cross = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) cross += g1[k] * gp[k];
  return l1 * psi_.eval(x) + 2.0 * cross + f1 * psi_.laplacian(x);
}

double CutoffFunctional::do_second(const AtomicMeasure& mu, std::span<const double> x,
                                   std::span<const double> y) const {
  if (!inside(x) || !inside(y)) return 0.0;
  return base_->second_derivative(cutoff_measure(psi_, mu), x, y) * psi_.eval(x) * psi_.eval(y);
}

void CutoffFunctional::do_second_gradient(const AtomicMeasure& mu, std::span<const double> x,
                                          std::span<const double> y, std::span<double> out) const {
  std::fill(out.begin(), out.end(), 0.0);
  if (!inside(x) || !inside(y)) return;
  const AtomicMeasure theta = cutoff_measure(psi_, mu);
  const double f2 = base_->second_derivative(theta, x, y);
  const Vec g2 = base_->second_derivative_gradient(theta, x, y);
  const double px = psi_.eval(x);
  const double py = psi_.eval(y);
  const Vec gp = psi_.gradient(x);
  for (std::size_t k = 0; k < x.size(); ++k) out[k] = (g2[k] * px + f2 * gp[k]) * py;
}

double CutoffFunctional::do_mixed_divergence(const AtomicMeasure& mu, std::span<const double> x) const {
  if (!inside(x)) return 0.0;
  // Uses the symmetry of the base second derivative: grad_y F''(x,y)|_{y=x} = grad_x F''(x,x).
  const AtomicMeasure theta = cutoff_measure(psi_, mu);
  const double f2 = base_->second_derivative(theta, x, x);
  const Vec g2 = base_->second_derivative_gradient(theta, x, x);
  const double mix = base_->mixed_divergence_at_diagonal(theta, x);
  const double p = psi_.eval(x);
  const Vec gp = psi_.gradient(x);
  double cross = 0.0;
  double gp2 = 0.0;
  for (std::size_t k = 0; k < x.size(); ++k) {
    cross += gp[k] * g2[k];
    gp2 += gp[k] * gp[k];
  }
  return p * p * mix + 2.0 * p * cross + f2 * gp2;
}

FunctionalPtr cutoff_functional(SmoothFunction psi, FunctionalPtr F) {
  return std::make_shared<CutoffFunctional>(std::move(psi), std::move(F));
}

SmoothFunction build_cutoff(int n, int dimension) {
  if (n < 1) throw std::invalid_argument("build_cutoff: n must be >= 1");
  return SmoothFunction::plateau_product(dimension, static_cast<double>(n - 1), static_cast<double>(n));
}

FunctionalPtr cylindrical_approximation(FunctionalPtr F, int stage, int degree) {
  if (!F) throw std::invalid_argument("cylindrical_approximation: null functional");
  if (stage < 1) throw std::invalid_argument("cylindrical_approximation: stage must be >= 1");
  const int d = F->dimension();
  BernsteinGrid grid(Box::cube(d, -static_cast<double>(stage), static_cast<double>(stage)), degree);
  return cutoff_functional(build_cutoff(stage, d), lift_functional(grid, std::move(F)));
}

// ------------------------------------------------------------- convergence

std::vector<ConvergenceRow> convergence_table(const FunctionalPtr& F, const Box& box, std::span<const int> degrees,
                                              std::span<const AtomicMeasure> measures,
                                              std::span<const Vec> points) {
  std::vector<ConvergenceRow> rows;
  for (int n : degrees) {
    BernsteinGrid grid(box, n);
    BernsteinLift lift(grid, F);
    const std::size_t m = grid.size();
    std::vector<Vec> phi;
    phi.reserve(points.size());
    for (const auto& x : points) phi.push_back(grid.basis_all(x));

    ConvergenceRow row{n, 0.0, 0.0, 0.0, measures.size()};
    for (const auto& mu : measures) {
      row.sup_err_F = std::max(row.sup_err_F, std::abs(lift.value(mu) - F->value(mu)));
      const Vec c1 = lift.first_derivative_coefficients(mu);
      const Vec c2 = lift.second_derivative_coefficients(mu);
      for (std::size_t a = 0; a < points.size(); ++a) {
        double p1 = 0.0;
        for (std::size_t j = 0; j < m; ++j) p1 += c1[j] * phi[a][j];
        row.sup_err_F1 = std::max(row.sup_err_F1, std::abs(p1 - F->first_derivative(mu, points[a])));
        // Row a of C * phi contracted later with each phi[b].
        Vec left(m, 0.0);
        for (std::size_t j = 0; j < m; ++j)
          for (std::size_t i = 0; i < m; ++i) left[i] += phi[a][j] * c2[j * m + i];
        for (std::size_t b = 0; b < points.size(); ++b) {
          double p2 = 0.0;
          for (std::size_t i = 0; i < m; ++i) p2 += left[i] * phi[b][i];
          row.sup_err_F2 = std::max(row.sup_err_F2, std::abs(p2 - F->second_derivative(mu, points[a], points[b])));
        }
      }
    }
    rows.push_back(row);
  }
  return rows;
}

}  // namespace dk
