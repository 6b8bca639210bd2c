#include "apdfp/linops.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <vector>

#include "apdfp/rng.hpp"

namespace apdfp {

namespace {

void check_length(const char* what, Eigen::Index expected, Eigen::Index got) {
  if (expected != got) {
    throw std::invalid_argument(std::string(what) + ": expected length " +
                                std::to_string(expected) + ", got " +
                                std::to_string(got));
  }
}

}  // namespace

LinearMap::LinearMap(int in_dim, int out_dim, MapKind kind)
    : in_dim_(in_dim), out_dim_(out_dim), kind_(kind) {
  if (in_dim < 0 || out_dim < 0) {
    throw std::invalid_argument("LinearMap: dimensions must be nonnegative");
  }
}

Vector LinearMap::apply(const Vector& x) const {
  check_length("apply", in_dim_, x.size());
  Vector out(out_dim_);
  apply_impl(x, out);
  return out;
}

Vector LinearMap::adjoint_apply(const Vector& y) const {
  check_length("adjoint_apply", out_dim_, y.size());
  Vector out(in_dim_);
  adjoint_impl(y, out);
  return out;
}

DenseMap::DenseMap(Matrix m)
    : LinearMap(static_cast<int>(m.cols()), static_cast<int>(m.rows()),
                MapKind::dense),
      m_(std::move(m)) {}

void DenseMap::apply_impl(const Vector& x, Vector& out) const {
  out.noalias() = m_ * x;
}

void DenseMap::adjoint_impl(const Vector& y, Vector& out) const {
  out.noalias() = m_.transpose() * y;
}

SparseMap::SparseMap(SpMat m)
    : LinearMap(static_cast<int>(m.cols()), static_cast<int>(m.rows()),
                MapKind::sparse),
      m_(std::move(m)) {
  m_.makeCompressed();
}

void SparseMap::apply_impl(const Vector& x, Vector& out) const {
  out.noalias() = m_ * x;
}

void SparseMap::adjoint_impl(const Vector& y, Vector& out) const {
  out.noalias() = m_.transpose() * y;
}

ScaledMap::ScaledMap(std::shared_ptr<const LinearMap> inner, double scale)
    : LinearMap(inner ? inner->in_dim() : 0, inner ? inner->out_dim() : 0,
                MapKind::scaled),
      inner_(std::move(inner)),
      scale_(scale) {
  if (!inner_) throw std::invalid_argument("ScaledMap: null inner map");
}

void ScaledMap::apply_impl(const Vector& x, Vector& out) const {
  out = scale_ * inner_->apply(x);
}

void ScaledMap::adjoint_impl(const Vector& y, Vector& out) const {
  out = scale_ * inner_->adjoint_apply(y);
}

Grad2D::Grad2D(int n) : LinearMap(n * n, 2 * n * n, MapKind::grad2d), n_(n) {
  if (n < 2) throw std::invalid_argument("Grad2D: n must be >= 2");
}

void Grad2D::apply_impl(const Vector& x, Vector& out) const {
  const int n = n_;
  const int np = n * n;
  out.setZero();
  // vertical channel: x(i+1,j) - x(i,j), zero on the last row
  for (int i = 0; i + 1 < n; ++i) {
    for (int j = 0; j < n; ++j) {
      out[i * n + j] = x[(i + 1) * n + j] - x[i * n + j];
    }
  }
  // horizontal channel: x(i,j+1) - x(i,j), zero on the last column
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j + 1 < n; ++j) {
      out[np + i * n + j] = x[i * n + j + 1] - x[i * n + j];
    }
  }
}

void Grad2D::adjoint_impl(const Vector& y, Vector& out) const {
  const int n = n_;
  const int np = n * n;
  out.setZero();
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) {
      double acc = 0.0;
      if (i + 1 < n) acc -= y[i * n + j];
      if (i > 0) acc += y[(i - 1) * n + j];
      if (j + 1 < n) acc -= y[np + i * n + j];
      if (j > 0) acc += y[np + i * n + j - 1];
      out[i * n + j] = acc;
    }
  }
}

namespace {

// Traces one ray through the unit-pixel grid [0,n]x[0,n] and appends
// (pixel, length) triplets for the given sparse row. Siddon-style
// parametric traversal: clip the ray to the grid, then march cell to cell
// accumulating segment lengths.
void trace_ray(int n, int row, double p0x, double p0y, double dx, double dy,
               std::vector<Eigen::Triplet<double>>& trips) {
  constexpr double kEps = 1e-12;
  double s_lo = -std::numeric_limits<double>::infinity();
  double s_hi = std::numeric_limits<double>::infinity();

  const double lo = 0.0, hi = static_cast<double>(n);
  if (std::abs(dx) > kEps) {
    double a = (lo - p0x) / dx, b = (hi - p0x) / dx;
    s_lo = std::max(s_lo, std::min(a, b));
    s_hi = std::min(s_hi, std::max(a, b));
  } else if (p0x <= lo || p0x >= hi) {
    return;  // parallel to the x-slab and outside it
  }
  if (std::abs(dy) > kEps) {
    double a = (lo - p0y) / dy, b = (hi - p0y) / dy;
    s_lo = std::max(s_lo, std::min(a, b));
    s_hi = std::min(s_hi, std::max(a, b));
  } else if (p0y <= lo || p0y >= hi) {
    return;
  }
  if (!(s_lo < s_hi)) return;  // misses the grid

  double s = s_lo;
  double qx = p0x + s * dx;
  double qy = p0y + s * dy;
  int j = std::clamp(static_cast<int>(std::floor(qx)), 0, n - 1);
  int i = std::clamp(static_cast<int>(std::floor(qy)), 0, n - 1);

  while (s < s_hi - kEps) {
    double sx = std::numeric_limits<double>::infinity();
    double sy = std::numeric_limits<double>::infinity();
    if (dx > kEps) sx = (j + 1 - p0x) / dx;
    else if (dx < -kEps) sx = (j - p0x) / dx;
    if (dy > kEps) sy = (i + 1 - p0y) / dy;
    else if (dy < -kEps) sy = (i - p0y) / dy;

    const double s_next = std::min({sx, sy, s_hi});
    const double len = s_next - s;
    if (len > kEps) {
      trips.emplace_back(row, i * n + j, len);
    }
    if (s_next >= s_hi - kEps) break;
    if (sx <= sy) j += (dx > 0.0) ? 1 : -1;
    if (sy <= sx) i += (dy > 0.0) ? 1 : -1;
    if (i < 0 || i >= n || j < 0 || j >= n) break;
    s = s_next;
  }
}

}  // namespace

XRayMap::XRayMap(int n, int n_angles, int n_det, double det_pitch)
    : LinearMap(n * n, n_angles * n_det, MapKind::xray),
      n_(n),
      n_angles_(n_angles),
      n_det_(n_det),
      det_pitch_(det_pitch) {
  if (n < 4) throw std::invalid_argument("XRayMap: n must be >= 4");
  if (n_angles < 1) throw std::invalid_argument("XRayMap: n_angles must be >= 1");
  if (n_det < 1) throw std::invalid_argument("XRayMap: n_det must be >= 1");
  if (det_pitch <= 0.0) {
    throw std::invalid_argument("XRayMap: det_pitch must be positive");
  }

  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n_angles) * n_det * 2 * n);
  const double cx = 0.5 * n, cy = 0.5 * n;
  for (int a = 0; a < n_angles; ++a) {
    const double phi = M_PI * a / n_angles;
    const double dx = std::cos(phi), dy = std::sin(phi);
    // detector axis, perpendicular to the beam direction
    const double ux = -dy, uy = dx;
    for (int v = 0; v < n_det; ++v) {
      const double t = (v + 0.5 - 0.5 * n_det) * det_pitch;
      const int row = a * n_det + v;
      trace_ray(n, row, cx + t * ux, cy + t * uy, dx, dy, trips);
    }
  }
  rays_.resize(out_dim(), in_dim());
  rays_.setFromTriplets(trips.begin(), trips.end());
  rays_.makeCompressed();
}

void XRayMap::apply_impl(const Vector& x, Vector& out) const {
  out.noalias() = rays_ * x;
}

void XRayMap::adjoint_impl(const Vector& y, Vector& out) const {
  out.noalias() = rays_.transpose() * y;
}

std::shared_ptr<Grad2D> build_grad2d(int n) { return std::make_shared<Grad2D>(n); }

std::shared_ptr<XRayMap> build_xray(int n, int n_angles, int n_det,
                                    double det_pitch) {
  if (det_pitch <= 0.0) det_pitch = n * std::sqrt(2.0) / n_det;
  return std::make_shared<XRayMap>(n, n_angles, n_det, det_pitch);
}

SpectralEstimate power_method(const LinearMap& map, PowerMode mode, double tol,
                              int max_iters, std::uint64_t seed) {
  if (tol <= 0.0) throw std::invalid_argument("power_method: tol must be > 0");
  if (max_iters < 1) {
    throw std::invalid_argument("power_method: max_iters must be >= 1");
  }
  const int dim = (mode == PowerMode::BtB) ? map.in_dim() : map.out_dim();
  if (dim == 0 || map.in_dim() == 0 || map.out_dim() == 0) {
    return {0.0, 0, 0.0, true};
  }

  std::mt19937_64 gen(seed);
  Vector v(dim);
  for (int i = 0; i < dim; ++i) v[i] = uniform_pm1(gen);
  double nv = v.norm();
  if (nv == 0.0) v[0] = 1.0, nv = 1.0;
  v /= nv;

  SpectralEstimate est;
  double lambda_prev = 0.0;
  for (int it = 1; it <= max_iters; ++it) {
    Vector w = (mode == PowerMode::BtB)
                   ? map.adjoint_apply(map.apply(v))
                   : map.apply(map.adjoint_apply(v));
    const double lambda = v.dot(w);
    est.value = lambda;
    est.iterations = it;
    est.residual = std::abs(lambda - lambda_prev) / std::max(1.0, std::abs(lambda));
    if (it > 1 && est.residual <= tol) {
      est.converged = true;
      return est;
    }
    lambda_prev = lambda;
    const double nw = w.norm();
    if (nw == 0.0) {  // operator annihilates v: rho_max estimate is 0
      est.value = 0.0;
      est.residual = 0.0;
      est.converged = true;
      return est;
    }
    v = w / nw;
  }
  est.converged = false;
  return est;
}

}  // namespace apdfp
