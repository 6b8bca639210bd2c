#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <cstdint>
#include <memory>
#include <string>

namespace apdfp {

using Vector = Eigen::VectorXd;
using Matrix = Eigen::MatrixXd;
using SpMat = Eigen::SparseMatrix<double, Eigen::RowMajor>;

enum class MapKind { dense, sparse, grad2d, xray, identity, scaled };

/// Linear operator B with forward and adjoint application. Implementations
/// are immutable after construction and re-entrant, so a single map can be
/// shared across concurrent solver runs.
class LinearMap {
 public:
  virtual ~LinearMap() = default;

  int in_dim() const { return in_dim_; }
  int out_dim() const { return out_dim_; }
  MapKind kind() const { return kind_; }

  /// Computes Bx. Throws std::invalid_argument on dimension mismatch.
  Vector apply(const Vector& x) const;
  /// Computes B^T y. Throws std::invalid_argument on dimension mismatch.
  Vector adjoint_apply(const Vector& y) const;

 protected:
  LinearMap(int in_dim, int out_dim, MapKind kind);

  virtual void apply_impl(const Vector& x, Vector& out) const = 0;
  virtual void adjoint_impl(const Vector& y, Vector& out) const = 0;

 private:
  int in_dim_;
  int out_dim_;
  MapKind kind_;
};

class IdentityMap final : public LinearMap {
 public:
  explicit IdentityMap(int dim) : LinearMap(dim, dim, MapKind::identity) {}

 protected:
  void apply_impl(const Vector& x, Vector& out) const override { out = x; }
  void adjoint_impl(const Vector& y, Vector& out) const override { out = y; }
};

class DenseMap final : public LinearMap {
 public:
  explicit DenseMap(Matrix m);
  const Matrix& matrix() const { return m_; }

 protected:
  void apply_impl(const Vector& x, Vector& out) const override;
  void adjoint_impl(const Vector& y, Vector& out) const override;

 private:
  Matrix m_;
};

class SparseMap final : public LinearMap {
 public:
  explicit SparseMap(SpMat m);
  const SpMat& matrix() const { return m_; }

 protected:
  void apply_impl(const Vector& x, Vector& out) const override;
  void adjoint_impl(const Vector& y, Vector& out) const override;

 private:
  SpMat m_;
};

/// Scalar multiple of another map.
class ScaledMap final : public LinearMap {
 public:
  ScaledMap(std::shared_ptr<const LinearMap> inner, double scale);
  double scale() const { return scale_; }

 protected:
  void apply_impl(const Vector& x, Vector& out) const override;
  void adjoint_impl(const Vector& y, Vector& out) const override;

 private:
  std::shared_ptr<const LinearMap> inner_;
  double scale_;
};

/// Discrete gradient of an n-by-n image (row-major vectorized). Forward
/// differences with zero rows at the image boundary; output is two stacked
/// channels of length n^2 each: vertical differences first, horizontal
/// second. The adjoint is the matching negative divergence.
class Grad2D final : public LinearMap {
 public:
  explicit Grad2D(int n);
  int side() const { return n_; }

 protected:
  void apply_impl(const Vector& x, Vector& out) const override;
  void adjoint_impl(const Vector& y, Vector& out) const override;

 private:
  int n_;
};

/// Parallel-beam discrete X-ray transform on an n-by-n unit-pixel grid.
/// Angles uniform on [0, pi); the detector line is centered on the image
/// and perpendicular to the beam. Rows are indexed (angle, detector) and
/// hold Siddon intersection lengths; rays that miss the grid are zero rows.
class XRayMap final : public LinearMap {
 public:
  XRayMap(int n, int n_angles, int n_det, double det_pitch);

  int side() const { return n_; }
  int n_angles() const { return n_angles_; }
  int n_det() const { return n_det_; }
  double det_pitch() const { return det_pitch_; }
  const SpMat& matrix() const { return rays_; }

 protected:
  void apply_impl(const Vector& x, Vector& out) const override;
  void adjoint_impl(const Vector& y, Vector& out) const override;

 private:
  int n_;
  int n_angles_;
  int n_det_;
  double det_pitch_;
  SpMat rays_;
};

std::shared_ptr<Grad2D> build_grad2d(int n);

/// det_pitch <= 0 selects the default pitch n*sqrt(2)/n_det, which makes
/// the detector line span the image diagonal.
std::shared_ptr<XRayMap> build_xray(int n, int n_angles, int n_det,
                                    double det_pitch = 0.0);

enum class PowerMode { BtB, BBt };

struct SpectralEstimate {
  double value = 0.0;      // estimate of rho_max
  int iterations = 0;
  double residual = 0.0;   // |lambda_t - lambda_{t-1}| / max(1, lambda_t)
  bool converged = false;
};

/// Power iteration for rho_max(B^T B) or rho_max(B B^T). The start vector is
/// derived deterministically from the seed.
SpectralEstimate power_method(const LinearMap& map, PowerMode mode,
                              double tol = 1e-6, int max_iters = 1000,
                              std::uint64_t seed = 0);

}  // namespace apdfp
