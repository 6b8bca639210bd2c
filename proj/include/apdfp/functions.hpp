#pragma once

#include <memory>
#include <optional>

#include "apdfp/linops.hpp"

namespace apdfp {

/// Differentiable convex term f with an L-Lipschitz gradient.
class SmoothTerm {
 public:
  virtual ~SmoothTerm() = default;
  virtual int dim() const = 0;
  virtual double value(const Vector& x) const = 0;
  virtual Vector gradient(const Vector& x) const = 0;
  virtual double lipschitz() const = 0;
};

/// Average logistic loss over N samples plus an optional ridge term:
///   (1/N) sum_i log(1 + exp(-b_i s_i^T x)) + (mu1/2) ||x||^2.
/// Labels must be exactly -1 or +1. The gradient Lipschitz constant is
/// rho_max(S^T S)/(4N) + mu1 with the spectral radius from the power method.
class LogisticSmooth final : public SmoothTerm {
 public:
  LogisticSmooth(SpMat samples, Vector labels, double mu1);

  int dim() const override { return static_cast<int>(samples_.cols()); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double lipschitz() const override { return lipschitz_; }

  const SpMat& samples() const { return samples_; }
  const Vector& labels() const { return labels_; }

 private:
  SpMat samples_;
  Vector labels_;
  double mu1_;
  double lipschitz_;
};

/// f(x) = 1/2 ||Ax - y||^2 with lipschitz = rho_max(A^T A).
class LeastSquaresSmooth final : public SmoothTerm {
 public:
  LeastSquaresSmooth(std::shared_ptr<const LinearMap> A, Vector y,
                     std::optional<double> lipschitz_override = std::nullopt);

  int dim() const override { return A_->in_dim(); }
  double value(const Vector& x) const override;
  Vector gradient(const Vector& x) const override;
  double lipschitz() const override { return lipschitz_; }

 private:
  std::shared_ptr<const LinearMap> A_;
  Vector y_;
  double lipschitz_;
};

class ZeroSmooth final : public SmoothTerm {
 public:
  explicit ZeroSmooth(int dim) : dim_(dim) {}
  int dim() const override { return dim_; }
  double value(const Vector&) const override { return 0.0; }
  Vector gradient(const Vector& x) const override { return Vector::Zero(x.size()); }
  double lipschitz() const override { return 0.0; }

 private:
  int dim_;
};

/// Convex term g with a closed-form proximity operator. conj_prox is the
/// prox of sigma*g^* obtained through the Moreau decomposition; for the norm
/// terms here it is the metric projection onto dom g^*, independent of
/// sigma. The dual-domain queries back the gap diagnostics.
class ProxTerm {
 public:
  virtual ~ProxTerm() = default;

  virtual double value(const Vector& v) const = 0;
  /// argmin_y gamma*g(y) + 1/2 ||y - v||^2, gamma >= 0.
  virtual Vector prox(const Vector& v, double gamma) const = 0;
  /// prox of sigma*g^*.
  virtual Vector conj_prox(const Vector& v, double sigma) const = 0;
  /// g^*(y); +inf outside dom g^* (small relative slack for roundoff).
  virtual double conj_value(const Vector& y) const = 0;
  /// sup_{y in dom g^*} ||y - center||.
  virtual double conj_domain_max_dist(const Vector& center) const = 0;
  /// Whether the ball {||y - center|| <= radius} lies inside dom g^*.
  virtual bool conj_domain_contains_ball(const Vector& center,
                                         double radius) const = 0;
};

/// g(v) = mu ||v||_1. prox is the soft threshold, conj_prox the clamp onto
/// the [-mu, mu] box.
class L1Prox final : public ProxTerm {
 public:
  explicit L1Prox(double mu);
  double mu() const { return mu_; }

  double value(const Vector& v) const override;
  Vector prox(const Vector& v, double gamma) const override;
  Vector conj_prox(const Vector& v, double sigma) const override;
  double conj_value(const Vector& y) const override;
  double conj_domain_max_dist(const Vector& center) const override;
  bool conj_domain_contains_ball(const Vector& center,
                                 double radius) const override;

 private:
  double mu_;
};

/// Isotropic group penalty g(v) = mu sum_g ||v_g||_2 over strided groups:
/// with m = len/group_size, group j collects v[j], v[j+m], v[j+2m], ...
/// This matches the stacked-channel Grad2D output, where group j pairs the
/// vertical and horizontal differences of pixel j.
class GroupL2Prox final : public ProxTerm {
 public:
  GroupL2Prox(double mu, int group_size);
  double mu() const { return mu_; }
  int group_size() const { return group_size_; }

  double value(const Vector& v) const override;
  Vector prox(const Vector& v, double gamma) const override;
  Vector conj_prox(const Vector& v, double sigma) const override;
  double conj_value(const Vector& y) const override;
  double conj_domain_max_dist(const Vector& center) const override;
  bool conj_domain_contains_ball(const Vector& center,
                                 double radius) const override;

 private:
  int groups(const Vector& v) const;  // validates divisibility

  double mu_;
  int group_size_;
};

/// g identically zero; g^* is the indicator of {0}.
class ZeroProx final : public ProxTerm {
 public:
  double value(const Vector&) const override { return 0.0; }
  Vector prox(const Vector& v, double) const override { return v; }
  Vector conj_prox(const Vector& v, double) const override {
    return Vector::Zero(v.size());
  }
  double conj_value(const Vector& y) const override;
  double conj_domain_max_dist(const Vector& center) const override {
    return center.norm();
  }
  bool conj_domain_contains_ball(const Vector& center,
                                 double radius) const override {
    return center.norm() == 0.0 && radius == 0.0;
  }
};

std::shared_ptr<LogisticSmooth> logistic_smooth(SpMat samples, Vector labels,
                                                double mu1);
std::shared_ptr<LeastSquaresSmooth> least_squares_smooth(
    std::shared_ptr<const LinearMap> A, Vector y,
    std::optional<double> lipschitz_override = std::nullopt);
std::shared_ptr<L1Prox> l1_prox(double mu);
std::shared_ptr<GroupL2Prox> group_l2_prox(double mu, int group_size);

/// Residual of the Moreau identity ||v - prox_{g,gamma}(v) -
/// gamma * prox_{g^*,1/gamma}(v/gamma)||; a self-test that should sit at
/// roundoff level for a correct prox/conj_prox pair.
double moreau_check(const ProxTerm& term, const Vector& v, double gamma);

}  // namespace apdfp
