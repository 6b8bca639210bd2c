#include "apdfp/diagnostics.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>

namespace apdfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

/// rho_max(I - lambda B B^T) via the power method on the shifted Gram
/// operator; the operator is PSD for admissible lambda, so the square root
/// of rho_max(S^2) recovers rho_max(S).
class ShiftedGram final : public LinearMap {
 public:
  ShiftedGram(const LinearMap& B, double lambda)
      : LinearMap(B.out_dim(), B.out_dim(), MapKind::scaled),
        B_(B),
        lambda_(lambda) {}

 protected:
  void apply_impl(const Vector& y, Vector& out) const override {
    out = y - lambda_ * B_.apply(B_.adjoint_apply(y));
  }
  void adjoint_impl(const Vector& y, Vector& out) const override {
    apply_impl(y, out);
  }

 private:
  const LinearMap& B_;
  double lambda_;
};

double rho_shifted_gram(const LinearMap& B, double lambda) {
  if (B.out_dim() == 0) return 0.0;
  ShiftedGram s(B, lambda);
  const auto est = power_method(s, PowerMode::BtB, 1e-10, 20000, 0);
  return std::sqrt(std::max(0.0, est.value));
}

}  // namespace

double q_value(const ProblemHandle& p, const Vector& x_tilde,
               const Vector& y_tilde, const Vector& x, const Vector& y) {
  // indicator-type conjugates push a bracket to -inf when the dual point
  // leaves dom g*; the extended-real arithmetic is reported as-is
  const double first =
      p.f->value(x_tilde) + p.B->apply(x_tilde).dot(y) - p.g->conj_value(y);
  const double second =
      p.f->value(x) + p.B->apply(x).dot(y_tilde) - p.g->conj_value(y_tilde);
  return first - second;
}

SmoothMinResult minimize_smooth(
    const std::function<double(const Vector&)>& value,
    const std::function<Vector(const Vector&)>& gradient, double lipschitz,
    const Vector& x0, double tol, int max_iters) {
  if (lipschitz <= 0.0) {
    throw std::invalid_argument("minimize_smooth: lipschitz must be > 0");
  }
  const double step = 1.0 / lipschitz;
  Vector x = x0;
  Vector x_prev = x;
  double t = 1.0;
  double f_best = value(x);
  SmoothMinResult out;
  out.x = x;
  out.value = f_best;

  for (int it = 1; it <= max_iters; ++it) {
    const double t_next = 0.5 * (1.0 + std::sqrt(1.0 + 4.0 * t * t));
    const double beta = (t - 1.0) / t_next;
    const Vector y = x + beta * (x - x_prev);
    const Vector g = gradient(y);
    Vector x_new = y - step * g;
    const double f_new = value(x_new);
    if (f_new > f_best) {  // adaptive restart: drop the momentum
      t = 1.0;
      const Vector gx = gradient(x);
      x_new = x - step * gx;
      x_prev = x;
      x = std::move(x_new);
      f_best = value(x);
    } else {
      t = t_next;
      x_prev = std::move(x);
      x = std::move(x_new);
      f_best = f_new;
    }
    const double gn = gradient(x).norm();
    out.iterations = it;
    if (gn <= tol) {
      out.grad_norm = gn;
      out.converged = true;
      break;
    }
    out.grad_norm = gn;
  }
  out.x = x;
  out.value = value(x);
  return out;
}

GapValue partial_gap(const ProblemHandle& p, const Vector& x_tilde,
                     const Vector& y_tilde, const GapSpec& spec) {
  if (spec.primal_radius <= 0.0 || spec.dual_radius <= 0.0) {
    throw std::invalid_argument("partial_gap: ball radii must be > 0");
  }

  GapValue out;

  // dual side: sup_{y in B2} <Bx~, y> - g*(y), closed form when B2 covers
  // dom g* (the sup equals g(Bx~)) or lies inside it (linear over a ball)
  const Vector bx = p.B->apply(x_tilde);
  double dual_sup;
  const double cover_dist = p.g->conj_domain_max_dist(spec.dual_center);
  if (cover_dist <= spec.dual_radius) {
    dual_sup = p.g->value(bx);
  } else if (p.g->conj_domain_contains_ball(spec.dual_center,
                                            spec.dual_radius)) {
    dual_sup = bx.dot(spec.dual_center) + spec.dual_radius * bx.norm();
  } else {
    throw std::invalid_argument(
        "partial_gap: dual ball must cover dom g* or lie inside it");
  }

  const double gstar_yt = p.g->conj_value(y_tilde);
  if (std::isinf(gstar_yt)) {
    out.value = kInf;
    return out;
  }

  // primal side: min_{x in B1} f(x) + <B^T y~, x>, solved unconstrained and
  // validated against the ball afterwards
  const Vector bty = p.B->adjoint_apply(y_tilde);
  auto phi = [&](const Vector& x) { return p.f->value(x) + bty.dot(x); };
  auto dphi = [&](const Vector& x) { return Vector(p.f->gradient(x) + bty); };
  const double L = std::max(p.f->lipschitz(), 1e-12);
  const auto inner = minimize_smooth(phi, dphi, L, spec.primal_center,
                                     spec.inner_tol, spec.inner_max_iters);

  out.inner_iterations = inner.iterations;
  out.inner_residual = inner.grad_norm;
  const bool inside =
      (inner.x - spec.primal_center).norm() < spec.primal_radius * (1.0 - 1e-12);
  out.certified = inner.converged && inside;
  out.value = p.f->value(x_tilde) + dual_sup - inner.value + gstar_yt;
  return out;
}

CertificateReport certificate_check(
    const std::vector<std::pair<int, double>>& gap_trace,
    const ProblemHandle& p, const GapSpec& spec,
    const std::function<double(int)>& theta,
    const std::function<double(int)>& gamma, double lambda, double omega1,
    double omega2, const Vector* saddle_x, const Vector* saddle_y) {
  if (lambda <= 0.0) {
    throw std::invalid_argument("certificate_check: lambda must be > 0");
  }
  CertificateReport rep;
  rep.rho_shifted = rho_shifted_gram(*p.B, lambda);

  if (saddle_x && saddle_y) {
    const bool in_primal =
        (*saddle_x - spec.primal_center).norm() <= spec.primal_radius;
    const bool in_dual =
        (*saddle_y - spec.dual_center).norm() <= spec.dual_radius;
    rep.balls_contain_saddle = in_primal && in_dual;
  }

  for (const auto& [k, gap] : gap_trace) {
    const double th = theta(k);
    const double ga = gamma(k);
    const double bound =
        th * th / (2.0 * ga) * omega1 +
        0.5 * ga * (rep.rho_shifted / lambda) * omega2;
    const bool pass = gap <= bound;
    if (!pass) ++rep.violations;
    rep.checks.push_back({k, gap, bound, pass});
  }
  rep.all_pass = rep.balls_contain_saddle && rep.violations == 0;
  return rep;
}

double psnr(const Vector& x, const Vector& x_ref) {
  if (x.size() != x_ref.size()) {
    throw std::invalid_argument("psnr: image lengths differ");
  }
  if (x.size() == 0) throw std::invalid_argument("psnr: empty image");
  const double mse = (x - x_ref).squaredNorm() / static_cast<double>(x.size());
  if (mse == 0.0) return kInf;
  const double peak = x_ref.maxCoeff();
  return 10.0 * std::log10(peak * peak / mse);
}

RateFit fit_rate(const std::vector<std::pair<int, double>>& series, int k_lo,
                 int k_hi) {
  if (k_lo < 1 || k_hi <= k_lo) {
    throw std::invalid_argument("fit_rate: need 1 <= k_lo < k_hi");
  }
  std::vector<double> lx, ly;
  for (const auto& [k, v] : series) {
    if (k < k_lo || k > k_hi) continue;
    if (!(v > 0.0)) {
      throw std::invalid_argument("fit_rate: nonpositive value at k=" +
                                  std::to_string(k));
    }
    lx.push_back(std::log(static_cast<double>(k)));
    ly.push_back(std::log(v));
  }
  if (lx.size() < 5) {
    throw std::invalid_argument("fit_rate: fewer than 5 points in window");
  }
  const double n = static_cast<double>(lx.size());
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    sx += lx[i];
    sy += ly[i];
    sxx += lx[i] * lx[i];
    sxy += lx[i] * ly[i];
  }
  const double denom = n * sxx - sx * sx;
  RateFit fit;
  fit.k_lo = k_lo;
  fit.k_hi = k_hi;
  fit.slope = (n * sxy - sx * sy) / denom;
  fit.intercept = (sy - fit.slope * sx) / n;
  double res = 0.0;
  for (std::size_t i = 0; i < lx.size(); ++i) {
    const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
    res += r * r;
  }
  fit.residual = std::sqrt(res);
  return fit;
}

double accuracy(const Vector& x, const SpMat& samples, const Vector& labels) {
  if (samples.rows() == 0) throw std::invalid_argument("accuracy: empty test set");
  if (labels.size() != samples.rows()) {
    throw std::invalid_argument("accuracy: label/sample count mismatch");
  }
  const Vector scores = samples * x;
  int correct = 0;
  for (Eigen::Index i = 0; i < scores.size(); ++i) {
    const double pred = scores[i] >= 0.0 ? 1.0 : -1.0;  // sign(0) counts as +1
    if (pred == labels[i]) ++correct;
  }
  return static_cast<double>(correct) / static_cast<double>(scores.size());
}

}  // namespace apdfp
