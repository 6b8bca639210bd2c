#include "apdfp/functions.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>

namespace apdfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// log(1 + exp(-m)) without overflow for large |m|
double log1p_exp_neg(double m) {
  if (m >= 0.0) return std::log1p(std::exp(-m));
  return -m + std::log1p(std::exp(m));
}

// sigma(-m) = 1 / (1 + exp(m)), evaluated from the safe side
double sigmoid_neg(double m) {
  if (m >= 0.0) {
    const double e = std::exp(-m);
    return e / (1.0 + e);
  }
  return 1.0 / (1.0 + std::exp(m));
}

}  // namespace

LogisticSmooth::LogisticSmooth(SpMat samples, Vector labels, double mu1)
    : samples_(std::move(samples)), labels_(std::move(labels)), mu1_(mu1) {
  if (samples_.rows() < 1) {
    throw std::invalid_argument("LogisticSmooth: need at least one sample");
  }
  if (labels_.size() != samples_.rows()) {
    throw std::invalid_argument("LogisticSmooth: label/sample count mismatch");
  }
  if (mu1_ < 0.0) throw std::invalid_argument("LogisticSmooth: mu1 must be >= 0");
  for (Eigen::Index i = 0; i < labels_.size(); ++i) {
    if (labels_[i] != 1.0 && labels_[i] != -1.0) {
      throw std::invalid_argument("LogisticSmooth: label at row " +
                                  std::to_string(i) + " is not in {-1,+1}");
    }
  }
  samples_.makeCompressed();
  const double n = static_cast<double>(samples_.rows());
  SparseMap s_map(samples_);
  const auto est = power_method(s_map, PowerMode::BtB, 1e-10, 10000, 0);
  lipschitz_ = est.value / (4.0 * n) + mu1_;
}

double LogisticSmooth::value(const Vector& x) const {
  const Vector margins = labels_.cwiseProduct(samples_ * x);
  double acc = 0.0;
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    acc += log1p_exp_neg(margins[i]);
  }
  acc /= static_cast<double>(margins.size());
  if (mu1_ > 0.0) acc += 0.5 * mu1_ * x.squaredNorm();
  return acc;
}

Vector LogisticSmooth::gradient(const Vector& x) const {
  const Vector margins = labels_.cwiseProduct(samples_ * x);
  Vector coef(margins.size());
  const double n = static_cast<double>(margins.size());
  for (Eigen::Index i = 0; i < margins.size(); ++i) {
    coef[i] = -labels_[i] * sigmoid_neg(margins[i]) / n;
  }
  Vector grad = samples_.transpose() * coef;
  if (mu1_ > 0.0) grad += mu1_ * x;
  return grad;
}

LeastSquaresSmooth::LeastSquaresSmooth(std::shared_ptr<const LinearMap> A,
                                       Vector y,
                                       std::optional<double> lipschitz_override)
    : A_(std::move(A)), y_(std::move(y)) {
  if (!A_) throw std::invalid_argument("LeastSquaresSmooth: null operator");
  if (y_.size() != A_->out_dim()) {
    throw std::invalid_argument(
        "LeastSquaresSmooth: target length " + std::to_string(y_.size()) +
        " does not match operator out_dim " + std::to_string(A_->out_dim()));
  }
  if (lipschitz_override) {
    lipschitz_ = *lipschitz_override;
  } else {
    lipschitz_ = power_method(*A_, PowerMode::BtB, 1e-10, 10000, 0).value;
  }
}

double LeastSquaresSmooth::value(const Vector& x) const {
  return 0.5 * (A_->apply(x) - y_).squaredNorm();
}

Vector LeastSquaresSmooth::gradient(const Vector& x) const {
  return A_->adjoint_apply(A_->apply(x) - y_);
}

L1Prox::L1Prox(double mu) : mu_(mu) {
  if (mu < 0.0) throw std::invalid_argument("L1Prox: mu must be >= 0");
}

double L1Prox::value(const Vector& v) const { return mu_ * v.lpNorm<1>(); }

Vector L1Prox::prox(const Vector& v, double gamma) const {
  const double t = gamma * mu_;
  Vector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double a = std::abs(v[i]) - t;
    out[i] = a > 0.0 ? (v[i] > 0.0 ? a : -a) : 0.0;
  }
  return out;
}

Vector L1Prox::conj_prox(const Vector& v, double /*sigma*/) const {
  return v.cwiseMax(-mu_).cwiseMin(mu_);
}

double L1Prox::conj_value(const Vector& y) const {
  const double slack = 1e-10 * (1.0 + mu_);
  if (y.lpNorm<Eigen::Infinity>() > mu_ + slack) return kInf;
  return 0.0;
}

double L1Prox::conj_domain_max_dist(const Vector& center) const {
  double acc = 0.0;
  for (Eigen::Index i = 0; i < center.size(); ++i) {
    const double d = mu_ + std::abs(center[i]);
    acc += d * d;
  }
  return std::sqrt(acc);
}

bool L1Prox::conj_domain_contains_ball(const Vector& center,
                                       double radius) const {
  return center.lpNorm<Eigen::Infinity>() + radius <= mu_;
}

GroupL2Prox::GroupL2Prox(double mu, int group_size)
    : mu_(mu), group_size_(group_size) {
  if (mu < 0.0) throw std::invalid_argument("GroupL2Prox: mu must be >= 0");
  if (group_size < 1) {
    throw std::invalid_argument("GroupL2Prox: group_size must be >= 1");
  }
}

int GroupL2Prox::groups(const Vector& v) const {
  if (v.size() % group_size_ != 0) {
    throw std::invalid_argument("GroupL2Prox: input length " +
                                std::to_string(v.size()) +
                                " is not a multiple of group size " +
                                std::to_string(group_size_));
  }
  return static_cast<int>(v.size()) / group_size_;
}

double GroupL2Prox::value(const Vector& v) const {
  const int m = groups(v);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    double sq = 0.0;
    for (int c = 0; c < group_size_; ++c) sq += v[j + c * m] * v[j + c * m];
    acc += std::sqrt(sq);
  }
  return mu_ * acc;
}

Vector GroupL2Prox::prox(const Vector& v, double gamma) const {
  const int m = groups(v);
  const double t = gamma * mu_;
  Vector out = Vector::Zero(v.size());
  for (int j = 0; j < m; ++j) {
    double sq = 0.0;
    for (int c = 0; c < group_size_; ++c) sq += v[j + c * m] * v[j + c * m];
    const double norm = std::sqrt(sq);
    if (norm > t) {
      const double scale = 1.0 - t / norm;
      for (int c = 0; c < group_size_; ++c) out[j + c * m] = scale * v[j + c * m];
    }
  }
  return out;
}

Vector GroupL2Prox::conj_prox(const Vector& v, double /*sigma*/) const {
  const int m = groups(v);
  Vector out = v;
  for (int j = 0; j < m; ++j) {
    double sq = 0.0;
    for (int c = 0; c < group_size_; ++c) sq += v[j + c * m] * v[j + c * m];
    const double norm = std::sqrt(sq);
    if (norm > mu_) {
      const double scale = mu_ / norm;
      for (int c = 0; c < group_size_; ++c) out[j + c * m] = scale * v[j + c * m];
    }
  }
  return out;
}

double GroupL2Prox::conj_value(const Vector& y) const {
  const int m = groups(y);
  const double slack = 1e-10 * (1.0 + mu_);
  for (int j = 0; j < m; ++j) {
    double sq = 0.0;
    for (int c = 0; c < group_size_; ++c) sq += y[j + c * m] * y[j + c * m];
    if (std::sqrt(sq) > mu_ + slack) return kInf;
  }
  return 0.0;
}

double GroupL2Prox::conj_domain_max_dist(const Vector& center) const {
  const int m = groups(center);
  double acc = 0.0;
  for (int j = 0; j < m; ++j) {
    double sq = 0.0;
    for (int c = 0; c < group_size_; ++c) sq += center[j + c * m] * center[j + c * m];
    const double d = mu_ + std::sqrt(sq);
    acc += d * d;
  }
  return std::sqrt(acc);
}

bool GroupL2Prox::conj_domain_contains_ball(const Vector& center,
                                            double radius) const {
  const int m = groups(center);
  for (int j = 0; j < m; ++j) {
    double sq = 0.0;
    for (int c = 0; c < group_size_; ++c) sq += center[j + c * m] * center[j + c * m];
    if (std::sqrt(sq) + radius > mu_) return false;
  }
  return true;
}

double ZeroProx::conj_value(const Vector& y) const {
  return y.norm() <= 1e-12 ? 0.0 : kInf;
}

std::shared_ptr<LogisticSmooth> logistic_smooth(SpMat samples, Vector labels,
                                                double mu1) {
  return std::make_shared<LogisticSmooth>(std::move(samples), std::move(labels),
                                          mu1);
}

std::shared_ptr<LeastSquaresSmooth> least_squares_smooth(
    std::shared_ptr<const LinearMap> A, Vector y,
    std::optional<double> lipschitz_override) {
  return std::make_shared<LeastSquaresSmooth>(std::move(A), std::move(y),
                                              lipschitz_override);
}

std::shared_ptr<L1Prox> l1_prox(double mu) { return std::make_shared<L1Prox>(mu); }

std::shared_ptr<GroupL2Prox> group_l2_prox(double mu, int group_size) {
  return std::make_shared<GroupL2Prox>(mu, group_size);
}

double moreau_check(const ProxTerm& term, const Vector& v, double gamma) {
  if (gamma <= 0.0) throw std::invalid_argument("moreau_check: gamma must be > 0");
  const Vector direct = term.prox(v, gamma);
  const Vector conj = term.conj_prox(v / gamma, 1.0 / gamma);
  return (v - direct - gamma * conj).norm();
}

}  // namespace apdfp
