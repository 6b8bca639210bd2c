#include "apdfp/solvers.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <iostream>
#include <limits>
#include <stdexcept>

namespace apdfp {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

void validate_common(const SolverConfig& cfg) {
  if (cfg.max_iters < 1) {
    throw std::invalid_argument("solver: max_iters must be >= 1");
  }
  if (cfg.stop_tol <= 0.0) {
    throw std::invalid_argument("solver: stop_tol must be > 0");
  }
  if (cfg.trace_cadence < 1) {
    throw std::invalid_argument("solver: trace_cadence must be >= 1");
  }
}

Vector initial_x(const ProblemHandle& p, const SolverConfig& cfg) {
  if (cfg.x0) {
    if (cfg.x0->size() != p.primal_dim()) {
      throw std::invalid_argument("solver: x0 length mismatch");
    }
    return *cfg.x0;
  }
  return Vector::Zero(p.primal_dim());
}

Vector initial_y(const ProblemHandle& p, const SolverConfig& cfg) {
  if (cfg.y0) {
    if (cfg.y0->size() != p.dual_dim()) {
      throw std::invalid_argument("solver: y0 length mismatch");
    }
    return *cfg.y0;
  }
  return Vector::Zero(p.dual_dim());
}

double rho_max_bbt(const ProblemHandle& p, const SolverConfig& cfg) {
  if (cfg.rho_max_bbt) return *cfg.rho_max_bbt;
  if (p.dual_dim() == 0) return 0.0;
  return power_method(*p.B, PowerMode::BBt, 1e-9, 20000, cfg.seed).value;
}

double b_norm(const ProblemHandle& p, const SolverConfig& cfg) {
  if (cfg.b_norm) return *cfg.b_norm;
  return std::sqrt(std::max(0.0, rho_max_bbt(p, cfg)));
}

// lambda = lambda_scale / rho_max(BB^T), validated against the same
// estimate so that lambda_scale = 1 sits exactly on the admissible bound.
double resolve_lambda(const SolverConfig& cfg, double rho) {
  double lambda;
  if (cfg.lambda) {
    lambda = *cfg.lambda;
  } else if (rho > 0.0) {
    lambda = cfg.lambda_scale / rho;
  } else {
    lambda = 1.0;  // B = 0 or empty dual: any positive lambda is admissible
  }
  if (lambda <= 0.0) throw std::invalid_argument("solver: lambda must be > 0");
  if (rho > 0.0 && lambda * rho > 1.0 + 1e-9) {
    throw std::invalid_argument("solver: lambda exceeds 1/rho_max(BB^T)");
  }
  return lambda;
}

void require_identity(const ProblemHandle& p, const char* who) {
  if (p.B->kind() != MapKind::identity) {
    throw std::invalid_argument(std::string(who) +
                                " requires B = I; wrap the prox term directly");
  }
}

struct Runner {
  const ProblemHandle& p;
  const SolverConfig& cfg;
  const RunHooks& hooks;
  Trace trace;
  std::chrono::steady_clock::time_point t0 = std::chrono::steady_clock::now();
  int last_k = 0;
  bool converged = false;

  Runner(const ProblemHandle& p_in, const SolverConfig& cfg_in,
         const RunHooks& hooks_in)
      : p(p_in), cfg(cfg_in), hooks(hooks_in) {}

  double elapsed_ms() const {
    return std::chrono::duration<double, std::milli>(
               std::chrono::steady_clock::now() - t0)
        .count();
  }

  // Records step k and decides whether to stop. x_new/x_old are the primary
  // iterates used by the relative-error rule; repr is the returnable point.
  bool after_step(int k, const Vector& x_new, const Vector& x_old,
                  const Vector* y, const Vector* x_ag, const Vector* y_ag,
                  const Vector& repr) {
    if (!x_new.allFinite() || (y && !y->allFinite())) {
      throw std::runtime_error("solver: non-finite iterate at step " +
                               std::to_string(k));
    }
    const double rel =
        (x_new - x_old).norm() / std::max(x_old.norm(), 1e-12);
    const bool stop = (rel <= cfg.stop_tol) || (k >= cfg.max_iters);

    IterateView view;
    view.k = k;
    view.x = &x_new;
    view.x_prev = &x_old;
    view.y = y;
    view.x_ag = x_ag;
    view.y_ag = y_ag;
    view.repr = &repr;
    if (hooks.on_iterate) hooks.on_iterate(view);

    if (k == 1 || stop || (k % cfg.trace_cadence == 0)) {
      TraceRecord rec;
      rec.iter = k;
      rec.objective = p.objective(repr);
      rec.rel_err = rel;
      if (hooks.gap_metric) rec.gap = hooks.gap_metric(view);
      if (hooks.extra_metric) rec.metric = hooks.extra_metric(view);
      rec.wall_ms = elapsed_ms();
      trace.append(rec);
    }
    last_k = k;
    if (rel <= cfg.stop_tol) converged = true;
    return stop;
  }
};

SolverResult finish(Runner& r, Vector designated, Vector x_last, Vector y_last,
                    std::optional<Vector> x_ag = std::nullopt,
                    std::optional<Vector> y_ag = std::nullopt) {
  SolverResult out;
  out.x = std::move(designated);
  out.x_last = std::move(x_last);
  out.y_last = std::move(y_last);
  out.x_ag = std::move(x_ag);
  out.y_ag = std::move(y_ag);
  out.iterations = r.last_k;
  out.converged = r.converged;
  out.trace = std::move(r.trace);
  return out;
}

}  // namespace

ProblemHandle::ProblemHandle(std::shared_ptr<const SmoothTerm> f_in,
                             std::shared_ptr<const ProxTerm> g_in,
                             std::shared_ptr<const LinearMap> B_in)
    : f(std::move(f_in)), g(std::move(g_in)), B(std::move(B_in)) {
  if (!f || !g || !B) throw std::invalid_argument("ProblemHandle: null term");
  if (f->dim() != B->in_dim()) {
    throw std::invalid_argument(
        "ProblemHandle: f domain " + std::to_string(f->dim()) +
        " does not match B in_dim " + std::to_string(B->in_dim()));
  }
  g->value(Vector::Zero(B->out_dim()));  // probes the group layout
}

double ProblemHandle::objective(const Vector& x) const {
  return f->value(x) + g->value(B->apply(x));
}

void Trace::append(TraceRecord rec) {
  if (!records_.empty() && rec.iter <= records_.back().iter) {
    throw std::logic_error("Trace: iteration numbers must increase");
  }
  records_.push_back(std::move(rec));
}

std::pair<double, double> apdfp_schedule(int k, double L_f, double c) {
  if (k < 1) throw std::invalid_argument("apdfp_schedule: k must be >= 1");
  if (L_f <= 0.0) throw std::invalid_argument("apdfp_schedule: L_f must be > 0");
  if (c < 0.0 || c >= L_f) {
    throw std::invalid_argument("apdfp_schedule: c must satisfy 0 <= c < L_f");
  }
  return {2.0 / (k + 1), 1.0 / (L_f + c * k)};
}

ScheduleReport check_schedule(const std::vector<double>& theta,
                              const std::vector<double>& gamma, double L_f) {
  if (theta.size() != gamma.size() || theta.empty()) {
    throw std::invalid_argument("check_schedule: sequences must match and be nonempty");
  }
  if (L_f <= 0.0) throw std::invalid_argument("check_schedule: L_f must be > 0");
  const std::size_t K = theta.size();

  ScheduleReport rep;
  auto add = [&rep](const char* name, bool pass, double slack, int k) {
    rep.clauses.push_back({name, pass, slack, k});
  };

  // clause 1: 0 < gamma_k <= 1/L_f
  {
    double worst = kInf;
    int worst_k = 1;
    bool positive = true;
    for (std::size_t k = 0; k < K; ++k) {
      if (gamma[k] <= 0.0) positive = false;
      const double slack = 1.0 / L_f - gamma[k];
      if (slack < worst) {
        worst = slack;
        worst_k = static_cast<int>(k + 1);
      }
    }
    add("gamma_range", positive && worst >= -1e-15 / L_f, worst, worst_k);
  }

  // clause 2: gamma_{k+1}/gamma_k <= theta_{k+1}^2 / (theta_k^2 (1-theta_{k+1}))
  // clause 3: gamma_k/gamma_{k+1} <= 1 / (1-theta_{k+1})
  // A vanishing (1 - theta_{k+1}) makes the right side +inf; the clause is
  // then vacuous, which covers the fixed theta = 1 regime.
  {
    double worst2 = kInf, worst3 = kInf;
    int k2 = 1, k3 = 1;
    for (std::size_t k = 0; k + 1 < K; ++k) {
      const double one_minus = 1.0 - theta[k + 1];
      double rhs2 = kInf, rhs3 = kInf;
      if (one_minus > 0.0) {
        rhs2 = theta[k + 1] * theta[k + 1] /
               (theta[k] * theta[k] * one_minus);
        rhs3 = 1.0 / one_minus;
      }
      const double s2 = rhs2 - gamma[k + 1] / gamma[k];
      const double s3 = rhs3 - gamma[k] / gamma[k + 1];
      if (s2 < worst2) { worst2 = s2; k2 = static_cast<int>(k + 1); }
      if (s3 < worst3) { worst3 = s3; k3 = static_cast<int>(k + 1); }
    }
    add("gamma_ratio_up", worst2 >= -1e-12, worst2, k2);
    add("gamma_ratio_down", worst3 >= -1e-12, worst3, k3);
  }

  // clause 4: gamma_k^2/theta_k^2 nondecreasing; boundedness is reported as
  // the final/initial ratio, which must be finite.
  {
    double worst = kInf;
    int worst_k = 1;
    double r_first = 0.0, r_last = 0.0;
    double r_prev = 0.0;
    for (std::size_t k = 0; k < K; ++k) {
      const double r = (gamma[k] / theta[k]) * (gamma[k] / theta[k]);
      if (k == 0) r_first = r;
      if (k > 0) {
        const double slack = r - r_prev;
        if (slack < worst) {
          worst = slack;
          worst_k = static_cast<int>(k + 1);
        }
      }
      r_prev = r;
      r_last = r;
    }
    rep.ratio_bound = r_first > 0.0 ? r_last / r_first : kInf;
    const bool bounded = std::isfinite(rep.ratio_bound);
    const bool monotone = (K == 1) || worst >= -1e-12 * std::abs(r_last);
    add("ratio_monotone_bounded", monotone && bounded,
        K == 1 ? 0.0 : worst, worst_k);
  }

  // clause 5: theta_1 = 1
  add("theta1", std::abs(theta[0] - 1.0) <= 1e-15, -(std::abs(theta[0] - 1.0)), 1);

  rep.pass = std::all_of(rep.clauses.begin(), rep.clauses.end(),
                         [](const ClauseReport& c) { return c.pass; });
  return rep;
}

Fp2oResult fp2o_prox(const ProxTerm& g, const LinearMap& B, const Vector& y,
                     double gamma, double lambda, double tol, int max_iters) {
  if (gamma < 0.0) throw std::invalid_argument("fp2o_prox: gamma must be >= 0");
  if (lambda <= 0.0) throw std::invalid_argument("fp2o_prox: lambda must be > 0");
  if (tol <= 0.0) throw std::invalid_argument("fp2o_prox: tol must be > 0");
  if (max_iters < 1) throw std::invalid_argument("fp2o_prox: max_iters must be >= 1");
  if (y.size() != B.in_dim()) {
    throw std::invalid_argument("fp2o_prox: point length mismatch");
  }

  const Vector by = B.apply(y);
  Vector v = Vector::Zero(B.out_dim());
  Fp2oResult out;
  for (int it = 1; it <= max_iters; ++it) {
    const Vector u = by + v - lambda * B.apply(B.adjoint_apply(v));
    Vector v_next = u - g.prox(u, gamma / lambda);
    out.residual = (v_next - v).norm();
    v = std::move(v_next);
    out.iterations = it;
    if (out.residual <= tol) {
      out.converged = true;
      break;
    }
  }
  out.x = y - lambda * B.adjoint_apply(v);
  return out;
}

SolverResult run_pgd(const ProblemHandle& p, const SolverConfig& cfg,
                     const RunHooks& hooks) {
  validate_common(cfg);
  require_identity(p, "run_pgd");
  const double L = p.f->lipschitz();
  const double gamma = cfg.gamma.value_or(L > 0.0 ? 1.0 / L : 1.0);
  if (gamma <= 0.0) throw std::invalid_argument("run_pgd: gamma must be > 0");

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Vector x_new = p.g->prox(x - gamma * p.f->gradient(x), gamma);
    const bool stop = r.after_step(k, x_new, x, nullptr, nullptr, nullptr, x_new);
    x = std::move(x_new);
    if (stop) break;
  }
  return finish(r, x, x, Vector());
}

SolverResult run_fista(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks) {
  validate_common(cfg);
  require_identity(p, "run_fista");
  const double L = p.f->lipschitz();
  const double gamma = cfg.gamma.value_or(L > 0.0 ? 1.0 / L : 1.0);
  if (gamma <= 0.0) throw std::invalid_argument("run_fista: gamma must be > 0");

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector x_prev = x;  // x_0 = x_1
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double beta = cfg.fista_momentum ? cfg.fista_momentum(k)
                                           : static_cast<double>(k - 1) / (k + 2);
    const Vector y = x + beta * (x - x_prev);
    Vector x_new = p.g->prox(y - gamma * p.f->gradient(y), gamma);
    const bool stop = r.after_step(k, x_new, x, nullptr, nullptr, nullptr, x_new);
    x_prev = std::move(x);
    x = std::move(x_new);
    if (stop) break;
  }
  return finish(r, x, x, Vector());
}

SolverResult run_nag(const ProblemHandle& p, const SolverConfig& cfg,
                     const RunHooks& hooks) {
  validate_common(cfg);
  require_identity(p, "run_nag");
  const double L = p.f->lipschitz();
  if (L <= 0.0 && !cfg.gamma_fn) {
    throw std::invalid_argument("run_nag: need L_f > 0 or an explicit schedule");
  }
  if (!cfg.gamma_fn && (cfg.c < 0.0 || cfg.c >= L)) {
    throw std::invalid_argument("run_nag: c must satisfy 0 <= c < L_f");
  }
  auto theta_at = [&cfg](int k) {
    return cfg.theta_fn ? cfg.theta_fn(k) : 2.0 / (k + 1);
  };
  auto gamma_at = [&cfg, L](int k) {
    return cfg.gamma_fn ? cfg.gamma_fn(k) : 1.0 / (L + cfg.c * k);
  };

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector x_ag = x;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double theta = theta_at(k);
    const double step = gamma_at(k) / theta;
    const Vector x_md = (1.0 - theta) * x_ag + theta * x;
    Vector x_new = p.g->prox(x - step * p.f->gradient(x_md), step);
    Vector x_ag_new = (1.0 - theta) * x_ag + theta * x_new;
    const bool stop =
        r.after_step(k, x_new, x, nullptr, &x_ag_new, nullptr, x_ag_new);
    x = std::move(x_new);
    x_ag = std::move(x_ag_new);
    if (stop) break;
  }
  return finish(r, x_ag, x, Vector(), x_ag);
}

SolverResult run_lpdhgm(const ProblemHandle& p, const SolverConfig& cfg,
                        const RunHooks& hooks) {
  validate_common(cfg);
  const double L = p.f->lipschitz();
  const double bnorm = b_norm(p, cfg);
  const double gamma =
      cfg.lpdhgm_gamma.value_or(L > 0.0 ? 1.0 / L : 1.0);
  const double sigma_default =
      1.0 / std::max(L + bnorm * bnorm * gamma, 1e-300);
  const double sigma = cfg.sigma.value_or(sigma_default);
  if (gamma <= 0.0 || sigma <= 0.0) {
    throw std::invalid_argument("run_lpdhgm: sigma and gamma must be > 0");
  }
  const double budget = L * sigma + bnorm * bnorm * gamma * sigma;
  if (budget > 1.0 + 1e-12) {
    throw std::invalid_argument(
        "run_lpdhgm: step-size condition violated: L_f*sigma + "
        "||B||^2*gamma*sigma = " +
        std::to_string(budget) + " > 1");
  }

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector y = initial_y(p, cfg);
  Vector x_bar = x;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Vector y_new = p.g->conj_prox(sigma * p.B->apply(x_bar) + y, sigma);
    Vector x_new =
        x - gamma * p.f->gradient(x) - gamma * p.B->adjoint_apply(y_new);
    // constant steps give alpha_{k+1} = sigma_k/sigma_{k+1} = 1
    Vector x_bar_new = x_new + 1.0 * (x_new - x);
    const bool stop = r.after_step(k, x_new, x, &y_new, nullptr, nullptr, x_new);
    x = std::move(x_new);
    y = std::move(y_new);
    x_bar = std::move(x_bar_new);
    if (stop) break;
  }
  return finish(r, x, x, y);
}

SolverResult run_apd(const ProblemHandle& p, const SolverConfig& cfg,
                     const RunHooks& hooks) {
  validate_common(cfg);
  if (cfg.apd_C <= 0.0) throw std::invalid_argument("run_apd: C must be > 0");
  const double L = p.f->lipschitz();
  const double bnorm = b_norm(p, cfg);
  const double tau = bnorm > 0.0 ? cfg.apd_C / bnorm : cfg.apd_C;

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector y = initial_y(p, cfg);
  Vector x_ag = x;
  Vector x_bar = x;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double theta = 2.0 / (k + 1);
    const double gamma_k = k / (2.0 * L + k * bnorm * cfg.apd_C);
    const double alpha_next = static_cast<double>(k) / (k + 1);
    const Vector x_md = (1.0 - theta) * x_ag + theta * x;
    Vector y_new = p.g->conj_prox(tau * p.B->apply(x_bar) + y, tau);
    Vector x_new = x - gamma_k * p.f->gradient(x_md) -
                   gamma_k * p.B->adjoint_apply(y_new);
    Vector x_ag_new = (1.0 - theta) * x_ag + theta * x_new;
    Vector x_bar_new = x_new + alpha_next * (x_new - x);
    const bool stop =
        r.after_step(k, x_new, x, &y_new, &x_ag_new, nullptr, x_ag_new);
    x = std::move(x_new);
    y = std::move(y_new);
    x_ag = std::move(x_ag_new);
    x_bar = std::move(x_bar_new);
    if (stop) break;
  }
  return finish(r, x_ag, x, y, x_ag);
}

SolverResult run_lp_admm(const ProblemHandle& p, const SolverConfig& cfg,
                         const RunHooks& hooks) {
  validate_common(cfg);
  if (cfg.lp_admm_C <= 0.0) throw std::invalid_argument("run_lp_admm: C must be > 0");
  const double L = p.f->lipschitz();
  const double bnorm = b_norm(p, cfg);
  const double rho = bnorm > 0.0 ? cfg.lp_admm_C / bnorm : cfg.lp_admm_C;
  const double gamma = 1.0 / std::max(L + rho * bnorm * bnorm, 1e-300);

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector y = initial_y(p, cfg);
  Vector z = p.B->apply(x);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    Vector x_new = x - gamma * (p.f->gradient(x) +
                                rho * p.B->adjoint_apply(p.B->apply(x) - z) +
                                p.B->adjoint_apply(y));
    const Vector bx_new = p.B->apply(x_new);
    Vector z_new = p.g->prox(bx_new + y / rho, 1.0 / rho);
    // the printed dual step "x_{k+1} + rho(...)" is dimensionally
    // inconsistent; the multiplier update is y_k + rho(Bx - z)
    Vector y_new = y + rho * (bx_new - z_new);
    const bool stop = r.after_step(k, x_new, x, &y_new, nullptr, nullptr, x_new);
    x = std::move(x_new);
    y = std::move(y_new);
    z = std::move(z_new);
    if (stop) break;
  }
  return finish(r, x, x, y);
}

SolverResult run_aadmm(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks) {
  validate_common(cfg);
  const double L = p.f->lipschitz();
  if (L <= 0.0) throw std::invalid_argument("run_aadmm: need L_f > 0");
  const double bnorm = b_norm(p, cfg);
  const double rho = cfg.rho.value_or(bnorm > 0.0 ? 1.0 / bnorm : 1.0);
  if (rho <= 0.0) throw std::invalid_argument("run_aadmm: rho must be > 0");

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector y = initial_y(p, cfg);
  Vector z = p.B->apply(x);
  Vector x_ag = x;
  Vector z_ag = z;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double theta = 2.0 / (k + 1);
    const double sigma_k = (k - 1.0) * rho / k;
    const double denom = cfg.aadmm_printed_step
                             ? 2.0 / L + rho * k * bnorm * bnorm
                             : 2.0 * L + rho * k * bnorm * bnorm;
    const double gamma_k = k / denom;
    // the printed x-step differentiates f at x_k; the midpoint sequence
    // x_k^md of step 3 does not enter the update
    Vector x_new = x - gamma_k * (p.f->gradient(x) +
                                  sigma_k * p.B->adjoint_apply(p.B->apply(x) - z) +
                                  p.B->adjoint_apply(y));
    Vector x_ag_new = (1.0 - theta) * x_ag + theta * x_new;
    const Vector bx_new = p.B->apply(x_new);
    Vector z_new = p.g->prox(bx_new + y / rho, 1.0 / rho);
    Vector z_ag_new = (1.0 - theta) * z_ag + theta * z_new;
    Vector y_new = y + rho * (bx_new - z_new);
    const bool stop =
        r.after_step(k, x_new, x, &y_new, &x_ag_new, nullptr, x_ag_new);
    x = std::move(x_new);
    y = std::move(y_new);
    z = std::move(z_new);
    x_ag = std::move(x_ag_new);
    z_ag = std::move(z_ag_new);
    if (stop) break;
  }
  return finish(r, x_ag, x, y, x_ag);
}

namespace {

double pdfp_gamma(const ProblemHandle& p, const SolverConfig& cfg,
                  const char* who) {
  const double L = p.f->lipschitz();
  const double gamma = cfg.gamma.value_or(L > 0.0 ? 1.0 / L : 1.0);
  if (gamma <= 0.0) {
    throw std::invalid_argument(std::string(who) + ": gamma must be > 0");
  }
  if (L > 0.0) {
    const double cap = cfg.pdfp_wide_step ? 2.0 / L : 1.0 / L;
    if (gamma > cap * (1.0 + 1e-12)) {
      throw std::invalid_argument(std::string(who) + ": gamma exceeds " +
                                  (cfg.pdfp_wide_step ? "2/L_f" : "1/L_f"));
    }
    if (cfg.pdfp_wide_step && gamma > 1.0 / L * (1.0 + 1e-12)) {
      std::cerr << who
                << ": gamma in (1/L_f, 2/L_f]: convergent but outside the "
                   "gap-rate regime\n";
    }
  }
  return gamma;
}

}  // namespace

SolverResult run_pdfp(const ProblemHandle& p, const SolverConfig& cfg,
                      const RunHooks& hooks) {
  validate_common(cfg);
  const double gamma = pdfp_gamma(p, cfg, "run_pdfp");
  const double rho = rho_max_bbt(p, cfg);
  const double lambda = resolve_lambda(cfg, rho);

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector y = initial_y(p, cfg);
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const Vector gfx = p.f->gradient(x);
    Vector y_new;
    Vector x_new;
    if (cfg.pdfp_form == PdfpForm::conjugate) {
      const Vector bty = p.B->adjoint_apply(y);
      const Vector x_bar = x - gamma * gfx - gamma * bty;
      y_new = p.g->conj_prox((lambda / gamma) * p.B->apply(x_bar) + y,
                             lambda / gamma);
      x_new = x - gamma * gfx - gamma * p.B->adjoint_apply(y_new);
    } else {
      const Vector x_bar = x - gamma * gfx;
      const Vector u = p.B->apply(x_bar) + y -
                       lambda * p.B->apply(p.B->adjoint_apply(y));
      y_new = u - p.g->prox(u, gamma / lambda);
      x_new = x_bar - lambda * p.B->adjoint_apply(y_new);
    }
    const bool stop = r.after_step(k, x_new, x, &y_new, nullptr, nullptr, x_new);
    x = std::move(x_new);
    y = std::move(y_new);
    if (stop) break;
  }
  return finish(r, x, x, y);
}

SolverResult run_ipdfp(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks) {
  validate_common(cfg);
  const double gamma = pdfp_gamma(p, cfg, "run_ipdfp");
  const double rho = rho_max_bbt(p, cfg);
  const double lambda = resolve_lambda(cfg, rho);
  auto alpha_at = [&cfg](int k) {
    const double a = cfg.inertia ? cfg.inertia(k) : 0.0;
    if (a < 0.0) throw std::invalid_argument("run_ipdfp: alpha_k must be >= 0");
    return a;
  };

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector y = initial_y(p, cfg);
  Vector x_prev = x;  // x_0 = x_1
  Vector y_prev = y;  // y_0 = y_1
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double alpha = alpha_at(k);
    Vector z, v;
    if (alpha == 0.0) {
      z = x;
      v = y;
    } else {
      z = x + alpha * (x - x_prev);
      const Vector dy = y - y_prev;
      v = y + alpha * (dy - lambda * p.B->apply(p.B->adjoint_apply(dy)));
    }
    const Vector gfz = p.f->gradient(z);
    const Vector x_bar = z - gamma * gfz - gamma * p.B->adjoint_apply(y);
    Vector y_new =
        p.g->conj_prox((lambda / gamma) * p.B->apply(x_bar) + v, lambda / gamma);
    Vector x_new;
    if (cfg.ipdfp_inertial_gradient) {
      // variant: carry the extrapolated point through the final update
      x_new = z - gamma * gfz - gamma * p.B->adjoint_apply(y_new);
    } else {
      // as printed: the final update reads x_k and grad f(x_k)
      const Vector gfx = p.f->gradient(x);
      x_new = x - gamma * gfx - gamma * p.B->adjoint_apply(y_new);
    }
    const bool stop = r.after_step(k, x_new, x, &y_new, nullptr, nullptr, x_new);
    x_prev = std::move(x);
    y_prev = std::move(y);
    x = std::move(x_new);
    y = std::move(y_new);
    if (stop) break;
  }
  return finish(r, x, x, y);
}

SolverResult run_apdfp(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks) {
  validate_common(cfg);
  const double L = p.f->lipschitz();
  if (!cfg.gamma_fn) {
    if (L <= 0.0) {
      throw std::invalid_argument("run_apdfp: need L_f > 0 or an explicit schedule");
    }
    if (cfg.c < 0.0 || cfg.c >= L) {
      throw std::invalid_argument("run_apdfp: c must satisfy 0 <= c < L_f");
    }
  }
  const double rho = rho_max_bbt(p, cfg);
  const double lambda = resolve_lambda(cfg, rho);
  auto theta_at = [&cfg](int k) {
    return cfg.theta_fn ? cfg.theta_fn(k) : 2.0 / (k + 1);
  };
  auto gamma_at = [&cfg, L](int k) {
    return cfg.gamma_fn ? cfg.gamma_fn(k) : 1.0 / (L + cfg.c * k);
  };

  Runner r(p, cfg, hooks);
  Vector x = initial_x(p, cfg);
  Vector y = initial_y(p, cfg);
  Vector x_ag = x;
  Vector y_ag = y;
  for (int k = 1; k <= cfg.max_iters; ++k) {
    const double theta = theta_at(k);
    const double gamma_k = gamma_at(k);
    const double step = gamma_k / theta;
    const double sigma = (lambda / gamma_k) * theta;

    const Vector x_md = (1.0 - theta) * x_ag + theta * x;
    const Vector gfm = p.f->gradient(x_md);
    const Vector bty = p.B->adjoint_apply(y);
    const Vector x_bar = x - step * gfm - step * bty;
    Vector y_new = p.g->conj_prox(sigma * p.B->apply(x_bar) + y, sigma);
    Vector x_new = x - step * gfm - step * p.B->adjoint_apply(y_new);
    Vector x_ag_new = (1.0 - theta) * x_ag + theta * x_new;
    Vector y_ag_new = (1.0 - theta) * y_ag + theta * y_new;

    const bool stop =
        r.after_step(k, x_new, x, &y_new, &x_ag_new, &y_ag_new, x_ag_new);
    x = std::move(x_new);
    y = std::move(y_new);
    x_ag = std::move(x_ag_new);
    y_ag = std::move(y_ag_new);
    if (stop) break;
  }
  return finish(r, x_ag, x, y, x_ag, y_ag);
}

SolverResult run_solver(const ProblemHandle& p, const SolverConfig& cfg,
                        const RunHooks& hooks) {
  switch (cfg.algorithm) {
    case Algorithm::pgd: return run_pgd(p, cfg, hooks);
    case Algorithm::fista: return run_fista(p, cfg, hooks);
    case Algorithm::nag: return run_nag(p, cfg, hooks);
    case Algorithm::lpdhgm: return run_lpdhgm(p, cfg, hooks);
    case Algorithm::apd: return run_apd(p, cfg, hooks);
    case Algorithm::lp_admm: return run_lp_admm(p, cfg, hooks);
    case Algorithm::aadmm: return run_aadmm(p, cfg, hooks);
    case Algorithm::pdfp: return run_pdfp(p, cfg, hooks);
    case Algorithm::ipdfp: return run_ipdfp(p, cfg, hooks);
    case Algorithm::apdfp: return run_apdfp(p, cfg, hooks);
  }
  throw std::invalid_argument("run_solver: unknown algorithm");
}

std::string algorithm_name(Algorithm alg) {
  switch (alg) {
    case Algorithm::pgd: return "pgd";
    case Algorithm::fista: return "fista";
    case Algorithm::nag: return "nag";
    case Algorithm::lpdhgm: return "lpdhgm";
    case Algorithm::apd: return "apd";
    case Algorithm::lp_admm: return "lp-admm";
    case Algorithm::aadmm: return "aadmm";
    case Algorithm::pdfp: return "pdfp";
    case Algorithm::ipdfp: return "ipdfp";
    case Algorithm::apdfp: return "apdfp";
  }
  return "unknown";
}

Algorithm algorithm_from_name(const std::string& name) {
  if (name == "pgd") return Algorithm::pgd;
  if (name == "fista") return Algorithm::fista;
  if (name == "nag") return Algorithm::nag;
  if (name == "lpdhgm") return Algorithm::lpdhgm;
  if (name == "apd") return Algorithm::apd;
  if (name == "lp-admm" || name == "lp_admm") return Algorithm::lp_admm;
  if (name == "aadmm") return Algorithm::aadmm;
  if (name == "pdfp") return Algorithm::pdfp;
  if (name == "ipdfp") return Algorithm::ipdfp;
  if (name == "apdfp") return Algorithm::apdfp;
  throw std::invalid_argument("unknown algorithm name: " + name);
}

}  // namespace apdfp
