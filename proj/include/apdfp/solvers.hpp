#pragma once

#include <cstdint>
#include <functional>
#include <memory>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include "apdfp/functions.hpp"
#include "apdfp/linops.hpp"

namespace apdfp {

/// Composite problem min_x f(x) + g(Bx).
struct ProblemHandle {
  std::shared_ptr<const SmoothTerm> f;
  std::shared_ptr<const ProxTerm> g;
  std::shared_ptr<const LinearMap> B;

  ProblemHandle(std::shared_ptr<const SmoothTerm> f_in,
                std::shared_ptr<const ProxTerm> g_in,
                std::shared_ptr<const LinearMap> B_in);

  int primal_dim() const { return B->in_dim(); }
  int dual_dim() const { return B->out_dim(); }
  double objective(const Vector& x) const;
};

enum class Algorithm {
  pgd,
  fista,
  nag,
  lpdhgm,
  apd,
  lp_admm,
  aadmm,
  pdfp,
  ipdfp,
  apdfp,
};

std::string algorithm_name(Algorithm alg);

enum class PdfpForm { primal, conjugate };

struct SolverConfig {
  Algorithm algorithm = Algorithm::pdfp;
  int max_iters = 1000;
  double stop_tol = 1e-3;   // relative error between consecutive iterates
  int trace_cadence = 1;    // record every n-th iteration
  std::uint64_t seed = 0;

  std::optional<Vector> x0;  // default: zero vector
  std::optional<Vector> y0;

  // shared step-size family
  std::optional<double> gamma;        // pgd/fista/pdfp/ipdfp constant step; default 1/L_f
  double c = 0.0;                     // apdfp/nag schedule gamma_k = 1/(L_f + c k)
  double lambda_scale = 1.0;          // lambda = lambda_scale / rho_max(BB^T)
  std::optional<double> lambda;       // explicit lambda, overrides lambda_scale
  std::optional<double> rho_max_bbt;  // cached spectral estimate of BB^T
  std::optional<double> b_norm;       // cached ||B||_2

  bool pdfp_wide_step = false;        // admit gamma <= 2/L_f
  PdfpForm pdfp_form = PdfpForm::conjugate;

  std::optional<double> sigma;        // lpdhgm dual step
  std::optional<double> lpdhgm_gamma; // lpdhgm primal step
  double apd_C = 1.0;                 // apd constant C
  double lp_admm_C = 1.0;             // lp-admm constant C
  std::optional<double> rho;          // aadmm penalty; default 1/||B||_2
  bool aadmm_printed_step = true;     // gamma_k = k/(2/L_f + rho k ||B||^2) as printed
                                      // vs. k/(2 L_f + rho k ||B||^2)

  std::function<double(int)> inertia;      // ipdfp alpha_k; default 0
  bool ipdfp_inertial_gradient = false;    // variant: drive step 6 from z_k
  std::function<double(int)> fista_momentum;  // override of (k-1)/(k+2)

  std::function<double(int)> theta_fn;     // apdfp/nag override of theta_k
  std::function<double(int)> gamma_fn;     // apdfp/nag override of gamma_k
};

struct TraceRecord {
  int iter = 0;
  double objective = 0.0;
  double rel_err = 0.0;
  std::optional<double> gap;
  std::optional<double> metric;
  double wall_ms = 0.0;
};

/// Append-only per-iteration record list with strictly increasing iteration
/// numbers.
class Trace {
 public:
  void append(TraceRecord rec);
  const std::vector<TraceRecord>& records() const { return records_; }
  bool empty() const { return records_.empty(); }

 private:
  std::vector<TraceRecord> records_;
};

/// Snapshot handed to hooks after step k completes. Pointers are null when
/// the algorithm does not maintain the corresponding sequence.
struct IterateView {
  int k = 0;
  const Vector* x = nullptr;      // x_{k+1}
  const Vector* x_prev = nullptr; // x_k
  const Vector* y = nullptr;
  const Vector* x_ag = nullptr;
  const Vector* y_ag = nullptr;
  const Vector* repr = nullptr;   // point the algorithm would return now
};

struct RunHooks {
  std::function<void(const IterateView&)> on_iterate;  // every iteration
  // evaluated only on traced iterations
  std::function<std::optional<double>(const IterateView&)> gap_metric;
  std::function<std::optional<double>(const IterateView&)> extra_metric;
};

struct SolverResult {
  Vector x;                       // designated output of the algorithm
  Vector x_last;
  Vector y_last;
  std::optional<Vector> x_ag;
  std::optional<Vector> y_ag;
  int iterations = 0;
  bool converged = false;
  Trace trace;
};

/// Decaying accelerated schedule theta_k = 2/(k+1), gamma_k = 1/(L_f + c k).
/// Requires k >= 1 and 0 <= c < L_f.
std::pair<double, double> apdfp_schedule(int k, double L_f, double c);

struct ClauseReport {
  std::string name;
  bool pass = false;
  double worst_slack = 0.0;  // min over k of (admissible RHS - LHS)
  int worst_k = 0;
};

struct ScheduleReport {
  std::vector<ClauseReport> clauses;
  bool pass = false;
  double ratio_bound = 0.0;  // (gamma_K/theta_K)^2 / (gamma_1/theta_1)^2
};

/// Checks the step-size admissibility conditions for the accelerated
/// schedule: 0 < gamma_k <= 1/L_f, the two ratio inequalities, monotone and
/// bounded gamma_k^2/theta_k^2, and theta_1 = 1. Ratio clauses whose
/// denominator (1 - theta_{k+1}) vanishes are vacuously satisfied, which is
/// the theta = 1 fixed-step regime.
ScheduleReport check_schedule(const std::vector<double>& theta,
                              const std::vector<double>& gamma, double L_f);

struct Fp2oResult {
  Vector x;
  int iterations = 0;
  double residual = 0.0;
  bool converged = false;
};

/// Fixed-point evaluation of prox_{gamma g o B}(y): iterates
///   v_{k+1} = (I - prox_{(gamma/lambda) g})(B y + (I - lambda B B^T) v_k)
/// to a fixed point v* and returns y - lambda B^T v*. Requires
/// 0 < lambda < 1/rho_max(BB^T).
Fp2oResult fp2o_prox(const ProxTerm& g, const LinearMap& B, const Vector& y,
                     double gamma, double lambda, double tol = 1e-10,
                     int max_iters = 10000);

SolverResult run_pgd(const ProblemHandle& p, const SolverConfig& cfg,
                     const RunHooks& hooks = {});
SolverResult run_fista(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks = {});
SolverResult run_nag(const ProblemHandle& p, const SolverConfig& cfg,
                     const RunHooks& hooks = {});
SolverResult run_lpdhgm(const ProblemHandle& p, const SolverConfig& cfg,
                        const RunHooks& hooks = {});
SolverResult run_apd(const ProblemHandle& p, const SolverConfig& cfg,
                     const RunHooks& hooks = {});
SolverResult run_lp_admm(const ProblemHandle& p, const SolverConfig& cfg,
                         const RunHooks& hooks = {});
SolverResult run_aadmm(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks = {});
SolverResult run_pdfp(const ProblemHandle& p, const SolverConfig& cfg,
                      const RunHooks& hooks = {});
SolverResult run_ipdfp(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks = {});
SolverResult run_apdfp(const ProblemHandle& p, const SolverConfig& cfg,
                       const RunHooks& hooks = {});

/// Dispatch on cfg.algorithm.
SolverResult run_solver(const ProblemHandle& p, const SolverConfig& cfg,
                        const RunHooks& hooks = {});

Algorithm algorithm_from_name(const std::string& name);

}  // namespace apdfp
