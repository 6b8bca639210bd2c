#include <doctest.h>

#include <cmath>
#include <limits>
#include <thread>

#include "apdfp/diagnostics.hpp"
#include "apdfp/solvers.hpp"
#include "oracles.hpp"

using namespace apdfp;

namespace {

struct Capture {
  std::vector<Vector> x;
  std::vector<Vector> x_ag;
  std::vector<Vector> y;
};

RunHooks capture_hooks(Capture& cap) {
  RunHooks hooks;
  hooks.on_iterate = [&cap](const IterateView& v) {
    cap.x.push_back(*v.x);
    if (v.x_ag) cap.x_ag.push_back(*v.x_ag);
    if (v.y) cap.y.push_back(*v.y);
  };
  return hooks;
}

double max_linf(const std::vector<Vector>& a, const std::vector<Vector>& b) {
  REQUIRE(a.size() == b.size());
  double worst = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    worst = std::max(worst, (a[i] - b[i]).lpNorm<Eigen::Infinity>());
  }
  return worst;
}

// random strongly convex least-squares term with a chosen curvature range
std::shared_ptr<LeastSquaresSmooth> random_quadratic(int d, double lam_min,
                                                     double lam_max,
                                                     std::uint64_t seed,
                                                     Vector* x_opt = nullptr) {
  NormalSampler normal(seed);
  Matrix G(d, d);
  for (int i = 0; i < d; ++i)
    for (int j = 0; j < d; ++j) G(i, j) = normal();
  const Matrix Q =
      Eigen::HouseholderQR<Matrix>(G).householderQ() * Matrix::Identity(d, d);
  Vector s(d);
  for (int i = 0; i < d; ++i) {
    const double t = d > 1 ? static_cast<double>(i) / (d - 1) : 0.0;
    s[i] = std::sqrt(lam_min * std::pow(lam_max / lam_min, t));
  }
  const Matrix C = Q * s.asDiagonal() * Q.transpose();
  Vector plant(d);
  for (int i = 0; i < d; ++i) plant[i] = normal();
  if (x_opt) *x_opt = plant;
  return least_squares_smooth(std::make_shared<DenseMap>(C), C * plant, lam_max);
}

std::shared_ptr<DenseMap> random_coupling(int r, int d, double norm,
                                          std::uint64_t seed) {
  NormalSampler normal(seed);
  Matrix B(r, d);
  for (int i = 0; i < r; ++i)
    for (int j = 0; j < d; ++j) B(i, j) = normal();
  DenseMap probe(B);
  const double bn = std::sqrt(power_method(probe, PowerMode::BBt, 1e-12, 20000, 0).value);
  B *= norm / bn;
  return std::make_shared<DenseMap>(B);
}

}  // namespace

TEST_SUITE("solvers") {

TEST_CASE("apdfp_schedule values and guards") {
  auto [th1, ga1] = apdfp_schedule(1, 4.0, 1.0);
  CHECK(th1 == 1.0);
  CHECK(ga1 == doctest::Approx(1.0 / 5.0));

  auto [th3, ga3] = apdfp_schedule(3, 2.0, 0.0);
  CHECK(th3 == doctest::Approx(0.5));
  CHECK(ga3 == doctest::Approx(0.5));

  for (int k = 1; k <= 50; ++k) {
    CHECK(apdfp_schedule(k, 2.0, 0.0).second == doctest::Approx(0.5));
  }
  CHECK_THROWS_AS(apdfp_schedule(0, 2.0, 0.0), std::invalid_argument);
  CHECK_THROWS_AS(apdfp_schedule(1, 2.0, 2.0), std::invalid_argument);
  CHECK_THROWS_AS(apdfp_schedule(1, 2.0, -0.1), std::invalid_argument);
}

TEST_CASE("check_schedule accepts the decaying schedule for all c") {
  const double L = 10.0;
  const int K = 10000;
  for (double c : {0.0, L / 4.0, L / 2.0, 0.99 * L}) {
    std::vector<double> theta(K), gamma(K);
    for (int k = 1; k <= K; ++k) {
      const auto [th, ga] = apdfp_schedule(k, L, c);
      theta[k - 1] = th;
      gamma[k - 1] = ga;
    }
    const auto rep = check_schedule(theta, gamma, L);
    CHECK(rep.pass);
    CHECK(std::isfinite(rep.ratio_bound));
  }
}

TEST_CASE("check_schedule: fixed theta = 1 regime is vacuously admissible") {
  const double L = 3.0;
  std::vector<double> theta(100, 1.0), gamma(100, 1.0 / L);
  const auto rep = check_schedule(theta, gamma, L);
  CHECK(rep.pass);
}

TEST_CASE("check_schedule rejects gamma = 2/L_f with slack -1/L_f") {
  const double L = 5.0;
  const int K = 50;
  std::vector<double> theta(K), gamma(K, 2.0 / L);
  for (int k = 1; k <= K; ++k) theta[k - 1] = 2.0 / (k + 1);
  const auto rep = check_schedule(theta, gamma, L);
  CHECK_FALSE(rep.pass);
  const auto& range = rep.clauses.at(0);
  CHECK(range.name == "gamma_range");
  CHECK_FALSE(range.pass);
  CHECK(range.worst_slack == doctest::Approx(-1.0 / L));
}

TEST_CASE("pgd: exact one-step minimizer for f = ||x||^2/2") {
  auto f = least_squares_smooth(std::make_shared<IdentityMap>(3),
                                Vector::Zero(3));
  ProblemHandle prob(f, std::make_shared<ZeroProx>(),
                     std::make_shared<IdentityMap>(3));
  SolverConfig cfg;
  cfg.algorithm = Algorithm::pgd;
  cfg.max_iters = 1;
  cfg.stop_tol = 1e-30;
  cfg.gamma = 1.0;
  Vector x0(3);
  x0 << 3, -1, 2;
  cfg.x0 = x0;
  const auto res = run_pgd(prob, cfg);
  CHECK(res.x.norm() == doctest::Approx(0.0));
}

TEST_CASE("pgd: lasso toy matches a long-run reference within 1e-6") {
  Vector plant;
  auto f = random_quadratic(5, 0.5, 2.0, 11, &plant);
  auto g = l1_prox(0.3);
  ProblemHandle prob(f, g, std::make_shared<IdentityMap>(5));

  SolverConfig long_cfg;
  long_cfg.algorithm = Algorithm::pgd;
  long_cfg.max_iters = 100000;
  long_cfg.stop_tol = 1e-15;
  long_cfg.trace_cadence = 1 << 30;
  const auto ref = run_pgd(prob, long_cfg);

  SolverConfig cfg = long_cfg;
  cfg.max_iters = 20000;
  const auto res = run_pgd(prob, cfg);
  CHECK((res.x - ref.x).norm() <= 1e-6);
}

TEST_CASE("pgd: monotone objective at gamma = 1/L") {
  Vector plant;
  auto f = random_quadratic(6, 0.2, 4.0, 12, &plant);
  auto g = l1_prox(0.1);
  ProblemHandle prob(f, g, std::make_shared<IdentityMap>(6));
  SolverConfig cfg;
  cfg.algorithm = Algorithm::pgd;
  cfg.max_iters = 300;
  cfg.stop_tol = 1e-30;
  std::vector<double> objs;
  RunHooks hooks;
  hooks.on_iterate = [&prob, &objs](const IterateView& v) {
    objs.push_back(prob.objective(*v.x));
  };
  run_pgd(prob, cfg, hooks);
  for (std::size_t i = 1; i < objs.size(); ++i) {
    CHECK(objs[i] <= objs[i - 1] + 1e-12);
  }
}

TEST_CASE("pgd rejects non-identity B") {
  auto f = random_quadratic(4, 0.5, 2.0, 13);
  auto B = random_coupling(3, 4, 1.0, 14);
  ProblemHandle prob(f, l1_prox(0.1), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::pgd;
  CHECK_THROWS_AS(run_pgd(prob, cfg), std::invalid_argument);
  CHECK_THROWS_AS(run_fista(prob, cfg), std::invalid_argument);
  CHECK_THROWS_AS(run_nag(prob, cfg), std::invalid_argument);
}

TEST_CASE("fista: first step equals pgd, forced zero momentum equals pgd") {
  Vector plant;
  auto f = random_quadratic(5, 0.3, 3.0, 15, &plant);
  auto g = l1_prox(0.2);
  ProblemHandle prob(f, g, std::make_shared<IdentityMap>(5));

  SolverConfig cfg;
  cfg.max_iters = 60;
  cfg.stop_tol = 1e-30;

  Capture pgd_cap, fista_cap, forced_cap;
  cfg.algorithm = Algorithm::pgd;
  run_pgd(prob, cfg, capture_hooks(pgd_cap));
  cfg.algorithm = Algorithm::fista;
  run_fista(prob, cfg, capture_hooks(fista_cap));
  CHECK((fista_cap.x[0] - pgd_cap.x[0]).lpNorm<Eigen::Infinity>() == 0.0);

  cfg.fista_momentum = [](int) { return 0.0; };
  run_fista(prob, cfg, capture_hooks(forced_cap));
  CHECK(max_linf(forced_cap.x, pgd_cap.x) == 0.0);
}

TEST_CASE("fista: objective error slope is at most -1.8 on a smooth quadratic") {
  Vector plant;
  auto f = random_quadratic(20, 1e-4, 1.0, 16, &plant);
  ProblemHandle prob(f, std::make_shared<ZeroProx>(),
                     std::make_shared<IdentityMap>(20));
  // consistent system: the optimal value is exactly zero
  SolverConfig cfg;
  cfg.algorithm = Algorithm::fista;
  cfg.max_iters = 1000;
  cfg.stop_tol = 1e-30;
  std::vector<std::pair<int, double>> errs;
  RunHooks hooks;
  hooks.on_iterate = [&prob, &errs](const IterateView& v) {
    errs.emplace_back(v.k, prob.objective(*v.x));
  };
  run_fista(prob, cfg, hooks);
  const RateFit fit = fit_rate(errs, 10, 1000);
  CHECK(fit.slope <= -1.8);
}

TEST_CASE("nag: midpoint equals the iterate at k = 1 and slope matches fista") {
  Vector plant;
  auto f = random_quadratic(20, 1e-4, 1.0, 17, &plant);
  ProblemHandle prob(f, std::make_shared<ZeroProx>(),
                     std::make_shared<IdentityMap>(20));
  SolverConfig cfg;
  cfg.algorithm = Algorithm::nag;
  cfg.max_iters = 1000;
  cfg.stop_tol = 1e-30;
  std::vector<std::pair<int, double>> errs;
  RunHooks hooks;
  hooks.on_iterate = [&prob, &errs](const IterateView& v) {
    errs.emplace_back(v.k, prob.objective(*v.repr));
  };
  const auto res = run_nag(prob, cfg, hooks);
  CHECK(res.x_ag.has_value());
  const RateFit fit = fit_rate(errs, 10, 1000);
  CHECK(fit.slope <= -1.8);
}

TEST_CASE("nag: theta_1 = 1 makes the first step a prox-gradient step") {
  Vector plant;
  auto f = random_quadratic(5, 0.3, 2.0, 70, &plant);
  auto g = l1_prox(0.2);
  ProblemHandle prob(f, g, std::make_shared<IdentityMap>(5));
  SolverConfig cfg;
  cfg.algorithm = Algorithm::nag;
  cfg.max_iters = 1;
  cfg.stop_tol = 1e-30;
  Capture cap;
  run_nag(prob, cfg, capture_hooks(cap));
  // x_1^md = x_1 and gamma_1/theta_1 = 1/L, so step one is plain pgd
  const double gamma = 1.0 / f->lipschitz();
  const Vector want = g->prox(-gamma * f->gradient(Vector::Zero(5)), gamma);
  CHECK((cap.x[0] - want).lpNorm<Eigen::Infinity>() == 0.0);
  // theta_1 = 1 also pins the first aggregate to the first iterate
  CHECK((cap.x_ag[0] - cap.x[0]).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("lpdhgm: boundary parameters accepted, violations named") {
  auto f = random_quadratic(6, 0.5, 2.0, 18);
  auto B = random_coupling(4, 6, 1.0, 19);
  ProblemHandle prob(f, l1_prox(0.1), B);

  SolverConfig cfg;
  cfg.algorithm = Algorithm::lpdhgm;
  cfg.max_iters = 5;
  cfg.stop_tol = 1e-30;
  const double L = f->lipschitz();
  cfg.lpdhgm_gamma = 1.0 / L;
  cfg.sigma = 1.0 / (L + 1.0 / L);  // exactly on the boundary
  CHECK_NOTHROW(run_lpdhgm(prob, cfg));

  cfg.sigma = 1.05 / (L + 1.0 / L);
  try {
    run_lpdhgm(prob, cfg);
    FAIL("expected rejection");
  } catch (const std::invalid_argument& e) {
    CHECK(std::string(e.what()).find("step-size condition") != std::string::npos);
  }
}

TEST_CASE("lpdhgm: zero coupling reduces to gradient descent") {
  Vector plant;
  auto f = random_quadratic(5, 0.4, 1.5, 20, &plant);
  auto B0 = std::make_shared<DenseMap>(Matrix::Zero(3, 5));
  ProblemHandle prob(f, l1_prox(0.3), B0);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::lpdhgm;
  cfg.max_iters = 40;
  cfg.stop_tol = 1e-30;
  Capture cap;
  run_lpdhgm(prob, cfg, capture_hooks(cap));

  // manual gradient descent with the same step
  const double gamma = 1.0 / f->lipschitz();
  Vector x = Vector::Zero(5);
  for (std::size_t k = 0; k < cap.x.size(); ++k) {
    x = x - gamma * f->gradient(x);
    CHECK((cap.x[k] - x).lpNorm<Eigen::Infinity>() <= 1e-14);
  }
}

TEST_CASE("fp2o: identity coupling matches the direct soft threshold") {
  std::mt19937_64 gen(21);
  auto g = l1_prox(1.0);
  IdentityMap id(6);
  for (int t = 0; t < 5; ++t) {
    const Vector y = oracles::random_vector(gen, 6, 3.0);
    const double gamma = 0.7;
    const auto res = fp2o_prox(*g, id, y, gamma, 0.99, 1e-12, 20000);
    CHECK(res.converged);
    CHECK((res.x - g->prox(y, gamma)).lpNorm<Eigen::Infinity>() <= 1e-6);
  }
}

TEST_CASE("fp2o: gamma = 0 returns the input point") {
  auto g = l1_prox(2.0);
  IdentityMap id(4);
  Vector y(4);
  y << 1, -2, 3, -4;
  const auto res = fp2o_prox(*g, id, y, 0.0, 0.5);
  CHECK(res.converged);
  CHECK((res.x - y).norm() == doctest::Approx(0.0));
}

TEST_CASE("fp2o: matches the 2-D grid oracle for B = [[1,1]]") {
  Matrix Bm(1, 2);
  Bm << 1, 1;
  DenseMap B(Bm);
  auto g = l1_prox(1.0);
  Vector y(2);
  y << 1.7, -0.4;
  // 0 < lambda < 1/rho_max(BB^T) = 1/2
  const auto res = fp2o_prox(*g, B, y, 1.0, 0.45, 1e-12, 50000);
  CHECK(res.converged);
  const auto oracle = oracles::grid_min_2d(
      [&y](double a, double b) {
        return std::abs(a + b) +
               0.5 * ((a - y[0]) * (a - y[0]) + (b - y[1]) * (b - y[1]));
      },
      -3.0, 3.0, 1e-3, 2e-5);
  CHECK(std::abs(res.x[0] - oracle[0]) <= 1e-3);
  CHECK(std::abs(res.x[1] - oracle[1]) <= 1e-3);
}

TEST_CASE("fp2o: non-convergence within max_iters is flagged") {
  auto B = random_coupling(3, 5, 1.0, 22);
  auto g = l1_prox(0.5);
  Vector y(5);
  y << 1, 2, 3, 4, 5;
  // the very first sweep moves v away from 0, so one iteration cannot meet
  // an absurdly tight tolerance
  const auto res = fp2o_prox(*g, *B, y, 1.0, 0.5, 1e-30, 1);
  CHECK_FALSE(res.converged);
}

TEST_CASE("pdfp: identity coupling with lambda = 1 reproduces pgd exactly") {
  Vector plant;
  auto f = random_quadratic(6, 0.3, 2.0, 23, &plant);
  auto g = l1_prox(0.25);
  ProblemHandle prob(f, g, std::make_shared<IdentityMap>(6));

  SolverConfig cfg;
  cfg.max_iters = 100;
  cfg.stop_tol = 1e-30;
  Capture pgd_cap, pdfp_cap, primal_cap;
  cfg.algorithm = Algorithm::pgd;
  run_pgd(prob, cfg, capture_hooks(pgd_cap));
  cfg.algorithm = Algorithm::pdfp;
  cfg.lambda = 1.0;
  run_pdfp(prob, cfg, capture_hooks(pdfp_cap));
  CHECK(max_linf(pdfp_cap.x, pgd_cap.x) <= 1e-10);

  cfg.pdfp_form = PdfpForm::primal;
  run_pdfp(prob, cfg, capture_hooks(primal_cap));
  CHECK(max_linf(primal_cap.x, pgd_cap.x) <= 1e-10);
}

TEST_CASE("pdfp: zero prox term reduces to plain gradient descent") {
  Vector plant;
  auto f = random_quadratic(5, 0.5, 2.0, 24, &plant);
  auto B = random_coupling(3, 5, 1.0, 25);
  ProblemHandle prob(f, std::make_shared<ZeroProx>(), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::pdfp;
  cfg.max_iters = 50;
  cfg.stop_tol = 1e-30;
  Capture cap;
  run_pdfp(prob, cfg, capture_hooks(cap));
  const double gamma = 1.0 / f->lipschitz();
  Vector x = Vector::Zero(5);
  for (std::size_t k = 0; k < cap.x.size(); ++k) {
    x = x - gamma * f->gradient(x);
    CHECK((cap.x[k] - x).lpNorm<Eigen::Infinity>() <= 1e-12);
  }
}

TEST_CASE("pdfp: primal and conjugate forms coincide to 1e-12 per iterate") {
  Vector plant;
  auto f = random_quadratic(8, 0.2, 3.0, 26, &plant);
  auto B = random_coupling(5, 8, 1.3, 27);
  ProblemHandle prob(f, l1_prox(0.15), B);

  SolverConfig cfg;
  cfg.algorithm = Algorithm::pdfp;
  cfg.max_iters = 200;
  cfg.stop_tol = 1e-30;
  Capture conj_cap, primal_cap;
  cfg.pdfp_form = PdfpForm::conjugate;
  run_pdfp(prob, cfg, capture_hooks(conj_cap));
  cfg.pdfp_form = PdfpForm::primal;
  run_pdfp(prob, cfg, capture_hooks(primal_cap));
  CHECK(max_linf(primal_cap.x, conj_cap.x) <= 1e-12);
}

TEST_CASE("pdfp: step-size validation and the wide-step regime") {
  auto f = random_quadratic(4, 0.5, 2.0, 28);
  auto B = random_coupling(2, 4, 1.0, 29);
  ProblemHandle prob(f, l1_prox(0.1), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::pdfp;
  cfg.max_iters = 3;
  const double L = f->lipschitz();
  cfg.gamma = 1.5 / L;
  CHECK_THROWS_AS(run_pdfp(prob, cfg), std::invalid_argument);
  cfg.pdfp_wide_step = true;
  CHECK_NOTHROW(run_pdfp(prob, cfg));
  cfg.gamma = 2.5 / L;
  CHECK_THROWS_AS(run_pdfp(prob, cfg), std::invalid_argument);
  cfg.gamma.reset();
  cfg.pdfp_wide_step = false;
  cfg.lambda_scale = 1.7;  // lambda beyond 1/rho_max(BB^T)
  CHECK_THROWS_AS(run_pdfp(prob, cfg), std::invalid_argument);
}

TEST_CASE("ipdfp: zero inertia reproduces pdfp bit for bit") {
  Vector plant;
  auto f = random_quadratic(7, 0.3, 2.5, 30, &plant);
  auto B = random_coupling(4, 7, 0.9, 31);
  ProblemHandle prob(f, l1_prox(0.2), B);

  SolverConfig cfg;
  cfg.max_iters = 120;
  cfg.stop_tol = 1e-30;
  Capture pdfp_cap, ipdfp_cap;
  cfg.algorithm = Algorithm::pdfp;
  run_pdfp(prob, cfg, capture_hooks(pdfp_cap));
  cfg.algorithm = Algorithm::ipdfp;
  run_ipdfp(prob, cfg, capture_hooks(ipdfp_cap));
  CHECK(max_linf(ipdfp_cap.x, pdfp_cap.x) == 0.0);
}

TEST_CASE("ipdfp: fista-style inertia with B = I matches fista when the "
          "update degenerates") {
  Vector plant;
  auto f = random_quadratic(6, 0.4, 2.0, 32, &plant);
  auto g = l1_prox(0.3);
  ProblemHandle prob(f, g, std::make_shared<IdentityMap>(6));

  SolverConfig cfg;
  cfg.max_iters = 150;
  cfg.stop_tol = 1e-30;
  Capture fista_cap, ipdfp_cap;
  cfg.algorithm = Algorithm::fista;
  run_fista(prob, cfg, capture_hooks(fista_cap));

  cfg.algorithm = Algorithm::ipdfp;
  cfg.lambda = 1.0;
  cfg.inertia = [](int k) { return static_cast<double>(k - 1) / (k + 2); };
  cfg.ipdfp_inertial_gradient = true;  // carry z_k through the final update
  run_ipdfp(prob, cfg, capture_hooks(ipdfp_cap));
  CHECK(max_linf(ipdfp_cap.x, fista_cap.x) <= 1e-10);
}

TEST_CASE("ipdfp: the first iteration matches pdfp for any inertia") {
  Vector plant;
  auto f = random_quadratic(6, 0.3, 2.0, 71, &plant);
  auto B = random_coupling(3, 6, 1.0, 72);
  ProblemHandle prob(f, l1_prox(0.2), B);
  SolverConfig cfg;
  cfg.max_iters = 1;
  cfg.stop_tol = 1e-30;
  Capture pdfp_cap, ipdfp_cap;
  cfg.algorithm = Algorithm::pdfp;
  run_pdfp(prob, cfg, capture_hooks(pdfp_cap));
  cfg.algorithm = Algorithm::ipdfp;
  cfg.inertia = [](int) { return 0.7; };  // x_0 = x_1 nulls the momentum
  run_ipdfp(prob, cfg, capture_hooks(ipdfp_cap));
  CHECK((ipdfp_cap.x[0] - pdfp_cap.x[0]).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("apdfp: fixed theta = 1 with constant gamma reproduces pdfp bit for bit") {
  Vector plant;
  auto f = random_quadratic(8, 0.25, 2.0, 33, &plant);
  auto B = random_coupling(5, 8, 1.1, 34);
  ProblemHandle prob(f, l1_prox(0.12), B);

  SolverConfig cfg;
  cfg.max_iters = 150;
  cfg.stop_tol = 1e-30;
  Capture pdfp_cap, apdfp_cap;
  cfg.algorithm = Algorithm::pdfp;
  run_pdfp(prob, cfg, capture_hooks(pdfp_cap));

  cfg.algorithm = Algorithm::apdfp;
  const double gamma = 1.0 / f->lipschitz();
  cfg.theta_fn = [](int) { return 1.0; };
  cfg.gamma_fn = [gamma](int) { return gamma; };
  const auto res = run_apdfp(prob, cfg, capture_hooks(apdfp_cap));
  CHECK(max_linf(apdfp_cap.x, pdfp_cap.x) == 0.0);
  // with theta = 1 the aggregates coincide with the iterates
  CHECK(max_linf(apdfp_cap.x_ag, apdfp_cap.x) == 0.0);
  CHECK(res.y_ag.has_value());
}

TEST_CASE("apdfp: identity coupling with lambda = 1 reproduces nag") {
  std::mt19937_64 gen(35);
  Matrix S(40, 8);
  Vector b(40);
  for (int i = 0; i < 40; ++i) {
    for (int j = 0; j < 8; ++j) S(i, j) = uniform_pm1(gen);
    b[i] = uniform_pm1(gen) >= 0 ? 1.0 : -1.0;
  }
  SpMat Ssp(40, 8);
  std::vector<Eigen::Triplet<double>> trips;
  for (int i = 0; i < 40; ++i)
    for (int j = 0; j < 8; ++j) trips.emplace_back(i, j, S(i, j));
  Ssp.setFromTriplets(trips.begin(), trips.end());
  auto f = logistic_smooth(Ssp, b, 1e-2);
  auto g = l1_prox(0.05);
  ProblemHandle prob(f, g, std::make_shared<IdentityMap>(8));

  SolverConfig cfg;
  cfg.max_iters = 100;
  cfg.stop_tol = 1e-30;
  cfg.c = 0.0;
  Capture nag_cap, apdfp_cap;
  cfg.algorithm = Algorithm::nag;
  run_nag(prob, cfg, capture_hooks(nag_cap));
  cfg.algorithm = Algorithm::apdfp;
  cfg.lambda = 1.0;
  run_apdfp(prob, cfg, capture_hooks(apdfp_cap));
  CHECK(max_linf(apdfp_cap.x, nag_cap.x) <= 1e-10);
  CHECK(max_linf(apdfp_cap.x_ag, nag_cap.x_ag) <= 1e-10);
}

TEST_CASE("apdfp: aggregates at k = 2 equal the iterates exactly") {
  Vector plant;
  auto f = random_quadratic(5, 0.5, 2.0, 36, &plant);
  auto B = random_coupling(3, 5, 1.0, 37);
  ProblemHandle prob(f, l1_prox(0.1), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::apdfp;
  cfg.max_iters = 2;
  cfg.stop_tol = 1e-30;
  Capture cap;
  run_apdfp(prob, cfg, capture_hooks(cap));
  // theta_1 = 1 makes x_2^ag = x_2
  CHECK((cap.x_ag[0] - cap.x[0]).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("apdfp: rejects c outside [0, L_f) and bad lambda") {
  auto f = random_quadratic(4, 0.5, 2.0, 38);
  auto B = random_coupling(2, 4, 1.0, 39);
  ProblemHandle prob(f, l1_prox(0.1), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::apdfp;
  cfg.c = f->lipschitz();
  CHECK_THROWS_AS(run_apdfp(prob, cfg), std::invalid_argument);
  cfg.c = 0.0;
  cfg.lambda_scale = 2.0;
  CHECK_THROWS_AS(run_apdfp(prob, cfg), std::invalid_argument);
}

TEST_CASE("lp-admm: coupling residual decays and toy matches the reference") {
  Vector plant;
  auto f = random_quadratic(6, 0.3, 1.5, 40, &plant);
  auto B = random_coupling(4, 6, 1.0, 41);

  SUBCASE("g = 0 keeps Bx - z vanishing") {
    ProblemHandle prob(f, std::make_shared<ZeroProx>(), B);
    SolverConfig cfg;
    cfg.algorithm = Algorithm::lp_admm;
    cfg.max_iters = 400;
    cfg.stop_tol = 1e-30;
    std::vector<double> residuals;
    // recompute z from the printed recursion to watch the coupling residual
    Vector y = Vector::Zero(4), z = Vector::Zero(4);
    const double bnorm = 1.0;
    const double rho = 1.0 / bnorm;
    RunHooks hooks;
    hooks.on_iterate = [&](const IterateView& v) {
      const Vector bx = B->apply(*v.x);
      z = bx + y / rho;
      y = y + rho * (bx - z);
      residuals.push_back((bx - z).norm());
    };
    run_lp_admm(prob, cfg, hooks);
    CHECK(residuals.back() <= 1e-10);
  }

  SUBCASE("identity coupling with g = 0 is gradient descent plus a "
          "vanishing correction") {
    auto fid = random_quadratic(6, 0.3, 1.5, 52, &plant);
    ProblemHandle gd_prob(fid, std::make_shared<ZeroProx>(),
                          std::make_shared<IdentityMap>(6));
    SolverConfig cfg;
    cfg.algorithm = Algorithm::lp_admm;
    cfg.max_iters = 30;
    cfg.stop_tol = 1e-30;
    cfg.b_norm = 1.0;
    Capture cap;
    run_lp_admm(gd_prob, cfg, capture_hooks(cap));
    // z_k = Bx_k exactly when g = 0, so the correction terms vanish
    const double gamma = 1.0 / (fid->lipschitz() + 1.0);
    Vector x = Vector::Zero(6);
    for (std::size_t k = 0; k < cap.x.size(); ++k) {
      x = x - gamma * fid->gradient(x);
      CHECK((cap.x[k] - x).lpNorm<Eigen::Infinity>() <= 1e-13);
    }
  }

  SUBCASE("objective matches a long pdfp reference within 1e-4") {
    ProblemHandle prob(f, l1_prox(0.1), B);
    SolverConfig ref_cfg;
    ref_cfg.algorithm = Algorithm::pdfp;
    ref_cfg.max_iters = 100000;
    ref_cfg.stop_tol = 1e-15;
    ref_cfg.trace_cadence = 1 << 30;
    const double f_ref = prob.objective(run_pdfp(prob, ref_cfg).x);

    SolverConfig cfg;
    cfg.algorithm = Algorithm::lp_admm;
    cfg.max_iters = 20000;
    cfg.stop_tol = 1e-14;
    cfg.trace_cadence = 1 << 30;
    const double f_got = prob.objective(run_lp_admm(prob, cfg).x);
    CHECK(std::abs(f_got - f_ref) <= 1e-4);
  }
}

TEST_CASE("lpdhgm: graph toy objective matches a long pdfp reference within 1e-5") {
  Vector plant;
  auto f = random_quadratic(10, 0.4, 2.0, 42, &plant);
  auto B = random_coupling(6, 10, 1.0, 43);
  ProblemHandle prob(f, l1_prox(0.2), B);

  SolverConfig ref_cfg;
  ref_cfg.algorithm = Algorithm::pdfp;
  ref_cfg.max_iters = 100000;
  ref_cfg.stop_tol = 1e-15;
  ref_cfg.trace_cadence = 1 << 30;
  const double f_ref = prob.objective(run_pdfp(prob, ref_cfg).x);

  SolverConfig cfg;
  cfg.algorithm = Algorithm::lpdhgm;
  cfg.max_iters = 60000;
  cfg.stop_tol = 1e-15;
  cfg.trace_cadence = 1 << 30;
  const double f_got = prob.objective(run_lpdhgm(prob, cfg).x);
  CHECK(std::abs(f_got - f_ref) <= 1e-5);
}

TEST_CASE("apd and aadmm: first-step structure and cross-algorithm agreement") {
  Vector plant;
  auto f = random_quadratic(6, 0.3, 1.0, 44, &plant);  // L_f = 1
  auto B = random_coupling(4, 6, 1.0, 45);
  ProblemHandle prob(f, l1_prox(0.1), B);

  SUBCASE("aadmm first step ignores the quadratic coupling") {
    SolverConfig cfg;
    cfg.algorithm = Algorithm::aadmm;
    cfg.max_iters = 1;
    cfg.stop_tol = 1e-30;
    cfg.rho = 2.0;
    cfg.b_norm = 1.0;  // pin the estimate the expected value uses
    Capture cap;
    run_aadmm(prob, cfg, capture_hooks(cap));
    // sigma_1 = 0 and y_1 = 0: the first step is plain gradient descent
    const double bnorm = 1.0;
    const double gamma1 = 1.0 / (2.0 / f->lipschitz() + 2.0 * bnorm * bnorm);
    const Vector want = -gamma1 * f->gradient(Vector::Zero(6));
    CHECK((cap.x[0] - want).lpNorm<Eigen::Infinity>() <= 1e-12);
  }

  SUBCASE("apd and aadmm objectives approach apdfp at 5000 iterations") {
    SolverConfig acc_cfg;
    acc_cfg.algorithm = Algorithm::apdfp;
    acc_cfg.max_iters = 5000;
    acc_cfg.stop_tol = 1e-15;
    acc_cfg.trace_cadence = 1 << 30;
    const double f_apdfp = prob.objective(run_apdfp(prob, acc_cfg).x);

    SolverConfig apd_cfg = acc_cfg;
    apd_cfg.algorithm = Algorithm::apd;
    const double f_apd = prob.objective(run_apd(prob, apd_cfg).x);
    CHECK(std::abs(f_apd - f_apdfp) <= 1e-4);

    SolverConfig aadmm_cfg = acc_cfg;
    aadmm_cfg.algorithm = Algorithm::aadmm;
    aadmm_cfg.rho = 2.0;
    const double f_aadmm = prob.objective(run_aadmm(prob, aadmm_cfg).x);
    CHECK(std::abs(f_aadmm - f_apdfp) <= 1e-4);
  }

  SUBCASE("theta_1 = 1 pins the first aggregates to the first iterates") {
    for (Algorithm alg : {Algorithm::apd, Algorithm::aadmm}) {
      SolverConfig cfg;
      cfg.algorithm = alg;
      cfg.max_iters = 1;
      cfg.stop_tol = 1e-30;
      cfg.rho = 2.0;
      Capture cap;
      run_solver(prob, cfg, capture_hooks(cap));
      CHECK((cap.x_ag[0] - cap.x[0]).lpNorm<Eigen::Infinity>() == 0.0);
    }
  }

  SUBCASE("apd rejects C <= 0; aadmm rejects rho <= 0") {
    SolverConfig cfg;
    cfg.algorithm = Algorithm::apd;
    cfg.apd_C = 0.0;
    CHECK_THROWS_AS(run_apd(prob, cfg), std::invalid_argument);
    cfg.algorithm = Algorithm::aadmm;
    cfg.apd_C = 1.0;
    cfg.rho = -1.0;
    CHECK_THROWS_AS(run_aadmm(prob, cfg), std::invalid_argument);
  }
}

TEST_CASE("determinism: identical config gives bit-identical traces") {
  Vector plant;
  auto f = random_quadratic(6, 0.2, 2.0, 46, &plant);
  auto B = random_coupling(4, 6, 1.0, 47);
  ProblemHandle prob(f, l1_prox(0.15), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::apdfp;
  cfg.max_iters = 200;
  cfg.stop_tol = 1e-30;

  const auto a = run_apdfp(prob, cfg);
  const auto b = run_apdfp(prob, cfg);
  REQUIRE(a.trace.records().size() == b.trace.records().size());
  for (std::size_t i = 0; i < a.trace.records().size(); ++i) {
    CHECK(a.trace.records()[i].objective == b.trace.records()[i].objective);
    CHECK(a.trace.records()[i].rel_err == b.trace.records()[i].rel_err);
  }
  CHECK((a.x - b.x).lpNorm<Eigen::Infinity>() == 0.0);
}

TEST_CASE("iterates are checked for NaN/Inf every step") {
  auto f = random_quadratic(4, 0.5, 2.0, 48);
  auto B = random_coupling(2, 4, 1.0, 49);
  ProblemHandle prob(f, l1_prox(0.1), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::pdfp;
  cfg.max_iters = 10;
  cfg.stop_tol = 1e-30;
  Vector x0 = Vector::Constant(4, std::numeric_limits<double>::infinity());
  cfg.x0 = x0;  // first iterate mixes inf and nan
  CHECK_THROWS_AS(run_pdfp(prob, cfg), std::runtime_error);
}

TEST_CASE("trace enforces strictly increasing iteration numbers") {
  Trace t;
  t.append({1, 0.0, 0.0, std::nullopt, std::nullopt, 0.0});
  t.append({3, 0.0, 0.0, std::nullopt, std::nullopt, 0.0});
  CHECK_THROWS_AS(t.append({3, 0.0, 0.0, std::nullopt, std::nullopt, 0.0}),
                  std::logic_error);
}

TEST_CASE("solver runs are safe over a shared immutable problem") {
  Vector plant;
  auto f = random_quadratic(8, 0.3, 2.0, 50, &plant);
  auto B = random_coupling(5, 8, 1.0, 51);
  ProblemHandle prob(f, l1_prox(0.1), B);
  SolverConfig cfg;
  cfg.algorithm = Algorithm::apdfp;
  cfg.max_iters = 500;
  cfg.stop_tol = 1e-30;
  cfg.rho_max_bbt = 1.0;

  Vector serial = run_apdfp(prob, cfg).x;
  Vector t1_out, t2_out;
  std::thread t1([&] { t1_out = run_apdfp(prob, cfg).x; });
  std::thread t2([&] { t2_out = run_apdfp(prob, cfg).x; });
  t1.join();
  t2.join();
  CHECK((t1_out - serial).lpNorm<Eigen::Infinity>() == 0.0);
  CHECK((t2_out - serial).lpNorm<Eigen::Infinity>() == 0.0);
}

}  // TEST_SUITE
