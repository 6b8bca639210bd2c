#include "apdfp/problems.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cctype>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <sstream>
#include <vector>

#include "apdfp/rng.hpp"

namespace apdfp {

namespace {

bool is_blank(const std::string& line) {
  return std::all_of(line.begin(), line.end(),
                     [](unsigned char c) { return std::isspace(c); });
}

double parse_double(const std::string& tok, int line_no, const char* what) {
  std::size_t pos = 0;
  double v = 0.0;
  try {
    v = std::stod(tok, &pos);
  } catch (const std::exception&) {
    throw ParseError("line " + std::to_string(line_no) + ": malformed " +
                     what + " '" + tok + "'");
  }
  if (pos != tok.size()) {
    throw ParseError("line " + std::to_string(line_no) + ": malformed " +
                     what + " '" + tok + "'");
  }
  return v;
}

}  // namespace

Dataset parse_libsvm(std::istream& in, int d_override) {
  std::vector<Eigen::Triplet<double>> trips;
  std::vector<double> raw_labels;
  int max_index = 0;
  bool saw_zero = false, saw_neg = false;
  int line_no = 0;
  std::string line;

  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty() || is_blank(line) || line[0] == '#') continue;

    std::istringstream ls(line);
    std::string tok;
    ls >> tok;
    if (tok.find(':') != std::string::npos) {
      throw ParseError("line " + std::to_string(line_no) + ": missing label");
    }
    const double label = parse_double(tok, line_no, "label");
    if (label != -1.0 && label != 0.0 && label != 1.0) {
      throw ParseError("line " + std::to_string(line_no) + ": label " + tok +
                       " is not one of -1/0/+1");
    }
    if (label == 0.0) saw_zero = true;
    if (label == -1.0) saw_neg = true;

    const int row = static_cast<int>(raw_labels.size());
    raw_labels.push_back(label);
    int prev_index = 0;
    while (ls >> tok) {
      const auto colon = tok.find(':');
      if (colon == std::string::npos || colon == 0 || colon + 1 == tok.size()) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": malformed feature token '" + tok + "'");
      }
      const double idx_val = parse_double(tok.substr(0, colon), line_no, "index");
      const int idx = static_cast<int>(idx_val);
      if (idx_val != idx || idx < 1) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": index must be a positive integer, got '" +
                         tok.substr(0, colon) + "'");
      }
      if (idx <= prev_index) {
        throw ParseError("line " + std::to_string(line_no) +
                         ": indices must be ascending");
      }
      prev_index = idx;
      max_index = std::max(max_index, idx);
      const double val = parse_double(tok.substr(colon + 1), line_no, "value");
      trips.emplace_back(row, idx - 1, val);
    }
  }

  if (raw_labels.empty()) throw ParseError("empty input: no data rows");
  if (saw_zero && saw_neg) {
    throw ParseError("labels mix 0 and -1; cannot infer the label scheme");
  }
  int d = max_index;
  if (d_override > 0) {
    if (d_override < max_index) {
      throw ParseError("feature override " + std::to_string(d_override) +
                       " smaller than max index " + std::to_string(max_index));
    }
    d = d_override;
  }
  if (d == 0) throw ParseError("no features present in input");

  Dataset ds;
  ds.n_features = d;
  ds.S.resize(static_cast<int>(raw_labels.size()), d);
  ds.S.setFromTriplets(trips.begin(), trips.end());
  ds.S.makeCompressed();
  ds.b.resize(static_cast<Eigen::Index>(raw_labels.size()));
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    ds.b[static_cast<Eigen::Index>(i)] = raw_labels[i] == 0.0 ? -1.0 : raw_labels[i];
  }
  return ds;
}

Dataset parse_libsvm_file(const std::string& path, int d_override) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open input file: " + path);
  return parse_libsvm(in, d_override);
}

void write_libsvm(const Dataset& ds, std::ostream& out) {
  char buf[64];
  for (int i = 0; i < ds.n_samples(); ++i) {
    out << (ds.b[i] > 0.0 ? "+1" : "-1");
    for (SpMat::InnerIterator it(ds.S, i); it; ++it) {
      std::snprintf(buf, sizeof(buf), " %d:%.17g",
                    static_cast<int>(it.col()) + 1, it.value());
      out << buf;
    }
    out << '\n';
  }
}

std::pair<Dataset, Dataset> split_train_test(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed) {
  if (!(train_fraction > 0.0 && train_fraction < 1.0)) {
    throw std::invalid_argument("split_train_test: fraction must be in (0,1)");
  }
  const int n = ds.n_samples();
  const int n_train = static_cast<int>(std::llround(train_fraction * n));
  if (n_train < 1 || n_train >= n) {
    throw std::invalid_argument("split_train_test: split leaves a side empty");
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::mt19937_64 gen(seed);
  for (int i = n - 1; i > 0; --i) {  // Fisher-Yates with a portable draw
    const int j = static_cast<int>(gen() % static_cast<std::uint64_t>(i + 1));
    std::swap(order[i], order[j]);
  }

  auto take = [&ds](const std::vector<int>& rows, int lo, int hi) {
    Dataset out;
    out.n_features = ds.n_features;
    out.b.resize(hi - lo);
    std::vector<Eigen::Triplet<double>> trips;
    for (int r = lo; r < hi; ++r) {
      const int src = rows[r];
      out.b[r - lo] = ds.b[src];
      for (SpMat::InnerIterator it(ds.S, src); it; ++it) {
        trips.emplace_back(r - lo, static_cast<int>(it.col()), it.value());
      }
    }
    out.S.resize(hi - lo, ds.n_features);
    out.S.setFromTriplets(trips.begin(), trips.end());
    out.S.makeCompressed();
    return out;
  };
  return {take(order, 0, n_train), take(order, n_train, n)};
}

std::shared_ptr<SparseMap> build_graph_matrix(const Dataset& ds,
                                              double threshold) {
  if (!(threshold > 0.0 && threshold < 1.0)) {
    throw std::invalid_argument("build_graph_matrix: threshold must be in (0,1)");
  }
  const int n = ds.n_samples();
  const int d = ds.n_features;
  const double dn = static_cast<double>(n);

  Vector mean = Vector::Zero(d);
  Matrix gram = Matrix::Zero(d, d);
  for (int r = 0; r < n; ++r) {
    for (SpMat::InnerIterator it(ds.S, r); it; ++it) {
      mean[it.col()] += it.value();
      for (SpMat::InnerIterator jt(ds.S, r); jt; ++jt) {
        gram(it.col(), jt.col()) += it.value() * jt.value();
      }
    }
  }
  mean /= dn;

  Vector var(d);
  for (int i = 0; i < d; ++i) var[i] = gram(i, i) / dn - mean[i] * mean[i];

  std::vector<Eigen::Triplet<double>> trips;
  int rows = 0;
  for (int i = 0; i < d; ++i) {
    if (var[i] <= 1e-15) continue;  // zero-variance features never pair
    for (int j = i + 1; j < d; ++j) {
      if (var[j] <= 1e-15) continue;
      const double cov = gram(i, j) / dn - mean[i] * mean[j];
      const double corr = cov / std::sqrt(var[i] * var[j]);
      if (std::abs(corr) > threshold) {
        trips.emplace_back(rows, i, 1.0);
        trips.emplace_back(rows, j, -1.0);
        ++rows;
      }
    }
  }
  SpMat m(rows, d);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return std::make_shared<SparseMap>(std::move(m));
}

Vector generate_phantom(int n) {
  if (n < 16) throw std::invalid_argument("generate_phantom: n must be >= 16");
  struct Ellipse {
    double cx, cy, ax, ay, value;
  };
  // painted in order; later shapes overwrite earlier ones
  const Ellipse shapes[] = {
      {0.50, 0.50, 0.42, 0.36, 0.75},
      {0.42, 0.40, 0.16, 0.20, 0.35},
      {0.63, 0.57, 0.12, 0.15, 1.00},
      {0.36, 0.66, 0.06, 0.06, 0.15},
      {0.68, 0.33, 0.05, 0.08, 0.55},
  };
  Vector img = Vector::Zero(n * n);
  for (int i = 0; i < n; ++i) {
    const double y = (i + 0.5) / n;
    for (int j = 0; j < n; ++j) {
      const double x = (j + 0.5) / n;
      double v = 0.0;
      for (const auto& e : shapes) {
        const double dx = (x - e.cx) / e.ax;
        const double dy = (y - e.cy) / e.ay;
        if (dx * dx + dy * dy <= 1.0) v = e.value;
      }
      img[i * n + j] = v;
    }
  }
  return img;
}

Vector simulate_sinogram(const LinearMap& A, const Vector& x0, double sigma2,
                         std::uint64_t seed) {
  if (sigma2 < 0.0) {
    throw std::invalid_argument("simulate_sinogram: sigma2 must be >= 0");
  }
  Vector y = A.apply(x0);
  if (sigma2 > 0.0) {
    NormalSampler noise(seed);
    const double sd = std::sqrt(sigma2);
    for (Eigen::Index i = 0; i < y.size(); ++i) y[i] += sd * noise();
  }
  return y;
}

Dataset make_synthetic_dataset(int n_samples, int n_features,
                               std::uint64_t seed) {
  if (n_samples < 2 || n_features < 4) {
    throw std::invalid_argument("make_synthetic_dataset: need N >= 2, d >= 4");
  }
  NormalSampler normal(seed);
  Vector w(n_features);
  for (int j = 0; j < n_features; ++j) w[j] = normal();

  Matrix X(n_samples, n_features);
  for (int i = 0; i < n_samples; ++i) {
    for (int j = 0; j < n_features - 2; ++j) X(i, j) = normal();
    // trailing features shadow the leading two
    X(i, n_features - 2) = X(i, 0) + 0.05 * normal();
    X(i, n_features - 1) = -X(i, 1) + 0.05 * normal();
  }

  Dataset ds;
  ds.n_features = n_features;
  ds.b.resize(n_samples);
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(n_samples) * n_features);
  for (int i = 0; i < n_samples; ++i) {
    const double score = X.row(i).dot(w);
    ds.b[i] = score >= 0.0 ? 1.0 : -1.0;
    for (int j = 0; j < n_features; ++j) {
      trips.emplace_back(i, j, X(i, j));
    }
  }
  ds.S.resize(n_samples, n_features);
  ds.S.setFromTriplets(trips.begin(), trips.end());
  ds.S.makeCompressed();
  return ds;
}

CTInstance make_ct_instance(int n, int n_angles, int n_det, double sigma2,
                            double mu, std::uint64_t seed) {
  if (mu <= 0.0) throw std::invalid_argument("make_ct_instance: mu must be > 0");
  CTInstance inst;
  inst.n = n;
  inst.sigma2 = sigma2;
  inst.mu = mu;
  inst.ground_truth = generate_phantom(n);
  inst.xray = build_xray(n, n_angles, n_det);
  inst.grad = build_grad2d(n);
  inst.sinogram = simulate_sinogram(*inst.xray, inst.ground_truth, sigma2, seed);
  return inst;
}

QuadraticToy make_quadratic_toy(int dim, int rows, double mu,
                                double condition_number, double B_scale,
                                std::uint64_t seed) {
  if (dim < 2 || dim > 50) {
    throw std::invalid_argument("make_quadratic_toy: dim must be in [2, 50]");
  }
  if (rows < 0) throw std::invalid_argument("make_quadratic_toy: rows must be >= 0");
  if (condition_number < 1.0) {
    throw std::invalid_argument("make_quadratic_toy: condition_number must be >= 1");
  }
  if (mu < 0.0 || B_scale < 0.0) {
    throw std::invalid_argument("make_quadratic_toy: mu and B_scale must be >= 0");
  }

  NormalSampler normal(seed);
  auto gaussian = [&normal](int r, int c) {
    Matrix m(r, c);
    for (int i = 0; i < r; ++i)
      for (int j = 0; j < c; ++j) m(i, j) = normal();
    return m;
  };

  // C = U diag(s) V^T with log-spaced squared singular values on
  // [1, condition_number]
  const Matrix U = Eigen::HouseholderQR<Matrix>(gaussian(dim, dim))
                       .householderQ() * Matrix::Identity(dim, dim);
  const Matrix V = Eigen::HouseholderQR<Matrix>(gaussian(dim, dim))
                       .householderQ() * Matrix::Identity(dim, dim);
  Vector s(dim);
  for (int i = 0; i < dim; ++i) {
    const double t = dim > 1 ? static_cast<double>(i) / (dim - 1) : 0.0;
    s[i] = std::pow(condition_number, 0.5 * t);
  }

  QuadraticToy toy;
  toy.C = U * s.asDiagonal() * V.transpose();
  toy.mu = mu;
  toy.L_f = condition_number;

  Vector x_plant(dim);
  for (int i = 0; i < dim; ++i) x_plant[i] = normal();
  toy.d = toy.C * x_plant;

  Matrix Bm = Matrix::Zero(rows, dim);
  if (B_scale > 0.0 && rows > 0) {
    Bm = gaussian(rows, dim);
    DenseMap probe(Bm);
    const double bn =
        std::sqrt(power_method(probe, PowerMode::BBt, 1e-12, 50000, seed).value);
    Bm *= B_scale / bn;
  }
  toy.B = std::make_shared<DenseMap>(Bm);
  toy.rho_max_bbt = (rows > 0) ? B_scale * B_scale : 0.0;
  toy.f = least_squares_smooth(std::make_shared<DenseMap>(toy.C), toy.d, toy.L_f);
  toy.g = l1_prox(mu);

  // reference saddle point from a long fixed-step primal-dual run
  ProblemHandle prob = toy.problem();
  SolverConfig cfg;
  cfg.algorithm = Algorithm::pdfp;
  cfg.max_iters = 500000;
  cfg.stop_tol = 1e-14;
  cfg.trace_cadence = 1 << 30;
  cfg.gamma = 1.0 / toy.L_f;
  cfg.rho_max_bbt = toy.rho_max_bbt;
  const SolverResult ref = run_pdfp(prob, cfg);
  toy.x_ref = ref.x_last;
  toy.y_ref = ref.y_last;

  // verify first-order optimality through the fixed-point prox oracle
  const double gamma = 1.0 / toy.L_f;
  const double lambda_fp =
      toy.rho_max_bbt > 0.0 ? 0.9 / toy.rho_max_bbt : 1.0;
  const Vector grad_ref = toy.f->gradient(toy.x_ref);
  const auto prox_res = fp2o_prox(*toy.g, *toy.B, toy.x_ref - gamma * grad_ref,
                                  gamma, lambda_fp, 1e-14, 200000);
  double residual = (toy.x_ref - prox_res.x).norm();
  if (rows > 0) {
    residual = std::max(residual,
                        (grad_ref + toy.B->adjoint_apply(toy.y_ref)).norm());
    const Vector y_fix = toy.g->conj_prox(toy.y_ref + toy.B->apply(toy.x_ref), 1.0);
    residual = std::max(residual, (toy.y_ref - y_fix).norm());
  }
  toy.ref_residual = residual;
  if (!prox_res.converged || residual > 1e-10) {
    char buf[64];
    std::snprintf(buf, sizeof(buf), "%.3e", residual);
    throw OracleError(std::string("make_quadratic_toy: reference residual ") +
                      buf + " exceeds 1e-10");
  }
  return toy;
}

std::shared_ptr<SparseMap> read_triplet_matrix(std::istream& in) {
  int rows = 0, cols = 0;
  long long nnz = 0;
  if (!(in >> rows >> cols >> nnz) || rows < 0 || cols < 0 || nnz < 0) {
    throw ParseError("triplet matrix: malformed header (want 'rows cols nnz')");
  }
  std::vector<Eigen::Triplet<double>> trips;
  trips.reserve(static_cast<std::size_t>(nnz));
  for (long long k = 0; k < nnz; ++k) {
    int r = 0, c = 0;
    double v = 0.0;
    if (!(in >> r >> c >> v)) {
      throw ParseError("triplet matrix: truncated at entry " + std::to_string(k));
    }
    if (r < 0 || r >= rows || c < 0 || c >= cols) {
      throw ParseError("triplet matrix: index out of range at entry " +
                       std::to_string(k));
    }
    trips.emplace_back(r, c, v);
  }
  SpMat m(rows, cols);
  m.setFromTriplets(trips.begin(), trips.end());
  m.makeCompressed();
  return std::make_shared<SparseMap>(std::move(m));
}

std::shared_ptr<SparseMap> load_triplet_matrix(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError("cannot open matrix file: " + path);
  return read_triplet_matrix(in);
}

}  // namespace apdfp
