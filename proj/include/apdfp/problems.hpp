#pragma once

#include <cstdint>
#include <iosfwd>
#include <memory>
#include <stdexcept>
#include <string>
#include <utility>

#include "apdfp/solvers.hpp"

namespace apdfp {

/// Input or file-format failure; carries a line number where applicable.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// A reference solve failed to reach its required residual.
struct OracleError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct Dataset {
  SpMat S;          // N x d sample matrix
  Vector b;         // labels in {-1, +1}
  int n_features = 0;

  int n_samples() const { return static_cast<int>(S.rows()); }
};

/// Parses LIBSVM text: "label idx:val idx:val ...", 1-based ascending
/// indices, full-line '#' comments, LF or CRLF. Labels {0,1} or {-1,1} are
/// normalized to {-1,+1} (0 maps to -1). d_override pins the feature count;
/// 0 means "max index seen".
Dataset parse_libsvm(std::istream& in, int d_override = 0);
Dataset parse_libsvm_file(const std::string& path, int d_override = 0);

void write_libsvm(const Dataset& ds, std::ostream& out);

/// Deterministic shuffle split; both sides keep the full feature count.
std::pair<Dataset, Dataset> split_train_test(const Dataset& ds,
                                             double train_fraction,
                                             std::uint64_t seed);

/// Edge-incidence coupling matrix: one row (+1 at i, -1 at j) per feature
/// pair whose absolute Pearson correlation on ds exceeds the threshold,
/// rows in lexicographic (i, j) order. Zero-variance features never pair.
std::shared_ptr<SparseMap> build_graph_matrix(const Dataset& ds,
                                              double threshold);

/// Piecewise-constant ellipse phantom with values in [0,1], side n,
/// row-major. Pure arithmetic, so bytes are identical across runs.
Vector generate_phantom(int n);

/// y = A x0 + eps with eps iid N(0, sigma2); bitwise reproducible by seed.
Vector simulate_sinogram(const LinearMap& A, const Vector& x0, double sigma2,
                         std::uint64_t seed);

/// Linearly separable classification sample drawn from a planted weight
/// vector; the two trailing features duplicate (noisily) the two leading
/// ones so the correlation graph is nonempty at moderate thresholds.
Dataset make_synthetic_dataset(int n_samples, int n_features,
                               std::uint64_t seed);

struct CTInstance {
  int n = 0;
  std::shared_ptr<XRayMap> xray;
  std::shared_ptr<Grad2D> grad;
  Vector ground_truth;
  Vector sinogram;
  double sigma2 = 0.0;
  double mu = 0.0;
};

CTInstance make_ct_instance(int n, int n_angles, int n_det, double sigma2,
                            double mu, std::uint64_t seed);

/// Small dense least-squares + l1-of-Bx instance with a high-accuracy
/// reference saddle point, used as the oracle for gap and certificate
/// checks. The curvature spectrum of C^T C is log-spaced on
/// [1, condition_number], so L_f = condition_number.
struct QuadraticToy {
  Matrix C;
  Vector d;
  double mu = 0.0;
  std::shared_ptr<DenseMap> B;
  std::shared_ptr<const LeastSquaresSmooth> f;
  std::shared_ptr<const L1Prox> g;
  double L_f = 0.0;
  double rho_max_bbt = 0.0;
  Vector x_ref;
  Vector y_ref;
  double ref_residual = 0.0;

  ProblemHandle problem() const { return ProblemHandle(f, g, B); }
};

QuadraticToy make_quadratic_toy(int dim, int rows, double mu,
                                double condition_number, double B_scale,
                                std::uint64_t seed);

/// Sparse matrix from triplet text: header "rows cols nnz", then one
/// "row col value" line per entry (0-based indices).
std::shared_ptr<SparseMap> load_triplet_matrix(const std::string& path);
std::shared_ptr<SparseMap> read_triplet_matrix(std::istream& in);

}  // namespace apdfp
