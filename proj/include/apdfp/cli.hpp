#pragma once

#include <map>
#include <optional>
#include <string>
#include <vector>

#include "apdfp/diagnostics.hpp"
#include "apdfp/problems.hpp"
#include "apdfp/solvers.hpp"

namespace apdfp::cli {

/// Benchmark run description. Defaults reproduce the desk-scale studies;
/// a key=value config file and command-line flags override them.
struct RunConfig {
  std::string experiment;  // logreg | ct | quad | check-schedule
  std::vector<std::string> algorithms{"apdfp", "pdfp"};
  int max_iters = 2000;
  double stop_tol = 1e-3;
  std::uint64_t seed = 0;
  std::string out_dir = "out";
  int trace_cadence = 1;
  double lambda_scale = 1.0;
  double c = 0.0;

  // logreg
  std::string data_path;      // empty: synthesize
  std::string b_matrix_path;  // optional coupling-matrix override
  int synthetic_n = 200;
  int synthetic_d = 10;
  double mu1 = 1e-2;
  double mu2 = 1e-2;
  double corr_threshold = 0.5;
  double train_fraction = 0.8;
  int ref_iters = 10000;

  // ct
  int ct_n = 64;
  int ct_angles = 90;
  int ct_det = 64;
  double ct_sigma2 = 0.03;
  double ct_mu = 1e-3;
  std::vector<double> lambda_sweep;  // empty: no sweep

  // quad
  int quad_dim = 20;
  int quad_rows = 10;
  double quad_mu = 0.1;
  double quad_cond = 1e3;
  double quad_bscale = 1e-3;
  int fit_lo = 20;
  int fit_hi = 2000;

  // check-schedule
  double check_Lf = 10.0;
  double check_c = 0.0;
  int check_K = 10000;
  std::optional<double> gamma_const;  // adversarial constant-step override

  // per-algorithm overrides from config-file sections
  std::map<std::string, std::map<std::string, std::string>> algo_params;
};

/// Flat key=value config with [algorithm] sections; '#' starts a comment.
/// Returns false and sets err on malformed input.
bool load_config_file(const std::string& path, RunConfig& cfg,
                      std::string& err);

/// Writes "iter,objective,rel_err,gap,metric,wall_ms" CSV. Doubles carry 17
/// significant digits. The wall_ms column is written as 0 so that re-runs
/// are byte-identical; measured times go to the per-run .meta.txt file.
void write_trace_file(const std::string& path, const Trace& trace,
                      const std::map<int, double>* gap_override = nullptr);
Trace read_trace_file(const std::string& path);

/// ASCII portable graymap, 16-bit scale, pixel values clamped to [0,1].
void write_pgm16(const std::string& path, const Vector& img, int n);
/// Little-endian float64 dump with an 8-byte header of two uint32 dims.
void write_raw_f64(const std::string& path, const Vector& img, int rows,
                   int cols);
Vector read_raw_f64(const std::string& path, int& rows, int& cols);

// Exit codes: 0 success, 1 config error, 2 input/parse error,
// 3 oracle or convergence failure.
int cmd_logreg(const RunConfig& cfg);
int cmd_ct(const RunConfig& cfg);
int cmd_quad(const RunConfig& cfg);
int cmd_check_schedule(const RunConfig& cfg);

}  // namespace apdfp::cli
