#include "apdfp/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <cstdio>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace apdfp::cli {

namespace fs = std::filesystem;

namespace {

std::string fmt(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::string cur;
  for (char ch : s) {
    if (ch == sep) {
      out.push_back(cur);
      cur.clear();
    } else {
      cur.push_back(ch);
    }
  }
  out.push_back(cur);
  return out;
}

std::string trim(const std::string& s) {
  auto b = s.find_first_not_of(" \t\r");
  auto e = s.find_last_not_of(" \t\r");
  if (b == std::string::npos) return "";
  return s.substr(b, e - b + 1);
}

void put_u32le(std::ostream& out, std::uint32_t v) {
  char b[4];
  for (int i = 0; i < 4; ++i) b[i] = static_cast<char>((v >> (8 * i)) & 0xff);
  out.write(b, 4);
}

std::uint32_t get_u32le(std::istream& in) {
  unsigned char b[4];
  in.read(reinterpret_cast<char*>(b), 4);
  std::uint32_t v = 0;
  for (int i = 0; i < 4; ++i) v |= static_cast<std::uint32_t>(b[i]) << (8 * i);
  return v;
}

void put_f64le(std::ostream& out, double v) {
  std::uint64_t bits;
  std::memcpy(&bits, &v, 8);
  char b[8];
  for (int i = 0; i < 8; ++i) b[i] = static_cast<char>((bits >> (8 * i)) & 0xff);
  out.write(b, 8);
}

double get_f64le(std::istream& in) {
  unsigned char b[8];
  in.read(reinterpret_cast<char*>(b), 8);
  std::uint64_t bits = 0;
  for (int i = 0; i < 8; ++i) bits |= static_cast<std::uint64_t>(b[i]) << (8 * i);
  double v;
  std::memcpy(&v, &bits, 8);
  return v;
}

// Maps thrown failures onto the documented exit codes.
template <typename Fn>
int guard(Fn&& fn) {
  try {
    return fn();
  } catch (const ParseError& e) {
    std::cerr << "input error: " << e.what() << "\n";
    return 2;
  } catch (const OracleError& e) {
    std::cerr << "oracle error: " << e.what() << "\n";
    return 3;
  } catch (const std::logic_error& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    std::cerr << "run failed: " << e.what() << "\n";
    return 3;
  }
}

double to_double(const std::string& v, const std::string& key) {
  std::size_t pos = 0;
  double out = 0.0;
  try {
    out = std::stod(v, &pos);
  } catch (const std::exception&) {
    pos = std::string::npos;
  }
  if (pos != v.size()) {
    throw std::invalid_argument("config: bad numeric value for '" + key +
                                "': " + v);
  }
  return out;
}

void apply_algo_params(SolverConfig& sc,
                       const std::map<std::string, std::string>& kv) {
  for (const auto& [key, val] : kv) {
    if (key == "c") sc.c = to_double(val, key);
    else if (key == "lambda_scale") sc.lambda_scale = to_double(val, key);
    else if (key == "lambda") sc.lambda = to_double(val, key);
    else if (key == "gamma") sc.gamma = to_double(val, key);
    else if (key == "sigma") sc.sigma = to_double(val, key);
    else if (key == "lpdhgm_gamma") sc.lpdhgm_gamma = to_double(val, key);
    else if (key == "C") { sc.apd_C = to_double(val, key); sc.lp_admm_C = sc.apd_C; }
    else if (key == "rho") sc.rho = to_double(val, key);
    else if (key == "alpha") {
      const double a = to_double(val, key);
      sc.inertia = [a](int) { return a; };
    }
    else if (key == "form") {
      if (val == "primal") sc.pdfp_form = PdfpForm::primal;
      else if (val == "conjugate") sc.pdfp_form = PdfpForm::conjugate;
      else throw std::invalid_argument("config: form must be primal|conjugate");
    }
    else if (key == "wide_step") sc.pdfp_wide_step = (val == "1" || val == "true");
    else if (key == "aadmm_text_step") sc.aadmm_printed_step = !(val == "1" || val == "true");
    else throw std::invalid_argument("config: unknown algorithm key '" + key + "'");
  }
}

SolverConfig make_solver_config(const RunConfig& rc, Algorithm alg,
                                double rho_bbt, double bnorm) {
  SolverConfig sc;
  sc.algorithm = alg;
  sc.max_iters = rc.max_iters;
  sc.stop_tol = rc.stop_tol;
  sc.trace_cadence = rc.trace_cadence;
  sc.seed = rc.seed;
  sc.lambda_scale = rc.lambda_scale;
  sc.c = rc.c;
  sc.rho_max_bbt = rho_bbt;
  sc.b_norm = bnorm;
  auto it = rc.algo_params.find(algorithm_name(alg));
  if (it != rc.algo_params.end()) apply_algo_params(sc, it->second);
  return sc;
}

void write_meta(const std::string& path, double wall_ms, int iterations) {
  std::ofstream out(path, std::ios::binary);
  out << "wall_ms=" << wall_ms << "\n" << "iterations=" << iterations << "\n";
}

void write_reference(const std::string& path, double objective, int iterations,
                     double rel_err) {
  std::ofstream out(path, std::ios::binary);
  out << "objective=" << fmt(objective) << "\n"
      << "iterations=" << iterations << "\n"
      << "rel_err=" << fmt(rel_err) << "\n";
}

double last_wall_ms(const Trace& t) {
  return t.empty() ? 0.0 : t.records().back().wall_ms;
}

}  // namespace

bool load_config_file(const std::string& path, RunConfig& cfg,
                      std::string& err) {
  std::ifstream in(path);
  if (!in) {
    err = "cannot open config file: " + path;
    return false;
  }
  std::string line, section;
  int line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    const auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    line = trim(line);
    if (line.empty()) continue;
    if (line.front() == '[' && line.back() == ']') {
      section = trim(line.substr(1, line.size() - 2));
      continue;
    }
    const auto eq = line.find('=');
    if (eq == std::string::npos) {
      err = "config line " + std::to_string(line_no) + ": expected key=value";
      return false;
    }
    const std::string key = trim(line.substr(0, eq));
    const std::string val = trim(line.substr(eq + 1));
    try {
      if (!section.empty()) {
        cfg.algo_params[section][key] = val;
      } else if (key == "experiment") cfg.experiment = val;
      else if (key == "algorithms") {
        cfg.algorithms.clear();
        for (auto& a : split(val, ',')) {
          if (!trim(a).empty()) cfg.algorithms.push_back(trim(a));
        }
      }
      else if (key == "max_iters") cfg.max_iters = static_cast<int>(to_double(val, key));
      else if (key == "stop_tol") cfg.stop_tol = to_double(val, key);
      else if (key == "seed") cfg.seed = static_cast<std::uint64_t>(to_double(val, key));
      else if (key == "out_dir") cfg.out_dir = val;
      else if (key == "trace_cadence") cfg.trace_cadence = static_cast<int>(to_double(val, key));
      else if (key == "lambda_scale") cfg.lambda_scale = to_double(val, key);
      else if (key == "c") cfg.c = to_double(val, key);
      else if (key == "data") cfg.data_path = val;
      else if (key == "b_matrix") cfg.b_matrix_path = val;
      else if (key == "synthetic_n") cfg.synthetic_n = static_cast<int>(to_double(val, key));
      else if (key == "synthetic_d") cfg.synthetic_d = static_cast<int>(to_double(val, key));
      else if (key == "mu1") cfg.mu1 = to_double(val, key);
      else if (key == "mu2") cfg.mu2 = to_double(val, key);
      else if (key == "corr_threshold") cfg.corr_threshold = to_double(val, key);
      else if (key == "train_fraction") cfg.train_fraction = to_double(val, key);
      else if (key == "ref_iters") cfg.ref_iters = static_cast<int>(to_double(val, key));
      else if (key == "ct_n") cfg.ct_n = static_cast<int>(to_double(val, key));
      else if (key == "ct_angles") cfg.ct_angles = static_cast<int>(to_double(val, key));
      else if (key == "ct_det") cfg.ct_det = static_cast<int>(to_double(val, key));
      else if (key == "ct_sigma2") cfg.ct_sigma2 = to_double(val, key);
      else if (key == "ct_mu") cfg.ct_mu = to_double(val, key);
      else if (key == "lambda_sweep") {
        cfg.lambda_sweep.clear();
        for (auto& a : split(val, ',')) {
          if (!trim(a).empty()) cfg.lambda_sweep.push_back(to_double(trim(a), key));
        }
      }
      else if (key == "quad_dim") cfg.quad_dim = static_cast<int>(to_double(val, key));
      else if (key == "quad_rows") cfg.quad_rows = static_cast<int>(to_double(val, key));
      else if (key == "quad_mu") cfg.quad_mu = to_double(val, key);
      else if (key == "quad_cond") cfg.quad_cond = to_double(val, key);
      else if (key == "quad_bscale") cfg.quad_bscale = to_double(val, key);
      else if (key == "fit_lo") cfg.fit_lo = static_cast<int>(to_double(val, key));
      else if (key == "fit_hi") cfg.fit_hi = static_cast<int>(to_double(val, key));
      else if (key == "check_Lf") cfg.check_Lf = to_double(val, key);
      else if (key == "check_c") cfg.check_c = to_double(val, key);
      else if (key == "check_K") cfg.check_K = static_cast<int>(to_double(val, key));
      else if (key == "gamma_const") cfg.gamma_const = to_double(val, key);
      else {
        err = "config line " + std::to_string(line_no) + ": unknown key '" + key + "'";
        return false;
      }
    } catch (const std::exception& e) {
      err = std::string(e.what());
      return false;
    }
  }
  return true;
}

void write_trace_file(const std::string& path, const Trace& trace,
                      const std::map<int, double>* gap_override) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write trace file: " + path);
  out << "iter,objective,rel_err,gap,metric,wall_ms\n";
  for (const auto& rec : trace.records()) {
    out << rec.iter << ',' << fmt(rec.objective) << ',' << fmt(rec.rel_err)
        << ',';
    std::optional<double> gap = rec.gap;
    if (gap_override) {
      auto it = gap_override->find(rec.iter);
      if (it != gap_override->end()) gap = it->second;
    }
    if (gap) out << fmt(*gap);
    out << ',';
    if (rec.metric) out << fmt(*rec.metric);
    // wall clock goes to the .meta.txt sidecar; a fixed 0 here keeps
    // re-runs byte-identical
    out << ",0\n";
  }
}

Trace read_trace_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open trace file: " + path);
  std::string line;
  if (!std::getline(in, line)) throw ParseError("trace file is empty: " + path);
  if (!line.empty() && line.back() == '\r') line.pop_back();
  if (line != "iter,objective,rel_err,gap,metric,wall_ms") {
    throw ParseError("trace file header mismatch: " + path);
  }
  Trace trace;
  int line_no = 1;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto cols = split(line, ',');
    if (cols.size() != 6) {
      throw ParseError("trace line " + std::to_string(line_no) +
                       ": expected 6 columns");
    }
    TraceRecord rec;
    try {
      rec.iter = std::stoi(cols[0]);
      rec.objective = std::stod(cols[1]);
      rec.rel_err = std::stod(cols[2]);
      if (!cols[3].empty()) rec.gap = std::stod(cols[3]);
      if (!cols[4].empty()) rec.metric = std::stod(cols[4]);
      rec.wall_ms = std::stod(cols[5]);
    } catch (const std::exception&) {
      throw ParseError("trace line " + std::to_string(line_no) + ": bad number");
    }
    trace.append(rec);
  }
  return trace;
}

void write_pgm16(const std::string& path, const Vector& img, int n) {
  if (img.size() != static_cast<Eigen::Index>(n) * n) {
    throw std::invalid_argument("write_pgm16: image size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  out << "P2\n" << n << ' ' << n << "\n65535\n";
  int per_line = 0;
  for (Eigen::Index i = 0; i < img.size(); ++i) {
    const double v = std::clamp(img[i], 0.0, 1.0);
    out << static_cast<int>(std::lround(v * 65535.0));
    if (++per_line == 12 || i + 1 == img.size()) {
      out << '\n';
      per_line = 0;
    } else {
      out << ' ';
    }
  }
}

void write_raw_f64(const std::string& path, const Vector& img, int rows,
                   int cols) {
  if (img.size() != static_cast<Eigen::Index>(rows) * cols) {
    throw std::invalid_argument("write_raw_f64: image size mismatch");
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write image: " + path);
  put_u32le(out, static_cast<std::uint32_t>(rows));
  put_u32le(out, static_cast<std::uint32_t>(cols));
  for (Eigen::Index i = 0; i < img.size(); ++i) put_f64le(out, img[i]);
}

Vector read_raw_f64(const std::string& path, int& rows, int& cols) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ParseError("cannot open image: " + path);
  rows = static_cast<int>(get_u32le(in));
  cols = static_cast<int>(get_u32le(in));
  Vector img(static_cast<Eigen::Index>(rows) * cols);
  for (Eigen::Index i = 0; i < img.size(); ++i) img[i] = get_f64le(in);
  if (!in) throw ParseError("image file truncated: " + path);
  return img;
}

int cmd_logreg(const RunConfig& rc) {
  return guard([&rc]() -> int {
    if (rc.algorithms.empty()) {
      throw std::invalid_argument("logreg: need at least one algorithm");
    }
    const Dataset full =
        rc.data_path.empty()
            ? make_synthetic_dataset(rc.synthetic_n, rc.synthetic_d, rc.seed)
            : parse_libsvm_file(rc.data_path);
    const auto [train, test] = split_train_test(full, rc.train_fraction, rc.seed);

    std::shared_ptr<const LinearMap> B;
    if (rc.b_matrix_path.empty()) {
      B = build_graph_matrix(train, rc.corr_threshold);
    } else {
      B = load_triplet_matrix(rc.b_matrix_path);
      if (B->in_dim() != train.n_features) {
        throw std::invalid_argument("logreg: coupling matrix has " +
                                    std::to_string(B->in_dim()) +
                                    " columns, dataset has " +
                                    std::to_string(train.n_features));
      }
    }
    auto f = logistic_smooth(train.S, train.b, rc.mu1);
    auto g = l1_prox(rc.mu2);
    const ProblemHandle prob(f, g, B);
    const double rho_bbt =
        prob.dual_dim() > 0
            ? power_method(*B, PowerMode::BBt, 1e-9, 20000, 0).value
            : 0.0;
    const double bnorm = std::sqrt(std::max(0.0, rho_bbt));

    fs::create_directories(rc.out_dir);
    const fs::path out_dir(rc.out_dir);

    // long fixed-step run approximating the optimal value
    SolverConfig ref_cfg = make_solver_config(rc, Algorithm::pdfp, rho_bbt, bnorm);
    ref_cfg.max_iters = rc.ref_iters;
    ref_cfg.stop_tol = 1e-16;
    ref_cfg.trace_cadence = 1 << 30;
    const SolverResult ref = run_pdfp(prob, ref_cfg);
    const double f_ref = prob.objective(ref.x_last);
    write_reference((out_dir / "reference.txt").string(), f_ref, ref.iterations,
                    ref.trace.records().back().rel_err);

    std::ofstream summary(out_dir / "summary.csv", std::ios::binary);
    summary << "algorithm,iterations,converged,objective,rel_obj_err,accuracy\n";
    for (const auto& name : rc.algorithms) {
      const Algorithm alg = algorithm_from_name(name);
      const SolverConfig sc = make_solver_config(rc, alg, rho_bbt, bnorm);
      RunHooks hooks;
      hooks.extra_metric = [&test](const IterateView& v) -> std::optional<double> {
        return accuracy(*v.repr, test.S, test.b);
      };
      const SolverResult res = run_solver(prob, sc, hooks);
      write_trace_file((out_dir / (name + ".csv")).string(), res.trace);
      write_meta((out_dir / (name + ".meta.txt")).string(),
                 last_wall_ms(res.trace), res.iterations);
      const double obj = prob.objective(res.x);
      const double acc = accuracy(res.x, test.S, test.b);
      const double rel_err = (obj - f_ref) / std::max(std::abs(f_ref), 1e-12);
      summary << name << ',' << res.iterations << ','
              << (res.converged ? 1 : 0) << ',' << fmt(obj) << ','
              << fmt(rel_err) << ',' << fmt(acc) << '\n';
      std::cout << "logreg " << name << ": iterations=" << res.iterations
                << " objective=" << obj << " accuracy=" << acc << "\n";
    }
    return 0;
  });
}

int cmd_ct(const RunConfig& rc) {
  return guard([&rc]() -> int {
    if (rc.algorithms.empty()) {
      throw std::invalid_argument("ct: need at least one algorithm");
    }
    const CTInstance inst = make_ct_instance(rc.ct_n, rc.ct_angles, rc.ct_det,
                                             rc.ct_sigma2, rc.ct_mu, rc.seed);
    const double L_A =
        power_method(*inst.xray, PowerMode::BtB, 1e-9, 30000, 0).value;
    auto f = least_squares_smooth(inst.xray, inst.sinogram, L_A);
    auto g = group_l2_prox(rc.ct_mu, 2);
    const ProblemHandle prob(f, g, inst.grad);
    const double rho_bbt =
        power_method(*inst.grad, PowerMode::BBt, 1e-9, 50000, 0).value;
    const double bnorm = std::sqrt(std::max(0.0, rho_bbt));

    fs::create_directories(rc.out_dir);
    const fs::path out_dir(rc.out_dir);
    write_pgm16((out_dir / "ground_truth.pgm").string(), inst.ground_truth,
                inst.n);
    write_raw_f64((out_dir / "ground_truth.f64").string(), inst.ground_truth,
                  inst.n, inst.n);

    SolverConfig ref_cfg = make_solver_config(rc, Algorithm::pdfp, rho_bbt, bnorm);
    ref_cfg.max_iters = rc.ref_iters;
    ref_cfg.stop_tol = 1e-16;
    ref_cfg.trace_cadence = 1 << 30;
    const SolverResult ref = run_pdfp(prob, ref_cfg);
    const double f_ref = prob.objective(ref.x_last);
    write_reference((out_dir / "reference.txt").string(), f_ref, ref.iterations,
                    ref.trace.records().back().rel_err);

    std::ofstream summary(out_dir / "summary.csv", std::ios::binary);
    summary << "algorithm,iterations,converged,objective,rel_obj_err,psnr\n";
    for (const auto& name : rc.algorithms) {
      const Algorithm alg = algorithm_from_name(name);
      const SolverConfig sc = make_solver_config(rc, alg, rho_bbt, bnorm);
      RunHooks hooks;
      hooks.extra_metric =
          [&inst](const IterateView& v) -> std::optional<double> {
        return psnr(*v.repr, inst.ground_truth);
      };
      const SolverResult res = run_solver(prob, sc, hooks);
      write_trace_file((out_dir / (name + ".csv")).string(), res.trace);
      write_meta((out_dir / (name + ".meta.txt")).string(),
                 last_wall_ms(res.trace), res.iterations);
      write_pgm16((out_dir / (name + ".pgm")).string(), res.x, inst.n);
      write_raw_f64((out_dir / (name + ".f64")).string(), res.x, inst.n, inst.n);
      const double obj = prob.objective(res.x);
      const double rel_err = (obj - f_ref) / std::max(std::abs(f_ref), 1e-12);
      const double quality = psnr(res.x, inst.ground_truth);
      summary << name << ',' << res.iterations << ','
              << (res.converged ? 1 : 0) << ',' << fmt(obj) << ','
              << fmt(rel_err) << ',' << fmt(quality) << '\n';
      std::cout << "ct " << name << ": iterations=" << res.iterations
                << " objective=" << obj << " psnr=" << quality << "\n";
    }

    if (!rc.lambda_sweep.empty()) {
      std::ofstream sweep(out_dir / "lambda_sweep.csv", std::ios::binary);
      sweep << "lambda_scale,lambda,iterations,objective,psnr\n";
      for (const double scale : rc.lambda_sweep) {
        SolverConfig sc = make_solver_config(rc, Algorithm::apdfp, rho_bbt, bnorm);
        sc.lambda_scale = scale;
        sc.stop_tol = 1e-14;  // fixed-budget runs make the sweep comparable
        const SolverResult res = run_apdfp(prob, sc);
        const double obj = prob.objective(res.x);
        sweep << fmt(scale) << ',' << fmt(scale / rho_bbt) << ','
              << res.iterations << ',' << fmt(obj) << ','
              << fmt(psnr(res.x, inst.ground_truth)) << '\n';
        std::cout << "ct sweep lambda_scale=" << scale << ": objective=" << obj
                  << "\n";
      }
    }
    return 0;
  });
}

int cmd_quad(const RunConfig& rc) {
  return guard([&rc]() -> int {
    if (rc.algorithms.empty()) {
      throw std::invalid_argument("quad: need at least one algorithm");
    }
    const QuadraticToy toy =
        make_quadratic_toy(rc.quad_dim, rc.quad_rows, rc.quad_mu, rc.quad_cond,
                           rc.quad_bscale, rc.seed);
    const ProblemHandle prob = toy.problem();
    const double rho_bbt = toy.rho_max_bbt;
    const double bnorm = std::sqrt(std::max(0.0, rho_bbt));

    struct Snap {
      int k;
      Vector gx, gy;  // gap evaluation point
    };
    struct RunData {
      std::string name;
      Algorithm alg;
      SolverResult res;
      std::vector<Snap> snaps;
      double max_dx = 0.0;  // max ||x_k - x_ref|| over the run
      double max_dy = 0.0;
      double lambda_used = 1.0;
      double c_used = 0.0;
    };
    std::vector<RunData> runs;

    for (const auto& name : rc.algorithms) {
      RunData rd;
      rd.name = name;
      rd.alg = algorithm_from_name(name);
      const SolverConfig sc = make_solver_config(rc, rd.alg, rho_bbt, bnorm);
      rd.lambda_used = sc.lambda ? *sc.lambda
                                 : (rho_bbt > 0.0 ? sc.lambda_scale / rho_bbt : 1.0);
      rd.c_used = sc.c;

      Vector mean_x = Vector::Zero(prob.primal_dim());
      Vector mean_y = Vector::Zero(prob.dual_dim());
      RunHooks hooks;
      hooks.on_iterate = [&](const IterateView& v) {
        // ergodic means for algorithms without aggregate sequences
        mean_x += (*v.x - mean_x) / v.k;
        if (v.y) mean_y += (*v.y - mean_y) / v.k;
        rd.max_dx = std::max(rd.max_dx, (*v.x - toy.x_ref).norm());
        if (v.y) rd.max_dy = std::max(rd.max_dy, (*v.y - toy.y_ref).norm());
        if (v.k == 1 || v.k % rc.trace_cadence == 0) {
          Snap s;
          s.k = v.k;
          if (v.x_ag && v.y_ag) {
            s.gx = *v.x_ag;
            s.gy = *v.y_ag;
          } else if (v.x_ag) {
            s.gx = *v.x_ag;
            s.gy = v.y ? *v.y : mean_y;
          } else {
            s.gx = mean_x;
            s.gy = mean_y;
          }
          rd.snaps.push_back(std::move(s));
        }
      };
      rd.res = run_solver(prob, sc, hooks);
      runs.push_back(std::move(rd));
      std::cout << "quad " << name << ": iterations=" << runs.back().res.iterations
                << " objective=" << prob.objective(runs.back().res.x) << "\n";
    }

    // gap balls: primal centered at the reference with twice the largest
    // excursion, dual sized to cover dom g*
    double excursion = 1e-3;
    for (const auto& rd : runs) excursion = std::max(excursion, rd.max_dx);
    GapSpec spec;
    spec.primal_center = toy.x_ref;
    spec.primal_radius = 2.0 * excursion;
    spec.dual_center = toy.y_ref;
    spec.dual_radius = 2.0 * prob.g->conj_domain_max_dist(toy.y_ref);
    if (spec.dual_radius <= 0.0) spec.dual_radius = 1.0;

    fs::create_directories(rc.out_dir);
    const fs::path out_dir(rc.out_dir);
    std::ofstream report(out_dir / "quad_report.txt", std::ios::binary);
    report << "dim=" << rc.quad_dim << " rows=" << rc.quad_rows
           << " mu=" << fmt(rc.quad_mu) << " cond=" << fmt(rc.quad_cond)
           << " bscale=" << fmt(rc.quad_bscale) << "\n";
    report << "ref_residual=" << fmt(toy.ref_residual) << "\n";
    report << "primal_radius=" << fmt(spec.primal_radius)
           << " dual_radius=" << fmt(spec.dual_radius) << "\n";

    for (auto& rd : runs) {
      std::vector<std::pair<int, double>> gaps;
      std::map<int, double> gap_by_iter;
      int uncertified = 0;
      for (const auto& s : rd.snaps) {
        const GapValue gv = partial_gap(prob, s.gx, s.gy, spec);
        if (!gv.certified) ++uncertified;
        gaps.emplace_back(s.k, gv.value);
        gap_by_iter[s.k] = gv.value;
      }
      write_trace_file((out_dir / (rd.name + ".csv")).string(), rd.res.trace,
                       &gap_by_iter);
      write_meta((out_dir / (rd.name + ".meta.txt")).string(),
                 last_wall_ms(rd.res.trace), rd.res.iterations);

      report << "algorithm=" << rd.name;
      const int hi = std::min(rc.fit_hi, rd.res.iterations);
      try {
        const RateFit fit = fit_rate(gaps, rc.fit_lo, hi);
        report << " gap_slope=" << fmt(fit.slope) << " window=[" << rc.fit_lo
               << "," << hi << "]";
      } catch (const std::exception& e) {
        report << " gap_slope=nan (" << e.what() << ")";
      }
      report << " uncertified_gaps=" << uncertified << "\n";

      if (rd.alg == Algorithm::apdfp) {
        const double omega1 = (rd.max_dx + spec.primal_radius) *
                              (rd.max_dx + spec.primal_radius);
        const double omega2 = (rd.max_dy + spec.dual_radius) *
                              (rd.max_dy + spec.dual_radius);
        const double L = prob.f->lipschitz();
        const double c_used = rd.c_used;
        const auto theta = [](int k) { return 2.0 / (k + 1); };
        const auto gamma = [L, c_used](int k) { return 1.0 / (L + c_used * k); };
        const CertificateReport cert =
            certificate_check(gaps, prob, spec, theta, gamma, rd.lambda_used,
                              omega1, omega2, &toy.x_ref, &toy.y_ref);
        const double rate =
            cert.checks.empty()
                ? 0.0
                : 1.0 - static_cast<double>(cert.violations) /
                            static_cast<double>(cert.checks.size());
        report << "certificate algorithm=" << rd.name
               << " pass_rate=" << fmt(rate)
               << " violations=" << cert.violations
               << " checks=" << cert.checks.size()
               << " balls_contain_saddle=" << (cert.balls_contain_saddle ? 1 : 0)
               << " omega1=" << fmt(omega1) << " omega2=" << fmt(omega2)
               << " rho_shifted=" << fmt(cert.rho_shifted) << "\n";
      }
    }
    return 0;
  });
}

int cmd_check_schedule(const RunConfig& rc) {
  return guard([&rc]() -> int {
    if (rc.check_K < 1) {
      throw std::invalid_argument("check-schedule: K must be >= 1");
    }
    std::vector<double> theta(rc.check_K), gamma(rc.check_K);
    for (int k = 1; k <= rc.check_K; ++k) {
      const auto [th, ga] = apdfp_schedule(k, rc.check_Lf, rc.check_c);
      theta[k - 1] = th;
      gamma[k - 1] = rc.gamma_const ? *rc.gamma_const : ga;
    }
    const ScheduleReport rep = check_schedule(theta, gamma, rc.check_Lf);
    for (const auto& cl : rep.clauses) {
      std::cout << "clause " << cl.name << ": " << (cl.pass ? "PASS" : "FAIL")
                << " worst_slack=" << cl.worst_slack << " at k=" << cl.worst_k
                << "\n";
    }
    std::cout << "ratio bound gamma_K^2/theta_K^2 over first: "
              << rep.ratio_bound << "\n";
    std::cout << "schedule: " << (rep.pass ? "ADMISSIBLE" : "REJECTED") << "\n";
    return rep.pass ? 0 : 3;
  });
}

}  // namespace apdfp::cli
