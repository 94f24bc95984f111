// deimkit command line tool: index selection on matrix files, random-matrix
// benchmarking, and the model-reduction / function-approximation demos.
// Exit codes: 0 ok, 1 generic failure, 2 unknown method, 3 unreadable input,
// 4 rank-deficient input.

#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <thread>

#include "CLI11.hpp"
#include "json.hpp"

#include "deimkit/haar.hpp"
#include "deimkit/matrix_io.hpp"
#include "deimkit/mor.hpp"
#include "deimkit/pod.hpp"
#include "deimkit/projector.hpp"
#include "deimkit/selection.hpp"

namespace fs = std::filesystem;
using json = nlohmann::ordered_json;
using namespace deimkit;

namespace {

constexpr int kExitBadMethod = 2;
constexpr int kExitBadFile = 3;
constexpr int kExitRankDeficient = 4;

struct Timer {
  std::chrono::steady_clock::time_point start = std::chrono::steady_clock::now();
  double seconds() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  }
};

std::size_t worker_cap() {
  std::size_t cap = std::max(1u, std::thread::hardware_concurrency());
  if (const char* env = std::getenv("DEIMKIT_THREADS")) {
    const long v = std::strtol(env, nullptr, 10);
    if (v >= 1) cap = static_cast<std::size_t>(v);
  }
  return cap;
}

json selection_json(const std::string& method, const Matrix& u,
                    const SelectionOperator& sel, double c, std::uint64_t seed,
                    std::size_t rows_visited) {
  json j;
  j["n"] = u.rows();
  j["m"] = sel.indices.size();
  json idx = json::array();
  for (std::size_t p : sel.indices) idx.push_back(p + 1);  // 1-based
  j["indices"] = idx;
  j["c"] = c;
  j["method"] = method;
  j["seed"] = seed;
  j["rows_visited"] = rows_visited;
  return j;
}

void write_json(const json& j, const std::string& path) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path);
  out << j.dump(2) << "\n";
}

void write_manifest(const std::string& out_dir, const std::string& command,
                    const json& config, const std::vector<std::string>& files,
                    const json& timings) {
  json m;
  m["command"] = command;
  m["config"] = config;
  m["files"] = files;
  m["timings"] = timings;
  write_json(m, out_dir + "/manifest.json");
}

Matrix orthonormalize(const Matrix& a) {
  ThinSvd svd = thin_svd(a);
  const double cutoff = static_cast<double>(std::max(a.rows(), a.cols())) * tol::kEps *
                        (svd.sigma.empty() ? 0.0 : svd.sigma.front());
  std::size_t r = 0;
  while (r < svd.sigma.size() && svd.sigma[r] > cutoff) ++r;
  if (r < svd.sigma.size()) throw RankError("input matrix is rank deficient");
  return svd.left;
}

// ---- select ---------------------------------------------------------------

int cmd_select(const std::string& matrix_file, const std::string& method,
               std::size_t m, bool ortho, std::size_t window, double threshold,
               const std::string& sampling, std::uint64_t seed, std::size_t budget,
               const std::string& restart, std::size_t trials, std::size_t workers,
               const std::string& out_dir) {
  Timer timer;
  Matrix u;
  try {
    u = read_matrix_auto(matrix_file);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadFile;
  }
  if (ortho) u = orthonormalize(u);
  if (m == 0) m = u.cols();
  if (m > u.cols()) {
    std::cerr << "error: --m exceeds column count\n";
    return 1;
  }
  if (m < u.cols()) {
    std::vector<std::size_t> lead(m);
    for (std::size_t j = 0; j < m; ++j) lead[j] = j;
    u = extract_cols(u, lead);
  }

  SelectionOperator sel;
  double c = 0.0;
  std::size_t rows_visited = u.rows();
  json extra;
  if (method == "deim") {
    sel = deim_select(u);
    c = selection_condition(u, sel);
  } else if (method == "qdeim") {
    sel = qdeim_select(u);
    c = selection_condition(u, sel);
  } else if (method == "lu") {
    sel = lu_pp_select(u);
    c = selection_condition(u, sel);
  } else if (method == "random") {
    sel = random_select(u, seed, trials);
    c = selection_condition(u, sel);
  } else if (method == "volume") {
    sel = brute_force_volume_select(u);
    c = selection_condition(u, sel);
  } else if (method == "qdeimr") {
    QdeimrConfig cfg;
    cfg.window_k = window;
    cfg.c_threshold = threshold;
    cfg.seed = seed;
    cfg.max_row_visits = budget;
    if (sampling == "uniform") {
      cfg.sampling = SamplingScheme::kUniformPermutation;
    } else if (sampling == "norm-batches") {
      cfg.sampling = SamplingScheme::kNormSortedBatches;
    } else if (sampling == "norm-weighted") {
      cfg.sampling = SamplingScheme::kNormWeightedDraw;
    } else {
      std::cerr << "error: unknown sampling scheme '" << sampling << "'\n";
      return kExitBadMethod;
    }
    cfg.restart_policy = restart == "restart-pivoting" ? RestartPolicy::kRestartPivoting
                                                       : RestartPolicy::kContinue;
    SelectionReport rep = workers > 1 ? qdeimr_select_parallel(u, cfg, workers)
                                      : qdeimr_select(u, cfg);
    sel = rep.selection;
    c = rep.c_exact;
    rows_visited = rep.rows_visited;
    extra["threshold"] = rep.c_bound_used;
    extra["resample_rounds"] = rep.resample_rounds;
  } else {
    std::cerr << "error: unknown method '" << method << "'\n";
    return kExitBadMethod;
  }

  fs::create_directories(out_dir);
  json j = selection_json(method, u, sel, c, seed, rows_visited);
  for (auto& [k, v] : extra.items()) j[k] = v;
  write_json(j, out_dir + "/selection.json");
  json config{{"matrix", matrix_file}, {"method", method},   {"m", m},
              {"orthonormalize", ortho}, {"seed", seed},     {"window", window},
              {"threshold", threshold},  {"budget", budget}, {"trials", trials}};
  write_manifest(out_dir, "select", config, {"selection.json"},
                 json{{"total_s", timer.seconds()}});
  std::cout << j.dump(2) << "\n";
  return 0;
}

// ---- benchmark-random -----------------------------------------------------

int cmd_benchmark_random(std::size_t n, std::size_t m, std::size_t trials,
                         std::uint64_t seed, const std::string& out_dir) {
  Timer timer;
  if (m > n) {
    std::cerr << "error: m > n\n";
    return 1;
  }
  std::vector<double> c_deim(trials), c_qdeim(trials);
  const std::size_t workers = std::min(worker_cap(), std::max<std::size_t>(trials, 1));
  std::vector<std::thread> pool;
  std::atomic<std::size_t> counter{0};
  for (std::size_t w = 0; w < workers; ++w) {
    pool.emplace_back([&] {
      for (std::size_t t = counter.fetch_add(1); t < trials; t = counter.fetch_add(1)) {
        Matrix u = haar_orthonormal(n, m, seed * 1000003ULL + t);
        c_deim[t] = selection_condition(u, deim_select(u));
        c_qdeim[t] = selection_condition(u, qdeim_select(u));
      }
    });
  }
  for (auto& t : pool) t.join();

  fs::create_directories(out_dir);
  {
    std::ofstream csv(out_dir + "/trials.csv");
    csv << std::setprecision(17);
    csv << "trial,c_deim,c_qdeim\n";
    for (std::size_t t = 0; t < trials; ++t)
      csv << t << "," << c_deim[t] << "," << c_qdeim[t] << "\n";
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t h = v.size() / 2;
    return v.size() % 2 ? v[h] : 0.5 * (v[h - 1] + v[h]);
  };
  std::size_t below = 0;
  for (double c : c_qdeim)
    if (c < std::sqrt(static_cast<double>(n))) ++below;
  json summary{{"n", n},
               {"m", m},
               {"trials", trials},
               {"seed", seed},
               {"median_c_deim", median(c_deim)},
               {"median_c_qdeim", median(c_qdeim)},
               {"max_c_qdeim", *std::max_element(c_qdeim.begin(), c_qdeim.end())},
               {"count_qdeim_below_sqrt_n", below}};
  write_json(summary, out_dir + "/summary.json");
  write_manifest(out_dir, "benchmark-random",
                 json{{"n", n}, {"m", m}, {"trials", trials}, {"seed", seed}},
                 {"trials.csv", "summary.json"}, json{{"total_s", timer.seconds()}});
  std::cout << summary.dump(2) << "\n";
  return 0;
}

// ---- shared demo plumbing -------------------------------------------------

SelectionOperator pick_selection(const std::string& method, const Matrix& basis,
                                 std::uint64_t seed, json& extra) {
  if (method == "deim") return deim_select(basis);
  if (method == "qdeim") return qdeim_select(basis);
  if (method == "qdeimr") {
    QdeimrConfig cfg;
    cfg.seed = seed;
    SelectionReport rep = qdeimr_select(basis, cfg);
    extra["rows_visited"] = rep.rows_visited;
    return rep.selection;
  }
  throw std::invalid_argument("unknown method '" + method + "'");
}

// relative L2 error of one state row across the snapshot sequence
double row_history_error(const Matrix& x, const Matrix& xhat, std::size_t row) {
  double err = 0.0, ref = 0.0;
  for (std::size_t j = 0; j < x.cols(); ++j) {
    const double d = x(row, j) - xhat(row, j);
    err += d * d;
    ref += x(row, j) * x(row, j);
  }
  return ref > 0.0 ? std::sqrt(err / ref) : std::sqrt(err);
}

// ---- fn-demo --------------------------------------------------------------

int cmd_fn_demo(std::size_t r, std::size_t m, const std::string& method,
                std::size_t n_half, std::size_t steps, std::size_t snapshots,
                std::uint64_t seed, const std::string& out_dir) {
  Timer timer;
  FomModel fom = build_fn_model(n_half);
  std::vector<double> x0(fom.dim, 0.0);
  SimResult sim = simulate(fom, 0.0, 8.0, steps, x0, snapshots);
  const double t_fom = timer.seconds();

  PodBasis vb = pod_basis(sim.states, r);
  PodBasis fb = pod_basis(sim.nonlinear, m);
  json extra;
  SelectionOperator sel = pick_selection(method, fb.vectors, seed, extra);
  DeimProjector proj = build_projector(fb.vectors, sel);
  ReducedModel rom = galerkin_reduce(fom, vb.vectors, proj);
  std::vector<double> x0r(r, 0.0);
  SnapshotSet red = simulate(rom, 0.0, 8.0, steps, x0r, snapshots);
  const double eps = reconstruction_error(sim.states, vb.vectors, red.matrix);

  fs::create_directories(out_dir);
  Matrix approx = vb.vectors * red.matrix;
  RowwiseErrors rows = rowwise_relative_errors(sim.states.matrix, approx);
  {
    std::ofstream csv(out_dir + "/rowwise_errors.csv");
    csv << std::setprecision(17) << "row,relative_error,zero_row\n";
    for (std::size_t i = 0; i < rows.values.size(); ++i)
      csv << i << "," << rows.values[i] << "," << (rows.zero_row[i] ? 1 : 0) << "\n";
  }
  json report;
  report["command"] = "fn-demo";
  report["r"] = r;
  report["m"] = m;
  report["method"] = method;
  report["n"] = fom.dim;
  report["steps"] = steps;
  report["snapshots"] = snapshots;
  report["seed"] = seed;
  report["epsilon"] = eps;
  report["c"] = proj.c;
  json idx = json::array();
  for (std::size_t p : sel.indices) idx.push_back(p + 1);
  report["indices"] = idx;
  for (auto& [k, v] : extra.items()) report[k] = v;
  write_json(report, out_dir + "/report.json");
  write_manifest(out_dir, "fn-demo", report, {"report.json", "rowwise_errors.csv"},
                 json{{"fom_s", t_fom}, {"total_s", timer.seconds()}});
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---- rc-demo --------------------------------------------------------------

int cmd_rc_demo(std::size_t r, std::size_t m, const std::string& method,
                const std::string& input, std::size_t n, std::size_t steps,
                std::size_t snapshots, std::uint64_t seed, const std::string& out_dir) {
  Timer timer;
  FomModel fom = build_rc_model(n);
  if (input == "exp") {
    fom.forcing = [](double t) { return std::vector<double>{std::exp(-t)}; };
  } else if (input == "sin50") {
    fom.forcing = [](double t) {
      return std::vector<double>{std::sin(2.0 * 3.141592653589793 * 50.0 * t)};
    };
    if (steps < 100000) steps = 100000;  // resolve the oscillation
  } else if (input == "sin1000") {
    fom.forcing = [](double t) {
      return std::vector<double>{std::sin(2.0 * 3.141592653589793 * 1000.0 * t)};
    };
    if (steps < 400000) steps = 400000;
  } else {
    std::cerr << "error: unknown input '" << input << "'\n";
    return kExitBadMethod;
  }

  std::vector<double> x0(n, 0.0);
  SimResult sim = simulate(fom, 0.0, 7.0, steps, x0, snapshots);
  const double t_fom = timer.seconds();

  PodBasis vb = pod_basis(sim.states, r);
  PodBasis fb = pod_basis(sim.nonlinear, m);
  json extra;
  SelectionOperator sel = pick_selection(method, fb.vectors, seed, extra);
  DeimProjector proj = build_projector(fb.vectors, sel);
  ReducedModel rom = galerkin_reduce(fom, vb.vectors, proj);
  std::vector<double> x0r(r, 0.0);
  SnapshotSet red = simulate(rom, 0.0, 7.0, steps, x0r, snapshots);
  const double eps = reconstruction_error(sim.states, vb.vectors, red.matrix);

  Matrix approx = vb.vectors * red.matrix;
  const double xi1 = row_history_error(sim.states.matrix, approx, 0);

  fs::create_directories(out_dir);
  {
    std::ofstream csv(out_dir + "/x1_trajectory.csv");
    csv << std::setprecision(17) << "t,x1_full,x1_reduced\n";
    for (std::size_t j = 0; j < sim.states.coords.size(); ++j)
      csv << sim.states.coords[j] << "," << sim.states.matrix(0, j) << ","
          << approx(0, j) << "\n";
  }
  json report;
  report["command"] = "rc-demo";
  report["r"] = r;
  report["m"] = m;
  report["method"] = method;
  report["input"] = input;
  report["n"] = n;
  report["steps"] = steps;
  report["snapshots"] = snapshots;
  report["seed"] = seed;
  report["epsilon"] = eps;
  report["xi1"] = xi1;
  report["c"] = proj.c;
  json idx = json::array();
  for (std::size_t p : sel.indices) idx.push_back(p + 1);
  report["indices"] = idx;
  for (auto& [k, v] : extra.items()) report[k] = v;
  write_json(report, out_dir + "/report.json");
  write_manifest(out_dir, "rc-demo", report, {"report.json", "x1_trajectory.csv"},
                 json{{"fom_s", t_fom}, {"total_s", timer.seconds()}});
  std::cout << report.dump(2) << "\n";
  return 0;
}

// ---- paramfun-demo --------------------------------------------------------

int cmd_paramfun_demo(const std::string& kind_name, std::size_t m,
                      const std::string& method, std::size_t n, std::size_t train,
                      std::size_t eval_points, const std::string& threshold_preset,
                      std::uint64_t seed, const std::string& out_dir) {
  Timer timer;
  ParamFunKind kind;
  if (kind_name == "decaying-oscillation") {
    kind = ParamFunKind::kDecayingOscillation;
  } else if (kind_name == "sinh-cosh") {
    kind = ParamFunKind::kSinhCosh;
  } else {
    std::cerr << "error: unknown kind '" << kind_name << "'\n";
    return kExitBadMethod;
  }
  const double lo = kind == ParamFunKind::kDecayingOscillation ? 1.0 : 0.1;
  const double hi = 6.0;
  const double pi = 3.141592653589793;
  std::vector<double> t(n), mu(train), mu_eval(eval_points);
  for (std::size_t i = 0; i < n; ++i)
    t[i] = lo + (hi - lo) * static_cast<double>(i) / static_cast<double>(n - 1);
  for (std::size_t j = 0; j < train; ++j)
    mu[j] = pi * static_cast<double>(j) / static_cast<double>(train - 1);
  for (std::size_t j = 0; j < eval_points; ++j)
    mu_eval[j] = pi * static_cast<double>(j) / static_cast<double>(eval_points - 1);

  SnapshotSet snaps = param_fun_snapshots(kind, t, mu);
  PodBasis basis = m > 0 ? pod_basis(snaps, m) : pod_basis_energy(snaps, 1e-8);
  m = basis.rank_used;

  json extra;
  SelectionOperator sel;
  double c = 0.0;
  if (method == "qdeimr") {
    QdeimrConfig cfg;
    cfg.seed = seed;
    const double base = std::sqrt(static_cast<double>(m)) *
                        std::sqrt(static_cast<double>(basis.vectors.rows() - m + 1));
    if (threshold_preset == "loose") {
      cfg.c_threshold = std::sqrt(static_cast<double>(m)) * base;  // m sqrt(n-m+1)
    } else if (threshold_preset == "tight") {
      // demanding near-full quality needs more candidate competition per
      // pivot, so the tight preset widens the window and samples rows by norm
      cfg.c_threshold = base / 5.0;
      cfg.window_k = 8 * m;
      cfg.sampling = SamplingScheme::kNormWeightedDraw;
    } else {
      cfg.c_threshold = base;
    }
    SelectionReport rep = qdeimr_select(basis.vectors, cfg);
    sel = rep.selection;
    c = rep.c_exact;
    extra["rows_visited"] = rep.rows_visited;
    extra["threshold"] = rep.c_bound_used;
    extra["resample_rounds"] = rep.resample_rounds;
  } else if (method == "random") {
    sel = random_select(basis.vectors, seed, 10);
    c = selection_condition(basis.vectors, sel);
  } else {
    sel = pick_selection(method, basis.vectors, seed, extra);
    c = selection_condition(basis.vectors, sel);
  }

  SweepErrors sweep = approximation_sweep(basis.vectors, sel, kind, t, mu_eval);
  fs::create_directories(out_dir);
  {
    std::ofstream csv(out_dir + "/sweep.csv");
    csv << std::setprecision(17) << "mu,relative_error\n";
    for (std::size_t j = 0; j < mu_eval.size(); ++j)
      csv << mu_eval[j] << "," << sweep.values[j] << "\n";
  }
  json report;
  report["command"] = "paramfun-demo";
  report["kind"] = kind_name;
  report["method"] = method;
  report["n"] = n;
  report["train"] = train;
  report["m"] = m;
  report["eval_points"] = eval_points;
  report["threshold_preset"] = threshold_preset;
  report["seed"] = seed;
  report["c"] = c;
  report["max_sweep_error"] =
      *std::max_element(sweep.values.begin(), sweep.values.end());
  json idx = json::array();
  for (std::size_t p : sel.indices) idx.push_back(p + 1);
  report["indices"] = idx;
  for (auto& [k, v] : extra.items()) report[k] = v;
  write_json(report, out_dir + "/report.json");
  write_manifest(out_dir, "paramfun-demo", report, {"report.json", "sweep.csv"},
                 json{{"total_s", timer.seconds()}});
  std::cout << report.dump(2) << "\n";
  return 0;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"DEIM / Q-DEIM index selection and model reduction toolkit"};
  app.require_subcommand(1);

  // select
  std::string sel_matrix, sel_method = "qdeim", sel_sampling = "uniform",
              sel_restart = "continue", sel_out = "out";
  std::size_t sel_m = 0, sel_window = 0, sel_budget = 0, sel_trials = 10,
              sel_workers = 1;
  double sel_threshold = 0.0;
  std::uint64_t sel_seed = 0;
  bool sel_ortho = false;
  auto* select = app.add_subcommand("select", "run an index-selection method on a matrix file");
  select->add_option("matrix", sel_matrix, "matrix file (MatrixMarket array or CSV)")->required();
  select->add_option("--method", sel_method, "deim|qdeim|qdeimr|lu|random|volume");
  select->add_option("--m", sel_m, "number of indices (default: all columns)");
  select->add_flag("--orthonormalize", sel_ortho, "orthonormalize the input columns first");
  select->add_option("--window", sel_window, "qdeimr work-array width (default m)");
  select->add_option("--threshold", sel_threshold, "qdeimr condition threshold (default sqrt(m)sqrt(n-m+1))");
  select->add_option("--sampling", sel_sampling, "uniform|norm-batches|norm-weighted");
  select->add_option("--seed", sel_seed, "random seed");
  select->add_option("--budget", sel_budget, "qdeimr max row visits (default n)");
  select->add_option("--restart", sel_restart, "continue|restart-pivoting");
  select->add_option("--trials", sel_trials, "random method: subsets to draw");
  select->add_option("--workers", sel_workers, "qdeimr parallel workers");
  select->add_option("--out", sel_out, "output directory");

  // benchmark-random
  std::size_t br_n = 10000, br_m = 100, br_trials = 200;
  std::uint64_t br_seed = 0;
  std::string br_out = "out";
  auto* bench = app.add_subcommand("benchmark-random", "selection quality on random orthonormal matrices");
  bench->add_option("--n", br_n, "rows");
  bench->add_option("--m", br_m, "columns");
  bench->add_option("--trials", br_trials, "number of random matrices");
  bench->add_option("--seed", br_seed, "master seed");
  bench->add_option("--out", br_out, "output directory");

  // fn-demo
  std::size_t fn_r = 5, fn_m = 5, fn_nhalf = 1024, fn_steps = 16000, fn_snaps = 100;
  std::string fn_method = "qdeim", fn_out = "out", fn_preset;
  std::uint64_t fn_seed = 0;
  auto* fn = app.add_subcommand("fn-demo", "neuron-model reduction pipeline");
  fn->add_option("--r", fn_r, "state basis size");
  fn->add_option("--m", fn_m, "nonlinear basis size");
  fn->add_option("--method", fn_method, "deim|qdeim|qdeimr");
  fn->add_option("--nhalf", fn_nhalf, "spatial nodes per field");
  fn->add_option("--steps", fn_steps, "time steps over [0,8]");
  fn->add_option("--snapshots", fn_snaps, "snapshot count");
  fn->add_option("--seed", fn_seed, "seed (qdeimr)");
  fn->add_option("--paper-preset", fn_preset, "fn5 pins r=m=5 at full scale");
  fn->add_option("--out", fn_out, "output directory");

  // rc-demo
  std::size_t rc_r = 10, rc_m = 10, rc_n = 1000, rc_steps = 14000, rc_snaps = 1425;
  std::string rc_method = "qdeim", rc_input = "exp", rc_out = "out", rc_preset;
  std::uint64_t rc_seed = 0;
  auto* rc = app.add_subcommand("rc-demo", "nonlinear ladder-circuit reduction pipeline");
  rc->add_option("--r", rc_r, "state basis size");
  rc->add_option("--m", rc_m, "nonlinear basis size");
  rc->add_option("--method", rc_method, "deim|qdeim|qdeimr");
  rc->add_option("--input", rc_input, "exp|sin50|sin1000");
  rc->add_option("--n", rc_n, "circuit nodes");
  rc->add_option("--steps", rc_steps, "time steps over [0,7]");
  rc->add_option("--snapshots", rc_snaps, "snapshot count");
  rc->add_option("--seed", rc_seed, "seed (qdeimr)");
  rc->add_option("--paper-preset", rc_preset, "rc10 or rc20");
  rc->add_option("--out", rc_out, "output directory");

  // paramfun-demo
  std::size_t pf_m = 0, pf_n = 10000, pf_train = 40, pf_eval = 200;
  std::string pf_kind = "decaying-oscillation", pf_method = "qdeim",
              pf_threshold = "default", pf_out = "out", pf_preset;
  std::uint64_t pf_seed = 0;
  auto* pf = app.add_subcommand("paramfun-demo", "parametric function approximation sweep");
  pf->add_option("--kind", pf_kind, "decaying-oscillation|sinh-cosh");
  pf->add_option("--m", pf_m, "basis size (0: energy truncation)");
  pf->add_option("--method", pf_method, "deim|qdeim|qdeimr|random");
  pf->add_option("--n", pf_n, "abscissa grid size");
  pf->add_option("--train", pf_train, "training parameter count");
  pf->add_option("--eval-points", pf_eval, "evaluation parameter count");
  pf->add_option("--threshold-preset", pf_threshold, "default|loose|tight");
  pf->add_option("--seed", pf_seed, "seed");
  pf->add_option("--paper-preset", pf_preset, "ex31 pins the 10000x40, m=34 setup");
  pf->add_option("--out", pf_out, "output directory");

  CLI11_PARSE(app, argc, argv);

  try {
    if (select->parsed()) {
      const std::size_t cap = worker_cap();
      return cmd_select(sel_matrix, sel_method, sel_m, sel_ortho, sel_window,
                        sel_threshold, sel_sampling, sel_seed, sel_budget, sel_restart,
                        sel_trials, std::min(sel_workers, cap), sel_out);
    }
    if (bench->parsed()) return cmd_benchmark_random(br_n, br_m, br_trials, br_seed, br_out);
    if (fn->parsed()) {
      if (fn_preset == "fn5") {
        fn_r = fn_m = 5;
        fn_nhalf = 1024;
        fn_steps = 16000;
        fn_snaps = 100;
      } else if (!fn_preset.empty()) {
        std::cerr << "error: unknown preset '" << fn_preset << "'\n";
        return kExitBadMethod;
      }
      return cmd_fn_demo(fn_r, fn_m, fn_method, fn_nhalf, fn_steps, fn_snaps, fn_seed,
                         fn_out);
    }
    if (rc->parsed()) {
      if (rc_preset == "rc10") {
        rc_r = rc_m = 10;
      } else if (rc_preset == "rc20") {
        rc_r = rc_m = 20;
      } else if (!rc_preset.empty()) {
        std::cerr << "error: unknown preset '" << rc_preset << "'\n";
        return kExitBadMethod;
      }
      return cmd_rc_demo(rc_r, rc_m, rc_method, rc_input, rc_n, rc_steps, rc_snaps,
                         rc_seed, rc_out);
    }
    if (pf->parsed()) {
      if (pf_preset == "ex31") {
        pf_kind = "decaying-oscillation";
        pf_m = 34;
        pf_n = 10000;
        pf_train = 40;
        pf_eval = 200;
      } else if (!pf_preset.empty()) {
        std::cerr << "error: unknown preset '" << pf_preset << "'\n";
        return kExitBadMethod;
      }
      return cmd_paramfun_demo(pf_kind, pf_m, pf_method, pf_n, pf_train, pf_eval,
                               pf_threshold, pf_seed, pf_out);
    }
  } catch (const RankError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRankDeficient;
  } catch (const SingularError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitRankDeficient;
  } catch (const IoError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadFile;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitBadMethod;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 1;
}
