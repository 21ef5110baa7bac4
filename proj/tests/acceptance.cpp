// Acceptance run: one PASS/FAIL line per criterion, exit status 1 if any fails.
#include "varopt/ann.hpp"
#include "varopt/bench.hpp"
#include "varopt/json_io.hpp"
#include "varopt/kriging.hpp"
#include "varopt/oracle.hpp"
#include "varopt/pipeline.hpp"
#include "varopt/pso.hpp"
#include "varopt/rng.hpp"
#include "varopt/sampling.hpp"
#include "varopt/statistics.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#ifndef VAROPT_DATA_DIR
#define VAROPT_DATA_DIR "data"
#endif
#ifndef VAROPT_CLI
#define VAROPT_CLI "varopt"
#endif

using namespace varopt;
namespace fs = std::filesystem;

namespace {

struct Outcome {
  bool pass = false;
  std::string detail;
};

int failures = 0;

void run(int id, const std::string& name, double limit_s, const std::function<Outcome()>& fn) {
  const auto t0 = std::chrono::steady_clock::now();
  Outcome o;
  try {
    o = fn();
  } catch (const std::exception& e) {
    o = {false, std::string("exception: ") + e.what()};
  }
  const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
  if (secs > limit_s) {
    o.pass = false;
    o.detail += " [over time limit]";
  }
  if (!o.pass) ++failures;
  std::printf("[%s] %2d %-28s %7.2fs (limit %gs)  %s\n", o.pass ? "PASS" : "FAIL", id, name.c_str(), secs, limit_s,
              o.detail.c_str());
  std::fflush(stdout);
}

std::string fmt(const char* f, double a, double b = 0.0, double c = 0.0) {
  char buf[256];
  std::snprintf(buf, sizeof buf, f, a, b, c);
  return buf;
}

Eigen::MatrixXd random_points(Rng& rng, Eigen::Index n, Eigen::Index d) {
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.uniform();
  return m;
}

// Closed-form variogram shapes, written out separately from the library.
long double shape_ref(VariogramKind kind, long double h, long double r) {
  switch (kind) {
    case VariogramKind::Gaussian: return 1.0L - std::exp(-(h * h) / (r * r));
    case VariogramKind::Exponential: return 1.0L - std::exp(-h / r);
    case VariogramKind::Spherical: return h >= r ? 1.0L : 1.5L * h / r - 0.5L * (h / r) * (h / r) * (h / r);
  }
  return 0.0L;
}

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

// Augmented ordinary kriging system in native units with a zero diagonal,
// assembled and solved in long double.
MatrixL reference_system(const Eigen::MatrixXd& x, const Variogram& v) {
  const Eigen::Index n = x.rows();
  MatrixL a = MatrixL::Zero(n + 1, n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      const long double h = (x.row(i) - x.row(j)).cast<long double>().norm();
      a(i, j) = i == j ? 0.0L : v.nugget + v.sill * shape_ref(v.kind, h, v.range);
    }
    a(i, n) = a(n, i) = 1.0L;
  }
  return a;
}

VectorL reference_rhs(const Eigen::MatrixXd& x, const Variogram& v, const Eigen::VectorXd& q) {
  const Eigen::Index n = x.rows();
  VectorL b(n + 1);
  for (Eigen::Index i = 0; i < n; ++i) {
    const long double h = (x.row(i).transpose() - q).cast<long double>().norm();
    b[i] = h > 0.0L ? v.nugget + v.sill * shape_ref(v.kind, h, v.range) : 0.0L;
  }
  b[n] = 1.0L;
  return b;
}

Eigen::VectorXd dense_kriging_solution(const Eigen::MatrixXd& x, const Variogram& v, const Eigen::VectorXd& q) {
  return reference_system(x, v).fullPivLu().solve(reference_rhs(x, v, q)).cast<double>();
}

Outcome criterion_kriging() {
  Rng rng(101);
  double worst_w = 0.0, worst_sum = 0.0, worst_interp = 0.0, worst_cond = 0.0;
  int over = 0;
  const VariogramKind kinds[] = {VariogramKind::Gaussian, VariogramKind::Exponential, VariogramKind::Spherical};
  for (int m = 0; m < 20; ++m) {
    const Eigen::Index n = 3 + static_cast<Eigen::Index>(rng.below(8));
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(3));
    const Eigen::MatrixXd x = random_points(rng, n, d);
    Eigen::VectorXd y(n);
    for (Eigen::Index i = 0; i < n; ++i) y[i] = std::sin(3.0 * x.row(i).sum()) + x(i, 0);
    Variogram v;
    v.kind = kinds[m % 3];
    v.nugget = 0.0;
    v.sill = 0.5 + rng.uniform();
    v.range = 0.3 + 0.5 * rng.uniform();
    const KrigingModel model(x, y, v);
    const MatrixL a = reference_system(x, v);
    const Eigen::JacobiSVD<Eigen::MatrixXd> svd(a.cast<double>());
    const double cond = svd.singularValues()(0) / svd.singularValues()(n);
    double model_w = 0.0;
    for (int k = 0; k < 5; ++k) {
      const Eigen::VectorXd q = random_points(rng, 1, d).row(0).transpose();
      const KrigingWeights w = kriging_weights(model, q);
      const Eigen::VectorXd ref = a.fullPivLu().solve(reference_rhs(x, v, q)).cast<double>();
      model_w = std::max(model_w, (w.lambda - ref.head(n)).cwiseAbs().maxCoeff());
      worst_sum = std::max(worst_sum, std::abs(w.lambda.sum() - 1.0));
    }
    if (model_w > 1e-10) {
      ++over;
      worst_cond = std::max(worst_cond, cond);
    }
    worst_w = std::max(worst_w, model_w);
    for (Eigen::Index i = 0; i < n; ++i) {
      const double p = kriging_predict(model, x.row(i).transpose());
      worst_interp = std::max(worst_interp, std::abs(p - y[i]) / std::max(std::abs(y[i]), 1e-300));
    }
  }
  std::string detail = fmt("max|dlambda|=%.2e max|sum-1|=%.2e max interp rel=%.2e", worst_w, worst_sum, worst_interp);
  if (over > 0) detail += fmt("; %g models over 1e-10, worst condition number %.1e", over, worst_cond);
  return {worst_w <= 1e-10 && worst_sum <= 1e-10 && worst_interp <= 1e-8, detail};
}

Outcome criterion_lhs() {
  std::size_t bad = 0, checked = 0;
  for (Eigen::Index n : {1, 4, 10, 100}) {
    for (Eigen::Index d : {1, 2, 21}) {
      const Eigen::MatrixXd u = lhs_unit(n, d, 7 + static_cast<std::uint64_t>(n * 31 + d));
      for (Eigen::Index j = 0; j < d; ++j) {
        std::vector<int> count(static_cast<std::size_t>(n), 0);
        for (Eigen::Index i = 0; i < n; ++i) {
          const auto b = static_cast<Eigen::Index>(std::floor(u(i, j) * static_cast<double>(n)));
          if (b < 0 || b >= n) {
            ++bad;
            continue;
          }
          ++count[static_cast<std::size_t>(b)];
        }
        for (int c : count) bad += c != 1;
        ++checked;
      }
    }
  }
  return {bad == 0, std::to_string(checked) + " columns, " + std::to_string(bad) + " bad bins"};
}

Outcome criterion_bootstrap() {
  Rng rng(303);
  SampleSet s;
  s.inputs = random_points(rng, 50, 21);
  Eigen::VectorXd y(50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const auto r = s.inputs.row(i);
    y[i] = 1.0 + r.sum() + 0.5 * r(0) * r(1) + std::sin(2.0 * r(2));
  }
  s.set_response("f", y);
  const KrigingConfig cfg;
  const BootstrapResult out = bootstrap_resample(s, "f", cfg);
  const bool inputs_same = out.samples.inputs.rows() == s.inputs.rows() &&
                           std::memcmp(out.samples.inputs.data(), s.inputs.data(),
                                       sizeof(double) * static_cast<std::size_t>(s.inputs.size())) == 0;
  double worst = 0.0;
  const Eigen::VectorXd got = out.samples.response("f");
  for (Eigen::Index i = 0; i < 50; ++i) {
    std::vector<Eigen::Index> keep;
    for (Eigen::Index k = 0; k < 50; ++k)
      if (k != i) keep.push_back(k);
    Eigen::MatrixXd x(49, 21);
    Eigen::VectorXd yy(49);
    for (Eigen::Index k = 0; k < 49; ++k) {
      x.row(k) = s.inputs.row(keep[static_cast<std::size_t>(k)]);
      yy[k] = y[keep[static_cast<std::size_t>(k)]];
    }
    const auto bins = empirical_semivariogram(x, yy, cfg.n_bins);
    const Variogram v = fit_variogram(bins, cfg.kind).variogram;
    const Eigen::VectorXd sol = dense_kriging_solution(x, v, s.inputs.row(i).transpose());
    const double ref = sol.head(49).dot(yy);
    worst = std::max(worst, std::abs(ref - got[i]));
  }
  return {inputs_same && worst <= 1e-10 && out.failed_folds.empty(),
          std::string(inputs_same ? "inputs bit-exact" : "inputs CHANGED") + fmt(", max|loo diff|=%.2e", worst)};
}

Outcome criterion_gradient() {
  Rng rng(404);
  double worst = 0.0;
  for (int t = 0; t < 10; ++t) {
    const Eigen::Index d = 1 + static_cast<Eigen::Index>(rng.below(5));
    const Eigen::Index h = 1 + static_cast<Eigen::Index>(rng.below(8));
    NeuralNet net = NeuralNet::zeros(d, h, 0.5 + rng.uniform());
    Eigen::VectorXd p(net.parameter_count());
    for (Eigen::Index k = 0; k < p.size(); ++k) p[k] = 2.0 * rng.uniform() - 1.0;
    net.set_parameters(p);
    const Eigen::MatrixXd x = random_points(rng, 6, d);
    const Eigen::MatrixXd jac = jacobian(net, x);
    for (Eigen::Index k = 0; k < p.size(); ++k) {
      NeuralNet plus = net, minus = net;
      Eigen::VectorXd pp = p, pm = p;
      pp[k] += 1e-6;
      pm[k] -= 1e-6;
      plus.set_parameters(pp);
      minus.set_parameters(pm);
      const Eigen::VectorXd fd = (forward_batch(plus, x) - forward_batch(minus, x)) / 2e-6;
      for (Eigen::Index r = 0; r < x.rows(); ++r) {
        const double a = jac(r, k), b = fd[r];
        const double scale = std::max({std::abs(a), std::abs(b), 1e-4});
        worst = std::max(worst, std::abs(a - b) / scale);
      }
    }
  }
  return {worst <= 1e-5, fmt("max relative difference %.2e", worst)};
}

Outcome criterion_trainer() {
  const ParameterSpace space({{"x", -1.0, 1.0, 0.0}});
  const SampleSet s = lhs_sample(space, 50, 5);
  Eigen::VectorXd y(50);
  for (Eigen::Index i = 0; i < 50; ++i) {
    const double x = -1.0 + 2.0 * s.inputs(i, 0);
    y[i] = x * x;
  }
  TrainingConfig cfg;
  cfg.seed = 5;
  Topology topo;
  topo.hidden_units = 8;
  const TrainingResult r = train(s.inputs, y, topo, cfg);
  bool monotone = true;
  for (std::size_t k = 1; k < r.training_rmse.size(); ++k) monotone &= r.training_rmse[k] <= r.training_rmse[k - 1];
  const double range = y.maxCoeff() - y.minCoeff();
  return {monotone && r.best_holdout_rmse <= 0.05 * range,
          fmt("holdout rmse %.3e vs bound %.3e, %g accepted epochs", r.best_holdout_rmse, 0.05 * range,
              static_cast<double>(r.training_rmse.size())) +
              (monotone ? ", training rmse non-increasing" : ", training rmse INCREASED")};
}

Outcome criterion_monte_carlo() {
  const Eigen::Index d = 5;
  Eigen::VectorXd a(d), nom(d);
  a << 2.0, -1.0, 0.5, 3.0, -0.25;
  nom << 1.0, 2.0, 4.0, 0.5, 3.0;
  std::vector<ParameterDef> dims;
  for (Eigen::Index i = 0; i < d; ++i) dims.push_back({"p" + std::to_string(i), 0.0, 2.0 * nom[i], nom[i]});
  const ParameterSpace space(dims);
  const double b = 0.7;
  const FunctionSimulator sim("linear", d, {"y"}, [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, a.dot(x) + b);
  });
  MCConfig cfg;
  cfg.n_runs = 1000;
  cfg.sigma_fraction = 0.10;
  cfg.seed = 6;
  const MCReport rep = monte_carlo(sim, space, nom, cfg);
  const double mean = a.dot(nom) + b;
  const double sd = std::sqrt((a.array() * 0.1 * nom.array()).square().sum());
  const FomStats& st = rep.fom("y");
  const double mean_tol = 3.0 * sd / std::sqrt(1000.0);
  const bool ok = std::abs(st.mean - mean) <= mean_tol && std::abs(st.std - sd) <= 0.10 * sd;
  return {ok, fmt("mean %.5f vs %.5f (tol %.4f), ", st.mean, mean, mean_tol) +
                  fmt("std %.5f vs %.5f", st.std, sd)};
}

Outcome criterion_pso() {
  const Eigen::Index d = 3;
  Eigen::VectorXd opt(d);
  opt << 1.0, -2.0, 0.5;
  std::vector<ParameterDef> dims;
  for (Eigen::Index i = 0; i < d; ++i) dims.push_back({"x" + std::to_string(i), -5.0, 5.0, 3.0});
  const ParameterSpace space(dims);
  const FunctionSimulator sphere("sphere", d, {"f"}, [&](const Eigen::VectorXd& x) {
    return Eigen::VectorXd::Constant(1, (x - opt).squaredNorm());
  });
  ObjectiveSpec spec;
  spec.target_fom = "f";
  double worst_dist = 0.0;
  int non_monotone = 0;
  for (std::uint64_t seed = 1; seed <= 20; ++seed) {
    SwarmConfig cfg;
    cfg.seed = seed;
    cfg.mc.sigma_fraction = 0.0;
    cfg.mc.n_runs = 2;
    cfg.final_mc_runs = 2;
    const OptimizationResult r = pso_optimize(sphere, space, spec, cfg);
    for (std::size_t k = 1; k < r.trace.size(); ++k) non_monotone += r.trace[k] > r.trace[k - 1];
    worst_dist = std::max(worst_dist, (r.best_x - opt).norm());
  }
  return {worst_dist <= 1e-2 && non_monotone == 0,
          fmt("20 seeds: worst |x - x*| = %.2e, trace increases: %g", worst_dist, non_monotone)};
}

std::optional<MetamodelBundle> pipeline_bundle;

Outcome criterion_pipeline() {
  const SyntheticPllOracle oracle = load_oracle(std::string(VAROPT_DATA_DIR) + "/pll_oracle.json");
  PipelineConfig cfg;
  cfg.bootstrap = true;
  pipeline_bundle = build_metamodels(oracle, oracle.space(), 100, cfg, 1);
  bool ok = true;
  std::string detail;
  for (const auto& m : pipeline_bundle->models) {
    ok &= m.rmse_relative <= 0.05;
    detail += m.fom + fmt("=%.4f ", m.rmse_relative);
  }
  return {ok, "rmse_relative " + detail};
}

Outcome criterion_speedup() {
  if (!pipeline_bundle) return {false, "no bundle (pipeline criterion did not build one)"};
  BenchConfig cfg;
  cfg.n_queries = 1000;
  cfg.seed = 9;
  const BenchResult r = bench_predictions(*pipeline_bundle, cfg);
  return {r.ratio >= 5.0 && r.n_training == 100,
          fmt("kriging %.4fs, ann %.5fs, ratio %.1fx", r.kriging_seconds, r.ann_seconds, r.ratio) + " on " +
              r.fom + ", n=" + std::to_string(r.n_training)};
}

Outcome criterion_optimization() {
  if (!pipeline_bundle) return {false, "no bundle (pipeline criterion did not build one)"};
  ObjectiveSpec spec;
  spec.target_fom = "power";
  spec.k_sigma = 3.0;
  spec.constraint_fom = "locking_time";
  spec.constraint_bound = 5.51e-6;
  spec.constraint_sense = ConstraintSense::LessEqual;
  SwarmConfig cfg;
  cfg.seed = 1;
  cfg.mc.n_runs = 1000;
  cfg.final_mc_runs = 1000;
  const OptimizationResult r = pso_optimize(*pipeline_bundle, spec, cfg);
  const FomStats& before = r.initial_report.fom("power");
  const FomStats& after = r.final_report.fom("power");
  const double s0 = before.mean + 3.0 * before.std;
  const double s1 = after.mean + 3.0 * after.std;
  const double lock = r.final_report.fom("locking_time").mean;
  const bool ok = s1 < s0 && lock <= spec.constraint_bound && r.feasible;
  return {ok, fmt("power mu+3sigma %.4e -> %.4e W, ", s0, s1) + fmt("locking mean %.4e <= %.4e", lock, 5.51e-6)};
}

// ---------------------------------------------------------------------------

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

int cli(const std::string& args, const fs::path& log) {
  const std::string cmd = std::string("\"") + VAROPT_CLI + "\" " + args + " > \"" + log.string() + "\" 2>&1";
  return std::system(cmd.c_str());
}

// Runs the whole command chain into `dir`; returns an error text or empty.
std::string cli_chain(const fs::path& dir) {
  fs::create_directories(dir);
  const auto p = [&](const char* name) { return "\"" + (dir / name).string() + "\""; };
  const std::vector<std::string> steps = {
      "sample --n 40 --seed 3 --out " + p("samples.csv"),
      "simulate --samples " + p("samples.csv") + " --out " + p("sim.csv"),
      "fit --samples " + p("sim.csv") + " --hidden 6 --max-epochs 40 --seed 3 --out-bundle " + p("bundle"),
      "mc --bundle " + p("bundle") + " --runs 200 --seed 3 --out " + p("mc.json") + " --raw-csv " + p("mc.csv"),
      "mc --oracle " + std::string("\"") + VAROPT_DATA_DIR + "/pll_oracle.json\" --runs 200 --seed 3 --out " +
          p("mc_oracle.json"),
      "optimize --bundle " + p("bundle") + " --particles 6 --iters 4 --inner-runs 50 --final-runs 100 --seed 3 --out " +
          p("opt.json"),
      "bench --bundle " + p("bundle") + " --samples-n 100 --reps 1 --seed 3 --out " + p("bench.json"),
  };
  for (std::size_t i = 0; i < steps.size(); ++i) {
    const int rc = cli(steps[i], dir / ("step" + std::to_string(i) + ".log"));
    if (rc != 0) return "step failed: " + steps[i];
  }
  return {};
}

Outcome criterion_determinism() {
  const fs::path root = fs::temp_directory_path() / "varopt_acceptance_determinism";
  fs::remove_all(root);
  for (const char* run : {"a", "b"}) {
    const std::string err = cli_chain(root / run);
    if (!err.empty()) return {false, err};
  }
  const std::vector<std::string> files = {"samples.csv", "sim.csv", "bundle/bundle.json", "bundle/samples.csv",
                                          "bundle/power.model.json", "bundle/frequency.model.json",
                                          "bundle/locking_time.model.json", "bundle/jitter.model.json",
                                          "mc.json", "mc.csv", "mc_oracle.json", "opt.json"};
  std::vector<std::string> differ;
  for (const auto& f : files) {
    const fs::path a = root / "a" / f, b = root / "b" / f;
    if (!fs::exists(a) || read_file(a) != read_file(b)) differ.push_back(f);
  }
  // bench.json: everything except the timings block
  auto strip = [](const fs::path& p) {
    Json j = read_json_file(p.string());
    j.erase("timings");
    return j.dump();
  };
  if (strip(root / "a" / "bench.json") != strip(root / "b" / "bench.json")) differ.push_back("bench.json");
  std::string detail = std::to_string(files.size() + 1) + " outputs compared";
  for (const auto& f : differ) detail += ", differs: " + f;
  if (differ.empty()) fs::remove_all(root);
  return {differ.empty(), detail};
}

}  // namespace

int main() {
  run(1, "kriging correctness", 5, criterion_kriging);
  run(2, "lhs stratification", 1, criterion_lhs);
  run(3, "bootstrap contract", 30, criterion_bootstrap);
  run(4, "ann gradient check", 5, criterion_gradient);
  run(5, "ann trainer on x^2", 30, criterion_trainer);
  run(6, "monte carlo statistics", 5, criterion_monte_carlo);
  run(7, "pso convergence", 60, criterion_pso);
  run(8, "end-to-end pipeline", 300, criterion_pipeline);
  run(9, "ann vs kriging speed", 120, criterion_speedup);
  run(10, "optimization improvement", 600, criterion_optimization);
  run(11, "cli determinism", 60, criterion_determinism);
  std::printf("%d of 11 criteria failed\n", failures);
  return failures == 0 ? 0 : 1;
}
