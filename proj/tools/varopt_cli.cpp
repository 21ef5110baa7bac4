// varopt: sample -> simulate -> fit -> mc / optimize / bench, with file handoffs.
#include "varopt/bench.hpp"
#include "varopt/error.hpp"
#include "varopt/json_io.hpp"
#include "varopt/oracle.hpp"
#include "varopt/parallel.hpp"
#include "varopt/pipeline.hpp"
#include "varopt/pso.hpp"
#include "varopt/sample_io.hpp"
#include "varopt/sampling.hpp"
#include "varopt/statistics.hpp"

#include <CLI11.hpp>

#include <chrono>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>

#ifndef VAROPT_VERSION
#define VAROPT_VERSION "0.0.0"
#endif
#ifndef VAROPT_DATA_DIR
#define VAROPT_DATA_DIR "data"
#endif

namespace {

using namespace varopt;

const std::string kDefaultOracle = std::string(VAROPT_DATA_DIR) + "/pll_oracle.json";

// Everything needed to replay a run; timings are the only non-reproducible part.
class Manifest {
 public:
  explicit Manifest(std::string command) : command_(std::move(command)) {}

  Json params = Json::object();
  Json seeds = Json::object();
  Json inputs = Json::object();
  Json outputs = Json::object();

  template <typename Fn>
  decltype(auto) timed(const std::string& phase, Fn&& fn) {
    const auto t0 = std::chrono::steady_clock::now();
    struct Stop {
      Manifest& m;
      std::string phase;
      std::chrono::steady_clock::time_point t0;
      ~Stop() { m.timings_[phase] = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count(); }
    } stop{*this, phase, t0};
    return fn();
  }

  void write(const std::string& path) const {
    write_json_file(path, {{"format_version", kFormatVersion},
                           {"kind", "run_manifest"},
                           {"command", command_},
                           {"tool_version", VAROPT_VERSION},
                           {"parameters", params},
                           {"seeds", seeds},
                           {"inputs", inputs},
                           {"outputs", outputs},
                           {"timings", timings_}});
  }

 private:
  std::string command_;
  Json timings_ = Json::object();
};

std::string manifest_path(const std::string& out) { return out + ".manifest.json"; }

void write_text(const std::string& path, const std::string& text) {
  std::ofstream f(path, std::ios::binary);
  if (!f) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  f << text;
  if (!f) throw Error(ErrorCode::IoFailure, "failed writing '" + path + "'");
}

std::string fmt(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6g", v);
  return buf;
}

// Nominal point: the space nominal, optionally overridden by a JSON object {name: value}.
Eigen::VectorXd resolve_nominal(const ParameterSpace& space, const std::string& path) {
  Eigen::VectorXd x = space.nominal();
  if (path.empty()) return x;
  const Json doc = read_json_file(path);
  const Json& values = doc.contains("nominal") ? doc.at("nominal") : doc;
  require(values.is_object(), ErrorCode::MalformedJson, "nominal file must hold an object of name: value");
  for (const auto& [name, value] : values.items()) {
    if (name == "format_version" || name == "kind") continue;
    const auto i = space.index_of(name);
    require(i.has_value(), ErrorCode::UnknownColumn, "nominal file names unknown parameter '" + name + "'");
    require(value.is_number(), ErrorCode::MalformedJson, "nominal value for '" + name + "' is not a number");
    x[*i] = value.get<double>();
  }
  return x;
}

// --------------------------------------------------------------------------

struct SampleArgs {
  std::string space = kDefaultOracle;
  Eigen::Index n = 100;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_sample(const SampleArgs& a) {
  Manifest m("sample");
  m.params = {{"n", a.n}};
  m.seeds = {{"seed", a.seed}};
  m.inputs = {{"space", a.space}};
  m.outputs = {{"samples", a.out}};
  const ParameterSpace space = m.timed("load", [&] { return load_space(a.space); });
  const SampleSet s = m.timed("sample", [&] { return lhs_sample(space, a.n, a.seed); });
  m.timed("write", [&] { save_samples(s, space, a.out); });
  m.write(manifest_path(a.out));
  std::cout << "wrote " << s.size() << " samples to " << a.out << '\n';
  return 0;
}

struct SimulateArgs {
  std::string samples;
  std::string oracle;
  std::string space;
  std::string csv_responses;
  std::vector<std::string> foms;
  bool foms_given = false;
  std::string out;
  std::size_t threads = 1;
};

int cmd_simulate(const SimulateArgs& a) {
  Manifest m("simulate");
  m.inputs = {{"samples", a.samples}};
  m.outputs = {{"samples", a.out}};
  require(a.oracle.empty() || a.csv_responses.empty(), ErrorCode::InvalidConfig,
          "--oracle and --csv-responses are exclusive");
  if (a.foms_given) {
    require(!a.foms.empty(), ErrorCode::InvalidConfig, "empty FoM request");
    for (const auto& f : a.foms) require(!f.empty(), ErrorCode::InvalidConfig, "empty FoM name in request");
  }

  if (!a.csv_responses.empty()) {
    require(!a.space.empty(), ErrorCode::InvalidConfig, "--csv-responses needs --space");
    m.inputs["space"] = a.space;
    m.inputs["csv_responses"] = a.csv_responses;
    const ParameterSpace space = load_space(a.space);
    SampleSet s = load_samples(a.samples, space);
    const auto [names, values] = load_response_csv(a.csv_responses);
    require(values.rows() == s.size(), ErrorCode::LengthMismatch,
            "response file has " + std::to_string(values.rows()) + " rows, samples have " + std::to_string(s.size()));
    for (std::size_t j = 0; j < names.size(); ++j) {
      if (a.foms_given && std::find(a.foms.begin(), a.foms.end(), names[j]) == a.foms.end()) continue;
      s.set_response(names[j], values.col(static_cast<Eigen::Index>(j)));
    }
    if (a.foms_given) {
      for (const auto& f : a.foms) {
        require(s.has_response(f), ErrorCode::MissingFoM, "response file has no column '" + f + "'");
      }
    }
    save_samples(s, space, a.out);
  } else {
    const std::string oracle_path = a.oracle.empty() ? kDefaultOracle : a.oracle;
    m.inputs["oracle"] = oracle_path;
    const SyntheticPllOracle oracle = m.timed("load", [&] { return load_oracle(oracle_path); });
    SampleSet s = load_samples(a.samples, oracle.space());
    SampleSet full = s;
    m.timed("simulate", [&] { simulate(oracle, oracle.space(), full, a.threads); });
    if (a.foms_given) {
      for (const auto& f : a.foms) s.set_response(f, full.response(f));
    } else {
      s = std::move(full);
    }
    m.params["simulator"] = oracle.id();
    save_samples(s, oracle.space(), a.out);
  }
  m.params["foms"] = a.foms;
  m.write(manifest_path(a.out));
  std::cout << "wrote " << a.out << '\n';
  return 0;
}

struct FitArgs {
  std::string samples;
  std::string space = kDefaultOracle;
  std::string bootstrap = "on";
  Eigen::Index hidden = 0;
  double holdout = 0.2;
  Eigen::Index max_epochs = 200;
  std::uint64_t seed = 1;
  std::string out_bundle;
  std::size_t threads = 1;
};

int cmd_fit(const FitArgs& a) {
  Manifest m("fit");
  PipelineConfig cfg;
  cfg.bootstrap = a.bootstrap == "on";
  cfg.topology.hidden_units = a.hidden;
  cfg.holdout_fraction = a.holdout;
  cfg.training.max_epochs = a.max_epochs;
  cfg.threads = a.threads;
  m.params = {{"bootstrap", cfg.bootstrap},
              {"hidden", a.hidden},
              {"holdout_fraction", a.holdout},
              {"max_epochs", a.max_epochs},
              {"variogram", to_string(cfg.kriging.kind)},
              {"variogram_bins", cfg.kriging.n_bins}};
  m.seeds = {{"seed", a.seed}};
  m.inputs = {{"samples", a.samples}, {"space", a.space}};
  m.outputs = {{"bundle", a.out_bundle}};

  const ParameterSpace space = load_space(a.space);
  const SampleSet samples = load_samples(a.samples, space);
  require(!samples.fom_names.empty(), ErrorCode::MissingResponses, "'" + a.samples + "' has no response columns");
  const MetamodelBundle bundle = m.timed("fit", [&] { return fit_metamodels(space, samples, cfg, a.seed, "samples-csv"); });
  m.timed("write", [&] { save_bundle(bundle, a.out_bundle); });
  m.write((std::filesystem::path(a.out_bundle) / "manifest.json").string());

  std::printf("%-14s %-14s %-14s %s\n", "fom", "rmse", "rmse_relative", "stop");
  for (const auto& fm : bundle.models) {
    std::printf("%-14s %-14s %-14s %s\n", fm.fom.c_str(), fmt(fm.verification_rmse).c_str(),
                fmt(fm.rmse_relative).c_str(), fm.stop_reason.c_str());
    for (const auto& w : fm.warnings) std::cerr << "warning: " << fm.fom << ": " << w << '\n';
  }
  return 0;
}

// A bundle or the oracle, whichever was asked for; the oracle is the default.
struct EvaluatorSource {
  std::optional<MetamodelBundle> bundle;
  std::optional<SyntheticPllOracle> oracle;
  std::unique_ptr<BundleEvaluator> bundle_eval;

  void load(const std::string& bundle_dir, const std::string& oracle_path) {
    require(bundle_dir.empty() || oracle_path.empty(), ErrorCode::InvalidConfig, "--bundle and --oracle are exclusive");
    if (!bundle_dir.empty()) {
      bundle = load_bundle(bundle_dir);
      bundle_eval = std::make_unique<BundleEvaluator>(*bundle);
    } else {
      oracle = load_oracle(oracle_path.empty() ? kDefaultOracle : oracle_path);
    }
  }
  const Simulator& evaluator() const {
    if (bundle_eval) return *bundle_eval;
    return *oracle;
  }
  const ParameterSpace& space() const { return bundle ? bundle->space : oracle->space(); }
};

struct McArgs {
  std::string bundle;
  std::string oracle;
  std::string nominal;
  Eigen::Index runs = 1000;
  double sigma_frac = 0.10;
  Eigen::Index bins = 20;
  std::uint64_t seed = 1;
  std::string out;
  std::string raw_csv;
  std::size_t threads = 1;
};

int cmd_mc(const McArgs& a) {
  Manifest m("mc");
  EvaluatorSource src;
  m.timed("load", [&] { src.load(a.bundle, a.oracle); });
  MCConfig cfg;
  cfg.n_runs = a.runs;
  cfg.sigma_fraction = a.sigma_frac;
  cfg.seed = a.seed;
  cfg.histogram_bins = a.bins;
  cfg.keep_raw = !a.raw_csv.empty();
  cfg.threads = a.threads;
  const Eigen::VectorXd nominal = resolve_nominal(src.space(), a.nominal);
  m.params = {{"runs", a.runs}, {"sigma_fraction", a.sigma_frac}, {"histogram_bins", a.bins},
              {"evaluator", src.evaluator().id()}};
  m.seeds = {{"seed", a.seed}};
  m.inputs = {{"bundle", a.bundle}, {"oracle", a.bundle.empty() ? (a.oracle.empty() ? kDefaultOracle : a.oracle) : ""},
              {"nominal", a.nominal}};
  m.outputs = {{"report", a.out}, {"raw_csv", a.raw_csv}};

  const MCReport report = m.timed("mc", [&] { return monte_carlo(src.evaluator(), src.space(), nominal, cfg); });
  write_json_file(a.out, mc_report_to_json(report, src.space()));
  if (!a.raw_csv.empty()) {
    SampleSet raw;
    raw.inputs = normalize_rows(src.space(), report.draws);
    raw.responses = Eigen::MatrixXd(report.draws.rows(), 0);
    for (std::size_t j = 0; j < report.foms.size(); ++j) {
      raw.set_response(report.foms[j].name, report.responses.col(static_cast<Eigen::Index>(j)));
    }
    save_samples(raw, src.space(), a.raw_csv);
  }
  m.write(manifest_path(a.out));

  std::printf("%-14s %-14s %-14s\n", "fom", "mean", "std");
  for (const auto& f : report.foms) std::printf("%-14s %-14s %-14s\n", f.name.c_str(), fmt(f.mean).c_str(), fmt(f.std).c_str());
  return 0;
}

struct OptimizeArgs {
  std::string bundle;
  std::string oracle;
  std::string target = "power";
  double k_sigma = 3.0;
  std::string constraint = "locking_time";
  double bound = 5.51e-6;
  std::string sense = "le";
  double penalty = 1.0;
  Eigen::Index particles = 30;
  Eigen::Index iters = 100;
  Eigen::Index inner_runs = 200;
  Eigen::Index final_runs = 1000;
  double sigma_frac = 0.10;
  std::uint64_t seed = 1;
  std::string out;
  std::size_t threads = 1;
};

int cmd_optimize(const OptimizeArgs& a) {
  Manifest m("optimize");
  EvaluatorSource src;
  m.timed("load", [&] { src.load(a.bundle, a.oracle); });
  ObjectiveSpec spec;
  spec.target_fom = a.target;
  spec.k_sigma = a.k_sigma;
  spec.constraint_fom = a.constraint == "none" ? "" : a.constraint;
  spec.constraint_bound = a.bound;
  spec.constraint_sense = constraint_sense_from_string(a.sense);
  spec.penalty_weight = a.penalty;
  SwarmConfig cfg;
  cfg.n_particles = a.particles;
  cfg.max_iterations = a.iters;
  cfg.mc.n_runs = a.inner_runs;
  cfg.mc.sigma_fraction = a.sigma_frac;
  cfg.final_mc_runs = a.final_runs;
  cfg.seed = a.seed;
  cfg.threads = a.threads;
  m.params = {{"target", a.target},         {"k_sigma", a.k_sigma},        {"constraint", a.constraint},
              {"bound", a.bound},           {"sense", a.sense},            {"penalty_weight", a.penalty},
              {"particles", a.particles},   {"iterations", a.iters},       {"inner_runs", a.inner_runs},
              {"final_runs", a.final_runs}, {"sigma_fraction", a.sigma_frac}, {"evaluator", src.evaluator().id()}};
  m.seeds = {{"seed", a.seed}};
  m.inputs = {{"bundle", a.bundle}, {"oracle", a.bundle.empty() ? (a.oracle.empty() ? kDefaultOracle : a.oracle) : ""}};
  m.outputs = {{"result", a.out}};

  const OptimizationResult r = m.timed("optimize", [&] { return pso_optimize(src.evaluator(), src.space(), spec, cfg); });
  for (std::size_t i = 1; i < r.trace.size(); ++i) {
    if (r.trace[i] > r.trace[i - 1]) throw Error(ErrorCode::NonFiniteLoss, "global-best trace increased");
  }
  write_json_file(a.out, optimization_result_to_json(r, src.space(), spec, cfg));
  m.write(manifest_path(a.out));

  std::printf("%-14s %-14s %-14s %-14s %-14s\n", "fom", "initial mean", "initial std", "final mean", "final std");
  for (std::size_t j = 0; j < r.final_report.foms.size(); ++j) {
    const auto& i0 = r.initial_report.foms[j];
    const auto& f = r.final_report.foms[j];
    std::printf("%-14s %-14s %-14s %-14s %-14s\n", f.name.c_str(), fmt(i0.mean).c_str(), fmt(i0.std).c_str(),
                fmt(f.mean).c_str(), fmt(f.std).c_str());
  }
  std::printf("objective: initial %s -> final %s, constraint %s\n", fmt(r.initial_final_score).c_str(),
              fmt(r.final_score).c_str(), r.feasible ? "met" : "VIOLATED");
  for (const auto& w : r.warnings) std::cerr << "warning: " << w << '\n';
  return 0;
}

struct BenchArgs {
  std::string bundle;
  Eigen::Index queries = 1000;
  Eigen::Index reps = 5;
  std::string fom;
  std::uint64_t seed = 1;
  std::string out;
};

int cmd_bench(const BenchArgs& a) {
  Manifest m("bench");
  const MetamodelBundle bundle = m.timed("load", [&] { return load_bundle(a.bundle); });
  BenchConfig cfg;
  cfg.n_queries = a.queries;
  cfg.repetitions = a.reps;
  cfg.fom = a.fom;
  cfg.seed = a.seed;
  m.params = {{"queries", a.queries}, {"repetitions", a.reps}, {"fom", a.fom}};
  m.seeds = {{"seed", a.seed}};
  m.inputs = {{"bundle", a.bundle}};
  m.outputs = {{"result", a.out}};
  const BenchResult r = m.timed("bench", [&] { return bench_predictions(bundle, cfg); });
  const Json doc = bench_to_json(r, cfg);
  if (!a.out.empty()) {
    write_json_file(a.out, doc);
    m.write(manifest_path(a.out));
  }
  std::printf("fom %s, %lld queries, %lld training points, d=%lld\n", r.fom.c_str(),
              static_cast<long long>(r.n_queries), static_cast<long long>(r.n_training), static_cast<long long>(r.dim));
  std::printf("kriging %s s, ann %s s, ratio %s\n", fmt(r.kriging_seconds).c_str(), fmt(r.ann_seconds).c_str(),
              fmt(r.ratio).c_str());
  std::cout << doc.dump() << '\n';
  return 0;
}

int exit_code(const Error& e) {
  switch (e.category()) {
    case ErrorCategory::Validation: return 2;
    case ErrorCategory::Io: return 3;
    case ErrorCategory::Numerical: return 4;
  }
  return 1;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Surrogate modeling and variability-aware optimization"};
  app.set_version_flag("--version", VAROPT_VERSION);
  app.require_subcommand(1);
  std::size_t threads = default_thread_count();
  app.add_option("--threads", threads, "worker threads (results do not depend on it)")->check(CLI::PositiveNumber);

  std::function<int()> run;

  SampleArgs sa;
  auto* sample = app.add_subcommand("sample", "Latin hypercube sample of a parameter space");
  sample->add_option("--space", sa.space, "space JSON (any file with a 'parameters' array)");
  sample->add_option("--n", sa.n, "number of samples")->required();
  sample->add_option("--seed", sa.seed);
  sample->add_option("--out", sa.out, "output CSV")->required();
  sample->callback([&] { run = [&] { return cmd_sample(sa); }; });

  SimulateArgs si;
  auto* sim = app.add_subcommand("simulate", "Attach FoM columns to a sample CSV");
  sim->add_option("--samples", si.samples)->required();
  sim->add_option("--oracle", si.oracle, "oracle JSON (default: shipped PLL oracle)");
  sim->add_option("--space", si.space, "space JSON, with --csv-responses");
  sim->add_option("--csv-responses", si.csv_responses, "CSV of externally simulated FoMs, rows aligned");
  auto* foms_opt = sim->add_option("--foms", si.foms, "FoM subset")->expected(0, -1)->delimiter(',');
  sim->add_option("--out", si.out)->required();
  sim->callback([&] {
    si.foms_given = foms_opt->count() > 0;
    si.foms.erase(std::remove(si.foms.begin(), si.foms.end(), std::string{}), si.foms.end());
    si.threads = threads;
    run = [&] { return cmd_simulate(si); };
  });

  FitArgs fa;
  auto* fit = app.add_subcommand("fit", "Kriging-bootstrap + ANN metamodels, one per FoM");
  fit->add_option("--samples", fa.samples)->required();
  fit->add_option("--space", fa.space);
  fit->add_option("--bootstrap", fa.bootstrap)->check(CLI::IsMember({"on", "off"}));
  fit->add_option("--hidden", fa.hidden, "hidden units, 0 = 2d+1")->check(CLI::NonNegativeNumber);
  fit->add_option("--holdout", fa.holdout, "verification fraction");
  fit->add_option("--max-epochs", fa.max_epochs);
  fit->add_option("--seed", fa.seed);
  fit->add_option("--out-bundle", fa.out_bundle)->required();
  fit->callback([&] {
    fa.threads = threads;
    run = [&] { return cmd_fit(fa); };
  });

  McArgs ma;
  auto* mc = app.add_subcommand("mc", "Monte Carlo variation analysis");
  mc->add_option("--bundle", ma.bundle);
  mc->add_option("--oracle", ma.oracle);
  mc->add_option("--nominal", ma.nominal, "JSON object of parameter values (default: space nominal)");
  mc->add_option("--runs", ma.runs);
  mc->add_option("--sigma-frac", ma.sigma_frac);
  mc->add_option("--bins", ma.bins);
  mc->add_option("--seed", ma.seed);
  mc->add_option("--out", ma.out)->required();
  mc->add_option("--raw-csv,--dump-raw", ma.raw_csv, "also write every draw and response");
  mc->callback([&] {
    ma.threads = threads;
    run = [&] { return cmd_mc(ma); };
  });

  OptimizeArgs oa;
  auto* opt = app.add_subcommand("optimize", "PSO on mu + k sigma of a FoM");
  opt->add_option("--bundle", oa.bundle);
  opt->add_option("--oracle", oa.oracle);
  opt->add_option("--target", oa.target);
  opt->add_option("--k-sigma", oa.k_sigma);
  opt->add_option("--constraint", oa.constraint, "constraint FoM or 'none'");
  opt->add_option("--bound", oa.bound);
  opt->add_option("--sense", oa.sense)->check(CLI::IsMember({"le", "ge"}));
  opt->add_option("--penalty", oa.penalty);
  opt->add_option("--particles", oa.particles);
  opt->add_option("--iters", oa.iters);
  opt->add_option("--inner-runs", oa.inner_runs);
  opt->add_option("--final-runs", oa.final_runs);
  opt->add_option("--sigma-frac", oa.sigma_frac);
  opt->add_option("--seed", oa.seed);
  opt->add_option("--out", oa.out)->required();
  opt->callback([&] {
    oa.threads = threads;
    run = [&] { return cmd_optimize(oa); };
  });

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "ANN vs Kriging batch prediction time");
  bench->add_option("--bundle", ba.bundle)->required();
  bench->add_option("--samples-n", ba.queries, "query count");
  bench->add_option("--reps", ba.reps);
  bench->add_option("--fom", ba.fom);
  bench->add_option("--seed", ba.seed);
  bench->add_option("--out", ba.out);
  bench->callback([&] { run = [&] { return cmd_bench(ba); }; });

  try {
    app.parse(argc, argv);
  } catch (const CLI::Success& e) {
    return app.exit(e);
  } catch (const CLI::ParseError& e) {
    app.exit(e);
    return 2;
  }

  try {
    return run();
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return exit_code(e);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 4;
  }
}
