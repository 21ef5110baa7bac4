#include "varopt/pipeline.hpp"

#include "varopt/error.hpp"
#include "varopt/json_io.hpp"
#include "varopt/parallel.hpp"
#include "varopt/rng.hpp"
#include "varopt/sample_io.hpp"

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <numeric>
#include <sstream>

namespace varopt {

void PipelineConfig::validate() const {
  require(holdout_fraction > 0.0 && holdout_fraction < 1.0, ErrorCode::InvalidConfig,
          "holdout_fraction must lie in (0, 1)");
  require(topology.hidden_units >= 0 && topology.slope > 0.0, ErrorCode::InvalidConfig, "bad network topology");
  training.validate();
}

std::vector<std::string> MetamodelBundle::fom_names() const {
  std::vector<std::string> out;
  for (const auto& m : models) out.push_back(m.fom);
  return out;
}

const FomMetamodel& MetamodelBundle::model(const std::string& fom) const {
  for (const auto& m : models) {
    if (m.fom == fom) return m;
  }
  throw Error(ErrorCode::MissingFoM, "bundle has no metamodel for '" + fom + "'");
}

BundleEvaluator::BundleEvaluator(const MetamodelBundle& bundle) : space_(bundle.space) {
  for (const auto& m : bundle.models) {
    names_.push_back(m.fom);
    nets_.push_back(m.net);
  }
}

Eigen::VectorXd BundleEvaluator::evaluate(const Eigen::Ref<const Eigen::VectorXd>& x) const {
  const Eigen::VectorXd u = normalize(space_, x);
  Eigen::VectorXd out(static_cast<Eigen::Index>(nets_.size()));
  for (std::size_t k = 0; k < nets_.size(); ++k) out[static_cast<Eigen::Index>(k)] = forward(nets_[k], u);
  return out;
}

Eigen::MatrixXd BundleEvaluator::evaluate_batch(const Eigen::Ref<const Eigen::MatrixXd>& x) const {
  require(x.cols() == space_.dim() || x.rows() == 0, ErrorCode::DimensionMismatch, "batch has wrong column count");
  Eigen::MatrixXd out(x.rows(), static_cast<Eigen::Index>(nets_.size()));
  if (x.rows() == 0) return out;
  const Eigen::MatrixXd u = normalize_rows(space_, x);
  for (std::size_t k = 0; k < nets_.size(); ++k) out.col(static_cast<Eigen::Index>(k)) = forward_batch(nets_[k], u);
  return out;
}

namespace {

std::string echo_row(const ParameterSpace& space, const Eigen::VectorXd& x) {
  std::ostringstream os;
  os.precision(17);
  for (Eigen::Index i = 0; i < x.size(); ++i) os << (i ? ", " : "") << space[i].name << '=' << x[i];
  return os.str();
}

}  // namespace

void simulate(const Simulator& simulator, const ParameterSpace& space, SampleSet& samples, std::size_t threads) {
  require(simulator.input_dim() == space.dim() && samples.dim() == space.dim(), ErrorCode::DimensionMismatch,
          "simulator, space and samples disagree on dimension");
  require(!simulator.fom_names().empty(), ErrorCode::InvalidConfig, "simulator '" + simulator.id() + "' has no FoMs");
  const Eigen::Index n = samples.size();
  const auto k = static_cast<Eigen::Index>(simulator.fom_names().size());
  const Eigen::MatrixXd x = denormalize_rows(space, samples.inputs);
  Eigen::MatrixXd y(n, k);
  parallel_for(static_cast<std::size_t>(n), simulator.concurrent_safe() ? threads : 1, [&](std::size_t r) {
    const auto row = static_cast<Eigen::Index>(r);
    const Eigen::VectorXd xr = x.row(row).transpose();
    Eigen::VectorXd out;
    try {
      out = simulator.evaluate(xr);
    } catch (const std::exception& e) {
      throw Error(ErrorCode::SimulatorFailure,
                  "row " + std::to_string(row) + " (" + echo_row(space, xr) + "): " + e.what());
    }
    if (out.size() != k || !out.allFinite()) {
      throw Error(ErrorCode::SimulatorFailure,
                  "row " + std::to_string(row) + " (" + echo_row(space, xr) + "): non-finite or missing output");
    }
    y.row(row) = out.transpose();
  });
  for (Eigen::Index j = 0; j < k; ++j) samples.set_response(simulator.fom_names()[static_cast<std::size_t>(j)], y.col(j));
}

std::pair<double, double> verify(const NeuralNet& net, const SampleSet& holdout, const std::string& fom) {
  const Eigen::VectorXd actual = holdout.response(fom);
  require(actual.size() >= 1, ErrorCode::EmptyValues, "empty holdout");
  const Eigen::VectorXd predicted = forward_batch(net, holdout.inputs);
  const double e = rmse(predicted, actual);
  const double range = actual.maxCoeff() - actual.minCoeff();
  double rel = 0.0;
  if (range > 0.0) {
    rel = e / range;
  } else if (e > 0.0) {
    rel = std::numeric_limits<double>::infinity();
  }
  return {e, rel};
}

MetamodelBundle fit_metamodels(const ParameterSpace& space, const SampleSet& samples, const PipelineConfig& config,
                               std::uint64_t seed, const std::string& simulator_id) {
  config.validate();
  samples.validate();
  require(samples.dim() == space.dim(), ErrorCode::DimensionMismatch, "samples do not match the space dimension");
  require(!samples.fom_names.empty(), ErrorCode::MissingResponses, "samples carry no response columns");
  const Eigen::Index n = samples.size();
  require(n >= 10, ErrorCode::TooFewSamples, "metamodel fitting needs at least 10 samples, got " + std::to_string(n));

  // Split first; the bootstrap only ever sees training rows.
  std::vector<Eigen::Index> order(static_cast<std::size_t>(n));
  std::iota(order.begin(), order.end(), Eigen::Index{0});
  Rng split_rng(derive_seed(seed, "pipeline-holdout"));
  split_rng.shuffle(std::span<Eigen::Index>(order));
  const auto n_hold = std::clamp<Eigen::Index>(
      static_cast<Eigen::Index>(std::llround(config.holdout_fraction * static_cast<double>(n))), 1, n - 1);

  MetamodelBundle bundle{space, {}, {}, samples, {}, {}};
  bundle.holdout_rows.assign(order.begin(), order.begin() + n_hold);
  bundle.training_rows.assign(order.begin() + n_hold, order.end());
  std::sort(bundle.holdout_rows.begin(), bundle.holdout_rows.end());
  std::sort(bundle.training_rows.begin(), bundle.training_rows.end());
  bundle.provenance = {space.hash_hex(), simulator_id, n, seed, config.bootstrap};

  const SampleSet train_set = samples.subset(bundle.training_rows);
  const SampleSet holdout = samples.subset(bundle.holdout_rows);

  bundle.models.resize(samples.fom_names.size());
  parallel_for(samples.fom_names.size(), config.threads, [&](std::size_t k) {
    const std::string& fom = samples.fom_names[k];
    FomMetamodel m;
    m.fom = fom;
    Eigen::VectorXd targets = train_set.response(fom);
    if (config.bootstrap) {
      BootstrapResult boot = bootstrap_resample(train_set, fom, config.kriging, 1);
      targets = boot.samples.response(fom);
      m.warnings = std::move(boot.warnings);
    }
    TrainingConfig tc = config.training;
    tc.seed = derive_seed(seed, "ann:" + fom);
    TrainingResult tr = train(train_set.inputs, targets, config.topology, tc);
    m.net = std::move(tr.net);
    m.training_seed = tc.seed;
    m.training_method = to_string(tr.method);
    m.stop_reason = tr.stop_reason;
    m.best_epoch = tr.best_epoch;
    m.final_training_rmse = rmse(forward_batch(m.net, train_set.inputs), targets);
    std::tie(m.verification_rmse, m.rmse_relative) = verify(m.net, holdout, fom);
    bundle.models[k] = std::move(m);
  });
  return bundle;
}

MetamodelBundle build_metamodels(const Simulator& simulator, const ParameterSpace& space, Eigen::Index n_samples,
                                 const PipelineConfig& config, std::uint64_t seed) {
  require(n_samples >= 10, ErrorCode::TooFewSamples, "metamodel flow needs n_samples >= 10");
  SampleSet samples = lhs_sample(space, n_samples, derive_seed(seed, "pipeline-lhs"));
  simulate(simulator, space, samples, config.threads);
  return fit_metamodels(space, samples, config, seed, simulator.id());
}

namespace {

Json rows_to_json(const std::vector<Eigen::Index>& rows) {
  Json out = Json::array();
  for (const auto r : rows) out.push_back(r);
  return out;
}

std::string model_file(const std::string& fom) { return fom + ".model.json"; }

}  // namespace

void save_bundle(const MetamodelBundle& bundle, const std::string& dir) {
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw Error(ErrorCode::IoFailure, "cannot create bundle directory '" + dir + "': " + ec.message());
  const std::filesystem::path root(dir);

  Json models = Json::array();
  for (const auto& m : bundle.models) {
    Json doc = {{"format_version", kFormatVersion},
                {"kind", "neural_metamodel"},
                {"fom", m.fom},
                {"network", network_to_json(m.net)},
                {"training",
                 {{"seed", m.training_seed},
                  {"method", m.training_method},
                  {"stop_reason", m.stop_reason},
                  {"best_epoch", m.best_epoch},
                  {"final_training_rmse", m.final_training_rmse}}},
                {"verification", {{"rmse", m.verification_rmse}, {"rmse_relative", m.rmse_relative}}},
                {"warnings", m.warnings}};
    write_json_file((root / model_file(m.fom)).string(), doc);
    models.push_back({{"fom", m.fom},
                      {"file", model_file(m.fom)},
                      {"verification_rmse", m.verification_rmse},
                      {"rmse_relative", m.rmse_relative}});
  }
  save_samples(bundle.samples, bundle.space, (root / "samples.csv").string());

  const auto& p = bundle.provenance;
  Json doc = {{"format_version", kFormatVersion},
              {"kind", "metamodel_bundle"},
              {"space", space_to_json(bundle.space)},
              {"provenance",
               {{"space_hash", p.space_hash},
                {"simulator_id", p.simulator_id},
                {"n_samples", p.n_samples},
                {"seed", p.seed},
                {"bootstrap", p.bootstrap}}},
              {"samples_file", "samples.csv"},
              {"holdout_rows", rows_to_json(bundle.holdout_rows)},
              {"training_rows", rows_to_json(bundle.training_rows)},
              {"models", models}};
  write_json_file((root / "bundle.json").string(), doc);
}

MetamodelBundle load_bundle(const std::string& dir) {
  const std::filesystem::path root(dir);
  const Json doc = read_json_file((root / "bundle.json").string());
  check_format_version(doc, "bundle");
  try {
    MetamodelBundle bundle{space_from_json(doc.at("space")), {}, {}, {}, {}, {}};
    const Json& p = doc.at("provenance");
    bundle.provenance = {p.at("space_hash").get<std::string>(), p.at("simulator_id").get<std::string>(),
                         p.at("n_samples").get<Eigen::Index>(), p.at("seed").get<std::uint64_t>(),
                         p.at("bootstrap").get<bool>()};
    require(bundle.provenance.space_hash == bundle.space.hash_hex(), ErrorCode::MalformedJson,
            "bundle space hash does not match its parameter list");
    bundle.holdout_rows = doc.at("holdout_rows").get<std::vector<Eigen::Index>>();
    bundle.training_rows = doc.at("training_rows").get<std::vector<Eigen::Index>>();
    bundle.samples = load_samples((root / doc.at("samples_file").get<std::string>()).string(), bundle.space);
    for (const auto& entry : doc.at("models")) {
      const Json m = read_json_file((root / entry.at("file").get<std::string>()).string());
      check_format_version(m, "metamodel");
      FomMetamodel fm;
      fm.fom = m.at("fom").get<std::string>();
      fm.net = network_from_json(m.at("network"));
      require(fm.net.input_dim() == bundle.space.dim(), ErrorCode::DimensionMismatch,
              "metamodel '" + fm.fom + "' input size does not match the space");
      const Json& t = m.at("training");
      fm.training_seed = t.at("seed").get<std::uint64_t>();
      fm.training_method = t.at("method").get<std::string>();
      fm.stop_reason = t.at("stop_reason").get<std::string>();
      fm.best_epoch = t.at("best_epoch").get<Eigen::Index>();
      fm.final_training_rmse = t.at("final_training_rmse").get<double>();
      fm.verification_rmse = m.at("verification").at("rmse").get<double>();
      fm.rmse_relative = m.at("verification").at("rmse_relative").get<double>();
      fm.warnings = m.at("warnings").get<std::vector<std::string>>();
      bundle.models.push_back(std::move(fm));
    }
    return bundle;
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, "bundle '" + dir + "': " + e.what());
  }
}

}  // namespace varopt
