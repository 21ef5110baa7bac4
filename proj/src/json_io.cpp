#include "varopt/json_io.hpp"

#include "varopt/error.hpp"

#include <fstream>
#include <sstream>

namespace varopt {

namespace {

template <typename T>
T get(const Json& j, const char* key, const std::string& what) {
  if (!j.is_object() || !j.contains(key)) {
    throw Error(ErrorCode::MalformedJson, what + ": missing key '" + key + "'");
  }
  try {
    return j.at(key).get<T>();
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, what + ": bad value for '" + key + "': " + e.what());
  }
}

}  // namespace

Json read_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for reading");
  try {
    return Json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw Error(ErrorCode::MalformedJson, "'" + path + "': " + e.what());
  }
}

void write_json_file(const std::string& path, const Json& doc) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error(ErrorCode::IoFailure, "cannot open '" + path + "' for writing");
  out << doc.dump(2) << '\n';
  if (!out) throw Error(ErrorCode::IoFailure, "failed writing '" + path + "'");
}

void check_format_version(const Json& doc, const std::string& what) {
  const int version = get<int>(doc, "format_version", what);
  if (version != kFormatVersion) {
    throw Error(ErrorCode::UnsupportedVersion,
                what + ": format_version " + std::to_string(version) + ", expected " + std::to_string(kFormatVersion));
  }
}

Json vector_to_json(const Eigen::Ref<const Eigen::VectorXd>& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(v[i]);
  return out;
}

Eigen::VectorXd vector_from_json(const Json& j) {
  require(j.is_array(), ErrorCode::MalformedJson, "expected a numeric array");
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  for (std::size_t i = 0; i < j.size(); ++i) {
    require(j[i].is_number(), ErrorCode::MalformedJson, "expected a numeric array");
    v[static_cast<Eigen::Index>(i)] = j[i].get<double>();
  }
  return v;
}

Json matrix_to_json(const Eigen::Ref<const Eigen::MatrixXd>& m) {
  Json out = Json::array();
  for (Eigen::Index r = 0; r < m.rows(); ++r) out.push_back(vector_to_json(m.row(r).transpose()));
  return out;
}

Eigen::MatrixXd matrix_from_json(const Json& j) {
  require(j.is_array(), ErrorCode::MalformedJson, "expected an array of rows");
  if (j.empty()) return Eigen::MatrixXd(0, 0);
  const auto cols = static_cast<Eigen::Index>(j[0].size());
  Eigen::MatrixXd m(static_cast<Eigen::Index>(j.size()), cols);
  for (std::size_t r = 0; r < j.size(); ++r) {
    const Eigen::VectorXd row = vector_from_json(j[r]);
    require(row.size() == cols, ErrorCode::MalformedJson, "ragged matrix rows");
    m.row(static_cast<Eigen::Index>(r)) = row.transpose();
  }
  return m;
}

Json space_to_json(const ParameterSpace& space) {
  Json params = Json::array();
  for (const auto& p : space.parameters()) {
    params.push_back({{"name", p.name}, {"lower", p.lower}, {"upper", p.upper}, {"nominal", p.nominal}});
  }
  return {{"parameters", params}};
}

ParameterSpace space_from_json(const Json& j) {
  const Json params = get<Json>(j, "parameters", "space");
  require(params.is_array(), ErrorCode::MalformedJson, "space: 'parameters' must be an array");
  std::vector<ParameterDef> dims;
  for (const auto& p : params) {
    dims.push_back({get<std::string>(p, "name", "parameter"), get<double>(p, "lower", "parameter"),
                    get<double>(p, "upper", "parameter"), get<double>(p, "nominal", "parameter")});
  }
  return ParameterSpace(std::move(dims));
}

ParameterSpace load_space(const std::string& path) {
  const Json doc = read_json_file(path);
  if (doc.contains("format_version")) check_format_version(doc, path);
  return space_from_json(doc);
}

Json variogram_to_json(const Variogram& v) {
  return {{"kind", to_string(v.kind)}, {"nugget", v.nugget}, {"sill", v.sill}, {"range", v.range}};
}

Variogram variogram_from_json(const Json& j) {
  return {variogram_kind_from_string(get<std::string>(j, "kind", "variogram")), get<double>(j, "nugget", "variogram"),
          get<double>(j, "sill", "variogram"), get<double>(j, "range", "variogram")};
}

Json kriging_to_json(const KrigingModel& model) {
  return {{"format_version", kFormatVersion},
          {"kind", "ordinary_kriging"},
          {"variogram", variogram_to_json(model.variogram())},
          {"inputs", matrix_to_json(model.inputs())},
          {"responses", vector_to_json(model.responses())}};
}

KrigingModel kriging_from_json(const Json& j) {
  check_format_version(j, "kriging model");
  return KrigingModel(matrix_from_json(get<Json>(j, "inputs", "kriging model")),
                      vector_from_json(get<Json>(j, "responses", "kriging model")),
                      variogram_from_json(get<Json>(j, "variogram", "kriging model")));
}

Json network_to_json(const NeuralNet& net) {
  return {{"input_dim", net.input_dim()},
          {"hidden_units", net.hidden_units()},
          {"slope", net.slope},
          {"weights_hidden", matrix_to_json(net.weights_hidden)},
          {"bias_hidden", vector_to_json(net.bias_hidden)},
          {"weights_out", vector_to_json(net.weights_out)},
          {"bias_out", net.bias_out}};
}

NeuralNet network_from_json(const Json& j) {
  const auto d = get<Eigen::Index>(j, "input_dim", "network");
  const auto h = get<Eigen::Index>(j, "hidden_units", "network");
  NeuralNet net = NeuralNet::zeros(d, h, get<double>(j, "slope", "network"));
  net.weights_hidden = matrix_from_json(get<Json>(j, "weights_hidden", "network"));
  net.bias_hidden = vector_from_json(get<Json>(j, "bias_hidden", "network"));
  net.weights_out = vector_from_json(get<Json>(j, "weights_out", "network"));
  net.bias_out = get<double>(j, "bias_out", "network");
  require(net.weights_hidden.rows() == h && net.weights_hidden.cols() == d && net.bias_hidden.size() == h &&
              net.weights_out.size() == h,
          ErrorCode::MalformedJson, "network: weight shapes do not match topology");
  require(net.finite(), ErrorCode::MalformedJson, "network: non-finite weights");
  return net;
}

Json histogram_to_json(const Histogram& h) {
  return {{"edges", h.edges}, {"counts", h.counts}};
}

Json mc_report_to_json(const MCReport& report, const ParameterSpace& space) {
  Json foms = Json::array();
  for (const auto& f : report.foms) {
    foms.push_back({{"name", f.name},
                    {"mean", f.mean},
                    {"std", f.std},
                    {"min", f.min},
                    {"max", f.max},
                    {"histogram", histogram_to_json(f.histogram)}});
  }
  Json nominal = Json::object();
  for (Eigen::Index i = 0; i < space.dim(); ++i) nominal[space[i].name] = report.nominal[i];
  return {{"format_version", kFormatVersion},
          {"kind", "mc_report"},
          {"config",
           {{"n_runs", report.config.n_runs},
            {"sigma_fraction", report.config.sigma_fraction},
            {"seed", report.config.seed},
            {"histogram_bins", report.config.histogram_bins},
            {"correlated", report.config.correlation.has_value()}}},
          {"nominal", nominal},
          {"foms", foms}};
}

Json oracle_to_json(const SyntheticPllOracle& oracle) {
  Json doc = {{"format_version", kFormatVersion},
              {"kind", "synthetic_pll_oracle"},
              {"generator_seed", oracle.generator_seed()},
              {"note", "synthetic data; not derived from any real circuit"}};
  doc["parameters"] = space_to_json(oracle.space())["parameters"];
  Json foms = Json::array();
  for (const auto& s : oracle.surfaces()) {
    Json ripple = Json::array();
    for (const auto& r : s.ripple) {
      ripple.push_back({{"a", r.a},
                        {"b", r.b},
                        {"freq_a", r.freq_a},
                        {"phase_a", r.phase_a},
                        {"freq_b", r.freq_b},
                        {"phase_b", r.phase_b}});
    }
    foms.push_back({{"name", s.name},
                    {"unit", s.unit},
                    {"scale", s.scale},
                    {"offset", s.offset},
                    {"linear", vector_to_json(s.linear)},
                    {"quadratic", matrix_to_json(s.quadratic)},
                    {"ripple_amplitude", s.ripple_amplitude},
                    {"ripple", ripple}});
  }
  doc["foms"] = foms;
  return doc;
}

SyntheticPllOracle oracle_from_json(const Json& j) {
  check_format_version(j, "oracle");
  ParameterSpace space = space_from_json(j);
  std::vector<FomSurface> surfaces;
  for (const auto& f : get<Json>(j, "foms", "oracle")) {
    FomSurface s;
    s.name = get<std::string>(f, "name", "oracle FoM");
    s.unit = get<std::string>(f, "unit", "oracle FoM");
    s.scale = get<double>(f, "scale", "oracle FoM");
    s.offset = get<double>(f, "offset", "oracle FoM");
    s.linear = vector_from_json(get<Json>(f, "linear", "oracle FoM"));
    s.quadratic = matrix_from_json(get<Json>(f, "quadratic", "oracle FoM"));
    s.ripple_amplitude = get<double>(f, "ripple_amplitude", "oracle FoM");
    for (const auto& r : get<Json>(f, "ripple", "oracle FoM")) {
      s.ripple.push_back({get<Eigen::Index>(r, "a", "ripple"), get<Eigen::Index>(r, "b", "ripple"),
                          get<double>(r, "freq_a", "ripple"), get<double>(r, "phase_a", "ripple"),
                          get<double>(r, "freq_b", "ripple"), get<double>(r, "phase_b", "ripple")});
    }
    surfaces.push_back(std::move(s));
  }
  return SyntheticPllOracle(std::move(space), std::move(surfaces), get<std::uint64_t>(j, "generator_seed", "oracle"));
}

SyntheticPllOracle load_oracle(const std::string& path) {
  return oracle_from_json(read_json_file(path));
}

}  // namespace varopt
