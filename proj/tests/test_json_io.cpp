#include "support.hpp"

#include "varopt/json_io.hpp"
#include "varopt/oracle.hpp"

using namespace varopt;

TEST_CASE("space round trip keeps order and hash") {
  const ParameterSpace s({{"z", 1.0, 2.0, 1.5}, {"a", -1.0, 1.0, 0.25}});
  const ParameterSpace back = space_from_json(space_to_json(s));
  CHECK(back.hash() == s.hash());
  CHECK(back[0].name == "z");
  const auto dir = testing::scratch("json");
  const std::string path = (dir / "space.json").string();
  write_json_file(path, space_to_json(s));
  CHECK(load_space(path).hash() == s.hash());
}

TEST_CASE("network round trip is exact") {
  Topology topo;
  topo.hidden_units = 3;
  const NeuralNet net = init_network(4, topo, 8);
  const NeuralNet back = network_from_json(Json::parse(network_to_json(net).dump()));
  CHECK(back.parameters() == net.parameters());
  CHECK(back.slope == net.slope);
}

TEST_CASE("kriging model round trip predicts identically") {
  const Eigen::MatrixXd x = testing::random_unit(7, 2, 1);
  const KrigingModel m(x, x.rowwise().sum(), Variogram{VariogramKind::Spherical, 0.01, 2.0, 0.8});
  const KrigingModel back = kriging_from_json(Json::parse(kriging_to_json(m).dump()));
  const Eigen::MatrixXd q = testing::random_unit(5, 2, 2);
  CHECK(kriging_predict_batch(back, q) == kriging_predict_batch(m, q));
  CHECK(back.variogram().kind == VariogramKind::Spherical);
}

TEST_CASE("oracle round trip") {
  const SyntheticPllOracle o = generate_pll_oracle(5);
  const SyntheticPllOracle back = oracle_from_json(Json::parse(oracle_to_json(o).dump()));
  const Eigen::MatrixXd x = denormalize_rows(o.space(), testing::random_unit(5, 21, 3));
  CHECK(back.evaluate_batch(x) == o.evaluate_batch(x));
}

TEST_CASE("format errors") {
  using testing::check_code;
  check_code([] { check_format_version(Json{{"format_version", 99}}, "x"); }, ErrorCode::UnsupportedVersion);
  check_code([] { space_from_json(Json{{"parameters", 3}}); }, ErrorCode::MalformedJson);
  check_code([] { matrix_from_json(Json::parse("[[1,2],[3]]")); }, ErrorCode::MalformedJson);
  check_code([] { vector_from_json(Json::parse("[1,\"a\"]")); }, ErrorCode::MalformedJson);
  Json net = network_to_json(NeuralNet::zeros(2, 2));
  net["bias_hidden"] = Json::array({1.0});
  check_code([&] { network_from_json(net); }, ErrorCode::MalformedJson);
  const auto dir = testing::scratch("json_bad");
  std::ofstream((dir / "bad.json").string()) << "{ not json";
  check_code([&] { read_json_file((dir / "bad.json").string()); }, ErrorCode::MalformedJson);
  check_code([&] { read_json_file((dir / "none.json").string()); }, ErrorCode::IoFailure);
}
