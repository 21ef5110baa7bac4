#include "support.hpp"

#include "varopt/statistics.hpp"

using namespace varopt;

namespace {

ParameterSpace wide_space(const Eigen::VectorXd& nom) {
  std::vector<ParameterDef> dims;
  for (Eigen::Index i = 0; i < nom.size(); ++i) dims.push_back({"p" + std::to_string(i), 0.0, 2.0 * nom[i], nom[i]});
  return ParameterSpace(dims);
}

FunctionSimulator linear_sim(const Eigen::VectorXd& a, double b) {
  return FunctionSimulator("linear", a.size(), {"y", "z"}, [a, b](const Eigen::VectorXd& x) {
    return Eigen::Vector2d(a.dot(x) + b, 1.0);
  });
}

}  // namespace

TEST_CASE("histogram of 0..9 in two bins") {
  const Histogram h = histogram(Eigen::VectorXd::LinSpaced(10, 0, 9), 2);
  REQUIRE(h.counts.size() == 2);
  CHECK(h.counts[0] == 5);
  CHECK(h.counts[1] == 5);
  CHECK(h.edges.front() == 0.0);
  CHECK(h.edges.back() == 9.0);
  const Histogram flat = histogram(Eigen::VectorXd::Constant(4, 2.0), 3);
  CHECK(flat.counts[0] == 4);
  testing::check_code([] { histogram(Eigen::VectorXd(0), 2); }, ErrorCode::EmptyValues);
}

TEST_CASE("mean and std") {
  CHECK(sample_mean(Eigen::Vector3d(1, 2, 6)) == doctest::Approx(3.0));
  CHECK(sample_std(Eigen::Vector3d(1, 2, 6)) == doctest::Approx(std::sqrt(7.0)));
  CHECK(sample_std(Eigen::VectorXd::Constant(1, 5.0)) == 0.0);
  CHECK(sample_mean(Eigen::VectorXd::Constant(7, 0.1)) == 0.1);
}

TEST_CASE("sigma zero gives the nominal response exactly") {
  Eigen::Vector3d nom(1.0, 2.0, 3.0), a(0.3, -0.7, 1.1);
  const auto space = wide_space(nom);
  MCConfig cfg;
  cfg.n_runs = 50;
  cfg.sigma_fraction = 0.0;
  const MCReport r = monte_carlo(linear_sim(a, 0.5), space, nom, cfg);
  CHECK(r.fom("y").std == 0.0);
  CHECK(r.fom("y").mean == a.dot(nom) + 0.5);
}

TEST_CASE("linear propagation matches closed form") {
  Eigen::Vector3d nom(1.0, 2.0, 3.0), a(0.3, -0.7, 1.1);
  MCConfig cfg;
  cfg.n_runs = 4000;
  cfg.seed = 3;
  const MCReport r = monte_carlo(linear_sim(a, 0.5), wide_space(nom), nom, cfg);
  const double sd = std::sqrt((a.array() * 0.1 * nom.array()).square().sum());
  CHECK(std::abs(r.fom("y").mean - (a.dot(nom) + 0.5)) <= 3.0 * sd / std::sqrt(4000.0));
  CHECK(std::abs(r.fom("y").std - sd) <= 0.05 * sd);
}

TEST_CASE("doubling sigma doubles the std of a linear response") {
  Eigen::Vector3d nom(1.0, 2.0, 3.0), a(0.3, -0.7, 1.1);
  std::vector<ParameterDef> dims;
  for (int i = 0; i < 3; ++i) dims.push_back({"p" + std::to_string(i), -100.0, 100.0, nom[i]});
  const ParameterSpace space(dims);
  MCConfig cfg;
  cfg.n_runs = 500;
  cfg.seed = 8;
  const double s1 = monte_carlo(linear_sim(a, 0.0), space, nom, cfg).fom("y").std;
  cfg.sigma_fraction = 0.2;
  const double s2 = monte_carlo(linear_sim(a, 0.0), space, nom, cfg).fom("y").std;
  CHECK(std::abs(s2 - 2.0 * s1) <= 1e-9 * s1);
}

TEST_CASE("draws are clamped and follow the seed") {
  Eigen::Vector2d nom(1.0, 1.0);
  const ParameterSpace space({{"a", 0.9, 1.1, 1.0}, {"b", 0.0, 2.0, 1.0}});
  MCConfig cfg;
  cfg.n_runs = 300;
  cfg.seed = 4;
  const Eigen::MatrixXd d = draw_perturbations(space, nom, cfg);
  CHECK(d.col(0).minCoeff() >= 0.9);
  CHECK(d.col(0).maxCoeff() <= 1.1);
  CHECK(d == draw_perturbations(space, nom, cfg));
  // run-major standard normals
  Rng rng(derive_seed(4, "mc-draws"));
  const double z0 = rng.normal(), z1 = rng.normal();
  CHECK(d(0, 1) == doctest::Approx(1.0 + 0.1 * z1));
  CHECK(d(0, 0) == doctest::Approx(std::clamp(1.0 + 0.1 * z0, 0.9, 1.1)));
}

TEST_CASE("correlated draws carry the requested correlation") {
  Eigen::Vector2d nom(1.0, 1.0);
  const ParameterSpace space({{"a", -10.0, 10.0, 1.0}, {"b", -10.0, 10.0, 1.0}});
  MCConfig cfg;
  cfg.n_runs = 5000;
  cfg.seed = 5;
  Eigen::Matrix2d c;
  c << 1.0, 0.8, 0.8, 1.0;
  cfg.correlation = c;
  const Eigen::MatrixXd d = draw_perturbations(space, nom, cfg);
  const Eigen::VectorXd a = d.col(0).array() - d.col(0).mean(), b = d.col(1).array() - d.col(1).mean();
  CHECK(a.dot(b) / (a.norm() * b.norm()) == doctest::Approx(0.8).epsilon(0.03));
}

TEST_CASE("threads do not change results") {
  Eigen::Vector3d nom(1.0, 2.0, 3.0), a(0.3, -0.7, 1.1);
  MCConfig cfg;
  cfg.n_runs = 200;
  cfg.keep_raw = true;
  const auto sim = linear_sim(a, 0.0);
  const MCReport r1 = monte_carlo(sim, wide_space(nom), nom, cfg);
  cfg.threads = 3;
  const MCReport r3 = monte_carlo(sim, wide_space(nom), nom, cfg);
  CHECK(r1.responses == r3.responses);
  CHECK(r1.fom("y").std == r3.fom("y").std);
}

TEST_CASE("monte carlo validation") {
  using testing::check_code;
  Eigen::Vector3d nom(1.0, 2.0, 3.0);
  const auto sim = linear_sim(Eigen::Vector3d::Ones(), 0.0);
  MCConfig cfg;
  cfg.n_runs = 1;
  check_code([&] { monte_carlo(sim, wide_space(nom), nom, cfg); }, ErrorCode::InvalidConfig);
  cfg.n_runs = 10;
  check_code([&] { monte_carlo(sim, wide_space(nom), Eigen::Vector3d(1, 2, 9), cfg); }, ErrorCode::OutOfBounds);
  check_code([&] { monte_carlo(sim, wide_space(nom), nom, cfg).fom("nope"); }, ErrorCode::MissingFoM);
}
