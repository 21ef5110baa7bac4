#pragma once

#include "varopt/error.hpp"
#include "varopt/parameter_space.hpp"
#include "varopt/rng.hpp"

#include <doctest.h>

#include <Eigen/Dense>

#include <cmath>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>

namespace testing {

// Runs `fn` and checks it throws varopt::Error with the given code.
template <typename Fn>
void check_code(Fn&& fn, varopt::ErrorCode code) {
  bool thrown = false;
  try {
    fn();
  } catch (const varopt::Error& e) {
    thrown = true;
    CHECK_MESSAGE(e.code() == code, "got " << varopt::to_string(e.code()) << ": " << e.what());
  }
  CHECK_MESSAGE(thrown, "expected " << varopt::to_string(code));
}

inline double rel_err(double a, double b) { return std::abs(a - b) / std::max({std::abs(a), std::abs(b), 1e-300}); }

inline varopt::ParameterSpace unit_space(Eigen::Index d, double lo = 0.0, double hi = 1.0) {
  std::vector<varopt::ParameterDef> dims;
  for (Eigen::Index i = 0; i < d; ++i) dims.push_back({"x" + std::to_string(i), lo, hi, 0.5 * (lo + hi)});
  return varopt::ParameterSpace(dims);
}

inline Eigen::MatrixXd random_unit(Eigen::Index n, Eigen::Index d, std::uint64_t seed) {
  varopt::Rng rng(seed);
  Eigen::MatrixXd m(n, d);
  for (Eigen::Index i = 0; i < n; ++i)
    for (Eigen::Index j = 0; j < d; ++j) m(i, j) = rng.uniform();
  return m;
}

inline std::string slurp(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream os;
  os << in.rdbuf();
  return os.str();
}

// Fresh scratch directory under the system temp dir.
inline std::filesystem::path scratch(const std::string& name) {
  auto dir = std::filesystem::temp_directory_path() / ("varopt_test_" + name);
  std::filesystem::remove_all(dir);
  std::filesystem::create_directories(dir);
  return dir;
}

}  // namespace testing
