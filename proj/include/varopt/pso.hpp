#pragma once

#include "varopt/json_io.hpp"
#include "varopt/parameter_space.hpp"
#include "varopt/pipeline.hpp"
#include "varopt/rng.hpp"
#include "varopt/simulator.hpp"
#include "varopt/statistics.hpp"

#include <Eigen/Dense>

#include <cstdint>
#include <limits>
#include <string>
#include <vector>

namespace varopt {

/// Positions live in normalized coordinates.
struct Particle {
  Eigen::VectorXd position;
  Eigen::VectorXd velocity;
  Eigen::VectorXd local_best_pos;
  double local_best_score = std::numeric_limits<double>::infinity();
};

struct SwarmConfig {
  Eigen::Index n_particles = 30;
  Eigen::Index max_iterations = 100;
  double inertia = 0.729;
  double cognitive = 1.494;  // rho_p
  double social = 1.494;     // rho_g
  MCConfig mc = [] {
    MCConfig c;
    c.n_runs = 200;
    return c;
  }();                              // inner MC; its seed is replaced per iteration
  Eigen::Index final_mc_runs = 1000;
  std::uint64_t seed = 0;
  std::size_t threads = 1;

  void validate() const;
};

enum class ConstraintSense { LessEqual, GreaterEqual };
std::string to_string(ConstraintSense sense);
ConstraintSense constraint_sense_from_string(const std::string& text);  // "le" / "ge"

struct ObjectiveSpec {
  std::string target_fom = "power";
  double k_sigma = 3.0;
  std::string constraint_fom;  // empty: unconstrained
  double constraint_bound = 0.0;
  ConstraintSense constraint_sense = ConstraintSense::LessEqual;
  double penalty_weight = 1.0;

  bool constrained() const { return !constraint_fom.empty(); }
  void validate() const;
};

/// Breach of the constraint mean relative to |bound| (raw breach when the bound is 0); 0 when met.
double constraint_violation(const MCReport& report, const ObjectiveSpec& spec);

/// mu + k sigma of the target plus penalty_weight * violation.
double objective_eval(const MCReport& report, const ObjectiveSpec& spec);

/// One velocity/position step with tau_p, tau_g drawn uniform per dimension
/// (all tau_p first, then all tau_g).
Particle update_particle(const Particle& p, const Eigen::Ref<const Eigen::VectorXd>& global_best,
                         const SwarmConfig& cfg, Rng& rng);

/// Same step with the random factors supplied.
Particle update_particle(const Particle& p, const Eigen::Ref<const Eigen::VectorXd>& global_best,
                         const SwarmConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& tau_p,
                         const Eigen::Ref<const Eigen::VectorXd>& tau_g);

struct OptimizationResult {
  Eigen::VectorXd best_x;          // native units
  double best_score = 0.0;         // inner-MC score at best_x
  Eigen::Index best_iteration = 0;
  std::uint64_t best_inner_seed = 0;
  std::vector<double> trace;       // global best score after each iteration
  MCReport final_report;           // final_mc_runs at best_x, seeded with best_inner_seed
  double final_score = 0.0;
  bool feasible = true;            // constraint met in final_report

  Eigen::VectorXd initial_best_x;  // best of the initial swarm
  double initial_best_score = 0.0;
  std::uint64_t initial_inner_seed = 0;
  MCReport initial_report;         // final_mc_runs at initial_best_x, seeded with its inner seed
  double initial_final_score = 0.0;

  std::vector<Particle> swarm;     // state after the last iteration
  Eigen::Index evaluations = 0;
  std::vector<std::string> warnings;
};

/// Inner-MC seed shared by every particle evaluation of one iteration.
std::uint64_t inner_mc_seed(std::uint64_t seed, Eigen::Index iteration);

OptimizationResult pso_optimize(const Simulator& evaluator, const ParameterSpace& space, const ObjectiveSpec& spec,
                                const SwarmConfig& cfg);
OptimizationResult pso_optimize(const MetamodelBundle& bundle, const ObjectiveSpec& spec, const SwarmConfig& cfg);

Json optimization_result_to_json(const OptimizationResult& result, const ParameterSpace& space,
                                 const ObjectiveSpec& spec, const SwarmConfig& cfg);

}  // namespace varopt
