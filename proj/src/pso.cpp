#include "varopt/pso.hpp"

#include "varopt/error.hpp"
#include "varopt/parallel.hpp"
#include "varopt/sampling.hpp"

#include <cmath>

namespace varopt {

void SwarmConfig::validate() const {
  require(n_particles >= 1, ErrorCode::InvalidConfig, "n_particles must be >= 1");
  require(max_iterations >= 1, ErrorCode::InvalidConfig, "max_iterations must be >= 1");
  require(inertia >= 0.0 && cognitive >= 0.0 && social >= 0.0, ErrorCode::InvalidConfig,
          "swarm weights must be >= 0");
  require(final_mc_runs >= 2, ErrorCode::InvalidConfig, "final_mc_runs must be >= 2");
  mc.validate();
}

std::string to_string(ConstraintSense sense) { return sense == ConstraintSense::LessEqual ? "le" : "ge"; }

ConstraintSense constraint_sense_from_string(const std::string& text) {
  if (text == "le") return ConstraintSense::LessEqual;
  if (text == "ge") return ConstraintSense::GreaterEqual;
  throw Error(ErrorCode::InvalidConfig, "constraint sense must be 'le' or 'ge', got '" + text + "'");
}

void ObjectiveSpec::validate() const {
  require(!target_fom.empty(), ErrorCode::InvalidConfig, "objective needs a target FoM");
  require(std::isfinite(k_sigma), ErrorCode::InvalidConfig, "k_sigma must be finite");
  require(penalty_weight > 0.0 && std::isfinite(penalty_weight), ErrorCode::InvalidConfig,
          "penalty_weight must be > 0");
  require(std::isfinite(constraint_bound), ErrorCode::InvalidConfig, "constraint bound must be finite");
}

double constraint_violation(const MCReport& report, const ObjectiveSpec& spec) {
  if (!spec.constrained()) return 0.0;
  const double mu = report.fom(spec.constraint_fom).mean;
  const double breach =
      spec.constraint_sense == ConstraintSense::LessEqual ? mu - spec.constraint_bound : spec.constraint_bound - mu;
  if (breach <= 0.0) return 0.0;
  const double scale = std::abs(spec.constraint_bound);
  return scale > 0.0 ? breach / scale : breach;
}

double objective_eval(const MCReport& report, const ObjectiveSpec& spec) {
  const FomStats& t = report.fom(spec.target_fom);
  return t.mean + spec.k_sigma * t.std + spec.penalty_weight * constraint_violation(report, spec);
}

Particle update_particle(const Particle& p, const Eigen::Ref<const Eigen::VectorXd>& global_best,
                         const SwarmConfig& cfg, const Eigen::Ref<const Eigen::VectorXd>& tau_p,
                         const Eigen::Ref<const Eigen::VectorXd>& tau_g) {
  const Eigen::Index d = p.position.size();
  require(p.velocity.size() == d && p.local_best_pos.size() == d && global_best.size() == d && tau_p.size() == d &&
              tau_g.size() == d,
          ErrorCode::DimensionMismatch, "particle update with mismatched dimensions");
  Particle out = p;
  out.velocity = cfg.inertia * p.velocity +
                 cfg.cognitive * tau_p.cwiseProduct(p.local_best_pos - p.position) +
                 cfg.social * tau_g.cwiseProduct(global_best - p.position);
  out.position = p.position + out.velocity;
  for (Eigen::Index i = 0; i < d; ++i) {
    if (out.position[i] < 0.0 || out.position[i] > 1.0) {
      out.position[i] = std::clamp(out.position[i], 0.0, 1.0);
      out.velocity[i] = 0.0;
    }
  }
  return out;
}

Particle update_particle(const Particle& p, const Eigen::Ref<const Eigen::VectorXd>& global_best,
                         const SwarmConfig& cfg, Rng& rng) {
  const Eigen::Index d = p.position.size();
  Eigen::VectorXd tau_p(d), tau_g(d);
  for (Eigen::Index i = 0; i < d; ++i) tau_p[i] = rng.uniform();
  for (Eigen::Index i = 0; i < d; ++i) tau_g[i] = rng.uniform();
  return update_particle(p, global_best, cfg, tau_p, tau_g);
}

std::uint64_t inner_mc_seed(std::uint64_t seed, Eigen::Index iteration) {
  return derive_seed(seed, "mc", static_cast<std::uint64_t>(iteration));
}

OptimizationResult pso_optimize(const Simulator& evaluator, const ParameterSpace& space, const ObjectiveSpec& spec,
                                const SwarmConfig& cfg) {
  cfg.validate();
  spec.validate();
  require(evaluator.input_dim() == space.dim(), ErrorCode::DimensionMismatch,
          "evaluator and space disagree on dimension");
  evaluator.fom_index(spec.target_fom);
  if (spec.constrained()) evaluator.fom_index(spec.constraint_fom);

  const Eigen::Index d = space.dim();
  const auto n = static_cast<std::size_t>(cfg.n_particles);
  const Eigen::MatrixXd init = lhs_unit(cfg.n_particles, d, derive_seed(cfg.seed, "pso-init"));
  std::vector<Particle> swarm(n);
  for (std::size_t i = 0; i < n; ++i) {
    swarm[i].position = init.row(static_cast<Eigen::Index>(i)).transpose();
    swarm[i].velocity = Eigen::VectorXd::Zero(d);
    swarm[i].local_best_pos = swarm[i].position;
  }
  Rng motion(derive_seed(cfg.seed, "pso-motion"));

  OptimizationResult result;
  Eigen::VectorXd global_u;
  double global_score = std::numeric_limits<double>::infinity();
  std::vector<double> scores(n);
  // Particles inside one iteration run concurrently only when the evaluator allows it.
  const std::size_t threads = evaluator.concurrent_safe() ? cfg.threads : 1;

  for (Eigen::Index it = 0; it < cfg.max_iterations; ++it) {
    if (it > 0) {
      for (auto& p : swarm) p = update_particle(p, global_u, cfg, motion);
    }
    MCConfig mc = cfg.mc;
    mc.seed = inner_mc_seed(cfg.seed, it);
    mc.threads = 1;
    mc.keep_raw = false;
    parallel_for(n, threads, [&](std::size_t i) {
      const MCReport r = monte_carlo(evaluator, space, denormalize(space, swarm[i].position), mc);
      scores[i] = objective_eval(r, spec);
    });
    result.evaluations += cfg.n_particles;

    for (std::size_t i = 0; i < n; ++i) {
      require(std::isfinite(scores[i]), ErrorCode::NonFiniteLoss, "particle objective is not finite");
      if (scores[i] < swarm[i].local_best_score) {
        swarm[i].local_best_score = scores[i];
        swarm[i].local_best_pos = swarm[i].position;
      }
      if (scores[i] < global_score) {
        global_score = scores[i];
        global_u = swarm[i].position;
        result.best_iteration = it;
        result.best_inner_seed = mc.seed;
      }
    }
    result.trace.push_back(global_score);
    if (it == 0) {
      result.initial_best_x = denormalize(space, global_u);
      result.initial_best_score = global_score;
      result.initial_inner_seed = mc.seed;
    }
  }

  result.best_x = denormalize(space, global_u);
  result.best_score = global_score;
  result.swarm = std::move(swarm);

  MCConfig full = cfg.mc;
  full.n_runs = cfg.final_mc_runs;
  full.threads = cfg.threads;
  full.seed = result.best_inner_seed;
  result.final_report = monte_carlo(evaluator, space, result.best_x, full);
  result.final_score = objective_eval(result.final_report, spec);
  result.feasible = constraint_violation(result.final_report, spec) == 0.0;
  full.seed = result.initial_inner_seed;
  result.initial_report = monte_carlo(evaluator, space, result.initial_best_x, full);
  result.initial_final_score = objective_eval(result.initial_report, spec);

  if (spec.constrained()) {
    MCConfig inner = cfg.mc;
    inner.seed = result.best_inner_seed;
    if (constraint_violation(monte_carlo(evaluator, space, result.best_x, inner), spec) > 0.0) {
      result.warnings.push_back("NoFeasibleParticle: every evaluated position violated the '" + spec.constraint_fom +
                                "' constraint; returning the best penalized score");
    } else if (!result.feasible) {
      result.warnings.push_back("final Monte Carlo at the best point violates the '" + spec.constraint_fom +
                                "' constraint");
    }
  }
  return result;
}

OptimizationResult pso_optimize(const MetamodelBundle& bundle, const ObjectiveSpec& spec, const SwarmConfig& cfg) {
  const BundleEvaluator evaluator(bundle);
  return pso_optimize(evaluator, bundle.space, spec, cfg);
}

Json optimization_result_to_json(const OptimizationResult& result, const ParameterSpace& space,
                                 const ObjectiveSpec& spec, const SwarmConfig& cfg) {
  auto point = [&](const Eigen::VectorXd& x) {
    Json out = Json::object();
    for (Eigen::Index i = 0; i < space.dim(); ++i) out[space[i].name] = x[i];
    return out;
  };
  Json objective = {{"target_fom", spec.target_fom}, {"k_sigma", spec.k_sigma}, {"penalty_weight", spec.penalty_weight}};
  if (spec.constrained()) {
    objective["constraint"] = {{"fom", spec.constraint_fom},
                               {"bound", spec.constraint_bound},
                               {"sense", to_string(spec.constraint_sense)}};
  }
  return {{"format_version", kFormatVersion},
          {"kind", "optimization_result"},
          {"objective", objective},
          {"swarm",
           {{"n_particles", cfg.n_particles},
            {"max_iterations", cfg.max_iterations},
            {"inertia", cfg.inertia},
            {"cognitive", cfg.cognitive},
            {"social", cfg.social},
            {"inner_mc_runs", cfg.mc.n_runs},
            {"final_mc_runs", cfg.final_mc_runs},
            {"sigma_fraction", cfg.mc.sigma_fraction},
            {"seed", cfg.seed}}},
          {"best",
           {{"x", point(result.best_x)},
            {"score", result.best_score},
            {"iteration", result.best_iteration},
            {"inner_seed", result.best_inner_seed},
            {"final_score", result.final_score},
            {"feasible", result.feasible},
            {"report", mc_report_to_json(result.final_report, space)}}},
          {"initial",
           {{"x", point(result.initial_best_x)},
            {"score", result.initial_best_score},
            {"inner_seed", result.initial_inner_seed},
            {"final_score", result.initial_final_score},
            {"report", mc_report_to_json(result.initial_report, space)}}},
          {"trace", result.trace},
          {"evaluations", result.evaluations},
          {"warnings", result.warnings}};
}

}  // namespace varopt
