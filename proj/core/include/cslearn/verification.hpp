#pragma once

#include <cstdint>
#include <string>
#include <utility>
#include <vector>

#include "cslearn/lagrangian.hpp"
#include "cslearn/model.hpp"
#include "cslearn/optimizer.hpp"
#include "cslearn/types.hpp"

namespace cslearn {

struct KKTTolerances {
  double feasibility = 1e-3;
  double comp_slack = 1e-4;
  double stationarity = 1e-3;
};

struct KKTReport {
  /// max(slack_i, 0) per constraint.
  std::vector<double> feasibility_residuals;
  /// |lambda_i * slack_i| per constraint.
  std::vector<double> comp_slack_residuals;
  /// Norm of the Lagrangian theta-gradient (projected-gradient norm when the
  /// admissible set is bounded).
  double stationarity_residual = 0.0;
  bool feasibility_pass = false;
  bool comp_slack_pass = false;
  bool stationarity_pass = false;

  double max_feasibility() const;
  double sum_comp_slack() const;
  bool pass() const { return feasibility_pass && comp_slack_pass && stationarity_pass; }
};

KKTReport kkt_report(const ConstrainedProblem& problem, const Parameterization& model,
                     const DualState& duals, const Dataset& data,
                     const KKTTolerances& tolerances = {});

/// Backtracking-descent budget shared by the oracle paths.
struct InnerSolveOptions {
  std::size_t max_iters = 20000;
  double grad_tol = 1e-10;
};

/// d_N(lambda) = min_theta L_N(theta, lambda), evaluated by projected
/// backtracking gradient descent from the given starting point.
/// Returns the minimum value and leaves the minimizer in `model`.
double evaluate_dual_function(const ConstrainedProblem& problem, Parameterization& model,
                              const DualState& duals, const Dataset& data,
                              const InnerSolveOptions& options = {});

struct PrimalSolveResult {
  Parameterization model;
  double value = 0.0;
  /// Multiplier estimates recovered by the augmented-Lagrangian iteration.
  std::vector<double> multipliers;
  std::size_t penalty_rounds = 0;
};

/// Direct solver for the empirical constrained primal on convex instances:
/// augmented-Lagrangian outer loop (penalty doubling on stalled
/// infeasibility) around inner backtracking descent. The independent oracle
/// for train_dual. Throws std::runtime_error if the iteration cannot reach
/// max slack <= tol within max_penalty_rounds.
PrimalSolveResult solve_primal_projected(const ConstrainedProblem& problem,
                                         Parameterization init, const Dataset& data,
                                         double tol = 1e-8,
                                         std::size_t max_penalty_rounds = 50);

struct DualityGapOptions {
  TrainConfig dual_config;  // defaults overridden in the constructor below
  InnerSolveOptions inner;

  DualityGapOptions();
};

struct DualityGapResult {
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;  // primal - dual
  DualState duals;
  std::vector<double> final_slacks;
};

/// Runs both routes on one instance: the augmented-Lagrangian primal oracle
/// and train_dual followed by an exact d_N evaluation at the trained duals.
DualityGapResult duality_gap_convex(const ConstrainedProblem& problem, const Dataset& data,
                                    const Parameterization& init,
                                    const DualityGapOptions& options = {});

struct ConcavityCheck {
  DualState lambda_a;
  DualState lambda_b;
  /// max(0, (d(a)+d(b))/2 - d(mid)).
  double violation = 0.0;
};

struct ConcavityProbeResult {
  std::vector<ConcavityCheck> checks;
  double max_violation = 0.0;
  std::size_t violations_beyond(double tol) const;
};

/// Samples d_N at lambda pairs and their midpoints (inner minimization with
/// a shared starting seed) and reports midpoint-concavity violations.
ConcavityProbeResult concavity_probe(const ConstrainedProblem& problem, const Dataset& data,
                                     const ModelConfig& model_config,
                                     const std::vector<std::pair<DualState, DualState>>& pairs,
                                     std::size_t inner_budget, std::uint64_t seed);

/// Seeded random convex instance: Linear model, squared-error objective,
/// one or two convex constraints (linear or quadratic in the prediction)
/// with thresholds placed so a strictly feasible point exists by
/// construction.
struct ConvexInstance {
  ConstrainedProblem problem;
  Dataset data;
  ModelConfig model_config;
  std::uint64_t seed = 0;
};

ConvexInstance make_convex_instance(std::uint64_t seed);

/// The 1-D closed-form instance: minimize mean (theta - y)^2 over labels
/// {0, 1} subject to theta <= 0.25; optimum theta = 0.25, value 0.3125.
ConvexInstance make_clipped_least_squares_instance();

/// One machine-readable verification line:
/// `check_name,instance_id,residual,tolerance,PASS|FAIL`.
struct CheckLine {
  std::string check;
  std::string instance;
  double residual = 0.0;
  double tolerance = 0.0;
  bool pass = false;

  std::string to_string() const;
};

struct ConvexSuiteOptions {
  std::size_t num_instances = 20;
  std::uint64_t base_seed = 1;
  double gap_tol = 1e-3;
  double weak_duality_tol = 1e-6;
  KKTTolerances kkt;
  std::size_t concavity_pairs = 10;
  double concavity_tol = 1e-4;
};

/// Runs the full convex verification sweep (duality gap, weak duality, KKT
/// residuals, closed-form instance, concavity probe) and returns one line
/// per check.
std::vector<CheckLine> run_convex_suite(const ConvexSuiteOptions& options = {});

}  // namespace cslearn
