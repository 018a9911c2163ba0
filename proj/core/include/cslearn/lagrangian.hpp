#pragma once

#include <span>
#include <vector>

#include "cslearn/model.hpp"
#include "cslearn/types.hpp"

namespace cslearn {

/// Empirical objective and constraint means over a dataset.
/// slacks[i] = constraint_values[i] - threshold_i.
struct EmpiricalStats {
  double objective = 0.0;
  std::vector<double> constraint_values;
  std::vector<double> slacks;
};

/// Index-ascending empirical means of the objective and every constraint
/// loss (BernoulliKL constraints via the counterfactual pair).
EmpiricalStats empirical_stats(const ConstrainedProblem& problem,
                               const Parameterization& model, const Dataset& data);

/// L_N(theta, lambda) = objective_mean + sum_i lambda_i * slack_i.
/// Affine in lambda at fixed theta.
double empirical_lagrangian(const ConstrainedProblem& problem, const Parameterization& model,
                            const DualState& duals, const Dataset& data);

/// Gradient of L_N with respect to theta over the full dataset (or a batch),
/// averaged over the samples visited. Paired BernoulliKL constraints
/// contribute through both counterfactual forward passes.
std::vector<double> lagrangian_gradient_theta(const ConstrainedProblem& problem,
                                              const Parameterization& model,
                                              const DualState& duals, const Dataset& data);
std::vector<double> lagrangian_gradient_theta(const ConstrainedProblem& problem,
                                              const Parameterization& model,
                                              const DualState& duals, const Dataset& data,
                                              std::span<const std::size_t> batch);

/// Mean over samples of KL(f(x | slot:=a) || f(x | slot:=b)) for a
/// BernoulliKL constraint. Requires the dataset's protected slot;
/// throws std::invalid_argument when it is missing.
double paired_constraint_stats(const Parameterization& model, const Dataset& data,
                               const ConstraintSpec& constraint);

}  // namespace cslearn
