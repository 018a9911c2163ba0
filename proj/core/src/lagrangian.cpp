#include "cslearn/lagrangian.hpp"

#include <cmath>
#include <numeric>
#include <stdexcept>

#include "cslearn/loss.hpp"

namespace cslearn {

namespace {

bool is_paired(const ConstraintSpec& constraint) {
  return constraint.loss.kind == LossKind::BernoulliKL;
}

std::size_t require_protected_slot(const Dataset& data) {
  if (!data.protected_slot()) {
    throw std::invalid_argument(
        "BernoulliKL constraint requires a dataset with a protected feature slot");
  }
  return *data.protected_slot();
}

void check_dims(const Parameterization& model, const Dataset& data) {
  if (model.config().input_dim != data.dimension()) {
    throw std::invalid_argument("model input_dim " +
                                std::to_string(model.config().input_dim) +
                                " does not match dataset dimension " +
                                std::to_string(data.dimension()));
  }
}

void check_duals(const DualState& duals, std::size_t m, const char* where) {
  if (duals.size() != m) {
    throw std::invalid_argument(std::string(where) + ": expected " + std::to_string(m) +
                                " dual variables, got " + std::to_string(duals.size()));
  }
}

// Counterfactual predictions for one sample: the protected slot overwritten
// by the constraint's group encodings.
struct PairedPass {
  double pred_a = 0.0;
  double pred_b = 0.0;
};

PairedPass paired_forward(const Parameterization& model, const Sample& sample,
                          std::size_t slot, const ConstraintSpec& constraint,
                          std::vector<double>& scratch, ForwardTrace& trace_a,
                          ForwardTrace& trace_b) {
  scratch.assign(sample.features.begin(), sample.features.end());
  PairedPass pass;
  scratch[slot] = constraint.group_a_value;
  pass.pred_a = forward(model, scratch, trace_a);
  scratch[slot] = constraint.group_b_value;
  pass.pred_b = forward(model, scratch, trace_b);
  return pass;
}

}  // namespace

EmpiricalStats empirical_stats(const ConstrainedProblem& problem, const Parameterization& model,
                               const Dataset& data) {
  check_dims(model, data);
  const std::size_t m = problem.num_constraints();
  const std::size_t n = data.size();

  EmpiricalStats stats;
  stats.constraint_values.assign(m, 0.0);
  stats.slacks.assign(m, 0.0);

  ForwardTrace trace, trace_a, trace_b;
  std::vector<double> scratch;
  double objective_sum = 0.0;
  std::vector<double> constraint_sums(m, 0.0);

  for (std::size_t i = 0; i < n; ++i) {
    const Sample& sample = data[i];
    const double prediction = forward(model, sample.features, trace);
    objective_sum += eval_loss(problem.objective, prediction, sample.label);
    for (std::size_t k = 0; k < m; ++k) {
      const ConstraintSpec& constraint = problem.constraints[k];
      if (is_paired(constraint)) {
        const std::size_t slot = require_protected_slot(data);
        const PairedPass pass =
            paired_forward(model, sample, slot, constraint, scratch, trace_a, trace_b);
        constraint_sums[k] +=
            kl_bernoulli(pass.pred_a, pass.pred_b, constraint.loss.log_clamp);
      } else {
        constraint_sums[k] += eval_loss(constraint.loss, prediction, sample.label);
      }
    }
  }

  const double inv_n = 1.0 / static_cast<double>(n);
  stats.objective = objective_sum * inv_n;
  for (std::size_t k = 0; k < m; ++k) {
    stats.constraint_values[k] = constraint_sums[k] * inv_n;
    stats.slacks[k] = stats.constraint_values[k] - problem.constraints[k].threshold;
  }
  return stats;
}

double empirical_lagrangian(const ConstrainedProblem& problem, const Parameterization& model,
                            const DualState& duals, const Dataset& data) {
  check_duals(duals, problem.num_constraints(), "empirical_lagrangian");
  const EmpiricalStats stats = empirical_stats(problem, model, data);
  double value = stats.objective;
  for (std::size_t k = 0; k < stats.slacks.size(); ++k) {
    value += duals.lambdas[k] * stats.slacks[k];
  }
  return value;
}

std::vector<double> lagrangian_gradient_theta(const ConstrainedProblem& problem,
                                              const Parameterization& model,
                                              const DualState& duals, const Dataset& data) {
  std::vector<std::size_t> all(data.size());
  std::iota(all.begin(), all.end(), std::size_t{0});
  return lagrangian_gradient_theta(problem, model, duals, data, all);
}

std::vector<double> lagrangian_gradient_theta(const ConstrainedProblem& problem,
                                              const Parameterization& model,
                                              const DualState& duals, const Dataset& data,
                                              std::span<const std::size_t> batch) {
  check_dims(model, data);
  check_duals(duals, problem.num_constraints(), "lagrangian_gradient_theta");
  if (batch.empty()) {
    throw std::invalid_argument("lagrangian_gradient_theta: empty batch");
  }
  const std::size_t m = problem.num_constraints();

  std::vector<double> grad(model.param_count(), 0.0);
  ForwardTrace trace, trace_a, trace_b;
  std::vector<double> scratch;

  for (std::size_t idx : batch) {
    if (idx >= data.size()) {
      throw std::invalid_argument("lagrangian_gradient_theta: batch index out of range");
    }
    const Sample& sample = data[idx];
    const double prediction = forward(model, sample.features, trace);
    double upstream = eval_loss_gradient(problem.objective, prediction, sample.label);
    for (std::size_t k = 0; k < m; ++k) {
      const ConstraintSpec& constraint = problem.constraints[k];
      const double lambda = duals.lambdas[k];
      if (lambda == 0.0) continue;
      if (is_paired(constraint)) {
        const std::size_t slot = require_protected_slot(data);
        const PairedPass pass =
            paired_forward(model, sample, slot, constraint, scratch, trace_a, trace_b);
        const double clamp = constraint.loss.log_clamp;
        backward_accumulate(model, trace_a,
                            lambda * kl_bernoulli_dp(pass.pred_a, pass.pred_b, clamp), grad);
        backward_accumulate(model, trace_b,
                            lambda * kl_bernoulli_dq(pass.pred_a, pass.pred_b, clamp), grad);
      } else {
        upstream += lambda * eval_loss_gradient(constraint.loss, prediction, sample.label);
      }
    }
    backward_accumulate(model, trace, upstream, grad);
  }

  const double inv_n = 1.0 / static_cast<double>(batch.size());
  for (double& g : grad) g *= inv_n;
  return grad;
}

double paired_constraint_stats(const Parameterization& model, const Dataset& data,
                               const ConstraintSpec& constraint) {
  check_dims(model, data);
  if (!is_paired(constraint)) {
    throw std::invalid_argument("paired_constraint_stats: constraint loss must be BernoulliKL");
  }
  const std::size_t slot = require_protected_slot(data);
  ForwardTrace trace_a, trace_b;
  std::vector<double> scratch;
  double sum = 0.0;
  for (const Sample& sample : data.samples()) {
    const PairedPass pass =
        paired_forward(model, sample, slot, constraint, scratch, trace_a, trace_b);
    sum += kl_bernoulli(pass.pred_a, pass.pred_b, constraint.loss.log_clamp);
  }
  return sum / static_cast<double>(data.size());
}

}  // namespace cslearn
