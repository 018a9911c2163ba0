#pragma once

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "cslearn/lagrangian.hpp"
#include "cslearn/model.hpp"
#include "cslearn/types.hpp"

namespace cslearn {

enum class TrainMode { DualAscent, Regularized, Unconstrained };

struct TrainConfig {
  std::size_t epochs = 300;
  std::size_t inner_steps = 20;
  double primal_lr = 0.1;
  double dual_lr = 0.05;
  /// 0 means full batch.
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  /// Empty means zeros.
  std::vector<double> lambda_init;
  TrainMode mode = TrainMode::DualAscent;
  /// Fixed constraint weights, Regularized mode only.
  std::vector<double> weights;
  /// Optional per-epoch (accuracy, fairness) probe on a held-out set.
  std::function<std::pair<double, double>(const Parameterization&)> epoch_metrics;

  void validate(std::size_t num_constraints) const;
};

struct EpochRecord {
  std::size_t epoch = 0;
  double objective = 0.0;
  std::vector<double> slacks;
  std::vector<double> lambdas;
  std::optional<double> accuracy;
  std::optional<double> fairness;
};

struct TrainingLog {
  std::vector<EpochRecord> records;
};

/// CSV schema: epoch, objective, slack_0.., lambda_0.., acc, fair
/// (metric cells blank when no eval probe ran). 12 significant digits.
void write_training_log_csv(const TrainingLog& log, const std::string& path);
std::string training_log_to_csv(const TrainingLog& log);

struct TrainResult {
  Parameterization model;
  DualState duals;
  TrainingLog log;
};

/// Saddle-point solver: per epoch, inner_steps of projected gradient descent
/// on L_N(theta, lambda), then a projected dual ascent step on the
/// full-batch slacks. Deterministic given the seed. Aborts with a
/// diagnostic naming epoch and step if a loss or gradient goes non-finite.
TrainResult train_dual(const ConstrainedProblem& problem, Parameterization model,
                       const Dataset& data, const TrainConfig& config);

/// Weighted-penalty baseline: gradient descent on
/// mean[l0 + sum_i w_i * l_i]; slacks are still logged for comparison and
/// the fixed weights occupy the lambda columns.
TrainResult train_regularized(const ConstrainedProblem& problem, Parameterization model,
                              const Dataset& data, const TrainConfig& config);

/// Objective-only training (no constraints, no duals).
TrainResult train_unconstrained(const LossSpec& objective, Parameterization model,
                                const Dataset& data, const TrainConfig& config);

}  // namespace cslearn
