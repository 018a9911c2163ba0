#include "cslearn/optimizer.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cslearn {

void TrainConfig::validate(std::size_t num_constraints) const {
  if (epochs == 0) throw std::invalid_argument("TrainConfig: epochs must be positive");
  if (inner_steps == 0) throw std::invalid_argument("TrainConfig: inner_steps must be positive");
  if (!(primal_lr > 0.0)) throw std::invalid_argument("TrainConfig: primal_lr must be positive");
  if (!(dual_lr > 0.0)) throw std::invalid_argument("TrainConfig: dual_lr must be positive");
  if (!lambda_init.empty() && lambda_init.size() != num_constraints) {
    throw std::invalid_argument("TrainConfig: lambda_init length mismatch");
  }
  for (double v : lambda_init) {
    if (v < 0.0) throw std::invalid_argument("TrainConfig: lambda_init must be nonnegative");
  }
  if (mode == TrainMode::Regularized) {
    if (weights.size() != num_constraints) {
      throw std::invalid_argument("TrainConfig: Regularized mode needs one weight per constraint");
    }
    for (double w : weights) {
      if (w < 0.0) throw std::invalid_argument("TrainConfig: weights must be nonnegative");
    }
  }
}

namespace {

void check_finite_gradient(const std::vector<double>& grad, std::size_t epoch,
                           std::size_t step) {
  for (double g : grad) {
    if (!std::isfinite(g)) {
      throw std::runtime_error("train: non-finite gradient at epoch " + std::to_string(epoch) +
                               ", step " + std::to_string(step));
    }
  }
}

void check_finite_stats(const EmpiricalStats& stats, std::size_t epoch) {
  bool ok = std::isfinite(stats.objective);
  for (double s : stats.slacks) ok = ok && std::isfinite(s);
  if (!ok) {
    throw std::runtime_error("train: non-finite loss at epoch " + std::to_string(epoch));
  }
}

TrainResult run_training(const ConstrainedProblem& problem, Parameterization model,
                         const Dataset& data, const TrainConfig& config) {
  problem.validate();
  const std::size_t m = problem.num_constraints();
  config.validate(m);

  DualState duals = DualState::zeros(m);
  if (config.mode == TrainMode::DualAscent && !config.lambda_init.empty()) {
    duals.lambdas = config.lambda_init;
  } else if (config.mode == TrainMode::Regularized) {
    duals.lambdas = config.weights;  // fixed multipliers, never updated
  }

  const std::size_t n = data.size();
  const std::size_t batch =
      (config.batch_size == 0 || config.batch_size >= n) ? n : config.batch_size;
  const std::size_t num_batches = (n + batch - 1) / batch;

  std::mt19937_64 rng(config.seed);
  std::vector<std::size_t> indices(n);
  std::iota(indices.begin(), indices.end(), std::size_t{0});

  TrainingLog log;
  log.records.reserve(config.epochs);

  for (std::size_t epoch = 0; epoch < config.epochs; ++epoch) {
    if (batch < n) std::shuffle(indices.begin(), indices.end(), rng);
    for (std::size_t step = 0; step < config.inner_steps; ++step) {
      std::span<const std::size_t> slice(indices);
      if (batch < n) {
        const std::size_t start = (step % num_batches) * batch;
        slice = slice.subspan(start, std::min(batch, n - start));
      }
      std::vector<double> grad;
      try {
        grad = lagrangian_gradient_theta(problem, model, duals, data, slice);
      } catch (const std::domain_error& e) {
        throw std::runtime_error("train: " + std::string(e.what()) + " at epoch " +
                                 std::to_string(epoch) + ", step " + std::to_string(step));
      }
      check_finite_gradient(grad, epoch, step);
      model.axpy(-config.primal_lr, grad);
      project_params_inplace(model);
    }

    // Dual updates always use the exact full-batch slack.
    EmpiricalStats stats;
    try {
      stats = empirical_stats(problem, model, data);
    } catch (const std::domain_error& e) {
      throw std::runtime_error("train: " + std::string(e.what()) + " at epoch " +
                               std::to_string(epoch) + ", step " +
                               std::to_string(config.inner_steps));
    }
    check_finite_stats(stats, epoch);
    if (config.mode == TrainMode::DualAscent) {
      for (std::size_t k = 0; k < m; ++k) {
        duals.lambdas[k] = std::max(0.0, duals.lambdas[k] + config.dual_lr * stats.slacks[k]);
      }
    }

    EpochRecord record;
    record.epoch = epoch;
    record.objective = stats.objective;
    record.slacks = stats.slacks;
    record.lambdas = duals.lambdas;
    if (config.epoch_metrics) {
      const auto [accuracy, fairness] = config.epoch_metrics(model);
      record.accuracy = accuracy;
      record.fairness = fairness;
    }
    log.records.push_back(std::move(record));
  }

  return {std::move(model), std::move(duals), std::move(log)};
}

std::string format_g12(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

}  // namespace

TrainResult train_dual(const ConstrainedProblem& problem, Parameterization model,
                       const Dataset& data, const TrainConfig& config) {
  if (config.mode != TrainMode::DualAscent) {
    throw std::invalid_argument("train_dual: config.mode must be DualAscent");
  }
  return run_training(problem, std::move(model), data, config);
}

TrainResult train_regularized(const ConstrainedProblem& problem, Parameterization model,
                              const Dataset& data, const TrainConfig& config) {
  if (config.mode != TrainMode::Regularized) {
    throw std::invalid_argument("train_regularized: config.mode must be Regularized");
  }
  return run_training(problem, std::move(model), data, config);
}

TrainResult train_unconstrained(const LossSpec& objective, Parameterization model,
                                const Dataset& data, const TrainConfig& config) {
  if (config.mode != TrainMode::Unconstrained) {
    throw std::invalid_argument("train_unconstrained: config.mode must be Unconstrained");
  }
  ConstrainedProblem problem;
  problem.objective = objective;
  return run_training(problem, std::move(model), data, config);
}

std::string training_log_to_csv(const TrainingLog& log) {
  std::string out;
  const std::size_t m = log.records.empty() ? 0 : log.records.front().slacks.size();
  out += "epoch,objective";
  for (std::size_t k = 0; k < m; ++k) out += ",slack_" + std::to_string(k);
  for (std::size_t k = 0; k < m; ++k) out += ",lambda_" + std::to_string(k);
  out += ",acc,fair\n";
  for (const EpochRecord& r : log.records) {
    out += std::to_string(r.epoch);
    out += ",";
    out += format_g12(r.objective);
    for (double s : r.slacks) {
      out += ",";
      out += format_g12(s);
    }
    for (double l : r.lambdas) {
      out += ",";
      out += format_g12(l);
    }
    out += ",";
    if (r.accuracy) out += format_g12(*r.accuracy);
    out += ",";
    if (r.fairness) out += format_g12(*r.fairness);
    out += "\n";
  }
  return out;
}

void write_training_log_csv(const TrainingLog& log, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write training log: " + path);
  out << training_log_to_csv(log);
}

}  // namespace cslearn
