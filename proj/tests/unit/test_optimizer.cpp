#include <doctest.h>

#include <cmath>
#include <string>

#include "cslearn/optimizer.hpp"
#include "test_util.hpp"

using namespace cslearn;

namespace {

Sample make_sample(std::vector<double> x, double y) {
  Sample s;
  s.features = std::move(x);
  s.label = y;
  return s;
}

Dataset quadratic_data() {
  return Dataset({make_sample({1.0}, 1.0), make_sample({2.0}, 0.0)}, 1);
}

ConstrainedProblem squared_problem() {
  ConstrainedProblem problem;
  problem.objective = LossSpec::squared_error();
  return problem;
}

LossSpec identity_loss() {
  return LossSpec::custom([](double v, double) { return v; },
                          [](double, double) { return 1.0; }, 10.0, 1.0);
}

}  // namespace

TEST_CASE("config validation") {
  TrainConfig config;
  config.primal_lr = 0.0;
  CHECK_THROWS_AS(config.validate(0), std::invalid_argument);
  config = TrainConfig{};
  config.mode = TrainMode::Regularized;
  CHECK_THROWS_AS(config.validate(1), std::invalid_argument);  // missing weights
  config.weights = {-0.5};
  CHECK_THROWS_AS(config.validate(1), std::invalid_argument);
  config.weights = {0.5};
  CHECK_NOTHROW(config.validate(1));
  config = TrainConfig{};
  config.lambda_init = {-1.0};
  CHECK_THROWS_AS(config.validate(1), std::invalid_argument);
}

TEST_CASE("hand-computed single gradient step") {
  // theta0 = 0, samples (x=1,y=1), (x=2,y=0); grad = -1; theta1 = 0.1.
  const Dataset data = quadratic_data();
  Parameterization model(ModelConfig::linear(1, false));
  TrainConfig config;
  config.mode = TrainMode::Unconstrained;
  config.epochs = 1;
  config.inner_steps = 1;
  config.primal_lr = 0.1;
  const TrainResult result =
      train_unconstrained(LossSpec::squared_error(), model, data, config);
  CHECK(result.model.params()[0] == doctest::Approx(0.1).epsilon(1e-15));
  CHECK(result.log.records.size() == 1);
  CHECK(result.log.records[0].objective == doctest::Approx(0.425).epsilon(1e-12));
}

TEST_CASE("hand-computed single regularized step") {
  // Same 2-sample linear problem with one identity-loss constraint at
  // weight 0.5: grad = -1 + 0.5 * mean(x) = -0.25; theta1 = 0.025.
  const Dataset data = quadratic_data();
  Parameterization model(ModelConfig::linear(1, false));
  ConstrainedProblem problem = squared_problem();
  ConstraintSpec c;
  c.loss = identity_loss();
  c.threshold = 0.0;
  c.name = "mean_pred";
  problem.constraints.push_back(c);
  TrainConfig config;
  config.mode = TrainMode::Regularized;
  config.weights = {0.5};
  config.epochs = 1;
  config.inner_steps = 1;
  config.primal_lr = 0.1;
  const TrainResult result = train_regularized(problem, model, data, config);
  CHECK(result.model.params()[0] == doctest::Approx(0.025).epsilon(1e-15));
  // Post-step full-batch stats: objective ((0.025-1)^2 + 0.05^2)/2.
  CHECK(result.log.records[0].objective == doctest::Approx(0.4765625).epsilon(1e-12));
  CHECK(result.log.records[0].slacks[0] == doctest::Approx(0.0375).epsilon(1e-12));
}

TEST_CASE("stationary point stays put") {
  // Perfect fit: theta = 1 reproduces labels exactly; gradient is zero.
  const Dataset data({make_sample({1.0}, 1.0), make_sample({-0.5}, -0.5)}, 1);
  Parameterization model(ModelConfig::linear(1, false), {1.0});
  TrainConfig config;
  config.mode = TrainMode::Unconstrained;
  config.epochs = 5;
  config.inner_steps = 10;
  const TrainResult result =
      train_unconstrained(LossSpec::squared_error(), model, data, config);
  CHECK(result.model.params()[0] == 1.0);
  CHECK(result.log.records.back().objective == 0.0);
}

TEST_CASE("loss decreases on a convex quadratic for small steps") {
  const Dataset data = quadratic_data();
  Parameterization model(ModelConfig::linear(1, false), {-2.0});
  TrainConfig config;
  config.mode = TrainMode::Unconstrained;
  config.epochs = 10;
  config.inner_steps = 2;
  config.primal_lr = 0.02;
  const TrainResult result =
      train_unconstrained(LossSpec::squared_error(), model, data, config);
  for (std::size_t i = 1; i < result.log.records.size(); ++i) {
    CHECK(result.log.records[i].objective < result.log.records[i - 1].objective);
  }
}

TEST_CASE("m = 0 dual ascent matches unconstrained bit for bit") {
  const Dataset data = quadratic_data();
  const Parameterization init = init_params(ModelConfig::linear(1, true), 9);
  TrainConfig dual_config;
  dual_config.mode = TrainMode::DualAscent;
  dual_config.epochs = 20;
  dual_config.inner_steps = 3;
  dual_config.seed = 9;
  TrainConfig flat_config = dual_config;
  flat_config.mode = TrainMode::Unconstrained;

  const TrainResult a = train_dual(squared_problem(), init, data, dual_config);
  const TrainResult b =
      train_unconstrained(LossSpec::squared_error(), init, data, flat_config);
  CHECK(a.model.params() == b.model.params());
  CHECK(training_log_to_csv(a.log) == training_log_to_csv(b.log));
}

TEST_CASE("never-active constraint keeps lambda at zero") {
  const Dataset data = quadratic_data();
  ConstrainedProblem problem = squared_problem();
  ConstraintSpec c;
  c.loss = identity_loss();
  c.threshold = 1e9;
  c.name = "inactive";
  problem.constraints.push_back(c);
  TrainConfig config;
  config.mode = TrainMode::DualAscent;
  config.epochs = 30;
  config.inner_steps = 5;
  const TrainResult result =
      train_dual(problem, Parameterization(ModelConfig::linear(1, false)), data, config);
  for (const EpochRecord& r : result.log.records) {
    CHECK(r.lambdas[0] == 0.0);
    CHECK(r.slacks[0] < 0.0);
  }
}

TEST_CASE("regularized with zero weights equals unconstrained") {
  const Dataset data = quadratic_data();
  ConstrainedProblem problem = squared_problem();
  ConstraintSpec c;
  c.loss = LossSpec::hinge();
  c.threshold = 0.1;
  c.name = "h";
  problem.constraints.push_back(c);
  const Parameterization init = init_params(ModelConfig::linear(1, true), 5);

  TrainConfig reg_config;
  reg_config.mode = TrainMode::Regularized;
  reg_config.weights = {0.0};
  reg_config.epochs = 15;
  reg_config.inner_steps = 4;
  TrainConfig flat_config = reg_config;
  flat_config.mode = TrainMode::Unconstrained;
  flat_config.weights.clear();

  const TrainResult a = train_regularized(problem, init, data, reg_config);
  const TrainResult b =
      train_unconstrained(LossSpec::squared_error(), init, data, flat_config);
  CHECK(a.model.params() == b.model.params());
  // Regularized logs keep the slack columns and carry the weights in the
  // lambda columns.
  CHECK(a.log.records.back().slacks.size() == 1);
  CHECK(a.log.records.back().lambdas == std::vector<double>{0.0});
}

TEST_CASE("regularized at the converged multipliers reaches the dual inner solution") {
  // Convex instance: objective pulls theta to 0.5, identity constraint caps
  // the mean prediction at 0.25.
  const Dataset data({make_sample({1.0}, 0.0), make_sample({1.0}, 1.0)}, 1);
  ConstrainedProblem problem = squared_problem();
  ConstraintSpec c;
  c.loss = identity_loss();
  c.threshold = 0.25;
  c.name = "cap";
  problem.constraints.push_back(c);
  const Parameterization init(ModelConfig::linear(1, false));

  TrainConfig dual_config;
  dual_config.mode = TrainMode::DualAscent;
  dual_config.epochs = 400;
  dual_config.inner_steps = 20;
  dual_config.primal_lr = 0.1;
  dual_config.dual_lr = 0.2;
  const TrainResult dual = train_dual(problem, init, data, dual_config);

  TrainConfig reg_config;
  reg_config.mode = TrainMode::Regularized;
  reg_config.weights = dual.duals.lambdas;
  reg_config.epochs = 400;
  reg_config.inner_steps = 20;
  reg_config.primal_lr = 0.1;
  const TrainResult reg = train_regularized(problem, init, data, reg_config);

  CHECK(std::abs(reg.model.params()[0] - dual.model.params()[0]) <= 1e-3);
  CHECK(std::abs(reg.log.records.back().objective -
                 dual.log.records.back().objective) <= 1e-3);
}

TEST_CASE("one pinned-theta dual step raises the lagrangian by dual_lr * ||s||^2") {
  const Dataset data({make_sample({1.0}, 0.0), make_sample({1.0}, 1.0)}, 1);
  ConstrainedProblem problem = squared_problem();
  ConstraintSpec c;
  c.loss = identity_loss();
  c.threshold = 0.1;
  c.name = "cap";
  problem.constraints.push_back(c);
  const Parameterization model(ModelConfig::linear(1, false), {0.4});

  const double dual_lr = 1e-3;
  const DualState before({0.5});  // interior: the step will not be clipped
  const EmpiricalStats stats = empirical_stats(problem, model, data);
  DualState after = before;
  after.lambdas[0] = std::max(0.0, before.lambdas[0] + dual_lr * stats.slacks[0]);

  const double l_before = empirical_lagrangian(problem, model, before, data);
  const double l_after = empirical_lagrangian(problem, model, after, data);
  const double predicted = dual_lr * stats.slacks[0] * stats.slacks[0];
  CHECK(std::abs((l_after - l_before) - predicted) <= 0.1 * predicted);
}

TEST_CASE("lambda stays nonnegative in every record") {
  const Dataset data = quadratic_data();
  ConstrainedProblem problem = squared_problem();
  ConstraintSpec c;
  c.loss = identity_loss();
  c.threshold = 0.25;
  c.name = "cap";
  problem.constraints.push_back(c);
  TrainConfig config;
  config.mode = TrainMode::DualAscent;
  config.epochs = 50;
  config.inner_steps = 5;
  config.dual_lr = 0.5;
  const TrainResult result =
      train_dual(problem, Parameterization(ModelConfig::linear(1, false)), data, config);
  for (const EpochRecord& r : result.log.records) {
    CHECK(r.lambdas[0] >= 0.0);
  }
}

TEST_CASE("determinism: identical config and seed give identical CSV text") {
  const Dataset data = quadratic_data();
  ConstrainedProblem problem = squared_problem();
  ConstraintSpec c;
  c.loss = identity_loss();
  c.threshold = 0.25;
  c.name = "cap";
  problem.constraints.push_back(c);
  const Parameterization init = init_params(ModelConfig::linear(1, true), 1234);
  TrainConfig config;
  config.mode = TrainMode::DualAscent;
  config.epochs = 25;
  config.inner_steps = 4;
  config.batch_size = 1;  // exercises the shuffling path
  config.seed = 99;
  const TrainResult a = train_dual(problem, init, data, config);
  const TrainResult b = train_dual(problem, init, data, config);
  CHECK(training_log_to_csv(a.log) == training_log_to_csv(b.log));
  CHECK(a.model.params() == b.model.params());
}

TEST_CASE("divergence aborts with a diagnostic naming epoch and step") {
  const Dataset data = quadratic_data();
  Parameterization model(ModelConfig::linear(1, false), {1.0});
  TrainConfig config;
  config.mode = TrainMode::Unconstrained;
  config.epochs = 10;
  config.inner_steps = 100;
  config.primal_lr = 1e8;  // guaranteed blow-up
  try {
    train_unconstrained(LossSpec::squared_error(), model, data, config);
    FAIL("expected a runtime_error");
  } catch (const std::runtime_error& e) {
    const std::string message = e.what();
    CHECK(message.find("epoch") != std::string::npos);
    CHECK(message.find("step") != std::string::npos);
  }
}

TEST_CASE("training log CSV schema") {
  TrainingLog log;
  EpochRecord r;
  r.epoch = 0;
  r.objective = 0.5;
  r.slacks = {-0.25};
  r.lambdas = {0.125};
  log.records.push_back(r);
  r.epoch = 1;
  r.accuracy = 0.75;
  r.fairness = 1.0;
  log.records.push_back(r);
  const std::string csv = training_log_to_csv(log);
  CHECK(csv == "epoch,objective,slack_0,lambda_0,acc,fair\n"
               "0,0.5,-0.25,0.125,,\n"
               "1,0.5,-0.25,0.125,0.75,1\n");

  testutil::TempDir tmp;
  write_training_log_csv(log, tmp.file("log.csv"));
  CHECK(testutil::read_file(tmp.file("log.csv")) == csv);
}
