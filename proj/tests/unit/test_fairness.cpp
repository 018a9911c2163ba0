#include <doctest.h>

#include <cmath>
#include <fstream>

#include "cslearn/fairness.hpp"
#include "test_util.hpp"

using namespace cslearn;

namespace {

void write_text(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  out << text;
}

}  // namespace

TEST_CASE("synthetic generator determinism and schema") {
  testutil::TempDir tmp;
  SynthConfig config;
  config.n_train = 50;
  config.n_test = 20;
  config.d_numeric = 2;
  config.seed = 77;

  synth_generate(config, tmp.file("a_train.csv"), tmp.file("a_test.csv"));
  synth_generate(config, tmp.file("b_train.csv"), tmp.file("b_test.csv"));
  const std::string train_a = testutil::read_file(tmp.file("a_train.csv"));
  CHECK(train_a == testutil::read_file(tmp.file("b_train.csv")));
  CHECK(testutil::read_file(tmp.file("a_test.csv")) ==
        testutil::read_file(tmp.file("b_test.csv")));

  CHECK(train_a.rfind("num0,num1,edu,z,y\n", 0) == 0);
  // Protected values restricted to A/B.
  std::size_t pos = train_a.find('\n') + 1;
  while (pos < train_a.size()) {
    const std::size_t end = train_a.find('\n', pos);
    const std::string row = train_a.substr(pos, end - pos);
    const std::size_t z_start = row.rfind(',', row.rfind(',') - 1) + 1;
    const std::string z = row.substr(z_start, row.rfind(',') - z_start);
    CHECK((z == "A" || z == "B"));
    pos = end + 1;
  }

  SynthConfig tiny = config;
  tiny.n_train = 5;
  CHECK_THROWS_AS(synth_generate(tiny, tmp.file("x.csv"), tmp.file("y.csv")),
                  std::invalid_argument);
}

TEST_CASE("preprocessing fits on train and reuses on test") {
  testutil::TempDir tmp;
  write_text(tmp.file("train.csv"),
             "height,edu,z,y\n"
             "1.0,hs,A,1\n"
             "3.0,college,B,0\n");
  write_text(tmp.file("test.csv"),
             "height,edu,z,y\n"
             "2.0,phd,A,1\n");

  PreprocessSpec spec;
  const PreprocessResult result =
      load_and_preprocess(tmp.file("train.csv"), tmp.file("test.csv"), spec);

  // 1 numeric + 2 one-hot + protected slot.
  CHECK(result.fitted.feature_dim() == 4);
  CHECK(result.train.dimension() == 4);
  CHECK(*result.train.protected_slot() == 3);
  CHECK(result.fitted.group_values == std::vector<std::string>{"A", "B"});

  // Standardization from the training split: mean 2, std 1.
  CHECK(result.train[0].features[0] == doctest::Approx(-1.0));
  CHECK(result.train[1].features[0] == doctest::Approx(1.0));
  CHECK(result.test[0].features[0] == doctest::Approx(0.0));

  // Unseen category -> all-zero one-hot.
  CHECK(result.test[0].features[1] == 0.0);
  CHECK(result.test[0].features[2] == 0.0);
  // Protected encoding: A (first sorted) -> 1.
  CHECK(result.train[0].features[3] == 1.0);
  CHECK(result.train[1].features[3] == 0.0);
  CHECK(result.train[0].label == 1.0);
  CHECK(result.train[1].label == 0.0);

  // Re-encoding the training split with the fitted spec is deterministic.
  const PreprocessResult again =
      load_and_preprocess(tmp.file("train.csv"), tmp.file("train.csv"), result.fitted);
  for (std::size_t i = 0; i < again.train.size(); ++i) {
    CHECK(again.train[i].features == result.train[i].features);
  }
}

TEST_CASE("preprocessing error paths") {
  testutil::TempDir tmp;

  SUBCASE("degenerate numeric column maps to zero") {
    write_text(tmp.file("train.csv"), "a,z,y\n5,A,1\n5,B,0\n");
    const PreprocessResult result =
        load_and_preprocess(tmp.file("train.csv"), tmp.file("train.csv"), {});
    CHECK(result.fitted.stds[0] == 0.0);
    CHECK(result.train[0].features[0] == 0.0);
  }
  SUBCASE("missing protected column") {
    write_text(tmp.file("train.csv"), "a,y\n1,1\n2,0\n");
    CHECK_THROWS_WITH_AS(load_and_preprocess(tmp.file("train.csv"), tmp.file("train.csv"), {}),
                         doctest::Contains("protected"), std::runtime_error);
  }
  SUBCASE("non-binary protected column") {
    write_text(tmp.file("train.csv"), "a,z,y\n1,A,1\n2,B,0\n3,C,1\n");
    CHECK_THROWS_WITH_AS(load_and_preprocess(tmp.file("train.csv"), tmp.file("train.csv"), {}),
                         doctest::Contains("binary"), std::runtime_error);
  }
  SUBCASE("empty split") {
    write_text(tmp.file("train.csv"), "a,z,y\n");
    CHECK_THROWS_AS(load_and_preprocess(tmp.file("train.csv"), tmp.file("train.csv"), {}),
                    std::runtime_error);
  }
}

TEST_CASE("make_fair_problem") {
  const ConstrainedProblem problem = make_fair_problem(1e-3);
  CHECK(problem.constraints.size() == 1);
  CHECK(problem.constraints[0].name == "fairness_kl");
  CHECK(problem.constraints[0].threshold == 1e-3);
  CHECK(problem.constraints[0].loss.kind == LossKind::BernoulliKL);
  CHECK(problem.objective.kind == LossKind::BinaryCrossEntropy);
  CHECK(problem.constraints[0].group_a_value == 1.0);

  const ConstrainedProblem swapped = make_fair_problem(1e-3, true);
  CHECK(swapped.constraints[0].group_a_value == 0.0);
  CHECK(swapped.constraints[0].group_b_value == 1.0);

  CHECK_THROWS_AS(make_fair_problem(0.0), std::invalid_argument);
  CHECK_THROWS_AS(make_fair_problem(-1.0), std::invalid_argument);
}

TEST_CASE("evaluate_metrics closed forms") {
  SUBCASE("model ignoring the protected slot is perfectly fair") {
    std::vector<Sample> samples(3);
    samples[0].features = {0.8, 1.0};
    samples[0].label = 1.0;
    samples[1].features = {0.2, 0.0};
    samples[1].label = 0.0;
    samples[2].features = {0.6, 1.0};
    samples[2].label = 0.0;
    Dataset data(std::move(samples), 2);
    data.set_protected_slot(1);
    // Identity readout of feature 0.
    const Parameterization model(ModelConfig::linear(2, false), {1.0, 0.0});
    const FairnessMetrics metrics = evaluate_metrics(model, data, 0.5);
    CHECK(metrics.fairness == 1.0);
    // Predictions 0.8 (>=0.5, label 1: hit), 0.2 (<0.5, label 0: hit),
    // 0.6 (>=0.5, label 0: miss).
    CHECK(metrics.accuracy == doctest::Approx(2.0 / 3.0));
  }

  SUBCASE("constant high prediction against all-positive labels") {
    std::vector<Sample> samples(4);
    for (auto& s : samples) {
      s.features = {0.0, 1.0};
      s.label = 1.0;
    }
    Dataset data(std::move(samples), 2);
    data.set_protected_slot(1);
    const Parameterization model(ModelConfig::linear(2, true), {0.0, 0.0, 0.9});
    const FairnessMetrics metrics = evaluate_metrics(model, data, 0.5);
    CHECK(metrics.accuracy == 1.0);
    CHECK(metrics.fairness == 1.0);
  }

  SUBCASE("counting: 3 of 4 correct") {
    std::vector<Sample> samples(4);
    samples[0].features = {1.0, 1.0};
    samples[0].label = 1.0;  // pred 1 -> hit
    samples[1].features = {1.0, 0.0};
    samples[1].label = 1.0;  // pred 1 -> hit
    samples[2].features = {-1.0, 1.0};
    samples[2].label = 0.0;  // pred -1 -> hit
    samples[3].features = {1.0, 0.0};
    samples[3].label = 0.0;  // pred 1 -> miss
    Dataset data(std::move(samples), 2);
    data.set_protected_slot(1);
    const Parameterization model(ModelConfig::linear(2, false), {1.0, 0.0});
    CHECK(evaluate_metrics(model, data, 0.5).accuracy == doctest::Approx(0.75));
  }

  SUBCASE("missing protected slot raises") {
    const Dataset data({[] {
                          Sample s;
                          s.features = {1.0};
                          s.label = 1.0;
                          return s;
                        }()},
                       1);
    const Parameterization model(ModelConfig::linear(1, false), {1.0});
    CHECK_THROWS_AS(evaluate_metrics(model, data, 0.5), std::invalid_argument);
  }
}

TEST_CASE("unbiased synthetic data trains to near-perfect fairness") {
  testutil::TempDir tmp;
  SynthConfig config;
  config.n_train = 1000;
  config.n_test = 400;
  config.d_numeric = 3;
  config.bias_strength = 0.0;
  config.seed = 5;
  synth_generate(config, tmp.file("train.csv"), tmp.file("test.csv"));

  ExperimentConfig experiment;
  experiment.train_csv = tmp.file("train.csv");
  experiment.test_csv = tmp.file("test.csv");
  experiment.hidden = 4;
  experiment.epochs = 100;
  experiment.inner_steps = 10;
  experiment.seed = 5;
  const ExperimentResult result = run_experiment(experiment);
  CHECK(result.unconstrained_metrics.fairness >= 0.95);
}

TEST_CASE("experiment on biased data: artifacts, determinism, dual behavior") {
  testutil::TempDir tmp;
  SynthConfig config;
  config.n_train = 300;
  config.n_test = 150;
  config.d_numeric = 3;
  config.bias_strength = 1.5;
  config.seed = 3;
  synth_generate(config, tmp.file("train.csv"), tmp.file("test.csv"));

  ExperimentConfig experiment;
  experiment.train_csv = tmp.file("train.csv");
  experiment.test_csv = tmp.file("test.csv");
  experiment.out_dir = tmp.file("run1");
  experiment.hidden = 8;
  experiment.epochs = 60;
  experiment.inner_steps = 10;
  experiment.seed = 3;
  const ExperimentResult result = run_experiment(experiment);

  CHECK(testutil::read_file(tmp.file("run1") + "/unconstrained.csv").size() > 0);
  CHECK(testutil::read_file(tmp.file("run1") + "/constrained.csv").size() > 0);
  const std::string report = testutil::read_file(tmp.file("run1") + "/report.txt");
  CHECK(report.find("fairness_delta = ") != std::string::npos);
  CHECK(report.find("total_bound = ") != std::string::npos);

  // The constraint pushes the divergence down.
  CHECK(result.constrained_metrics.fairness >= result.unconstrained_metrics.fairness);

  // Once the slack is negative, the ascent rule cannot increase lambda.
  const auto& records = result.constrained_log.records;
  for (std::size_t i = 1; i < records.size(); ++i) {
    CHECK(records[i].lambdas[0] >= 0.0);
    if (records[i].slacks[0] < 0.0) {
      CHECK(records[i].lambdas[0] <= records[i - 1].lambdas[0] + 1e-15);
    }
    CHECK(records[i].accuracy.has_value());
  }

  // Byte-identical repeat.
  ExperimentConfig repeat = experiment;
  repeat.out_dir = tmp.file("run2");
  run_experiment(repeat);
  CHECK(testutil::read_file(tmp.file("run1") + "/constrained.csv") ==
        testutil::read_file(tmp.file("run2") + "/constrained.csv"));
  CHECK(testutil::read_file(tmp.file("run1") + "/unconstrained.csv") ==
        testutil::read_file(tmp.file("run2") + "/unconstrained.csv"));
}

TEST_CASE("experiment with an internal split keeps both sides nonempty") {
  testutil::TempDir tmp;
  SynthConfig config;
  config.n_train = 100;
  config.n_test = 10;  // unused: we split the training CSV
  config.seed = 9;
  synth_generate(config, tmp.file("train.csv"), tmp.file("unused.csv"));

  ExperimentConfig experiment;
  experiment.train_csv = tmp.file("train.csv");
  experiment.hidden = 4;
  experiment.epochs = 5;
  experiment.inner_steps = 5;
  experiment.seed = 9;
  const ExperimentResult result = run_experiment(experiment);
  CHECK(result.constrained_log.records.size() == 5);
}
