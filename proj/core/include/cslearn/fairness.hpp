#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "cslearn/bounds.hpp"
#include "cslearn/model.hpp"
#include "cslearn/optimizer.hpp"
#include "cslearn/types.hpp"

namespace cslearn {

/// Column roles and fitted preprocessing state for Adult-schema CSVs.
/// Standardization constants and one-hot vocabularies are learned from the
/// training split only and reused verbatim at test time.
struct PreprocessSpec {
  std::vector<std::string> numeric_columns;
  std::vector<std::string> categorical_columns;
  std::string protected_column = "z";
  std::string label_column = "y";
  std::string positive_label = "1";

  /// Auto-detect column roles from the training header/rows when the
  /// numeric/categorical lists are empty: a column is numeric iff every
  /// training value parses as a double.
  bool auto_detect = true;

  // Fitted state.
  bool fitted = false;
  std::vector<double> means;
  std::vector<double> stds;                          // 0 marks a degenerate column -> feature 0
  std::vector<std::vector<std::string>> vocabularies; // per categorical column, sorted
  std::vector<std::string> group_values;              // sorted; [0] -> slot 1.0, [1] -> slot 0.0

  /// Feature layout: standardized numerics, one-hots, protected slot last.
  std::size_t feature_dim() const;
};

struct PreprocessResult {
  Dataset train;
  Dataset test;
  PreprocessSpec fitted;
};

/// Reads both CSVs, fits the spec on the training split, and encodes both
/// splits. Unseen test categories map to an all-zero one-hot. Throws
/// std::runtime_error on missing columns, empty splits, or a non-binary
/// protected column.
PreprocessResult load_and_preprocess(const std::string& train_csv, const std::string& test_csv,
                                     PreprocessSpec spec);

/// Binary cross-entropy objective plus the single fairness constraint
/// E[KL(f(x, A) || f(x, B))] <= c, named "fairness_kl". swap_kl reverses
/// which group takes the first KL argument. Throws std::invalid_argument
/// unless c > 0.
ConstrainedProblem make_fair_problem(double c, bool swap_kl = false);

struct FairnessMetrics {
  double accuracy = 0.0;
  /// Fraction of samples whose thresholded prediction is identical under
  /// both protected-attribute values.
  double fairness = 0.0;
  double threshold = 0.5;
};

FairnessMetrics evaluate_metrics(const Parameterization& model, const Dataset& test,
                                 double threshold = 0.5);

/// Synthetic Adult-schema generator: d_numeric standard normal columns, one
/// 3-level categorical, protected z in {A, B}, and logistic labels whose
/// logit carries a +bias_strength shift for group A. Byte-identical output
/// for equal seeds.
struct SynthConfig {
  std::size_t n_train = 2000;
  std::size_t n_test = 1000;
  std::size_t d_numeric = 4;
  double bias_strength = 1.0;
  std::uint64_t seed = 0;
};

void synth_generate(const SynthConfig& config, const std::string& train_csv_path,
                    const std::string& test_csv_path);

struct ExperimentConfig {
  std::string train_csv;
  std::string test_csv;  // empty: deterministic 80/20 split of the training CSV
  std::string out_dir;
  double c = 1e-3;
  std::size_t hidden = 256;
  std::size_t epochs = 300;
  std::size_t inner_steps = 20;
  double primal_lr = 0.1;
  double dual_lr = 0.05;
  std::size_t batch_size = 0;
  std::uint64_t seed = 0;
  double threshold = 0.5;
  bool swap_kl = false;
  double split_fraction = 0.8;
  PreprocessSpec preprocess;

  // Certificate assumptions.
  double cert_epsilon = 0.1;
  double cert_delta = 0.05;
  double cert_lipschitz = 1.0;
  /// Defaults to the trained parameter count when unset; d_vc for an MLP is
  /// the user's assumption, not a measurement.
  std::optional<std::size_t> cert_vc_dim;
};

struct ExperimentResult {
  TrainingLog unconstrained_log;
  TrainingLog constrained_log;
  FairnessMetrics unconstrained_metrics;
  FairnessMetrics constrained_metrics;
  double final_lambda = 0.0;
  double final_slack = 0.0;
  GapCertificate certificate;
};

/// Trains the unconstrained baseline and the dual-ascent constrained model
/// from a shared initialization, evaluates both, and (when out_dir is set)
/// writes unconstrained.csv, constrained.csv and report.txt.
ExperimentResult run_experiment(const ExperimentConfig& config);

std::string experiment_report_text(const ExperimentResult& result);

}  // namespace cslearn
