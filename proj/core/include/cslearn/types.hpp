#pragma once

#include <cstddef>
#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace cslearn {

/// One observation: a feature vector, a scalar label (0/1 for classification
/// losses), and an optional protected-attribute tag used by fairness
/// constraints.
struct Sample {
  std::vector<double> features;
  double label = 0.0;
  std::optional<std::string> group;
};

/// Ordered, fixed-dimension collection of samples. Sample order is part of
/// the value: empirical averages are summed in index order so repeated runs
/// are bit-identical.
class Dataset {
 public:
  Dataset(std::vector<Sample> samples, std::size_t dimension);

  const std::vector<Sample>& samples() const { return samples_; }
  const Sample& operator[](std::size_t i) const { return samples_[i]; }
  std::size_t size() const { return samples_.size(); }
  std::size_t dimension() const { return dimension_; }

  /// Feature slot holding the encoded protected attribute, when the dataset
  /// was produced by a pipeline that encodes one (counterfactual evaluation
  /// overwrites this slot).
  std::optional<std::size_t> protected_slot() const { return protected_slot_; }
  void set_protected_slot(std::size_t slot);

 private:
  std::vector<Sample> samples_;
  std::size_t dimension_ = 0;
  std::optional<std::size_t> protected_slot_;
};

enum class LossKind { SquaredError, BinaryCrossEntropy, Hinge, BernoulliKL, Custom };

using LossFn = std::function<double(double prediction, double label)>;

/// A pointwise loss with its declared range bound B and Lipschitz constant L
/// (both used only for gap certificates, never during optimization).
/// Log-based kinds clamp probabilities to [log_clamp, 1 - log_clamp] so the
/// loss stays finite and B-bounded.
///
/// Custom supplies an explicit value/gradient pair; keeping the value
/// nonnegative (and B/L accurate) is the caller's contract.
struct LossSpec {
  LossKind kind = LossKind::SquaredError;
  double bound = 1.0;
  double lipschitz = 2.0;
  double log_clamp = 1e-7;
  LossFn custom_value;
  LossFn custom_gradient;

  static LossSpec squared_error();
  static LossSpec binary_cross_entropy(double log_clamp = 1e-7);
  static LossSpec hinge();
  static LossSpec bernoulli_kl(double log_clamp = 1e-7);
  static LossSpec custom(LossFn value, LossFn gradient, double bound, double lipschitz);
};

/// One expected-loss constraint: mean loss <= threshold.
///
/// A BernoulliKL constraint is evaluated counterfactually: each sample is
/// predicted twice with the dataset's protected slot overwritten by
/// group_a_value and group_b_value, and the loss is KL(pred_a || pred_b).
struct ConstraintSpec {
  LossSpec loss;
  double threshold = 0.0;
  std::string name;
  double group_a_value = 1.0;
  double group_b_value = 0.0;
};

/// Objective loss plus m expected-loss constraints.
struct ConstrainedProblem {
  LossSpec objective;
  std::vector<ConstraintSpec> constraints;

  std::size_t num_constraints() const { return constraints.size(); }
  /// Throws std::invalid_argument on duplicate constraint names or
  /// non-finite thresholds.
  void validate() const;
};

/// Dual variables, one per constraint. Nonnegativity is maintained by the
/// training loop through project_duals; a freshly stepped state may carry
/// negative entries until projected.
struct DualState {
  std::vector<double> lambdas;

  DualState() = default;
  explicit DualState(std::vector<double> values) : lambdas(std::move(values)) {}
  static DualState zeros(std::size_t m) { return DualState(std::vector<double>(m, 0.0)); }

  std::size_t size() const { return lambdas.size(); }
  double l1_norm() const;
};

/// Componentwise projection onto the nonnegative orthant. Idempotent.
DualState project_duals(DualState state);

/// Inputs and outputs of the total gap bound: the sampling term v_n, the
/// assumed constants (epsilon, L, B, vc_dim, delta), the trained ||lambda||_1
/// and the combined bound (1 + lambda_l1) * L * epsilon + v_n.
struct GapCertificate {
  double v_n = 0.0;
  double epsilon = 0.0;
  double lipschitz = 0.0;
  double bound = 0.0;
  std::size_t vc_dim = 1;
  double delta = 0.5;
  double lambda_l1 = 0.0;
  double total_bound = 0.0;
  std::size_t sample_count = 0;
};

}  // namespace cslearn
