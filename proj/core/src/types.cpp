#include "cslearn/types.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>
#include <unordered_set>

#include "cslearn/loss.hpp"

namespace cslearn {

Dataset::Dataset(std::vector<Sample> samples, std::size_t dimension)
    : samples_(std::move(samples)), dimension_(dimension) {
  if (samples_.empty()) {
    throw std::invalid_argument("Dataset: must contain at least one sample");
  }
  if (dimension_ == 0) {
    throw std::invalid_argument("Dataset: dimension must be positive");
  }
  for (std::size_t i = 0; i < samples_.size(); ++i) {
    const Sample& s = samples_[i];
    if (s.features.size() != dimension_) {
      throw std::invalid_argument("Dataset: sample " + std::to_string(i) + " has " +
                                  std::to_string(s.features.size()) + " features, expected " +
                                  std::to_string(dimension_));
    }
    if (!std::isfinite(s.label)) {
      throw std::invalid_argument("Dataset: sample " + std::to_string(i) +
                                  " has a non-finite label");
    }
  }
}

void Dataset::set_protected_slot(std::size_t slot) {
  if (slot >= dimension_) {
    throw std::invalid_argument("Dataset: protected slot " + std::to_string(slot) +
                                " out of range for dimension " + std::to_string(dimension_));
  }
  protected_slot_ = slot;
}

LossSpec LossSpec::squared_error() {
  LossSpec spec;
  spec.kind = LossKind::SquaredError;
  spec.bound = default_bound(spec.kind);
  spec.lipschitz = default_lipschitz(spec.kind);
  return spec;
}

LossSpec LossSpec::binary_cross_entropy(double log_clamp) {
  LossSpec spec;
  spec.kind = LossKind::BinaryCrossEntropy;
  spec.log_clamp = log_clamp;
  spec.bound = default_bound(spec.kind, log_clamp);
  spec.lipschitz = default_lipschitz(spec.kind, log_clamp);
  return spec;
}

LossSpec LossSpec::hinge() {
  LossSpec spec;
  spec.kind = LossKind::Hinge;
  spec.bound = default_bound(spec.kind);
  spec.lipschitz = default_lipschitz(spec.kind);
  return spec;
}

LossSpec LossSpec::bernoulli_kl(double log_clamp) {
  LossSpec spec;
  spec.kind = LossKind::BernoulliKL;
  spec.log_clamp = log_clamp;
  spec.bound = default_bound(spec.kind, log_clamp);
  spec.lipschitz = default_lipschitz(spec.kind, log_clamp);
  return spec;
}

LossSpec LossSpec::custom(LossFn value, LossFn gradient, double bound, double lipschitz) {
  if (!value || !gradient) {
    throw std::invalid_argument("LossSpec::custom: value and gradient are both required");
  }
  if (!(bound > 0.0) || !(lipschitz > 0.0)) {
    throw std::invalid_argument("LossSpec::custom: bound and lipschitz must be positive");
  }
  LossSpec spec;
  spec.kind = LossKind::Custom;
  spec.custom_value = std::move(value);
  spec.custom_gradient = std::move(gradient);
  spec.bound = bound;
  spec.lipschitz = lipschitz;
  return spec;
}

void ConstrainedProblem::validate() const {
  std::unordered_set<std::string> names;
  for (const ConstraintSpec& c : constraints) {
    if (!std::isfinite(c.threshold)) {
      throw std::invalid_argument("ConstrainedProblem: constraint '" + c.name +
                                  "' has a non-finite threshold");
    }
    if (!names.insert(c.name).second) {
      throw std::invalid_argument("ConstrainedProblem: duplicate constraint name '" + c.name +
                                  "'");
    }
  }
}

double DualState::l1_norm() const {
  double sum = 0.0;
  for (double v : lambdas) sum += std::abs(v);
  return sum;
}

DualState project_duals(DualState state) {
  for (double& v : state.lambdas) v = std::max(v, 0.0);
  return state;
}

}  // namespace cslearn
