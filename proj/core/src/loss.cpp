#include "cslearn/loss.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace cslearn {

namespace {

double clamp_prob(double p, double clamp) { return std::clamp(p, clamp, 1.0 - clamp); }

void check_finite(const LossSpec& spec, double prediction, double label) {
  (void)spec;
  if (!std::isfinite(prediction) || !std::isfinite(label)) {
    throw std::domain_error("eval_loss: non-finite prediction or label");
  }
}

}  // namespace

double eval_loss(const LossSpec& spec, double prediction, double label) {
  check_finite(spec, prediction, label);
  switch (spec.kind) {
    case LossKind::SquaredError: {
      const double r = prediction - label;
      return r * r;
    }
    case LossKind::BinaryCrossEntropy: {
      const double p = clamp_prob(prediction, spec.log_clamp);
      return -(label * std::log(p) + (1.0 - label) * std::log(1.0 - p));
    }
    case LossKind::Hinge: {
      const double sign = 2.0 * label - 1.0;  // 0/1 labels
      return std::max(0.0, 1.0 - sign * prediction);
    }
    case LossKind::BernoulliKL:
      return kl_bernoulli(prediction, label, spec.log_clamp);
    case LossKind::Custom: {
      if (!spec.custom_value) {
        throw std::invalid_argument("eval_loss: Custom loss without a value function");
      }
      return spec.custom_value(prediction, label);
    }
  }
  throw std::logic_error("eval_loss: unknown loss kind");
}

double eval_loss_gradient(const LossSpec& spec, double prediction, double label) {
  check_finite(spec, prediction, label);
  switch (spec.kind) {
    case LossKind::SquaredError:
      return 2.0 * (prediction - label);
    case LossKind::BinaryCrossEntropy: {
      const double p = clamp_prob(prediction, spec.log_clamp);
      return -label / p + (1.0 - label) / (1.0 - p);
    }
    case LossKind::Hinge: {
      const double sign = 2.0 * label - 1.0;
      return (1.0 - sign * prediction > 0.0) ? -sign : 0.0;
    }
    case LossKind::BernoulliKL:
      return kl_bernoulli_dp(prediction, label, spec.log_clamp);
    case LossKind::Custom: {
      if (!spec.custom_gradient) {
        throw std::invalid_argument("eval_loss_gradient: Custom loss without a gradient");
      }
      return spec.custom_gradient(prediction, label);
    }
  }
  throw std::logic_error("eval_loss_gradient: unknown loss kind");
}

double default_bound(LossKind kind, double log_clamp) {
  switch (kind) {
    case LossKind::SquaredError:
      return 1.0;  // |prediction - label| <= 1
    case LossKind::BinaryCrossEntropy:
      return -std::log(log_clamp);
    case LossKind::Hinge:
      return 2.0;  // |prediction| <= 1
    case LossKind::BernoulliKL:
      return std::log((1.0 - log_clamp) / log_clamp);
    case LossKind::Custom:
      return 1.0;
  }
  return 1.0;
}

double default_lipschitz(LossKind kind, double log_clamp) {
  switch (kind) {
    case LossKind::SquaredError:
      return 2.0;  // |prediction - label| <= 1
    case LossKind::BinaryCrossEntropy:
      return 1.0 / log_clamp;
    case LossKind::Hinge:
      return 1.0;
    case LossKind::BernoulliKL:
      return 1.0 / (log_clamp * (1.0 - log_clamp));
    case LossKind::Custom:
      return 1.0;
  }
  return 1.0;
}

double kl_bernoulli(double p, double q, double clamp) {
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw std::domain_error("kl_bernoulli: non-finite argument");
  }
  const double cp = clamp_prob(p, clamp);
  const double cq = clamp_prob(q, clamp);
  if (cp == cq) return 0.0;
  return cp * std::log(cp / cq) + (1.0 - cp) * std::log((1.0 - cp) / (1.0 - cq));
}

double kl_bernoulli_dp(double p, double q, double clamp) {
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw std::domain_error("kl_bernoulli_dp: non-finite argument");
  }
  const double cp = clamp_prob(p, clamp);
  const double cq = clamp_prob(q, clamp);
  return std::log(cp / cq) - std::log((1.0 - cp) / (1.0 - cq));
}

double kl_bernoulli_dq(double p, double q, double clamp) {
  if (!std::isfinite(p) || !std::isfinite(q)) {
    throw std::domain_error("kl_bernoulli_dq: non-finite argument");
  }
  const double cp = clamp_prob(p, clamp);
  const double cq = clamp_prob(q, clamp);
  return (cq - cp) / (cq * (1.0 - cq));
}

}  // namespace cslearn
