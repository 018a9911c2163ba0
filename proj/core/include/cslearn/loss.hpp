#pragma once

#include "cslearn/types.hpp"

namespace cslearn {

/// Pointwise loss value. For BinaryCrossEntropy and BernoulliKL the
/// prediction (and for BernoulliKL the label) is interpreted as a Bernoulli
/// probability and clamped to [log_clamp, 1 - log_clamp] first.
/// Throws std::domain_error on non-finite inputs.
double eval_loss(const LossSpec& spec, double prediction, double label);

/// Derivative of eval_loss with respect to the prediction, evaluated at the
/// clamped point for log-based kinds. Hinge takes the zero subgradient at
/// its kink.
double eval_loss_gradient(const LossSpec& spec, double prediction, double label);

/// Documented default range bound per kind (e.g. BinaryCrossEntropy with
/// clamp 1e-7: -log(1e-7) ~= 16.118). SquaredError/Hinge defaults assume
/// |prediction - label| <= 1 and are meant to be overridden for wider ranges.
double default_bound(LossKind kind, double log_clamp = 1e-7);

/// Documented default Lipschitz constant per kind over the clamped domain.
double default_lipschitz(LossKind kind, double log_clamp = 1e-7);

/// KL divergence between Bernoulli(p) and Bernoulli(q), both arguments
/// clamped to [clamp, 1 - clamp]. Nonnegative; zero iff the clamped
/// arguments coincide.
double kl_bernoulli(double p, double q, double clamp = 1e-7);

/// Partial derivatives of kl_bernoulli at the clamped point.
double kl_bernoulli_dp(double p, double q, double clamp = 1e-7);
double kl_bernoulli_dq(double p, double q, double clamp = 1e-7);

}  // namespace cslearn
