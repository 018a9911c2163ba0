#pragma once

#include <cstddef>
#include <string>

#include "cslearn/types.hpp"

namespace cslearn {

/// Sampling deviation term
///   v_n = 2B * sqrt((1/N) * [1 + log(4 (2N)^{d_vc} / delta)])
/// evaluated in the log domain, 2B * sqrt((1/N)[1 + log4 + d_vc*log(2N)
/// - log delta]), so large d_vc never overflows.
/// Throws std::domain_error unless B > 0, N >= 1, d_vc >= 1, delta in (0,1).
double v_n(double bound, std::size_t n, std::size_t vc_dim, double delta);

/// (1 + lambda_l1) * L * epsilon. Throws std::domain_error on negative or
/// non-finite inputs.
double parameterization_gap(double lipschitz, double epsilon, double lambda_l1);

/// Combines both terms into a certificate; lambda_l1 = sum lambda_i of the
/// trained duals and total_bound = parameterization_gap + v_n.
GapCertificate total_gap_certificate(double bound, std::size_t n, std::size_t vc_dim,
                                     double delta, double lipschitz, double epsilon,
                                     const DualState& duals);

/// Reference VC dimension of the Linear kind: d + 1 with bias, d without.
/// No such reference exists for MLPs; their d_vc is a user assumption.
std::size_t linear_vc_dim(std::size_t input_dim, bool bias = true);

/// Flat `key = value` text, one line per field, 15 significant digits.
std::string certificate_to_text(const GapCertificate& cert);
void write_certificate(const GapCertificate& cert, const std::string& path);

}  // namespace cslearn
