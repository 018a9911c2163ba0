#include "cslearn/bounds.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

namespace cslearn {

double v_n(double bound, std::size_t n, std::size_t vc_dim, double delta) {
  if (!(bound > 0.0) || !std::isfinite(bound)) {
    throw std::domain_error("v_n: bound B must be positive and finite");
  }
  if (n == 0) throw std::domain_error("v_n: N must be positive");
  if (vc_dim == 0) throw std::domain_error("v_n: vc_dim must be positive");
  if (!(delta > 0.0) || !(delta < 1.0)) throw std::domain_error("v_n: delta must be in (0,1)");
  const double nd = static_cast<double>(n);
  const double log_term = 1.0 + std::log(4.0) +
                          static_cast<double>(vc_dim) * std::log(2.0 * nd) - std::log(delta);
  return 2.0 * bound * std::sqrt(log_term / nd);
}

double parameterization_gap(double lipschitz, double epsilon, double lambda_l1) {
  if (!(lipschitz >= 0.0) || !(epsilon >= 0.0) || !(lambda_l1 >= 0.0) ||
      !std::isfinite(lipschitz) || !std::isfinite(epsilon) || !std::isfinite(lambda_l1)) {
    throw std::domain_error("parameterization_gap: inputs must be nonnegative and finite");
  }
  return (1.0 + lambda_l1) * lipschitz * epsilon;
}

GapCertificate total_gap_certificate(double bound, std::size_t n, std::size_t vc_dim,
                                     double delta, double lipschitz, double epsilon,
                                     const DualState& duals) {
  GapCertificate cert;
  cert.v_n = v_n(bound, n, vc_dim, delta);
  cert.epsilon = epsilon;
  cert.lipschitz = lipschitz;
  cert.bound = bound;
  cert.vc_dim = vc_dim;
  cert.delta = delta;
  cert.lambda_l1 = duals.l1_norm();
  cert.total_bound = parameterization_gap(lipschitz, epsilon, cert.lambda_l1) + cert.v_n;
  cert.sample_count = n;
  return cert;
}

std::size_t linear_vc_dim(std::size_t input_dim, bool bias) {
  return input_dim + (bias ? 1 : 0);
}

namespace {

std::string format_g15(double v) {
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.15g", v);
  return buf;
}

}  // namespace

std::string certificate_to_text(const GapCertificate& cert) {
  std::string out;
  out += "v_n = " + format_g15(cert.v_n) + "\n";
  out += "epsilon = " + format_g15(cert.epsilon) + "\n";
  out += "lipschitz = " + format_g15(cert.lipschitz) + "\n";
  out += "bound = " + format_g15(cert.bound) + "\n";
  out += "vc_dim = " + std::to_string(cert.vc_dim) + "\n";
  out += "delta = " + format_g15(cert.delta) + "\n";
  out += "lambda_l1 = " + format_g15(cert.lambda_l1) + "\n";
  out += "parameterization_gap = " +
         format_g15(parameterization_gap(cert.lipschitz, cert.epsilon, cert.lambda_l1)) + "\n";
  out += "total_bound = " + format_g15(cert.total_bound) + "\n";
  out += "sample_count = " + std::to_string(cert.sample_count) + "\n";
  return out;
}

void write_certificate(const GapCertificate& cert, const std::string& path) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write certificate: " + path);
  out << certificate_to_text(cert);
}

}  // namespace cslearn
