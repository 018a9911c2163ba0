#include <doctest.h>

#include <cmath>

#include "cslearn/bounds.hpp"
#include "test_util.hpp"

using namespace cslearn;

TEST_CASE("v_n closed forms") {
  // B=1, N=1, d_vc=1, delta=0.5: 2*sqrt(1 + log 16).
  CHECK(v_n(1.0, 1, 1, 0.5) == doctest::Approx(3.8846305987775884).epsilon(1e-14));
  CHECK(v_n(1.0, 1, 1, 0.5) ==
        doctest::Approx(2.0 * std::sqrt(1.0 + std::log(16.0))).epsilon(1e-15));
  CHECK(v_n(1.0, 10000, 10, 0.5) == doctest::Approx(0.20210325783325822).epsilon(1e-14));
}

TEST_CASE("v_n scales linearly in B and is monotone") {
  CHECK(v_n(2.0, 17, 3, 0.1) == doctest::Approx(2.0 * v_n(1.0, 17, 3, 0.1)).epsilon(1e-15));

  // Strictly decreasing in N.
  CHECK(v_n(1.0, 10, 3, 0.1) > v_n(1.0, 20, 3, 0.1));
  CHECK(v_n(1.0, 20, 3, 0.1) > v_n(1.0, 40, 3, 0.1));
  // Strictly increasing in d_vc and B, decreasing in delta.
  for (std::size_t n : {10, 100, 1000}) {
    CHECK(v_n(1.0, n, 2, 0.1) < v_n(1.0, n, 3, 0.1));
    CHECK(v_n(1.0, n, 3, 0.1) < v_n(1.5, n, 3, 0.1));
    CHECK(v_n(1.0, n, 3, 0.2) < v_n(1.0, n, 3, 0.1));
  }
}

TEST_CASE("log-domain evaluation matches the naive formula where representable") {
  for (std::size_t n : {1, 2, 5, 10, 50}) {
    for (std::size_t dvc : {1, 2, 3}) {
      const double naive =
          2.0 * 1.25 *
          std::sqrt((1.0 / static_cast<double>(n)) *
                    (1.0 + std::log(4.0 * std::pow(2.0 * static_cast<double>(n),
                                                   static_cast<double>(dvc)) /
                                    0.3)));
      CHECK(testutil::close_rel(v_n(1.25, n, dvc, 0.3), naive, 1e-10));
    }
  }
  // Far beyond the naive form's range: still finite.
  CHECK(std::isfinite(v_n(1.0, 1000000, 5000, 0.01)));
}

TEST_CASE("v_n domain errors") {
  CHECK_THROWS_AS(v_n(1.0, 0, 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(v_n(1.0, 10, 0, 0.5), std::domain_error);
  CHECK_THROWS_AS(v_n(1.0, 10, 1, 0.0), std::domain_error);
  CHECK_THROWS_AS(v_n(1.0, 10, 1, 1.0), std::domain_error);
  CHECK_THROWS_AS(v_n(1.0, 10, 1, -0.5), std::domain_error);
  CHECK_THROWS_AS(v_n(0.0, 10, 1, 0.5), std::domain_error);
  CHECK_THROWS_AS(v_n(-1.0, 10, 1, 0.5), std::domain_error);
}

TEST_CASE("parameterization gap") {
  CHECK(parameterization_gap(1.0, 0.1, 0.65) == doctest::Approx(0.165).epsilon(1e-15));
  CHECK(parameterization_gap(3.0, 0.0, 5.0) == 0.0);
  CHECK(parameterization_gap(2.0, 0.1, 0.0) == doctest::Approx(0.2).epsilon(1e-15));
  CHECK_THROWS_AS(parameterization_gap(-1.0, 0.1, 0.0), std::domain_error);
  CHECK_THROWS_AS(parameterization_gap(1.0, -0.1, 0.0), std::domain_error);
}

TEST_CASE("total gap certificate") {
  const DualState duals({0.4, 0.25});
  const GapCertificate cert = total_gap_certificate(1.0, 500, 4, 0.1, 2.0, 0.05, duals);
  CHECK(cert.v_n > 0.0);
  CHECK(cert.lambda_l1 == doctest::Approx(0.65).epsilon(1e-15));
  // Definitional identity, exact.
  CHECK(cert.total_bound ==
        parameterization_gap(cert.lipschitz, cert.epsilon, cert.lambda_l1) + cert.v_n);
  CHECK(cert.v_n == v_n(1.0, 500, 4, 0.1));
  CHECK(cert.sample_count == 500);

  // Zero duals: the bound reduces to the sampling term plus L*eps.
  const GapCertificate plain =
      total_gap_certificate(1.0, 10000, 10, 0.5, 1.0, 0.0, DualState::zeros(3));
  CHECK(plain.lambda_l1 == 0.0);
  CHECK(plain.total_bound == plain.v_n);

  // Pure function: identical inputs, identical certificates.
  const GapCertificate again = total_gap_certificate(1.0, 500, 4, 0.1, 2.0, 0.05, duals);
  CHECK(again.v_n == cert.v_n);
  CHECK(again.total_bound == cert.total_bound);
}

TEST_CASE("linear VC dimension reference values") {
  CHECK(linear_vc_dim(4, true) == 5);
  CHECK(linear_vc_dim(4, false) == 4);
}

TEST_CASE("certificate text serialization") {
  testutil::TempDir tmp;
  const GapCertificate cert =
      total_gap_certificate(16.11809565095832, 2000, 177, 0.05, 1.0, 0.1, DualState({0.65}));
  const std::string text = certificate_to_text(cert);
  CHECK(text.find("v_n = ") != std::string::npos);
  CHECK(text.find("lambda_l1 = 0.65\n") != std::string::npos);
  CHECK(text.find("vc_dim = 177\n") != std::string::npos);
  CHECK(text.find("total_bound = ") != std::string::npos);
  write_certificate(cert, tmp.file("cert.txt"));
  CHECK(testutil::read_file(tmp.file("cert.txt")) == text);
}
