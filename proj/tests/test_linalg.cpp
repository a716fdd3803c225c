// SPDX-License-Identifier: Apache-2.0

#include <doctest.h>

#include <cmath>
#include <limits>

#include "equivar/linalg.hpp"
#include "equivar/rng.hpp"
#include "test_util.hpp"

using namespace equivar;

TEST_SUITE_BEGIN("linalg");

TEST_CASE("norm: zero vector is exactly zero") {
  ComplexVector u = ComplexVector::Zero(2);
  CHECK(norm(u) == 0.0);
}

TEST_CASE("norm: pythagorean triple") {
  ComplexVector u(2);
  u << Complex(3.0, 0.0), Complex(0.0, 4.0);
  CHECK(norm(u) == doctest::Approx(5.0).epsilon(1e-15));
}

TEST_CASE("norm: single entry 1+1i") {
  ComplexVector u(1);
  u << Complex(1.0, 1.0);
  // independent scalar evaluation sqrt(1^2 + 1^2)
  CHECK(norm(u) == doctest::Approx(std::sqrt(2.0)).epsilon(1e-15));
}

TEST_CASE("norm: non-finite entries rejected") {
  ComplexVector u(2);
  u << Complex(1.0, 0.0), Complex(std::numeric_limits<double>::quiet_NaN(), 0.0);
  CHECK_THROWS_AS(norm(u), std::invalid_argument);
  u[1] = Complex(0.0, std::numeric_limits<double>::infinity());
  CHECK_THROWS_AS(norm(u), std::invalid_argument);
}

TEST_CASE("haar_unitary: 1x1 is a unit phase") {
  for (std::uint64_t seed : {0ull, 7ull, 123456789ull}) {
    const UnitaryMatrix u = haar_unitary(1, seed);
    CHECK(std::abs(std::abs(u.matrix()(0, 0)) - 1.0) <= 1e-14);
  }
}

TEST_CASE("haar_unitary: unitarity bound at n=8, seed=42") {
  const UnitaryMatrix u = haar_unitary(8, 42);
  CHECK(UnitaryMatrix::unitarity_defect(u.matrix()) <= 1e-12);
}

TEST_CASE("haar_unitary: deterministic bit-for-bit") {
  const UnitaryMatrix a = haar_unitary(4, 2024);
  const UnitaryMatrix b = haar_unitary(4, 2024);
  CHECK(a.matrix() == b.matrix());
  const UnitaryMatrix c = haar_unitary(4, 2025);
  CHECK(a.matrix() != c.matrix());
}

TEST_CASE("haar_unitary: n=0 rejected") {
  CHECK_THROWS_AS(haar_unitary(0, 1), std::invalid_argument);
}

TEST_CASE("haar_unitary: unitarity across sizes and seeds") {
  for (Eigen::Index n : {1, 2, 8, 64}) {
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const UnitaryMatrix u = haar_unitary(n, substream_seed(seed, "unitarity"));
      CHECK(UnitaryMatrix::unitarity_defect(u.matrix()) <= 1e-12);
    }
  }
}

TEST_CASE("haar_unitary: twirl of a fixed state approaches the maximally mixed one") {
  // For Haar-distributed U, the average of U rho U^H over samples tends to
  // tr(rho)/n * I; a biased sampler (e.g. QR without the phase fix) does not.
  const Eigen::Index n = 3;
  Eigen::MatrixXcd rho = Eigen::MatrixXcd::Zero(n, n);
  rho(0, 0) = 0.2;
  rho(1, 1) = 0.5;
  rho(2, 2) = 0.3;
  Eigen::MatrixXcd twirled = Eigen::MatrixXcd::Zero(n, n);
  const int samples = 4000;
  for (int s = 0; s < samples; ++s) {
    const Eigen::MatrixXcd& u =
        haar_unitary(n, substream_seed(s, "twirl")).matrix();
    twirled += u * rho * u.adjoint();
  }
  twirled /= samples;
  const double err =
      (twirled - Eigen::MatrixXcd::Identity(n, n) / 3.0).cwiseAbs().maxCoeff();
  CHECK(err < 3.0 / std::sqrt(double(samples)));
}

TEST_CASE("haar_unitary: entry moments match the uniform measure") {
  // E[U_ij] = 0 and E[|U_ij|^2] = 1/n under the Haar measure.
  const Eigen::Index n = 4;
  const int samples = 3000;
  Complex mean = 0.0;
  double mean_sq = 0.0;
  for (int s = 0; s < samples; ++s) {
    const Eigen::MatrixXcd& u = haar_unitary(n, substream_seed(s, "moments")).matrix();
    mean += u.sum();
    mean_sq += u.cwiseAbs2().sum();
  }
  mean /= double(samples) * double(n * n);
  mean_sq /= double(samples) * double(n * n);
  CHECK(std::abs(mean) < 0.01);
  CHECK(mean_sq == doctest::Approx(1.0 / double(n)).epsilon(0.02));
}

TEST_CASE("UnitaryMatrix: rejects non-unitary input") {
  Eigen::MatrixXcd m = Eigen::MatrixXcd::Identity(3, 3);
  m(0, 0) = Complex(1.5, 0.0);
  CHECK_THROWS_AS(UnitaryMatrix{m}, std::invalid_argument);
  CHECK_THROWS_AS(UnitaryMatrix{Eigen::MatrixXcd::Zero(2, 3)}, std::invalid_argument);
}

TEST_CASE("apply_unitary: identity leaves u unchanged") {
  const UnitaryMatrix eye(Eigen::MatrixXcd::Identity(3, 3));
  const ComplexVector u = random_complex_vector(3, 5);
  CHECK(apply_unitary(eye, u) == u);
}

TEST_CASE("apply_unitary: diagonal phase") {
  Eigen::MatrixXcd d = Eigen::MatrixXcd::Zero(2, 2);
  d(0, 0) = Complex(0.0, 1.0);
  d(1, 1) = Complex(0.0, 1.0);
  const UnitaryMatrix u(d);
  ComplexVector v(2);
  v << Complex(1.0, 0.0), Complex(1.0, 0.0);
  const ComplexVector w = apply_unitary(u, v);
  CHECK(w(0) == Complex(0.0, 1.0));
  CHECK(w(1) == Complex(0.0, 1.0));
}

TEST_CASE("apply_unitary: norm preservation") {
  for (Eigen::Index n : {1, 2, 8, 64}) {
    for (std::uint64_t trial = 0; trial < 20; ++trial) {
      const UnitaryMatrix u = haar_unitary(n, substream_seed(trial, "np/U"));
      const ComplexVector v = random_complex_vector(n, substream_seed(trial, "np/u"));
      const double r = norm(v);
      CHECK(std::abs(norm(apply_unitary(u, v)) - r) <= 1e-12 * std::max(1.0, r));
    }
  }
}

TEST_CASE("apply_unitary: dimension mismatch rejected") {
  const UnitaryMatrix u = haar_unitary(3, 1);
  CHECK_THROWS_AS(apply_unitary(u, random_complex_vector(4, 1)), std::invalid_argument);
}

TEST_CASE("real embedding: interleaved layout") {
  ComplexVector u(2);
  u << Complex(1.0, 2.0), Complex(3.0, 4.0);
  const RealVector v = to_real_embedding(u);
  REQUIRE(v.size() == 4);
  CHECK(v[0] == 1.0);
  CHECK(v[1] == 2.0);
  CHECK(v[2] == 3.0);
  CHECK(v[3] == 4.0);
}

TEST_CASE("real embedding: bitwise round-trip and norm equality") {
  for (Eigen::Index n : {1, 2, 8, 64}) {
    for (std::uint64_t trial = 0; trial < 1000; ++trial) {
      const ComplexVector u =
          random_complex_vector(n, substream_seed(trial, "embed/n=" + std::to_string(n)));
      const RealVector v = to_real_embedding(u);
      CHECK(from_real_embedding(v) == u);
      const double r = u.norm();
      CHECK(std::abs(v.norm() - r) <= 1e-15 * std::max(1.0, r));
    }
  }
}

TEST_CASE("from_real_embedding: odd length rejected") {
  CHECK_THROWS_AS(from_real_embedding(RealVector::Ones(3)), std::invalid_argument);
}

TEST_CASE("substream_seed: stable and name-sensitive") {
  CHECK(substream_seed(42, "a") == substream_seed(42, "a"));
  CHECK(substream_seed(42, "a") != substream_seed(42, "b"));
  CHECK(substream_seed(42, "a") != substream_seed(43, "a"));
}

TEST_CASE("GaussianSource: deterministic, sane moments") {
  GaussianSource g1(7);
  GaussianSource g2(7);
  double mean = 0.0;
  double var = 0.0;
  const int count = 20000;
  for (int i = 0; i < count; ++i) {
    const double x = g1();
    CHECK(x == g2());
    mean += x;
    var += x * x;
  }
  mean /= count;
  var = var / count - mean * mean;
  CHECK(std::abs(mean) < 0.03);
  CHECK(std::abs(var - 1.0) < 0.05);
}

TEST_SUITE_END();
