// SPDX-License-Identifier: Apache-2.0

#include "equivar/linalg.hpp"

#include <cmath>
#include <stdexcept>

#include "equivar/rng.hpp"

namespace equivar {

bool all_finite(const ComplexVector& u) {
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    if (!std::isfinite(u[i].real()) || !std::isfinite(u[i].imag())) return false;
  }
  return true;
}

bool all_finite(const Eigen::MatrixXcd& m) {
  for (Eigen::Index j = 0; j < m.cols(); ++j) {
    for (Eigen::Index i = 0; i < m.rows(); ++i) {
      if (!std::isfinite(m(i, j).real()) || !std::isfinite(m(i, j).imag())) return false;
    }
  }
  return true;
}

double norm(const ComplexVector& u) {
  if (!all_finite(u)) {
    throw std::invalid_argument("norm: non-finite entry");
  }
  return u.norm();
}

UnitaryMatrix::UnitaryMatrix(Eigen::MatrixXcd entries) : entries_(std::move(entries)) {
  if (entries_.rows() != entries_.cols() || entries_.rows() < 1) {
    throw std::invalid_argument("UnitaryMatrix: matrix must be square and nonempty");
  }
  const double defect = unitarity_defect(entries_);
  if (!(defect <= kUnitarityTol)) {
    throw std::invalid_argument("UnitaryMatrix: ||U^H U - I||_F = " + std::to_string(defect) +
                                " exceeds tolerance");
  }
}

double UnitaryMatrix::unitarity_defect(const Eigen::MatrixXcd& m) {
  const Eigen::Index n = m.rows();
  return (m.adjoint() * m - Eigen::MatrixXcd::Identity(n, n)).norm();
}

UnitaryMatrix haar_unitary(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("haar_unitary: n must be >= 1");
  }
  GaussianSource gauss(seed);
  Eigen::MatrixXcd a(n, n);
  for (Eigen::Index i = 0; i < n; ++i) {
    for (Eigen::Index j = 0; j < n; ++j) {
      a(i, j) = Complex(gauss(), gauss());
    }
  }
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(a);
  Eigen::MatrixXcd q = qr.householderQ();
  const Eigen::MatrixXcd& qrMat = qr.matrixQR();
  // Fixing each column's phase to the matching R diagonal makes the map
  // A -> Q unique, which is what turns "some QR factor" into Haar.
  for (Eigen::Index j = 0; j < n; ++j) {
    const Complex rjj = qrMat(j, j);
    const double mag = std::abs(rjj);
    if (mag > 0.0) {
      q.col(j) *= rjj / mag;
    }
  }
  return UnitaryMatrix(std::move(q));
}

ComplexVector apply_unitary(const UnitaryMatrix& U, const ComplexVector& u) {
  if (U.dim() != u.size()) {
    throw std::invalid_argument("apply_unitary: dimension mismatch");
  }
  return U.matrix() * u;
}

RealVector to_real_embedding(const ComplexVector& u) {
  RealVector v(2 * u.size());
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    v[2 * i] = u[i].real();
    v[2 * i + 1] = u[i].imag();
  }
  return v;
}

ComplexVector from_real_embedding(const RealVector& v) {
  if (v.size() % 2 != 0) {
    throw std::invalid_argument("from_real_embedding: length must be even");
  }
  ComplexVector u(v.size() / 2);
  for (Eigen::Index i = 0; i < u.size(); ++i) {
    u[i] = Complex(v[2 * i], v[2 * i + 1]);
  }
  return u;
}

ComplexVector random_complex_vector(Eigen::Index n, std::uint64_t seed) {
  if (n < 1) {
    throw std::invalid_argument("random_complex_vector: n must be >= 1");
  }
  GaussianSource gauss(seed);
  ComplexVector u(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    u[i] = Complex(gauss(), gauss());
  }
  return u;
}

}  // namespace equivar
