// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_LINALG_HPP
#define EQUIVAR_LINALG_HPP

#include <complex>
#include <cstdint>
#include <Eigen/Dense>

namespace equivar {

using Complex = std::complex<double>;

/// Element of C^n. Entries must stay finite; operations that require
/// finiteness check it on entry.
using ComplexVector = Eigen::VectorXcd;

using RealVector = Eigen::VectorXd;
using RealMatrix = Eigen::MatrixXd;

bool all_finite(const ComplexVector& u);
bool all_finite(const Eigen::MatrixXcd& m);

/// Euclidean norm sqrt(sum_i |u_i|^2). Exactly 0 for the zero vector;
/// the singularity there is handled by the activation layer, not here.
/// Throws std::invalid_argument on non-finite entries.
double norm(const ComplexVector& u);

/// n x n complex matrix validated to be unitary at construction:
/// ||U^H U - I||_F <= kUnitarityTol.
class UnitaryMatrix {
 public:
  static constexpr double kUnitarityTol = 1e-12;

  explicit UnitaryMatrix(Eigen::MatrixXcd entries);

  Eigen::Index dim() const { return entries_.rows(); }
  const Eigen::MatrixXcd& matrix() const { return entries_; }

  /// ||U^H U - I||_F of a candidate matrix (no throw).
  static double unitarity_defect(const Eigen::MatrixXcd& m);

 private:
  Eigen::MatrixXcd entries_;
};

/// Haar-distributed random unitary. Construction: complex standard-Gaussian
/// matrix, Householder QR, then each column of Q rescaled by the unit phase
/// of the matching diagonal entry of R. Deterministic for fixed (n, seed).
/// Throws std::invalid_argument for n == 0.
UnitaryMatrix haar_unitary(Eigen::Index n, std::uint64_t seed);

/// Matrix-vector product U u. Dimension mismatch throws std::invalid_argument.
ComplexVector apply_unitary(const UnitaryMatrix& U, const ComplexVector& u);

/// Real embedding of C^n as R^2n, interleaved (re0, im0, re1, im1, ...).
/// Round trip is bitwise exact and preserves the Euclidean norm. This is the
/// layout every Jacobian in this library is expressed in.
RealVector to_real_embedding(const ComplexVector& u);
ComplexVector from_real_embedding(const RealVector& v);

/// Standard complex Gaussian vector (each real component N(0,1)),
/// deterministic for fixed (n, seed).
ComplexVector random_complex_vector(Eigen::Index n, std::uint64_t seed);

}  // namespace equivar

#endif  // EQUIVAR_LINALG_HPP
