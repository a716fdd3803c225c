// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_ACTIVATION_HPP
#define EQUIVAR_ACTIVATION_HPP

#include <string>
#include <string_view>

#include "equivar/linalg.hpp"

namespace equivar {

// Points closer to a kink than this (relative to the kink location) are
// treated as nonsmooth by Jacobians and gradient checks; central
// differences straddle the kink otherwise.
inline constexpr double kNonsmoothGuard = 1e-8;

// Below this norm the radial Jacobian term is dropped (subgradient at the
// origin): J = g(0) * I, the limit along every ray when g' is bounded.
inline constexpr double kZeroNormEps = 1e-12;

/// Closed registry of scalar gate profiles f: R -> R used by the
/// generalized activation sigma(u) = f(||u|| - kappa) u. Enumerated kinds
/// keep every Jacobian analytic; arbitrary user callables are out of scope.
struct ScalarFunction {
  enum class Kind {
    sigmoid,
    tanh,
    leaky_relu,                // x >= 0 ? x : slope * x; kink at 0
    softsign_residue_profile,  // 1/(1+x) + residue; pole at x = -1
    identity,                  // constant 1: makes the activation the identity map
    step_leaky,                // x >= 0 ? 1 : slope; jump at 0
  };

  Kind kind = Kind::identity;
  double slope = 0.0;    // leaky_relu, step_leaky
  double residue = 0.0;  // softsign_residue_profile

  static ScalarFunction sigmoid() { return {Kind::sigmoid}; }
  static ScalarFunction tanh() { return {Kind::tanh}; }
  static ScalarFunction leaky_relu(double slope) { return {Kind::leaky_relu, slope}; }
  static ScalarFunction softsign_residue_profile(double residue) {
    return {Kind::softsign_residue_profile, 0.0, residue};
  }
  static ScalarFunction identity() { return {Kind::identity}; }
  static ScalarFunction step_leaky(double slope) { return {Kind::step_leaky, slope}; }

  double value(double x) const;

  /// Analytic derivative. At the kinks of leaky_relu and step_leaky the
  /// x >= 0 branch is used (same convention as the branch assignment).
  double derivative(double x) const;

  /// True when x lies within tol * max(1, kink scale) of a nonsmooth point.
  bool nonsmooth_at(double x, double tol = kNonsmoothGuard) const;

  std::string_view name() const;
  static ScalarFunction from_name(std::string_view name, double slope = 0.1,
                                  double residue = 0.1);

  bool operator==(const ScalarFunction&) const = default;
};

/// Which activation family a node applies, with its constants. The three
/// concrete families keep their own constants; kappa belongs to the
/// generalized form only.
struct ActivationSpec {
  enum class Family {
    softsign_residue,  // u/(1+||u||) + a u
    identity,          // u
    leaky_relu_norm,   // u if ||u|| >= c, else k u
    generalized,       // f(||u|| - kappa) u
  };

  Family family = Family::identity;
  double a = 0.0;      // softsign_residue, a >= 0
  double k = 0.0;      // leaky_relu_norm, 0 <= k < 1
  double c = 0.0;      // leaky_relu_norm, c >= 0
  ScalarFunction f{};  // generalized
  double kappa = 0.0;  // generalized, any finite real

  static ActivationSpec softsign_residue(double a);
  static ActivationSpec identity();
  static ActivationSpec leaky_relu_norm(double k, double c);
  static ActivationSpec generalized(ScalarFunction f, double kappa);

  /// Copy with kappa replaced; used for per-node overrides. No effect on
  /// the concrete families.
  ActivationSpec with_kappa(double kappa) const;

  std::string_view family_name() const;

  bool operator==(const ActivationSpec&) const = default;
};

/// Scalar gate g and its radial derivative g' at radius r = ||u||, such
/// that sigma(u) = g(r) u for every family. Powers Jacobians and the
/// backward pass.
struct RadialGate {
  double value = 0.0;
  double slope = 0.0;         // dg/dr (subgradient convention at kinks)
  bool kappa_active = false;  // true iff d sigma / d kappa is nonzero (generalized)
  bool nonsmooth = false;     // r within the guard band of a kink of g
};

RadialGate radial_gate(const ActivationSpec& spec, double r);

// The activation family, exactly as written: each concrete family computes
// its own expression. The generalized form is a separate route, so the
// recovery tests compare two independent computations.

/// u/(1+||u||) + a u. Throws std::invalid_argument for a < 0.
ComplexVector softsign_residue(const ComplexVector& u, double a);

/// u, unchanged bit for bit.
ComplexVector identity_activation(const ComplexVector& u);

/// u when ||u|| >= c (boundary included), else k u.
/// Throws std::invalid_argument unless 0 <= k < 1 and c >= 0.
ComplexVector leaky_relu_norm(const ComplexVector& u, double k, double c);

/// The unitary-invariant gate value x = ||u|| - kappa. May be negative.
double gate_input(const ComplexVector& u, double kappa);

/// sigma(u) = f(x(u)) u with x = ||u|| - kappa.
ComplexVector generalized_activation(const ComplexVector& u, const ScalarFunction& f,
                                     double kappa);

/// Dispatch on spec.family.
ComplexVector apply_activation(const ActivationSpec& spec, const ComplexVector& u);

/// Jacobian of the activation in the real embedding (2n x 2n):
///   J = g(r) I + (g'(r)/r) v v^T,  v = to_real_embedding(u), r = ||u||.
/// At r < kZeroNormEps the radial term is dropped: J = g(0) I.
/// subgradient is set when the evaluation point lies in the guard band of a
/// nonsmooth point; the matrix then uses the subgradient convention.
struct ActivationJacobian {
  RealMatrix matrix;
  bool subgradient = false;
};

ActivationJacobian activation_jacobian(const ActivationSpec& spec, const ComplexVector& u);

/// || sigma(U u) - U sigma(u) ||_inf, both sides evaluated independently.
/// Dimension mismatch throws std::invalid_argument.
double check_equivariance(const ActivationSpec& spec, const ComplexVector& u,
                          const UnitaryMatrix& U);

}  // namespace equivar

#endif  // EQUIVAR_ACTIVATION_HPP
