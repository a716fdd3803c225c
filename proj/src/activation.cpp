// SPDX-License-Identifier: Apache-2.0

#include "equivar/activation.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

namespace equivar {

double ScalarFunction::value(double x) const {
  switch (kind) {
    case Kind::sigmoid:
      return 1.0 / (1.0 + std::exp(-x));
    case Kind::tanh:
      return std::tanh(x);
    case Kind::leaky_relu:
      return x >= 0.0 ? x : slope * x;
    case Kind::softsign_residue_profile:
      return 1.0 / (1.0 + x) + residue;  // singular at x == -1
    case Kind::identity:
      return 1.0;
    case Kind::step_leaky:
      return x >= 0.0 ? 1.0 : slope;
  }
  throw std::logic_error("ScalarFunction: bad kind");
}

double ScalarFunction::derivative(double x) const {
  switch (kind) {
    case Kind::sigmoid: {
      const double s = 1.0 / (1.0 + std::exp(-x));
      return s * (1.0 - s);
    }
    case Kind::tanh: {
      const double t = std::tanh(x);
      return 1.0 - t * t;
    }
    case Kind::leaky_relu:
      return x >= 0.0 ? 1.0 : slope;
    case Kind::softsign_residue_profile: {
      const double d = 1.0 + x;
      return -1.0 / (d * d);
    }
    case Kind::identity:
      return 0.0;
    case Kind::step_leaky:
      return 0.0;  // flat on both sides of the jump
  }
  throw std::logic_error("ScalarFunction: bad kind");
}

bool ScalarFunction::nonsmooth_at(double x, double tol) const {
  switch (kind) {
    case Kind::leaky_relu:
    case Kind::step_leaky:
      return std::abs(x) <= tol;
    default:
      return false;
  }
}

std::string_view ScalarFunction::name() const {
  switch (kind) {
    case Kind::sigmoid:
      return "sigmoid";
    case Kind::tanh:
      return "tanh";
    case Kind::leaky_relu:
      return "leaky_relu";
    case Kind::softsign_residue_profile:
      return "softsign_residue_profile";
    case Kind::identity:
      return "identity";
    case Kind::step_leaky:
      return "step_leaky";
  }
  return "?";
}

ScalarFunction ScalarFunction::from_name(std::string_view name, double slope, double residue) {
  if (name == "sigmoid") return sigmoid();
  if (name == "tanh") return tanh();
  if (name == "leaky_relu") return leaky_relu(slope);
  if (name == "softsign_residue_profile") return softsign_residue_profile(residue);
  if (name == "identity") return identity();
  if (name == "step_leaky") return step_leaky(slope);
  throw std::invalid_argument("unknown scalar function: " + std::string(name));
}

ActivationSpec ActivationSpec::softsign_residue(double a) {
  if (!(a >= 0.0) || !std::isfinite(a)) {
    throw std::invalid_argument("softsign_residue: a must be finite and >= 0");
  }
  ActivationSpec s;
  s.family = Family::softsign_residue;
  s.a = a;
  return s;
}

ActivationSpec ActivationSpec::identity() {
  ActivationSpec s;
  s.family = Family::identity;
  return s;
}

ActivationSpec ActivationSpec::leaky_relu_norm(double k, double c) {
  if (!(k >= 0.0 && k < 1.0)) {
    throw std::invalid_argument("leaky_relu_norm: k must satisfy 0 <= k < 1");
  }
  if (!(c >= 0.0) || !std::isfinite(c)) {
    throw std::invalid_argument("leaky_relu_norm: c must be finite and >= 0");
  }
  ActivationSpec s;
  s.family = Family::leaky_relu_norm;
  s.k = k;
  s.c = c;
  return s;
}

ActivationSpec ActivationSpec::generalized(ScalarFunction f, double kappa) {
  if (!std::isfinite(kappa)) {
    throw std::invalid_argument("generalized: kappa must be finite");
  }
  ActivationSpec s;
  s.family = Family::generalized;
  s.f = f;
  s.kappa = kappa;
  return s;
}

ActivationSpec ActivationSpec::with_kappa(double new_kappa) const {
  ActivationSpec s = *this;
  if (s.family == Family::generalized) {
    s.kappa = new_kappa;
  }
  return s;
}

std::string_view ActivationSpec::family_name() const {
  switch (family) {
    case Family::softsign_residue:
      return "softsign_residue";
    case Family::identity:
      return "identity";
    case Family::leaky_relu_norm:
      return "leaky_relu_norm";
    case Family::generalized:
      return "generalized";
  }
  return "?";
}

RadialGate radial_gate(const ActivationSpec& spec, double r) {
  RadialGate g;
  switch (spec.family) {
    case ActivationSpec::Family::softsign_residue: {
      const double d = 1.0 + r;
      g.value = 1.0 / d + spec.a;
      g.slope = -1.0 / (d * d);
      break;
    }
    case ActivationSpec::Family::identity:
      g.value = 1.0;
      g.slope = 0.0;
      break;
    case ActivationSpec::Family::leaky_relu_norm:
      g.value = r >= spec.c ? 1.0 : spec.k;
      g.slope = 0.0;
      g.nonsmooth = std::abs(r - spec.c) <= kNonsmoothGuard * std::max(1.0, spec.c);
      break;
    case ActivationSpec::Family::generalized: {
      const double x = r - spec.kappa;
      g.value = spec.f.value(x);
      g.slope = spec.f.derivative(x);
      g.kappa_active = true;
      g.nonsmooth = spec.f.nonsmooth_at(x);
      break;
    }
  }
  return g;
}

ComplexVector softsign_residue(const ComplexVector& u, double a) {
  if (!(a >= 0.0)) {
    throw std::invalid_argument("softsign_residue: a must be >= 0");
  }
  const double r = norm(u);
  return u / (1.0 + r) + a * u;
}

ComplexVector identity_activation(const ComplexVector& u) { return u; }

ComplexVector leaky_relu_norm(const ComplexVector& u, double k, double c) {
  if (!(k >= 0.0 && k < 1.0) || !(c >= 0.0)) {
    throw std::invalid_argument("leaky_relu_norm: need 0 <= k < 1 and c >= 0");
  }
  // The boundary ||u|| == c belongs to the identity branch.
  if (norm(u) >= c) {
    return u;
  }
  return k * u;
}

double gate_input(const ComplexVector& u, double kappa) { return norm(u) - kappa; }

ComplexVector generalized_activation(const ComplexVector& u, const ScalarFunction& f,
                                     double kappa) {
  return f.value(gate_input(u, kappa)) * u;
}

ComplexVector apply_activation(const ActivationSpec& spec, const ComplexVector& u) {
  switch (spec.family) {
    case ActivationSpec::Family::softsign_residue:
      return softsign_residue(u, spec.a);
    case ActivationSpec::Family::identity:
      return identity_activation(u);
    case ActivationSpec::Family::leaky_relu_norm:
      return leaky_relu_norm(u, spec.k, spec.c);
    case ActivationSpec::Family::generalized:
      return generalized_activation(u, spec.f, spec.kappa);
  }
  throw std::logic_error("ActivationSpec: bad family");
}

ActivationJacobian activation_jacobian(const ActivationSpec& spec, const ComplexVector& u) {
  const double r = norm(u);
  const Eigen::Index m = 2 * u.size();
  ActivationJacobian result;
  if (r < kZeroNormEps) {
    // Radial term dropped at the origin; this is the limit along every ray.
    const RadialGate origin = radial_gate(spec, 0.0);
    result.matrix = origin.value * RealMatrix::Identity(m, m);
    result.subgradient = origin.slope != 0.0 || origin.nonsmooth;
    return result;
  }
  const RadialGate gate = radial_gate(spec, r);
  result.matrix = gate.value * RealMatrix::Identity(m, m);
  if (gate.slope != 0.0) {
    const RealVector v = to_real_embedding(u);
    result.matrix.noalias() += (gate.slope / r) * (v * v.transpose());
  }
  result.subgradient = gate.nonsmooth || (r <= kNonsmoothGuard && gate.slope != 0.0);
  return result;
}

double check_equivariance(const ActivationSpec& spec, const ComplexVector& u,
                          const UnitaryMatrix& U) {
  if (U.dim() != u.size()) {
    throw std::invalid_argument("check_equivariance: dimension mismatch");
  }
  const ComplexVector lhs = apply_activation(spec, apply_unitary(U, u));
  const ComplexVector rhs = U.matrix() * apply_activation(spec, u);
  return (lhs - rhs).lpNorm<Eigen::Infinity>();
}

}  // namespace equivar
