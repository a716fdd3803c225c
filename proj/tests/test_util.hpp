// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_TEST_UTIL_HPP
#define EQUIVAR_TEST_UTIL_HPP

#include <cmath>

#include "equivar/activation.hpp"
#include "equivar/net.hpp"
#include "equivar/training.hpp"

namespace equivar::testutil {

// Independent Jacobian oracle: central differences of the activation in the
// real embedding. Never calls activation_jacobian.
inline RealMatrix fd_jacobian(const ActivationSpec& spec, const ComplexVector& u,
                              double step_rel = 1e-6) {
  const RealVector v0 = to_real_embedding(u);
  const double h = step_rel * std::max(1.0, u.norm());
  const Eigen::Index m = v0.size();
  RealMatrix jac(m, m);
  for (Eigen::Index j = 0; j < m; ++j) {
    RealVector vp = v0;
    RealVector vm = v0;
    vp[j] += h;
    vm[j] -= h;
    const RealVector fp = to_real_embedding(apply_activation(spec, from_real_embedding(vp)));
    const RealVector fm = to_real_embedding(apply_activation(spec, from_real_embedding(vm)));
    jac.col(j) = (fp - fm) / (2.0 * h);
  }
  return jac;
}

// Independent gradient oracle: central differences of the dataset loss with
// respect to every parameter. Never calls backward.
inline Gradient fd_gradient(const ModelParams& m, const Dataset& data, double step_rel = 1e-6) {
  Gradient g = Gradient::zeros_like(m);
  ModelParams work = m;
  auto probe = [&](double& theta) {
    const double base = theta;
    const double h = step_rel * std::max(1.0, std::abs(base));
    theta = base + h;
    const double up = dataset_loss(work, data);
    theta = base - h;
    const double down = dataset_loss(work, data);
    theta = base;
    return (up - down) / (2.0 * h);
  };
  for (std::size_t l = 0; l < work.layers.size(); ++l) {
    LayerParams& p = work.layers[l];
    for (Eigen::Index i = 0; i < p.fan_out(); ++i) {
      for (Eigen::Index j = 0; j < p.fan_in(); ++j) {
        g.weights[l](i, j) = probe(p.weights(i, j));
      }
      g.kappas[l][i] = probe(p.kappas[i]);
    }
  }
  return g;
}

inline double max_abs_diff(const ComplexVector& a, const ComplexVector& b) {
  return (a - b).lpNorm<Eigen::Infinity>();
}

inline double max_abs_diff(const ChannelBundle& a, const ChannelBundle& b) {
  return (a - b).cwiseAbs().maxCoeff();
}

// Representative constant grid used by the property suites; mirrors the
// audit matrix in the CLI.
inline std::vector<ActivationSpec> representative_specs() {
  std::vector<ActivationSpec> specs;
  for (double a : {0.0, 0.01, 0.1}) {
    specs.push_back(ActivationSpec::softsign_residue(a));
  }
  specs.push_back(ActivationSpec::identity());
  for (double k : {0.0, 0.1, 0.5}) {
    for (double c : {0.5, 1.0}) {
      specs.push_back(ActivationSpec::leaky_relu_norm(k, c));
    }
  }
  const std::vector<ScalarFunction> profiles = {
      ScalarFunction::sigmoid(),       ScalarFunction::tanh(),
      ScalarFunction::leaky_relu(0.1), ScalarFunction::softsign_residue_profile(0.1),
      ScalarFunction::identity(),
  };
  for (const ScalarFunction& f : profiles) {
    for (double kappa : {-1.0, 0.0, 1.0}) {
      specs.push_back(ActivationSpec::generalized(f, kappa));
    }
  }
  return specs;
}

}  // namespace equivar::testutil

#endif  // EQUIVAR_TEST_UTIL_HPP
