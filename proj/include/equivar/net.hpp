// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_NET_HPP
#define EQUIVAR_NET_HPP

#include <cstdint>
#include <vector>

#include "equivar/activation.hpp"
#include "equivar/linalg.hpp"

namespace equivar {

/// A bundle of m vector-valued channels, stored as the columns of an
/// n x m complex matrix. Uniform channel dimension is structural.
using ChannelBundle = Eigen::MatrixXcd;

/// One layer: real mixing weights over channels (no additive bias — a bias
/// would break the equivariance contract; kappa is the bias analog),
/// followed by a per-node activation. kappas holds one value per output
/// node; it overrides the template's kappa when the family is generalized
/// and is inert otherwise.
struct LayerParams {
  // TODO: complex mixing weights commute with U too, but need a model-file
  // schema bump before they can land here.
  RealMatrix weights;  // m_out x m_in
  RealVector kappas;   // m_out
  ActivationSpec activation;

  Eigen::Index fan_in() const { return weights.cols(); }
  Eigen::Index fan_out() const { return weights.rows(); }

  ActivationSpec node_activation(Eigen::Index node) const {
    return activation.with_kappa(kappas[node]);
  }
};

struct ModelParams {
  Eigen::Index vector_dim = 0;
  std::vector<LayerParams> layers;

  Eigen::Index input_channels() const { return layers.front().fan_in(); }
  Eigen::Index output_channels() const { return layers.back().fan_out(); }

  /// Throws std::invalid_argument on width-chain mismatch, non-finite
  /// parameters, empty layers, or vector_dim < 1.
  void validate() const;
};

/// Node i output: sigma_i( sum_j weights(i,j) x_j ) with node i's kappa.
/// Channel-count mismatch throws std::invalid_argument.
ChannelBundle layer_forward(const LayerParams& p, const ChannelBundle& x);

/// Sequential composition of layer_forward.
ChannelBundle model_forward(const ModelParams& m, const ChannelBundle& x);

/// Fresh model with weights ~ N(0, 1/m_in) and kappa = 0, deterministic for
/// a fixed seed. widths is the channel count per layer boundary:
/// {m_0, m_1, ..., m_L} gives L layers.
ModelParams random_model(Eigen::Index vector_dim, const std::vector<Eigen::Index>& widths,
                         const ActivationSpec& activation, std::uint64_t seed);

/// U applied to every channel of the bundle.
ChannelBundle apply_unitary_channelwise(const UnitaryMatrix& U, const ChannelBundle& x);

/// Seeded Gaussian bundle (n x channels).
ChannelBundle random_bundle(Eigen::Index n, Eigen::Index channels, std::uint64_t seed);

}  // namespace equivar

#endif  // EQUIVAR_NET_HPP
