// SPDX-License-Identifier: Apache-2.0

#include "equivar/net.hpp"

#include <stdexcept>
#include <string>

#include "equivar/rng.hpp"

namespace equivar {

void ModelParams::validate() const {
  if (vector_dim < 1) {
    throw std::invalid_argument("ModelParams: vector_dim must be >= 1");
  }
  if (layers.empty()) {
    throw std::invalid_argument("ModelParams: at least one layer required");
  }
  for (std::size_t l = 0; l < layers.size(); ++l) {
    const LayerParams& p = layers[l];
    const std::string where = "layer " + std::to_string(l);
    if (p.fan_in() < 1 || p.fan_out() < 1) {
      throw std::invalid_argument("ModelParams: " + where + " has empty weights");
    }
    if (p.kappas.size() != p.fan_out()) {
      throw std::invalid_argument("ModelParams: " + where + " kappas size " +
                                  std::to_string(p.kappas.size()) + " != fan_out " +
                                  std::to_string(p.fan_out()));
    }
    if (!p.weights.allFinite() || !p.kappas.allFinite()) {
      throw std::invalid_argument("ModelParams: " + where + " has non-finite parameters");
    }
    if (l > 0 && p.fan_in() != layers[l - 1].fan_out()) {
      throw std::invalid_argument("ModelParams: " + where + " fan_in " +
                                  std::to_string(p.fan_in()) + " != previous fan_out " +
                                  std::to_string(layers[l - 1].fan_out()));
    }
  }
}

ChannelBundle layer_forward(const LayerParams& p, const ChannelBundle& x) {
  if (x.cols() != p.fan_in()) {
    throw std::invalid_argument("layer_forward: bundle has " + std::to_string(x.cols()) +
                                " channels, layer expects " + std::to_string(p.fan_in()));
  }
  // Pre-activation: real mixing of the channel columns, u_i = sum_j w_ij x_j.
  ChannelBundle pre = x * p.weights.transpose().cast<Complex>();
  ChannelBundle out(x.rows(), p.fan_out());
  for (Eigen::Index i = 0; i < p.fan_out(); ++i) {
    out.col(i) = apply_activation(p.node_activation(i), pre.col(i));
  }
  return out;
}

ChannelBundle model_forward(const ModelParams& m, const ChannelBundle& x) {
  if (x.rows() != m.vector_dim) {
    throw std::invalid_argument("model_forward: bundle dimension " + std::to_string(x.rows()) +
                                " != vector_dim " + std::to_string(m.vector_dim));
  }
  ChannelBundle cur = x;
  for (const LayerParams& layer : m.layers) {
    cur = layer_forward(layer, cur);
  }
  return cur;
}

ModelParams random_model(Eigen::Index vector_dim, const std::vector<Eigen::Index>& widths,
                         const ActivationSpec& activation, std::uint64_t seed) {
  if (widths.size() < 2) {
    throw std::invalid_argument("random_model: widths must list input and output channels");
  }
  GaussianSource gauss(seed);
  ModelParams m;
  m.vector_dim = vector_dim;
  for (std::size_t l = 0; l + 1 < widths.size(); ++l) {
    LayerParams p;
    const Eigen::Index fan_in = widths[l];
    const Eigen::Index fan_out = widths[l + 1];
    const double scale = 1.0 / std::sqrt(static_cast<double>(fan_in));
    p.weights.resize(fan_out, fan_in);
    for (Eigen::Index i = 0; i < fan_out; ++i) {
      for (Eigen::Index j = 0; j < fan_in; ++j) {
        p.weights(i, j) = scale * gauss();
      }
    }
    p.kappas = RealVector::Zero(fan_out);
    p.activation = activation;
    m.layers.push_back(std::move(p));
  }
  m.validate();
  return m;
}

ChannelBundle apply_unitary_channelwise(const UnitaryMatrix& U, const ChannelBundle& x) {
  if (U.dim() != x.rows()) {
    throw std::invalid_argument("apply_unitary_channelwise: dimension mismatch");
  }
  return U.matrix() * x;
}

ChannelBundle random_bundle(Eigen::Index n, Eigen::Index channels, std::uint64_t seed) {
  GaussianSource gauss(seed);
  ChannelBundle x(n, channels);
  for (Eigen::Index j = 0; j < channels; ++j) {
    for (Eigen::Index i = 0; i < n; ++i) {
      x(i, j) = Complex(gauss(), gauss());
    }
  }
  return x;
}

}  // namespace equivar
