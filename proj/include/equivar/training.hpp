// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_TRAINING_HPP
#define EQUIVAR_TRAINING_HPP

#include <cstdint>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

#include "equivar/net.hpp"

namespace equivar {

struct TrainConfig {
  double learning_rate = 0.1;
  double momentum = 0.0;  // in [0, 1)
  int steps = 2000;
  std::uint64_t seed = 0;
  int batch_size = 0;  // 0 = full batch; otherwise seeded shuffled mini-batches
  double fd_step = 1e-6;
  double divergence_limit = 1e6;

  void validate() const;
};

/// Shape-congruent with a ModelParams: one real matrix per layer's weights
/// and one real vector per layer's kappas. kappa entries are zero for
/// layers whose family does not use kappa (the parameter is carried but
/// inert there).
struct Gradient {
  std::vector<RealMatrix> weights;
  std::vector<RealVector> kappas;

  static Gradient zeros_like(const ModelParams& m);
  Gradient& operator+=(const Gradient& other);
  Gradient& operator*=(double s);
  double max_abs() const;
  bool all_finite() const;
};

struct Sample {
  ChannelBundle input;
  ChannelBundle target;
};
using Dataset = std::vector<Sample>;

/// Raised when the training loss exceeds TrainConfig::divergence_limit.
class DivergenceError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// sum over channels of ||pred_i - target_i||^2. Unitarily invariant:
/// applying the same U to both sides leaves it unchanged.
/// Shape mismatch throws std::invalid_argument.
double loss(const ChannelBundle& pred, const ChannelBundle& target);

/// Mean of loss(model_forward(m, x), target) over the dataset.
double dataset_loss(const ModelParams& m, const Dataset& data);

/// Reverse-mode gradient of loss(model_forward(m, x), target) for one
/// sample, differentiated through the real embedding. Nonsmooth points use
/// the subgradient convention; flags are surfaced by grad_check, not here.
/// Throws on shape mismatch; non-finite intermediates name the layer.
Gradient backward(const ModelParams& m, const ChannelBundle& x, const ChannelBundle& target);

/// Mean of per-sample gradients; the gradient of dataset_loss.
Gradient dataset_gradient(const ModelParams& m, const Dataset& data);

/// theta <- theta - lr * v with v = momentum * v + g, for all weights and
/// all kappas. velocity must be zeros_like(m) on the first call.
void sgd_step(ModelParams& m, const Gradient& g, const TrainConfig& cfg, Gradient& velocity);

struct TrainResult {
  ModelParams model;
  /// history[s] = dataset loss after s update steps; history.front() is the
  /// initial loss, history.back() the final one.
  std::vector<double> history;
};

/// SGD loop from an explicit initial model and dataset. Deterministic for
/// fixed inputs. Throws DivergenceError when the loss passes the limit.
TrainResult fit(ModelParams model, const Dataset& data, const TrainConfig& cfg);

/// Bundled synthetic tasks.
///   identity-fit:    target = input; one generalized-sigmoid layer whose
///                    trainable kappa must open the gate.
///   teacher-student: targets produced by a seeded teacher of identical
///                    shape, so zero loss is attainable.
struct TaskSpec {
  std::string name;
  Eigen::Index vector_dim = 4;
  Eigen::Index channels = 1;
  int samples = 16;
  std::vector<Eigen::Index> widths;  // channel counts, length = layers + 1
  ActivationSpec activation = ActivationSpec::generalized(ScalarFunction::sigmoid(), 0.0);
};

/// Defaults for "identity-fit" or "teacher-student".
/// Unknown names throw std::invalid_argument.
TaskSpec default_task(std::string_view name);

/// Optimizer settings tuned per task; the CLI falls back to these for flags
/// the user leaves unset.
TrainConfig default_train_config(const TaskSpec& task);

Dataset task_dataset(const TaskSpec& task, std::uint64_t seed);
ModelParams task_initial_model(const TaskSpec& task, std::uint64_t seed);

TrainResult train(const TrainConfig& cfg, const TaskSpec& task);

/// Central-difference audit of backward. Every parameter is perturbed by
/// h = fd_step * max(1, |theta|); entries whose analytic and numeric values
/// both sit below kAbsFloor are compared absolutely.
struct GradCheckEntry {
  int layer = 0;
  bool is_kappa = false;
  Eigen::Index row = 0, col = 0;
  double analytic = 0.0;
  double numeric = 0.0;
  double error = 0.0;  // relative, or absolute below the floor
  bool absolute = false;
};

struct GradCheckReport {
  static constexpr double kAbsFloor = 1e-10;

  std::vector<GradCheckEntry> entries;  // sorted worst-first
  /// Nodes whose pre-activation landed in a nonsmooth guard band, as
  /// (layer, node); their parameters are excluded from the maxima.
  std::vector<std::pair<int, Eigen::Index>> flagged_nodes;
  double max_error = 0.0;      // relative entries (|analytic| >= kAbsFloor)
  double max_abs_error = 0.0;  // near-zero entries, compared at kAbsFloor

  bool pass(double tol) const { return max_error <= tol && max_abs_error <= kAbsFloor; }
};

GradCheckReport grad_check(const ModelParams& m, const Dataset& data, double fd_step = 1e-6);

}  // namespace equivar

#endif  // EQUIVAR_TRAINING_HPP
