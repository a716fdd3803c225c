// SPDX-License-Identifier: Apache-2.0

#include "equivar/training.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <string>

#include "equivar/rng.hpp"

namespace equivar {

void TrainConfig::validate() const {
  // lr = 0 is valid: no updates, constant loss history
  if (!(learning_rate >= 0.0) || !std::isfinite(learning_rate)) {
    throw std::invalid_argument("TrainConfig: learning_rate must be >= 0");
  }
  if (!(momentum >= 0.0 && momentum < 1.0)) {
    throw std::invalid_argument("TrainConfig: momentum must lie in [0, 1)");
  }
  if (steps < 0) {
    throw std::invalid_argument("TrainConfig: steps must be >= 0");
  }
  if (batch_size < 0) {
    throw std::invalid_argument("TrainConfig: batch_size must be >= 0");
  }
  if (!(fd_step > 0.0)) {
    throw std::invalid_argument("TrainConfig: fd_step must be positive");
  }
}

Gradient Gradient::zeros_like(const ModelParams& m) {
  Gradient g;
  g.weights.reserve(m.layers.size());
  g.kappas.reserve(m.layers.size());
  for (const LayerParams& p : m.layers) {
    g.weights.push_back(RealMatrix::Zero(p.fan_out(), p.fan_in()));
    g.kappas.push_back(RealVector::Zero(p.fan_out()));
  }
  return g;
}

Gradient& Gradient::operator+=(const Gradient& other) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] += other.weights[l];
    kappas[l] += other.kappas[l];
  }
  return *this;
}

Gradient& Gradient::operator*=(double s) {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    weights[l] *= s;
    kappas[l] *= s;
  }
  return *this;
}

double Gradient::max_abs() const {
  double m = 0.0;
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (weights[l].size() > 0) m = std::max(m, weights[l].cwiseAbs().maxCoeff());
    if (kappas[l].size() > 0) m = std::max(m, kappas[l].cwiseAbs().maxCoeff());
  }
  return m;
}

bool Gradient::all_finite() const {
  for (std::size_t l = 0; l < weights.size(); ++l) {
    if (!weights[l].allFinite() || !kappas[l].allFinite()) return false;
  }
  return true;
}

double loss(const ChannelBundle& pred, const ChannelBundle& target) {
  if (pred.rows() != target.rows() || pred.cols() != target.cols()) {
    throw std::invalid_argument("loss: shape mismatch");
  }
  return (pred - target).squaredNorm();
}

double dataset_loss(const ModelParams& m, const Dataset& data) {
  if (data.empty()) {
    throw std::invalid_argument("dataset_loss: empty dataset");
  }
  double total = 0.0;
  for (const Sample& s : data) {
    total += loss(model_forward(m, s.input), s.target);
  }
  return total / static_cast<double>(data.size());
}

namespace {

struct NodeState {
  double radius = 0.0;
  RadialGate gate;
};

struct LayerTrace {
  ChannelBundle input;  // bundle entering the layer
  ChannelBundle pre;    // mixed channels before activation
  std::vector<NodeState> nodes;
};

struct ForwardTrace {
  std::vector<LayerTrace> layers;
  ChannelBundle output;
};

ForwardTrace forward_trace(const ModelParams& m, const ChannelBundle& x) {
  ForwardTrace trace;
  trace.layers.reserve(m.layers.size());
  ChannelBundle cur = x;
  for (const LayerParams& p : m.layers) {
    if (cur.cols() != p.fan_in()) {
      throw std::invalid_argument("forward: channel-count mismatch");
    }
    LayerTrace lt;
    lt.input = cur;
    lt.pre = cur * p.weights.transpose().cast<Complex>();
    lt.nodes.resize(static_cast<std::size_t>(p.fan_out()));
    ChannelBundle out(cur.rows(), p.fan_out());
    for (Eigen::Index i = 0; i < p.fan_out(); ++i) {
      NodeState& node = lt.nodes[static_cast<std::size_t>(i)];
      node.radius = norm(lt.pre.col(i));
      node.gate = radial_gate(p.node_activation(i), node.radius);
      out.col(i) = node.gate.value * lt.pre.col(i);
    }
    trace.layers.push_back(std::move(lt));
    cur = std::move(out);
  }
  trace.output = std::move(cur);
  return trace;
}

// True when the Jacobian at this node is a subgradient: either the gate sits
// in a kink band or the radial term is discontinuous at the origin.
bool node_nonsmooth(const NodeState& node) {
  return node.gate.nonsmooth || (node.radius <= kNonsmoothGuard && node.gate.slope != 0.0);
}

}  // namespace

Gradient backward(const ModelParams& m, const ChannelBundle& x, const ChannelBundle& target) {
  const ForwardTrace trace = forward_trace(m, x);
  if (trace.output.rows() != target.rows() || trace.output.cols() != target.cols()) {
    throw std::invalid_argument("backward: target shape mismatch");
  }

  Gradient g = Gradient::zeros_like(m);
  // Gradients of the loss with respect to complex quantities are carried as
  // complex matrices whose entry holds (dL/d re) + i (dL/d im).
  ChannelBundle grad_out = 2.0 * (trace.output - target);

  for (int l = static_cast<int>(m.layers.size()) - 1; l >= 0; --l) {
    const LayerParams& p = m.layers[static_cast<std::size_t>(l)];
    const LayerTrace& lt = trace.layers[static_cast<std::size_t>(l)];

    // Pull the gradient back through each node's activation:
    //   J^T h = g(r) h + (g'(r)/r) Re<u, h> u,  d sigma/d kappa = -f'(x) u.
    ChannelBundle grad_pre(lt.pre.rows(), lt.pre.cols());
    for (Eigen::Index i = 0; i < p.fan_out(); ++i) {
      const NodeState& node = lt.nodes[static_cast<std::size_t>(i)];
      const auto u = lt.pre.col(i);
      const auto h = grad_out.col(i);
      if (node.radius < kZeroNormEps) {
        grad_pre.col(i) = radial_gate(p.node_activation(i), 0.0).value * h;
        continue;
      }
      const double radial_coupling = u.dot(h).real();  // Re(u^H h)
      grad_pre.col(i) =
          node.gate.value * h + (node.gate.slope / node.radius) * radial_coupling * u;
      if (node.gate.kappa_active) {
        g.kappas[static_cast<std::size_t>(l)][i] = -node.gate.slope * radial_coupling;
      }
      if (!grad_pre.col(i).allFinite()) {
        throw std::runtime_error("backward: non-finite gradient at layer " + std::to_string(l) +
                                 ", node " + std::to_string(i));
      }
    }

    g.weights[static_cast<std::size_t>(l)] = (grad_pre.adjoint() * lt.input).real();
    if (!g.weights[static_cast<std::size_t>(l)].allFinite()) {
      throw std::runtime_error("backward: non-finite weight gradient at layer " +
                               std::to_string(l));
    }
    grad_out = grad_pre * p.weights.cast<Complex>();
  }
  return g;
}

Gradient dataset_gradient(const ModelParams& m, const Dataset& data) {
  if (data.empty()) {
    throw std::invalid_argument("dataset_gradient: empty dataset");
  }
  Gradient acc = Gradient::zeros_like(m);
  for (const Sample& s : data) {
    acc += backward(m, s.input, s.target);
  }
  acc *= 1.0 / static_cast<double>(data.size());
  return acc;
}

void sgd_step(ModelParams& m, const Gradient& g, const TrainConfig& cfg, Gradient& velocity) {
  if (g.weights.size() != m.layers.size() || velocity.weights.size() != m.layers.size()) {
    throw std::invalid_argument("sgd_step: gradient shape mismatch");
  }
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    velocity.weights[l] = cfg.momentum * velocity.weights[l] + g.weights[l];
    velocity.kappas[l] = cfg.momentum * velocity.kappas[l] + g.kappas[l];
    m.layers[l].weights -= cfg.learning_rate * velocity.weights[l];
    m.layers[l].kappas -= cfg.learning_rate * velocity.kappas[l];
  }
}

namespace {

// Deterministic Fisher-Yates; std::shuffle is implementation-defined.
void shuffle_indices(std::vector<std::size_t>& order, std::mt19937_64& engine) {
  for (std::size_t i = order.size(); i > 1; --i) {
    const std::size_t j = static_cast<std::size_t>(engine() % i);
    std::swap(order[i - 1], order[j]);
  }
}

}  // namespace

TrainResult fit(ModelParams model, const Dataset& data, const TrainConfig& cfg) {
  cfg.validate();
  model.validate();
  if (data.empty()) {
    throw std::invalid_argument("fit: empty dataset");
  }

  TrainResult result;
  result.history.reserve(static_cast<std::size_t>(cfg.steps) + 1);
  result.history.push_back(dataset_loss(model, data));

  Gradient velocity = Gradient::zeros_like(model);
  const std::size_t batch =
      cfg.batch_size == 0 ? data.size()
                          : std::min<std::size_t>(static_cast<std::size_t>(cfg.batch_size),
                                                  data.size());
  std::vector<std::size_t> order(data.size());
  std::iota(order.begin(), order.end(), std::size_t{0});
  std::mt19937_64 shuffle_engine(substream_seed(cfg.seed, "fit/shuffle"));
  std::size_t cursor = 0;

  for (int step = 0; step < cfg.steps; ++step) {
    Gradient g = Gradient::zeros_like(model);
    if (batch == data.size()) {
      g = dataset_gradient(model, data);
    } else {
      for (std::size_t b = 0; b < batch; ++b) {
        // a fresh permutation every time the order wraps
        if (cursor == 0) shuffle_indices(order, shuffle_engine);
        g += backward(model, data[order[cursor]].input, data[order[cursor]].target);
        cursor = (cursor + 1) % data.size();
      }
      g *= 1.0 / static_cast<double>(batch);
    }
    sgd_step(model, g, cfg, velocity);
    // Full-dataset loss every step, so histories stay comparable across runs.
    const double current = dataset_loss(model, data);
    result.history.push_back(current);
    if (!(current <= cfg.divergence_limit)) {
      throw DivergenceError("training diverged at step " + std::to_string(step + 1) +
                            ": loss = " + std::to_string(current));
    }
  }
  result.model = std::move(model);
  return result;
}

TaskSpec default_task(std::string_view name) {
  TaskSpec task;
  task.name = std::string(name);
  if (name == "identity-fit") {
    task.vector_dim = 4;
    task.channels = 1;
    task.samples = 16;
    task.widths = {1, 1};
    task.activation = ActivationSpec::generalized(ScalarFunction::sigmoid(), 0.0);
    return task;
  }
  if (name == "teacher-student") {
    task.vector_dim = 4;
    task.channels = 2;
    task.samples = 32;
    task.widths = {2, 2};
    task.activation = ActivationSpec::generalized(ScalarFunction::sigmoid(), 0.0);
    return task;
  }
  throw std::invalid_argument("unknown task '" + std::string(name) +
                              "' (expected identity-fit or teacher-student)");
}

TrainConfig default_train_config(const TaskSpec& task) {
  TrainConfig cfg;
  if (task.name == "teacher-student") {
    // momentum is what gets the student past the row-sign saddle
    cfg.learning_rate = 0.05;
    cfg.momentum = 0.9;
    cfg.steps = 6000;
  } else {
    cfg.learning_rate = 0.1;
    cfg.momentum = 0.0;
    cfg.steps = 2000;
  }
  return cfg;
}

namespace {

ModelParams task_teacher_model(const TaskSpec& task, std::uint64_t seed) {
  ModelParams teacher = random_model(task.vector_dim, task.widths, task.activation,
                                     substream_seed(seed, "task/" + task.name + "/teacher"));
  // Nonzero teacher kappas, so the student has to learn them.
  GaussianSource gauss(substream_seed(seed, "task/" + task.name + "/teacher-kappa"));
  for (LayerParams& p : teacher.layers) {
    for (Eigen::Index i = 0; i < p.kappas.size(); ++i) {
      p.kappas[i] = 0.5 * gauss();
    }
  }
  return teacher;
}

}  // namespace

Dataset task_dataset(const TaskSpec& task, std::uint64_t seed) {
  if (task.widths.size() < 2 || task.widths.front() != task.channels) {
    throw std::invalid_argument("task_dataset: widths must start at the input channel count");
  }
  Dataset data;
  data.reserve(static_cast<std::size_t>(task.samples));
  const std::uint64_t data_seed = substream_seed(seed, "task/" + task.name + "/data");
  for (int s = 0; s < task.samples; ++s) {
    Sample sample;
    sample.input = random_bundle(task.vector_dim, task.channels,
                                 substream_seed(data_seed, "sample/" + std::to_string(s)));
    data.push_back(std::move(sample));
  }
  if (task.name == "teacher-student") {
    const ModelParams teacher = task_teacher_model(task, seed);
    for (Sample& s : data) {
      s.target = model_forward(teacher, s.input);
    }
  } else {
    for (Sample& s : data) {
      s.target = s.input;
    }
  }
  return data;
}

ModelParams task_initial_model(const TaskSpec& task, std::uint64_t seed) {
  return random_model(task.vector_dim, task.widths, task.activation,
                      substream_seed(seed, "task/" + task.name + "/init"));
}

TrainResult train(const TrainConfig& cfg, const TaskSpec& task) {
  return fit(task_initial_model(task, cfg.seed), task_dataset(task, cfg.seed), cfg);
}

GradCheckReport grad_check(const ModelParams& m, const Dataset& data, double fd_step) {
  if (!(fd_step > 0.0)) {
    throw std::invalid_argument("grad_check: fd_step must be positive");
  }
  GradCheckReport report;

  // Flag nodes whose pre-activation sits in a nonsmooth guard band for any
  // sample; their parameters are excluded from the pass/fail verdict.
  std::vector<std::vector<bool>> flagged(m.layers.size());
  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    flagged[l].assign(static_cast<std::size_t>(m.layers[l].fan_out()), false);
  }
  for (const Sample& s : data) {
    const ForwardTrace trace = forward_trace(m, s.input);
    for (std::size_t l = 0; l < trace.layers.size(); ++l) {
      for (std::size_t i = 0; i < trace.layers[l].nodes.size(); ++i) {
        if (node_nonsmooth(trace.layers[l].nodes[i])) flagged[l][i] = true;
      }
    }
  }
  for (std::size_t l = 0; l < flagged.size(); ++l) {
    for (std::size_t i = 0; i < flagged[l].size(); ++i) {
      if (flagged[l][i]) {
        report.flagged_nodes.emplace_back(static_cast<int>(l), static_cast<Eigen::Index>(i));
      }
    }
  }

  const Gradient analytic = dataset_gradient(m, data);

  auto probe = [&](int layer, bool is_kappa, Eigen::Index row, Eigen::Index col,
                   double analytic_value) {
    ModelParams probe_model = m;
    double& theta = is_kappa ? probe_model.layers[static_cast<std::size_t>(layer)].kappas[row]
                             : probe_model.layers[static_cast<std::size_t>(layer)].weights(row, col);
    const double h = fd_step * std::max(1.0, std::abs(theta));
    const double base = theta;
    theta = base + h;
    const double up = dataset_loss(probe_model, data);
    theta = base - h;
    const double down = dataset_loss(probe_model, data);

    GradCheckEntry entry;
    entry.layer = layer;
    entry.is_kappa = is_kappa;
    entry.row = row;
    entry.col = col;
    entry.analytic = analytic_value;
    entry.numeric = (up - down) / (2.0 * h);
    // near-zero analytic components are held to the absolute floor instead
    // of a meaningless relative ratio
    if (std::abs(entry.analytic) < GradCheckReport::kAbsFloor) {
      entry.absolute = true;
      entry.error = std::abs(entry.analytic - entry.numeric);
    } else {
      entry.error = std::abs(entry.analytic - entry.numeric) /
                    std::max(std::abs(entry.analytic), std::abs(entry.numeric));
    }
    const bool excluded = flagged[static_cast<std::size_t>(layer)][static_cast<std::size_t>(row)];
    if (!excluded) {
      if (entry.absolute) {
        report.max_abs_error = std::max(report.max_abs_error, entry.error);
      } else {
        report.max_error = std::max(report.max_error, entry.error);
      }
    }
    report.entries.push_back(entry);
  };

  for (std::size_t l = 0; l < m.layers.size(); ++l) {
    const LayerParams& p = m.layers[l];
    for (Eigen::Index i = 0; i < p.fan_out(); ++i) {
      for (Eigen::Index j = 0; j < p.fan_in(); ++j) {
        probe(static_cast<int>(l), false, i, j, analytic.weights[l](i, j));
      }
      probe(static_cast<int>(l), true, i, 0, analytic.kappas[l][i]);
    }
  }

  std::sort(report.entries.begin(), report.entries.end(),
            [](const GradCheckEntry& a, const GradCheckEntry& b) { return a.error > b.error; });
  return report;
}

}  // namespace equivar
