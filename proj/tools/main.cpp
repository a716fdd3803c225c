// SPDX-License-Identifier: Apache-2.0
//
// equivar: equivariance audit, gradient checks, and training demos for
// norm-gated vector activations. See README.md for the full interface.

#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "equivar/audit.hpp"
#include "equivar/model_io.hpp"
#include "equivar/rng.hpp"

namespace {

using nlohmann::json;
using namespace equivar;

constexpr int kExitPass = 0;
constexpr int kExitAuditFail = 1;
constexpr int kExitUsage = 2;
constexpr int kExitIo = 3;
constexpr int kExitDivergence = 4;

struct Options {
  std::vector<long long> dims;
  int trials = -1;
  std::uint64_t seed = 0;
  double tolerance = -1.0;
  std::vector<std::string> families;
  std::string task = "identity-fit";
  int steps = -1;
  double lr = -1.0;
  double momentum = -1.0;
  std::string out;
  std::string model;
  std::optional<std::uint64_t> apply_unitary;
};

class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Precedence: built-in defaults < EQUIVAR_SEED < config file < flags.
void apply_env(Options& opts) {
  if (const char* env = std::getenv("EQUIVAR_SEED")) {
    char* end = nullptr;
    const unsigned long long v = std::strtoull(env, &end, 10);
    if (end == env || *end != '\0') {
      throw UsageError("EQUIVAR_SEED is not an unsigned integer: '" + std::string(env) + "'");
    }
    opts.seed = v;
  }
}

void apply_config_file(Options& opts, const std::string& path) {
  std::ifstream in(path);
  if (!in) {
    throw UsageError("cannot open config file '" + path + "'");
  }
  json cfg;
  try {
    cfg = json::parse(in);
  } catch (const json::parse_error& e) {
    throw UsageError("config file is not valid JSON: " + std::string(e.what()));
  }
  if (!cfg.is_object()) {
    throw UsageError("config file must hold a JSON object");
  }
  for (const auto& item : cfg.items()) {
    const std::string& key = item.key();
    const json& v = item.value();
    try {
      if (key == "dim") {
        opts.dims.clear();
        if (v.is_array()) {
          for (const json& d : v) opts.dims.push_back(d.get<long long>());
        } else {
          opts.dims.push_back(v.get<long long>());
        }
      } else if (key == "trials") {
        opts.trials = v.get<int>();
      } else if (key == "seed") {
        opts.seed = v.get<std::uint64_t>();
      } else if (key == "tolerance") {
        opts.tolerance = v.get<double>();
      } else if (key == "families") {
        opts.families.clear();
        if (v.is_array()) {
          for (const json& f : v) opts.families.push_back(f.get<std::string>());
        } else {
          opts.families.push_back(v.get<std::string>());
        }
      } else if (key == "task") {
        opts.task = v.get<std::string>();
      } else if (key == "steps") {
        opts.steps = v.get<int>();
      } else if (key == "lr") {
        opts.lr = v.get<double>();
      } else if (key == "momentum") {
        opts.momentum = v.get<double>();
      } else if (key == "out") {
        opts.out = v.get<std::string>();
      } else if (key == "model") {
        opts.model = v.get<std::string>();
      } else if (key == "apply-unitary") {
        opts.apply_unitary = v.get<std::uint64_t>();
      } else {
        throw UsageError("config file: unknown key '" + key + "'");
      }
    } catch (const json::exception& e) {
      throw UsageError("config file: bad value for '" + key + "': " + e.what());
    }
  }
}

void validate_families(const std::vector<std::string>& families) {
  for (const std::string& f : families) {
    if (f != "softsign_residue" && f != "identity" && f != "leaky_relu_norm" &&
        f != "generalized") {
      throw UsageError("unknown family '" + f +
                       "' (expected softsign_residue, identity, leaky_relu_norm, generalized)");
    }
  }
}

void emit_report(const json& report, const std::string& out_path) {
  std::cout << report.dump(2) << "\n";
  if (!out_path.empty()) {
    std::ofstream out(out_path);
    if (!out) {
      throw std::runtime_error("cannot open report file '" + out_path + "' for writing");
    }
    out << report.dump(2) << "\n";
    if (!out) {
      throw std::runtime_error("write to '" + out_path + "' failed");
    }
  }
}

int cmd_check_equivariance(const Options& opts) {
  validate_families(opts.families);
  AuditConfig cfg;
  cfg.seed = opts.seed;
  if (!opts.dims.empty()) {
    cfg.dims.clear();
    for (long long d : opts.dims) {
      if (d < 1) throw UsageError("--dim must be >= 1");
      cfg.dims.push_back(static_cast<Eigen::Index>(d));
    }
  }
  if (opts.trials >= 0) cfg.trials = opts.trials;
  if (opts.tolerance >= 0.0) cfg.equivariance_tol = opts.tolerance;
  cfg.families = opts.families;

  const AuditReport report = run_equivariance_audit(cfg);

  json doc;
  doc["schema"] = "equivar-act/audit/1";
  doc["command"] = "check-equivariance";
  doc["seed"] = cfg.seed;
  doc["trials"] = cfg.trials;
  doc["dims"] = json::array();
  for (Eigen::Index n : cfg.dims) doc["dims"].push_back(n);
  doc["families"] = cfg.families.empty() ? json::array({"all"}) : json(cfg.families);
  doc["tolerances"] = {{"equivariance", cfg.equivariance_tol},
                       {"gate", cfg.gate_tol},
                       {"recovery", cfg.recovery_tol}};
  doc["equivariance"] = json::array();
  for (const EquivarianceCase& c : report.equivariance) {
    doc["equivariance"].push_back(
        {{"spec", c.label}, {"n", c.n}, {"max_error", c.max_error}, {"pass", c.pass}});
  }
  doc["gate"] = json::array();
  for (const GateCase& c : report.gate) {
    doc["gate"].push_back(
        {{"kappa", c.kappa}, {"n", c.n}, {"max_error", c.max_error}, {"pass", c.pass}});
  }
  doc["recovery"] = json::array();
  for (const RecoveryCase& c : report.recovery) {
    doc["recovery"].push_back({{"pair", c.pair}, {"max_error", c.max_error}, {"pass", c.pass}});
  }
  doc["worst_equivariance"] = report.worst_equivariance();
  doc["pass"] = report.pass();
  doc["runtime_seconds"] = report.runtime_seconds;
  emit_report(doc, opts.out);

  std::cerr << (report.pass() ? "PASS" : "FAIL") << " check-equivariance: worst normalized error "
            << report.worst_equivariance() << " vs tolerance " << cfg.equivariance_tol << " ("
            << report.runtime_seconds << "s)\n";
  return report.pass() ? kExitPass : kExitAuditFail;
}

int cmd_grad_check(const Options& opts) {
  const double tol = opts.tolerance >= 0.0 ? opts.tolerance : 1e-5;
  const GradAuditReport report = run_grad_audit(opts.seed, 1e-6, tol);

  json doc;
  doc["schema"] = "equivar-act/gradreport/1";
  doc["command"] = "grad-check";
  doc["seed"] = opts.seed;
  doc["fd_step"] = 1e-6;
  doc["tolerance"] = tol;
  doc["cases"] = json::array();
  for (const GradAuditResult& c : report.cases) {
    doc["cases"].push_back({{"model", c.label},
                            {"max_error", c.max_error},
                            {"max_abs_error", c.max_abs_error},
                            {"flagged_nodes", c.flagged_nodes},
                            {"pass", c.pass}});
  }
  doc["max_error"] = report.max_error;
  doc["max_abs_error"] = report.max_abs_error;
  doc["pass"] = report.pass();
  doc["runtime_seconds"] = report.runtime_seconds;
  emit_report(doc, opts.out);

  std::cerr << (report.pass() ? "PASS" : "FAIL") << " grad-check: max relative error "
            << report.max_error << " vs tolerance " << tol << " (" << report.runtime_seconds
            << "s)\n";
  return report.pass() ? kExitPass : kExitAuditFail;
}

TaskSpec make_task(const Options& opts) {
  TaskSpec task = default_task(opts.task);  // throws invalid_argument on bad name
  if (!opts.dims.empty()) {
    if (opts.dims.size() != 1 || opts.dims.front() < 1) {
      throw UsageError("train/eval take a single --dim value >= 1");
    }
    task.vector_dim = static_cast<Eigen::Index>(opts.dims.front());
  }
  return task;
}

TrainConfig make_train_config(const Options& opts, const TaskSpec& task) {
  TrainConfig cfg = default_train_config(task);
  cfg.seed = opts.seed;
  if (opts.steps >= 0) cfg.steps = opts.steps;
  if (opts.lr >= 0.0) cfg.learning_rate = opts.lr;
  if (opts.momentum >= 0.0) cfg.momentum = opts.momentum;
  cfg.validate();
  return cfg;
}

int cmd_train(const Options& opts) {
  const TaskSpec task = make_task(opts);
  const TrainConfig cfg = make_train_config(opts, task);

  const TrainResult result = train(cfg, task);

  const std::filesystem::path out_dir = opts.out.empty() ? "train_out" : opts.out;
  std::filesystem::create_directories(out_dir);
  const auto model_path = out_dir / "model.json";
  const auto history_path = out_dir / "history.csv";
  save_model(result.model, model_path);
  {
    std::ofstream csv(history_path);
    if (!csv) {
      throw std::runtime_error("cannot open '" + history_path.string() + "' for writing");
    }
    csv << "step,loss\n";
    char line[64];
    for (std::size_t s = 0; s < result.history.size(); ++s) {
      std::snprintf(line, sizeof(line), "%zu,%.17g\n", s, result.history[s]);
      csv << line;
    }
    if (!csv) {
      throw std::runtime_error("write to '" + history_path.string() + "' failed");
    }
  }

  json doc;
  doc["command"] = "train";
  doc["task"] = task.name;
  doc["seed"] = cfg.seed;
  doc["steps"] = cfg.steps;
  doc["lr"] = cfg.learning_rate;
  doc["momentum"] = cfg.momentum;
  doc["initial_loss"] = result.history.front();
  doc["final_loss"] = result.history.back();
  doc["loss_ratio"] = result.history.back() / result.history.front();
  doc["model"] = model_path.string();
  doc["history"] = history_path.string();
  std::cout << doc.dump(2) << "\n";
  return kExitPass;
}

int cmd_eval(const Options& opts) {
  if (opts.model.empty()) {
    throw UsageError("eval requires --model <file>");
  }
  const ModelParams model = load_model(opts.model);

  TaskSpec task = default_task(opts.task);
  task.vector_dim = model.vector_dim;
  const Dataset data = task_dataset(task, opts.seed);
  if (model.input_channels() != task.channels) {
    throw UsageError("model expects " + std::to_string(model.input_channels()) +
                     " input channels but task '" + task.name + "' provides " +
                     std::to_string(task.channels));
  }

  const double base_loss = dataset_loss(model, data);

  // whole-model equivariance on the task inputs
  const int trials = opts.trials >= 0 ? opts.trials : 50;
  double equivariance_error = 0.0;
  for (int t = 0; t < trials; ++t) {
    const UnitaryMatrix U =
        haar_unitary(model.vector_dim, substream_seed(opts.seed, "eval/U/" + std::to_string(t)));
    for (const Sample& s : data) {
      const ChannelBundle lhs = model_forward(model, apply_unitary_channelwise(U, s.input));
      const ChannelBundle rhs = apply_unitary_channelwise(U, model_forward(model, s.input));
      equivariance_error = std::max(equivariance_error, (lhs - rhs).cwiseAbs().maxCoeff());
    }
  }

  json doc;
  doc["command"] = "eval";
  doc["model"] = opts.model;
  doc["task"] = task.name;
  doc["seed"] = opts.seed;
  doc["loss"] = base_loss;
  doc["equivariance_trials"] = trials;
  doc["equivariance_error"] = equivariance_error;

  if (opts.apply_unitary.has_value()) {
    const UnitaryMatrix U = haar_unitary(model.vector_dim, *opts.apply_unitary);
    Dataset rotated;
    rotated.reserve(data.size());
    for (const Sample& s : data) {
      rotated.push_back(
          {apply_unitary_channelwise(U, s.input), apply_unitary_channelwise(U, s.target)});
    }
    const double rotated_loss = dataset_loss(model, rotated);
    doc["apply_unitary_seed"] = *opts.apply_unitary;
    doc["rotated_loss"] = rotated_loss;
    doc["loss_shift"] = std::abs(rotated_loss - base_loss);
  }

  std::cout << doc.dump(2) << "\n";
  return kExitPass;
}

void add_common_options(CLI::App* cmd, Options& opts) {
  cmd->add_option("--dim", opts.dims, "vector dimension(s)")
      ->check(CLI::PositiveNumber);
  cmd->add_option("--trials", opts.trials, "seeded trials per case")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--seed", opts.seed, "base seed (default: EQUIVAR_SEED or 0)");
  cmd->add_option("--tolerance", opts.tolerance, "override the pass tolerance")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--families", opts.families,
                  "restrict to families (softsign_residue identity leaky_relu_norm generalized)");
  cmd->add_option("--task", opts.task, "identity-fit or teacher-student");
  cmd->add_option("--steps", opts.steps, "SGD steps")->check(CLI::NonNegativeNumber);
  cmd->add_option("--lr", opts.lr, "learning rate")->check(CLI::NonNegativeNumber);
  cmd->add_option("--momentum", opts.momentum, "momentum in [0,1)")
      ->check(CLI::NonNegativeNumber);
  cmd->add_option("--out", opts.out, "output file (reports) or directory (train)");
  cmd->add_option("--model", opts.model, "model file (eval)");
  cmd->add_option("--apply-unitary", opts.apply_unitary,
                  "eval: also score the dataset rotated by a seeded unitary");
  cmd->add_option("--config", "JSON config file mirroring these flags (flags win)")
      ->check(CLI::ExistingFile);
}

}  // namespace

int main(int argc, char** argv) {
  Options opts;

  CLI::App app{"norm-gated unitary-equivariant activations: audits, training demos"};
  app.require_subcommand(1);
  CLI::App* check = app.add_subcommand("check-equivariance",
                                       "audit sigma(Uu) = U sigma(u) over the family grid");
  CLI::App* grad = app.add_subcommand("grad-check", "finite-difference audit of the gradients");
  CLI::App* train_cmd = app.add_subcommand("train", "train a bundled synthetic task");
  CLI::App* eval_cmd = app.add_subcommand("eval", "score a saved model on a seeded dataset");
  for (CLI::App* cmd : {check, grad, train_cmd, eval_cmd}) {
    add_common_options(cmd, opts);
  }

  try {
    apply_env(opts);
    // config file values sit between the environment and explicit flags
    for (int i = 1; i + 1 < argc; ++i) {
      if (std::string(argv[i]) == "--config") {
        apply_config_file(opts, argv[i + 1]);
      }
    }
    try {
      app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
      const int code = app.exit(e);
      return code == 0 ? kExitPass : kExitUsage;
    }

    if (check->parsed()) return cmd_check_equivariance(opts);
    if (grad->parsed()) return cmd_grad_check(opts);
    if (train_cmd->parsed()) return cmd_train(opts);
    if (eval_cmd->parsed()) return cmd_eval(opts);
    return kExitUsage;
  } catch (const UsageError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitUsage;
  } catch (const DivergenceError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitDivergence;
  } catch (const ModelParseError& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitIo;
  }
}
