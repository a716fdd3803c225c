// SPDX-License-Identifier: Apache-2.0

#include "equivar/audit.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>
#include <map>

#include "equivar/rng.hpp"

namespace equivar {

namespace {

std::string num(double v) {
  char buf[32];
  std::snprintf(buf, sizeof(buf), "%g", v);
  return buf;
}

bool family_selected(const AuditConfig& cfg, const ActivationSpec& spec) {
  if (cfg.families.empty()) return true;
  for (const std::string& f : cfg.families) {
    if (f == spec.family_name()) return true;
  }
  return false;
}

}  // namespace

std::vector<ActivationSpec> audit_spec_grid() {
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

std::string spec_label(const ActivationSpec& spec) {
  switch (spec.family) {
    case ActivationSpec::Family::softsign_residue:
      return "softsign_residue(a=" + num(spec.a) + ")";
    case ActivationSpec::Family::identity:
      return "identity";
    case ActivationSpec::Family::leaky_relu_norm:
      return "leaky_relu_norm(k=" + num(spec.k) + ",c=" + num(spec.c) + ")";
    case ActivationSpec::Family::generalized: {
      std::string f = std::string(spec.f.name());
      if (spec.f.kind == ScalarFunction::Kind::leaky_relu ||
          spec.f.kind == ScalarFunction::Kind::step_leaky) {
        f += "(" + num(spec.f.slope) + ")";
      } else if (spec.f.kind == ScalarFunction::Kind::softsign_residue_profile) {
        f += "(" + num(spec.f.residue) + ")";
      }
      return "generalized(" + f + ",kappa=" + num(spec.kappa) + ")";
    }
  }
  return "?";
}

bool AuditReport::pass() const {
  for (const EquivarianceCase& c : equivariance) {
    if (!c.pass) return false;
  }
  for (const GateCase& c : gate) {
    if (!c.pass) return false;
  }
  for (const RecoveryCase& c : recovery) {
    if (!c.pass) return false;
  }
  return !(equivariance.empty() && gate.empty() && recovery.empty());
}

double AuditReport::worst_equivariance() const {
  double worst = 0.0;
  for (const EquivarianceCase& c : equivariance) {
    worst = std::max(worst, c.max_error);
  }
  return worst;
}

AuditReport run_equivariance_audit(const AuditConfig& cfg) {
  const auto start = std::chrono::steady_clock::now();
  AuditReport report;
  report.config = cfg;

  std::vector<ActivationSpec> specs;
  for (const ActivationSpec& spec : audit_spec_grid()) {
    if (family_selected(cfg, spec)) specs.push_back(spec);
  }
  const std::vector<double> gate_kappas = {-1.0, 0.0, 1.0};

  for (Eigen::Index n : cfg.dims) {
    std::vector<double> eq_max(specs.size(), 0.0);
    std::vector<double> gate_max(gate_kappas.size(), 0.0);
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::string key = "pairs/n=" + std::to_string(n) + "/trial=" + std::to_string(trial);
      const ComplexVector u = random_complex_vector(n, substream_seed(cfg.seed, key + "/u"));
      const UnitaryMatrix U = haar_unitary(n, substream_seed(cfg.seed, key + "/U"));
      const double scale = std::max(1.0, u.norm());
      for (std::size_t s = 0; s < specs.size(); ++s) {
        eq_max[s] = std::max(eq_max[s], check_equivariance(specs[s], u, U) / scale);
      }
      const ComplexVector rotated = apply_unitary(U, u);
      for (std::size_t g = 0; g < gate_kappas.size(); ++g) {
        const double diff =
            std::abs(gate_input(rotated, gate_kappas[g]) - gate_input(u, gate_kappas[g]));
        gate_max[g] = std::max(gate_max[g], diff / scale);
      }
    }
    for (std::size_t s = 0; s < specs.size(); ++s) {
      report.equivariance.push_back({spec_label(specs[s]), n, eq_max[s],
                                     eq_max[s] <= cfg.equivariance_tol});
    }
    for (std::size_t g = 0; g < gate_kappas.size(); ++g) {
      report.gate.push_back({gate_kappas[g], n, gate_max[g], gate_max[g] <= cfg.gate_tol});
    }
  }

  // Recovery pairs: the generalized form against each concrete family.
  const bool want_softsign = family_selected(cfg, ActivationSpec::softsign_residue(0.0));
  const bool want_identity = family_selected(cfg, ActivationSpec::identity());
  const bool want_leaky = family_selected(cfg, ActivationSpec::leaky_relu_norm(0.0, 0.0));
  std::map<std::string, double> recovery_max;
  for (Eigen::Index n : cfg.dims) {
    for (int trial = 0; trial < cfg.trials; ++trial) {
      const std::string key =
          "recovery/n=" + std::to_string(n) + "/trial=" + std::to_string(trial);
      const ComplexVector u = random_complex_vector(n, substream_seed(cfg.seed, key));

      if (want_softsign) {
        for (double a : {0.0, 0.01, 0.1}) {
          const double err =
              (softsign_residue(u, a) -
               generalized_activation(u, ScalarFunction::softsign_residue_profile(a), 0.0))
                  .lpNorm<Eigen::Infinity>();
          auto& slot = recovery_max["softsign_residue(a=" + num(a) + ")"];
          slot = std::max(slot, err);
        }
      }
      if (want_identity) {
        const double err =
            (identity_activation(u) - generalized_activation(u, ScalarFunction::identity(), 0.0))
                .lpNorm<Eigen::Infinity>();
        auto& slot = recovery_max["identity"];
        slot = std::max(slot, err);
      }
      if (want_leaky) {
        for (double k : {0.0, 0.1, 0.5}) {
          for (double c : {0.5, 1.0}) {
            ComplexVector v = u;
            // keep the kink band out of the comparison so both routes take
            // the same branch
            if (std::abs(v.norm() - c) < 1e-8 * std::max(1.0, c)) {
              v *= 1.001;
            }
            const double err = (leaky_relu_norm(v, k, c) -
                                generalized_activation(v, ScalarFunction::step_leaky(k), c))
                                   .lpNorm<Eigen::Infinity>();
            auto& slot = recovery_max["leaky_relu_norm(k=" + num(k) + ",c=" + num(c) + ")"];
            slot = std::max(slot, err);
          }
        }
      }
    }
  }
  for (const auto& [pair, err] : recovery_max) {
    report.recovery.push_back({pair, err, err <= cfg.recovery_tol});
  }

  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

std::vector<GradAuditCase> grad_audit_cases(std::uint64_t seed) {
  const std::vector<ActivationSpec> specs = {
      ActivationSpec::softsign_residue(0.1),
      ActivationSpec::softsign_residue(0.0),
      ActivationSpec::identity(),
      ActivationSpec::leaky_relu_norm(0.1, 1.0),
      ActivationSpec::leaky_relu_norm(0.5, 0.5),
      ActivationSpec::generalized(ScalarFunction::sigmoid(), 0.3),
      ActivationSpec::generalized(ScalarFunction::tanh(), -0.5),
      ActivationSpec::generalized(ScalarFunction::leaky_relu(0.1), 0.5),
      ActivationSpec::generalized(ScalarFunction::softsign_residue_profile(0.1), 0.0),
      ActivationSpec::generalized(ScalarFunction::step_leaky(0.2), 0.8),
  };
  struct Shape {
    Eigen::Index n;
    std::vector<Eigen::Index> widths;
    std::string label;
  };
  const std::vector<Shape> shapes = {
      {2, {1, 1}, "n=2,1->1"},
      {4, {2, 3, 2}, "n=4,2->3->2"},
  };

  std::vector<GradAuditCase> cases;
  int index = 0;
  for (const ActivationSpec& spec : specs) {
    for (const Shape& shape : shapes) {
      const std::string tag = "grad/case=" + std::to_string(index);
      GradAuditCase c;
      c.label = spec_label(spec) + "/" + shape.label;
      c.model = random_model(shape.n, shape.widths, spec, substream_seed(seed, tag + "/model"));
      if (spec.family == ActivationSpec::Family::generalized) {
        GaussianSource gauss(substream_seed(seed, tag + "/kappa"));
        for (LayerParams& p : c.model.layers) {
          for (Eigen::Index i = 0; i < p.kappas.size(); ++i) {
            p.kappas[i] = spec.kappa + 0.3 * gauss();
          }
        }
      }
      for (int s = 0; s < 4; ++s) {
        Sample sample;
        sample.input = random_bundle(shape.n, shape.widths.front(),
                                     substream_seed(seed, tag + "/in/" + std::to_string(s)));
        sample.target = random_bundle(shape.n, shape.widths.back(),
                                      substream_seed(seed, tag + "/out/" + std::to_string(s)));
        c.data.push_back(std::move(sample));
      }
      cases.push_back(std::move(c));
      ++index;
    }
  }
  return cases;
}

bool GradAuditReport::pass() const {
  for (const GradAuditResult& c : cases) {
    if (!c.pass) return false;
  }
  return !cases.empty();
}

GradAuditReport run_grad_audit(std::uint64_t seed, double fd_step, double tol) {
  const auto start = std::chrono::steady_clock::now();
  GradAuditReport report;
  for (const GradAuditCase& c : grad_audit_cases(seed)) {
    const GradCheckReport check = grad_check(c.model, c.data, fd_step);
    GradAuditResult result;
    result.label = c.label;
    result.max_error = check.max_error;
    result.max_abs_error = check.max_abs_error;
    result.flagged_nodes = check.flagged_nodes.size();
    result.pass = check.pass(tol);
    report.max_error = std::max(report.max_error, check.max_error);
    report.max_abs_error = std::max(report.max_abs_error, check.max_abs_error);
    report.cases.push_back(std::move(result));
  }
  report.runtime_seconds =
      std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
  return report;
}

}  // namespace equivar
