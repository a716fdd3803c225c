// SPDX-License-Identifier: Apache-2.0

#ifndef EQUIVAR_AUDIT_HPP
#define EQUIVAR_AUDIT_HPP

#include <cstdint>
#include <string>
#include <vector>

#include "equivar/training.hpp"

namespace equivar {

/// The audit grid: every activation family with its representative
/// constants (softsign a in {0, 0.01, 0.1}; leaky (k, c) over
/// {0, 0.1, 0.5} x {0.5, 1}; generalized profiles over kappa in {-1, 0, 1}).
std::vector<ActivationSpec> audit_spec_grid();

std::string spec_label(const ActivationSpec& spec);

struct AuditConfig {
  std::vector<Eigen::Index> dims = {1, 2, 8, 64};
  int trials = 1000;
  std::uint64_t seed = 0;
  std::vector<std::string> families;  // empty = all
  double equivariance_tol = 1e-10;    // scaled by max(1, ||u||)
  double gate_tol = 1e-12;            // scaled by max(1, ||u||)
  double recovery_tol = 1e-14;        // entrywise, absolute
};

struct EquivarianceCase {
  std::string label;
  Eigen::Index n = 0;
  double max_error = 0.0;  // max over trials of err / max(1, ||u||)
  bool pass = false;
};

struct GateCase {
  double kappa = 0.0;
  Eigen::Index n = 0;
  double max_error = 0.0;  // scaled as above
  bool pass = false;
};

struct RecoveryCase {
  std::string pair;
  double max_error = 0.0;  // entrywise
  bool pass = false;
};

struct AuditReport {
  AuditConfig config;
  std::vector<EquivarianceCase> equivariance;
  std::vector<GateCase> gate;
  std::vector<RecoveryCase> recovery;
  double runtime_seconds = 0.0;

  bool pass() const;
  double worst_equivariance() const;
};

/// Runs the equivariance matrix (one case per spec x dim), the gate
/// invariance sweep, and the generalized-form recovery pairs. (u, U) pairs
/// are keyed by (dim, trial) substreams, so each case is reproducible in
/// isolation and shared across specs.
AuditReport run_equivariance_audit(const AuditConfig& cfg);

/// Seeded model matrix for gradient checking: 20 models spanning every
/// family, two shapes each, with nonzero kappas where the family uses them.
struct GradAuditCase {
  std::string label;
  ModelParams model;
  Dataset data;
};

std::vector<GradAuditCase> grad_audit_cases(std::uint64_t seed);

struct GradAuditResult {
  std::string label;
  double max_error = 0.0;      // relative
  double max_abs_error = 0.0;  // near-zero components
  std::size_t flagged_nodes = 0;
  bool pass = false;
};

struct GradAuditReport {
  std::vector<GradAuditResult> cases;
  double max_error = 0.0;      // over unflagged parameters of all cases
  double max_abs_error = 0.0;
  double runtime_seconds = 0.0;
  bool pass() const;
};

GradAuditReport run_grad_audit(std::uint64_t seed, double fd_step = 1e-6, double tol = 1e-5);

}  // namespace equivar

#endif  // EQUIVAR_AUDIT_HPP
