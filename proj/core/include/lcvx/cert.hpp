#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "lcvx/bmi.hpp"
#include "lcvx/convexify.hpp"

namespace lcvx {

enum class Verdict { StrongDualityVerified, WeakOnly, Inconclusive };

std::string to_string(Verdict v);

/// Numerical evidence that a non-convex program has zero duality gap.
///
/// p* and d* are the primal and dual values of the convexified SDP. The
/// verdict is StrongDualityVerified only when every hypothesis was checked:
/// strict feasibility, surjection evidence, a closed gap and a recovered
/// point that satisfies the original constraints. A closed gap with an
/// unverified hypothesis is WeakOnly; a failed stage or an open gap is
/// Inconclusive. No verdict ever asserts that strong duality fails.
struct DualityCertificate {
  std::string map_kind;
  double primal_value = 0.0;
  double dual_value = 0.0;
  double gap = 0.0;
  /// -t* of the phase-1 problem on the convexified constraints (phase 1 is
  /// floored at t = -1, so the margin saturates at 1).
  double slater_margin = 0.0;
  SpotCheckReport surjection;
  SpotCheckReport inclusion;
  Assignment target_solution;
  Assignment recovered_x;
  double recovered_objective = 0.0;
  /// max_eig of each original constraint at recovered_x.
  std::vector<double> original_residuals;
  /// SDP duals of the target blocks paired with source constraints; empty
  /// when the block shapes differ.
  std::vector<SymMat> multipliers;
  double tol_gap = 1e-7;
  double tol_feas = 1e-8;
  int samples = 0;
  std::uint64_t seed = 0;
  Verdict verdict = Verdict::Inconclusive;
  /// Name of the pipeline stage that failed, empty when all stages ran.
  std::string failed_stage;
  std::string message;
};

/// Phase 1 → solve → dual value → recovery → original residuals →
/// surjection and inclusion spot-checks → verdict. Errors in any stage are
/// caught and reported through failed_stage.
DualityCertificate certify(const BmiProblem& p, const ChangeOfVariables& c, double tol_gap = 1e-7,
                           double tol_feas = 1e-8, int nsamples = 100, std::uint64_t seed = 0);

/// Verdict implied by the recorded evidence under the given tolerances.
Verdict classify(const DualityCertificate& cert, double tol_gap, double tol_feas);

struct OracleCrossCheck {
  double oracle_primal = 0.0;
  double cert_primal = 0.0;
  /// Allowed |oracle - p*|: two grid steps scaled by 1 + |p*|.
  double slack = 0.0;
  bool primal_ok = false;
  bool dual_checked = false;
  double dual_oracle_value = 0.0;
  bool dual_unbounded = false;
  bool dual_ok = true;
  bool pass = false;
};

/// Compares the certificate against brute-force grid oracles on the
/// original problem: primal_oracle ≈ p*, and g(Λ) ≤ p* at the certificate's
/// multipliers. Needs a finite bounds box; throws GridBudgetExceeded.
OracleCrossCheck cross_check_with_oracle(const DualityCertificate& cert, const BmiProblem& p, int grid);

}  // namespace lcvx
