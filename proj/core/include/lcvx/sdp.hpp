#pragma once

#include <functional>
#include <optional>
#include <string>
#include <utility>
#include <vector>

#include <Eigen/Core>

#include "lcvx/symmat.hpp"
#include "lcvx/variables.hpp"

namespace lcvx {

/// F(v) = F₀ + Σⱼ vⱼ Fⱼ over a fixed block size. Only variables with a
/// non-zero coefficient are listed.
struct AffineMatrixExpr {
  SymMat constant = SymMat::zero(1);
  std::vector<std::pair<int, SymMat>> coeffs;

  int dim() const { return constant.dim(); }
  SymMat evaluate(const Eigen::VectorXd& v) const;
};

/// Builds the affine expression of `map` by evaluating it at the origin and
/// at every unit coordinate of `vars`. The result is checked for affinity at
/// the all-ones point; a mismatch above 1e-9 (relative) throws Error.
AffineMatrixExpr linearize(const VariableTable& vars, int dim,
                           const std::function<Eigen::MatrixXd(const Assignment&)>& map);

/// minimize cᵀv subject to Fᵢ(v) ⪯ 0 for every block.
///
/// Symmetric-matrix variables are flattened to their upper triangle, so an
/// off-diagonal coordinate p_ij enters P as p_ij (E_ij + E_ji); `linearize`
/// produces those doubled coefficients automatically.
struct SdpProblem {
  VariableTable variables;
  Eigen::VectorXd objective;
  std::vector<AffineMatrixExpr> blocks;
  std::vector<std::string> block_names;

  int nvars() const { return variables.size(); }
  /// Appends a block ⪯ 0 constraint.
  void add_block(std::string name, AffineMatrixExpr block);
  /// Throws DimensionMismatch on any inconsistency.
  void validate() const;
};

enum class SdpStatus { Optimal, Infeasible, Unbounded, NumericalFailure };

std::string to_string(SdpStatus status);

struct SdpSolution {
  SdpStatus status = SdpStatus::NumericalFailure;
  Eigen::VectorXd v;
  /// Dual blocks Zᵢ ⪰ 0, one per problem block. Sign convention: the
  /// Lagrangian is cᵀv + Σ Tr(Zᵢ Fᵢ(v)), so dual feasibility reads
  /// c + adjoint(Z) = 0 and the dual objective is Σ Tr(Zᵢ F₀ᵢ).
  std::vector<SymMat> duals;
  double primal_value = 0.0;
  double dual_value = 0.0;
  int iterations = 0;
  /// Final value of t in the phase-1 problem min t s.t. Fᵢ(v) ⪯ t I. For
  /// infeasible problems phase 1 stops as soon as its dual bound is
  /// positive, so this is an upper estimate of t*.
  double phase_one_value = 0.0;
  /// For Infeasible: normalized phase-1 dual blocks Wᵢ ⪰ 0 with
  /// Σ Tr(Wᵢ) = 1, adjoint(W) ≈ 0 and Σ Tr(Wᵢ F₀ᵢ) > 0.
  std::vector<SymMat> farkas;
  std::string message;
};

struct SolverOptions {
  double tol_gap = 1e-7;
  double tol_feas = 1e-8;
  int max_iterations = 200;
  double mu_initial = 1.0;
  double mu_factor = 5.0;
  /// Phase 1 searches inside the box ‖v‖∞ ≤ phase_one_radius.
  double phase_one_radius = 1e4;
  double unbounded_threshold = -1e12;
};

struct PhaseOneResult {
  SdpStatus status = SdpStatus::NumericalFailure;
  /// t* of min t s.t. Fᵢ(v) ⪯ t I, t ≥ -1, ‖v‖∞ ≤ radius.
  double t = 0.0;
  Eigen::VectorXd v;
  std::vector<SymMat> duals;
  int iterations = 0;

  bool strictly_feasible(double tol_feas) const {
    return status == SdpStatus::Optimal && t < -tol_feas;
  }
};

/// Phase-1 problem. Its optimum is floored at -1 so that problems with an
/// unbounded interior still report a finite margin.
PhaseOneResult phase_one(const SdpProblem& p, const SolverOptions& opts = {});

SdpSolution solve(const SdpProblem& p, double tol_gap = 1e-7, double tol_feas = 1e-8);

/// Solves `p`; when `start` is strictly feasible phase 1 is skipped (and
/// phase_one_value is left at 0).
SdpSolution solve(const SdpProblem& p, const SolverOptions& opts,
                  const std::optional<Eigen::VectorXd>& start = std::nullopt);

/// Maximizer of Σ log det(-Fᵢ(v)) from a strictly feasible start. The
/// feasible set must be bounded; throws SolverFailure otherwise.
Eigen::VectorXd analytic_center(const SdpProblem& p, const Eigen::VectorXd& start,
                                const SolverOptions& opts = {});

/// Σ Tr(Zᵢ F₀ᵢ) for the dual blocks of `sol`.
double sdp_dual_value(const SdpProblem& p, const SdpSolution& sol);

/// (adjoint Z)ⱼ = Σᵢ Tr(Zᵢ Fⱼᵢ).
Eigen::VectorXd adjoint(const SdpProblem& p, const std::vector<SymMat>& duals);

/// max_eig(Fᵢ(v)) for each block.
std::vector<double> residuals(const SdpProblem& p, const Eigen::VectorXd& v);

/// Copy of `p` with the box |vⱼ - centerⱼ| ≤ radius appended as scalar blocks.
SdpProblem with_box(const SdpProblem& p, const Eigen::VectorXd& center, double radius);

}  // namespace lcvx
