#pragma once

#include <complex>
#include <cstdint>
#include <optional>
#include <vector>

#include <Eigen/Core>

#include "lcvx/cert.hpp"
#include "lcvx/lti.hpp"
#include "lcvx/sdp.hpp"
#include "lcvx/symmat.hpp"

namespace lcvx {

/// Eigenvalues of a general square matrix. Throws ConvergenceFailure when
/// the QR iteration does not converge.
std::vector<std::complex<double>> eig_general(const Eigen::MatrixXd& A);

/// max Re λ(A) < -tol.
bool is_hurwitz(const Eigen::MatrixXd& A, double tol = 0.0);
/// max Re λ(A).
double spectral_abscissa(const Eigen::MatrixXd& A);
/// max |λ(A)|.
double spectral_radius(const Eigen::MatrixXd& A);
/// ρ(A) < 1 - tol.
bool is_schur(const Eigen::MatrixXd& A, double tol = 0.0);

/// PBH test: rank [A - λI, B] = n for every eigenvalue λ that is not
/// strictly stable for the system's clock.
bool is_stabilizable(const LtiSystem& sys);

/// 1e-3·max(‖A‖_F, 1e-3).
double default_epsilon(const LtiSystem& sys);

/// max_eig((A+BF)P + P(A+BF)ᵀ + εI).
double ct_bilinear_residual(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F, double epsilon);
/// max_eig((A+BF)P(A+BF)ᵀ - P + εI).
double dt_bilinear_residual(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F, double epsilon);

/// [[-P + εI, AP + BM], [(AP + BM)ᵀ, -P]].
SymMat dt_block_lmi(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& M, double epsilon);
/// (AP + BM)P⁻¹(AP + BM)ᵀ - P + εI. Throws SingularP.
SymMat dt_nonlinear_form(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& M, double epsilon);

struct SynthesisOptions {
  /// Starting ε; default_epsilon(sys) when unset.
  std::optional<double> epsilon;
  /// Success needs t* < -tol.
  double tol = 1e-8;
  int max_halvings = 10;
  double tol_gap = 1e-7;
  double tol_feas = 1e-8;
  /// Attach a duality certificate with this many spot-check samples.
  bool certify = true;
  int samples = 20;
  std::uint64_t seed = 0;
};

struct StabilizationResult {
  Eigen::MatrixXd P;
  Eigen::MatrixXd M;
  Eigen::MatrixXd F;
  double epsilon = 0.0;
  /// -t* of the margin problem.
  double margin = 0.0;
  double primal_value = 0.0;
  double dual_value = 0.0;
  /// max Re λ(A+BF) for CT, ρ(A+BF) for DT.
  double closed_loop = 0.0;
  /// Residual of the original non-convex Lyapunov inequality at (P, F).
  double bilinear_residual = 0.0;
  int halvings = 0;
  std::optional<DualityCertificate> certificate;
};

/// Solves the convexified margin problem, halving ε up to max_halvings
/// times. Throws NotStabilizable when no ε yields t* < -tol with a
/// stabilizing recovered gain; that means no certificate was found, not
/// that the pair is unstabilizable. Throws SolverFailure on solver trouble.
StabilizationResult ct_synthesize(const LtiSystem& sys, const SynthesisOptions& opts = {});
StabilizationResult dt_synthesize(const LtiSystem& sys, const SynthesisOptions& opts = {});
/// Dispatches on sys.clock.
StabilizationResult synthesize(const LtiSystem& sys, const SynthesisOptions& opts = {});

/// -t* of the margin problem at this ε; positive iff strictly feasible.
double slater_margin(const LtiSystem& sys, double epsilon);

/// Random (A, B) with A ~ N(0, 1/n) and B ~ N(0, 1) entries, redrawn until
/// it passes is_stabilizable. Throws GenerationBudgetExceeded after 1000
/// draws.
LtiSystem random_stabilizable(int n, int m, std::uint64_t seed, Clock clock);

}  // namespace lcvx
