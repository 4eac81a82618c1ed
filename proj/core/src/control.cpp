#include "lcvx/control.hpp"

#include <algorithm>
#include <cmath>
#include <random>

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include "lcvx/convexify.hpp"
#include "lcvx/errors.hpp"

namespace lcvx {

void LtiSystem::validate() const {
  if (A.rows() < 1 || A.rows() != A.cols()) throw DimensionMismatch("LtiSystem: A must be square and non-empty");
  if (B.rows() != A.rows() || B.cols() < 1) throw DimensionMismatch("LtiSystem: B must have as many rows as A");
  if (!A.allFinite() || !B.allFinite()) throw Error("LtiSystem: non-finite entries");
}

std::vector<std::complex<double>> eig_general(const Eigen::MatrixXd& A) {
  if (A.rows() != A.cols()) throw DimensionMismatch("eig_general: matrix must be square");
  if (!A.allFinite()) throw Error("eig_general: non-finite entries");
  if (A.rows() == 0) return {};
  Eigen::EigenSolver<Eigen::MatrixXd> solver(A, false);
  if (solver.info() != Eigen::Success) throw ConvergenceFailure("eig_general: QR iteration did not converge");
  const Eigen::VectorXcd values = solver.eigenvalues();
  return {values.data(), values.data() + values.size()};
}

double spectral_abscissa(const Eigen::MatrixXd& A) {
  double out = -std::numeric_limits<double>::infinity();
  for (const auto& l : eig_general(A)) out = std::max(out, l.real());
  return out;
}

double spectral_radius(const Eigen::MatrixXd& A) {
  double out = 0.0;
  for (const auto& l : eig_general(A)) out = std::max(out, std::abs(l));
  return out;
}

bool is_hurwitz(const Eigen::MatrixXd& A, double tol) { return spectral_abscissa(A) < -tol; }

bool is_schur(const Eigen::MatrixXd& A, double tol) { return spectral_radius(A) < 1.0 - tol; }

bool is_stabilizable(const LtiSystem& sys) {
  sys.validate();
  const int n = sys.states();
  const int m = sys.inputs();
  Eigen::MatrixXd ab(n, n + m);
  ab << sys.A, sys.B;
  const double threshold = 1e-9 * std::max(1.0, ab.norm());
  for (const auto& l : eig_general(sys.A)) {
    const bool stable = sys.clock == Clock::ContinuousTime ? l.real() < 0.0 : std::abs(l) < 1.0;
    if (stable) continue;
    Eigen::MatrixXcd pbh(n, n + m);
    pbh.leftCols(n) = sys.A.cast<std::complex<double>>() - l * Eigen::MatrixXcd::Identity(n, n);
    pbh.rightCols(m) = sys.B.cast<std::complex<double>>();
    const Eigen::JacobiSVD<Eigen::MatrixXcd> svd(pbh);
    const auto& s = svd.singularValues();
    if ((s.array() > threshold).count() < n) return false;
  }
  return true;
}

double default_epsilon(const LtiSystem& sys) { return 1e-3 * std::max(sys.A.norm(), 1e-3); }

double ct_bilinear_residual(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F, double epsilon) {
  const Eigen::MatrixXd K = (sys.A + sys.B * F) * P;
  const auto I = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  return max_eig(SymMat(K + K.transpose() + epsilon * I));
}

double dt_bilinear_residual(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& F, double epsilon) {
  const Eigen::MatrixXd Acl = sys.A + sys.B * F;
  const auto I = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  return max_eig(symmetric_part(Acl * P * Acl.transpose() - P + epsilon * I));
}

SymMat dt_block_lmi(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& M, double epsilon) {
  const Eigen::Index n = P.rows();
  const Eigen::MatrixXd K = sys.A * P + sys.B * M;
  Eigen::MatrixXd out(2 * n, 2 * n);
  out << -P + epsilon * Eigen::MatrixXd::Identity(n, n), K, K.transpose(), -P;
  return SymMat(out);
}

SymMat dt_nonlinear_form(const LtiSystem& sys, const Eigen::MatrixXd& P, const Eigen::MatrixXd& M, double epsilon) {
  const SymMat ps(P);
  if (sym_eig(ps).values.cwiseAbs().minCoeff() <= 1e-10 * std::max(1.0, ps.frobenius_norm())) {
    throw SingularP("dt_nonlinear_form: P is singular");
  }
  const Eigen::MatrixXd K = sys.A * P + sys.B * M;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(P.rows(), P.cols());
  return symmetric_part(K * ps.matrix().ldlt().solve(K.transpose()) - P + epsilon * I);
}

namespace {

SdpSolution solve_margin(const ChangeOfVariables& c, const SynthesisOptions& opts) {
  SolverOptions so;
  so.tol_gap = opts.tol_gap;
  so.tol_feas = opts.tol_feas;
  SdpSolution sol = solve(c.target, so);
  if (sol.status != SdpStatus::Optimal) {
    throw SolverFailure("margin problem: " + to_string(sol.status) + (sol.message.empty() ? "" : ": " + sol.message));
  }
  return sol;
}

StabilizationResult synthesize_impl(const LtiSystem& sys, const SynthesisOptions& opts, Clock expected) {
  sys.validate();
  if (sys.clock != expected) throw Error("synthesize: system clock does not match the requested synthesis");
  double epsilon = opts.epsilon.value_or(default_epsilon(sys));
  if (!(epsilon > 0.0)) throw Error("synthesize: epsilon must be positive");
  const bool ct = sys.clock == Clock::ContinuousTime;

  double best_t = std::numeric_limits<double>::infinity();
  for (int h = 0; h <= opts.max_halvings; ++h, epsilon *= 0.5) {
    const ChangeOfVariables c = control_map(sys, epsilon);
    const SdpSolution sol = solve_margin(c, opts);
    best_t = std::min(best_t, sol.primal_value);
    if (!(sol.primal_value < -opts.tol)) continue;

    const Assignment v = c.target.variables.unpack(sol.v);
    const Assignment x = recover(c, v);
    StabilizationResult r;
    r.P = x.at("P");
    r.M = v.at("M");
    r.F = x.at("F");
    const Eigen::MatrixXd closed = sys.A + sys.B * r.F;
    r.closed_loop = ct ? spectral_abscissa(closed) : spectral_radius(closed);
    if (ct ? !(r.closed_loop < 0.0) : !(r.closed_loop < 1.0)) continue;

    r.epsilon = epsilon;
    r.margin = -sol.primal_value;
    r.primal_value = sol.primal_value;
    r.dual_value = sol.dual_value;
    r.halvings = h;
    r.bilinear_residual =
        ct ? ct_bilinear_residual(sys, r.P, r.F, epsilon) : dt_bilinear_residual(sys, r.P, r.F, epsilon);
    if (opts.certify) r.certificate = certify(c.source, c, opts.tol_gap, opts.tol_feas, opts.samples, opts.seed);
    return r;
  }
  throw NotStabilizable("no stabilizing certificate found down to epsilon " + std::to_string(epsilon * 2.0) +
                        " (best margin objective " + std::to_string(best_t) + ")");
}

}  // namespace

StabilizationResult ct_synthesize(const LtiSystem& sys, const SynthesisOptions& opts) {
  return synthesize_impl(sys, opts, Clock::ContinuousTime);
}

StabilizationResult dt_synthesize(const LtiSystem& sys, const SynthesisOptions& opts) {
  return synthesize_impl(sys, opts, Clock::DiscreteTime);
}

StabilizationResult synthesize(const LtiSystem& sys, const SynthesisOptions& opts) {
  return synthesize_impl(sys, opts, sys.clock);
}

double slater_margin(const LtiSystem& sys, double epsilon) {
  const ChangeOfVariables c = control_map(sys, epsilon);
  SynthesisOptions opts;
  return -solve_margin(c, opts).primal_value;
}

LtiSystem random_stabilizable(int n, int m, std::uint64_t seed, Clock clock) {
  if (n < 1 || n > 8 || m < 1 || m > n) throw Error("random_stabilizable: need 1 <= m <= n <= 8");
  std::mt19937_64 rng(seed);
  std::normal_distribution<double> normal;
  const double a_scale = 1.0 / std::sqrt(static_cast<double>(n));
  for (int draw = 0; draw < 1000; ++draw) {
    LtiSystem sys;
    sys.clock = clock;
    sys.A.resize(n, n);
    sys.B.resize(n, m);
    for (Eigen::Index k = 0; k < sys.A.size(); ++k) sys.A(k) = a_scale * normal(rng);
    for (Eigen::Index k = 0; k < sys.B.size(); ++k) sys.B(k) = normal(rng);
    if (is_stabilizable(sys)) return sys;
  }
  throw GenerationBudgetExceeded("random_stabilizable: no stabilizable pair in 1000 draws");
}

}  // namespace lcvx
