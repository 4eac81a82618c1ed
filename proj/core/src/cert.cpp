#include "lcvx/cert.hpp"

#include <algorithm>
#include <cmath>

#include "lcvx/errors.hpp"

namespace lcvx {

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::StrongDualityVerified:
      return "StrongDualityVerified";
    case Verdict::WeakOnly:
      return "WeakOnly";
    case Verdict::Inconclusive:
      return "Inconclusive";
  }
  return "Inconclusive";
}

Verdict classify(const DualityCertificate& cert, double tol_gap, double tol_feas) {
  if (!cert.failed_stage.empty()) return Verdict::Inconclusive;
  const double allowed = tol_gap * (1.0 + std::abs(cert.primal_value));
  if (!std::isfinite(cert.gap) || cert.gap > allowed) return Verdict::Inconclusive;
  if (cert.dual_value > cert.primal_value + allowed) return Verdict::Inconclusive;
  const bool feasible = std::all_of(cert.original_residuals.begin(), cert.original_residuals.end(),
                                    [&](double r) { return r <= tol_feas; });
  if (cert.slater_margin > 0.0 && cert.surjection.pass && feasible) return Verdict::StrongDualityVerified;
  return Verdict::WeakOnly;
}

DualityCertificate certify(const BmiProblem& p, const ChangeOfVariables& c, double tol_gap, double tol_feas,
                           int nsamples, std::uint64_t seed) {
  if (!(tol_gap > 0.0) || !(tol_feas > 0.0)) throw Error("certify: tolerances must be positive");
  DualityCertificate cert;
  cert.map_kind = to_string(c.kind);
  cert.tol_gap = tol_gap;
  cert.tol_feas = tol_feas;
  cert.samples = nsamples;
  cert.seed = seed;

  SolverOptions opts;
  opts.tol_gap = tol_gap;
  opts.tol_feas = tol_feas;

  std::string stage = "slater";
  try {
    const PhaseOneResult ph = phase_one(c.target, opts);
    if (ph.status != SdpStatus::Optimal) throw SolverFailure("phase 1 did not converge");
    cert.slater_margin = -ph.t;

    stage = "solve";
    const SdpSolution sol = solve(c.target, opts, ph.strictly_feasible(tol_feas) ? std::optional(ph.v) : std::nullopt);
    if (sol.status != SdpStatus::Optimal) {
      throw SolverFailure("convexified problem is " + to_string(sol.status) +
                          (sol.message.empty() ? "" : ": " + sol.message));
    }
    cert.primal_value = sol.primal_value;

    stage = "dual";
    cert.dual_value = sdp_dual_value(c.target, sol);
    cert.gap = std::abs(cert.primal_value - cert.dual_value);
    const std::size_t nsrc = p.constraints.size();
    bool paired = nsrc <= sol.duals.size();
    for (std::size_t i = 0; paired && i < nsrc; ++i) paired = sol.duals[i].dim() == p.constraints[i].dim();
    if (paired) cert.multipliers.assign(sol.duals.begin(), sol.duals.begin() + static_cast<long>(nsrc));

    stage = "recover";
    cert.target_solution = c.target.variables.unpack(sol.v);
    cert.recovered_x = recover(c, cert.target_solution);
    cert.recovered_objective = objective_value(p, cert.recovered_x);
    for (const auto& con : p.constraints) cert.original_residuals.push_back(max_eig(eval_constraint(con, cert.recovered_x)));

    stage = "surjection";
    cert.surjection = surjection_spotcheck(c, nsamples, seed);

    stage = "inclusion";
    cert.inclusion = inclusion_spotcheck(p, c, nsamples, seed);
  } catch (const Error& e) {
    cert.failed_stage = stage;
    cert.message = e.what();
  }
  cert.verdict = classify(cert, tol_gap, tol_feas);
  return cert;
}

OracleCrossCheck cross_check_with_oracle(const DualityCertificate& cert, const BmiProblem& p, int grid) {
  OracleCrossCheck out;
  out.cert_primal = cert.primal_value;
  double step = 0.0;
  for (const auto& b : p.variables.blocks()) step = std::max(step, (b.upper - b.lower) / std::max(1, grid - 1));
  out.slack = 2.0 * step * (1.0 + std::abs(cert.primal_value));

  const PrimalOracleResult primal = primal_oracle(p, grid);
  out.oracle_primal = primal.value;
  out.primal_ok = std::abs(primal.value - cert.primal_value) <= out.slack;

  if (!cert.multipliers.empty() && cert.multipliers.size() == p.constraints.size()) {
    out.dual_checked = true;
    Multipliers m;
    m.lambdas = cert.multipliers;
    const DualOracleResult dual = dual_oracle(p, m, grid);
    out.dual_unbounded = dual.unbounded_below;
    out.dual_oracle_value = dual.value;
    out.dual_ok = dual.unbounded_below || dual.value <= cert.primal_value + out.slack;
  }
  out.pass = out.primal_ok && out.dual_ok;
  return out;
}

}  // namespace lcvx
