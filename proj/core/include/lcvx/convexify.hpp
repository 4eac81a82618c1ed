#pragma once

#include <cstdint>
#include <functional>
#include <set>
#include <string>
#include <vector>

#include "lcvx/bmi.hpp"
#include "lcvx/lti.hpp"
#include "lcvx/sdp.hpp"

namespace lcvx {

enum class MapKind { Example1, Example2, ControlCT, ControlDT };

std::string to_string(MapKind kind);

/// A change of variables v = h(x) that turns the non-convex `source` into the
/// convex `target`, with a recovery map q satisfying h(q(v)) = v on the
/// target feasible set.
struct ChangeOfVariables {
  MapKind kind = MapKind::Example1;
  BmiProblem source;
  SdpProblem target;
  /// Feasible set sampled by the spot-checks, in target coordinates. It is
  /// `target` itself, or `target` with extra cuts that keep it bounded.
  SdpProblem region;

  std::function<Assignment(const Assignment&)> forward;
  std::function<Assignment(const Assignment&)> recover;

  /// Φ'ᵢ(v) written in the shape of source constraint i, so that
  /// Φᵢ(q(v)) = Φ'ᵢ(v) can be checked entrywise.
  std::function<SymMat(std::size_t, const Assignment&)> target_constraint;
  /// f'(v) with f(q(v)) = f'(v).
  std::function<double(const Assignment&)> target_objective;

  /// Target blocks that are epigraph helpers rather than images of source
  /// coordinates; they are skipped in round-trip comparisons.
  std::set<std::string> auxiliary;
};

Assignment forward(const ChangeOfVariables& c, const Assignment& x);
Assignment recover(const ChangeOfVariables& c, const Assignment& v);

/// min x² s.t. 1 - x² ≤ 0 on the box [-3, 3].
BmiProblem example1_problem();
/// min x₁² + x₁x₂² s.t. 1 - x₁x₂² ≤ 0, 1 - x₁ ≤ 0 on the box [0.5, 3]².
BmiProblem example2_problem();

/// v = -x², q(v) = √(-v). Target: min -v s.t. v + 1 ≤ 0.
ChangeOfVariables example1_map(BmiProblem source = example1_problem());

/// (v₁, v₂) = (x₁, x₁x₂²), q(v) = (v₁, √(v₂/v₁)). The quadratic target
/// objective v₁² + v₂ is lifted to v₂ + s with the epigraph block
/// [[-s, -v₁], [-v₁, -1]] ⪯ 0, i.e. s ≥ v₁².
ChangeOfVariables example2_map(BmiProblem source = example2_problem());

/// State-feedback margin problem in (P, M = FP, t):
///   minimize t subject to
///   CT: (AP + BM) + (AP + BM)ᵀ + (ε - t)I ⪯ 0
///   DT: [[-P + (ε - t)I, AP + BM], [(AP + BM)ᵀ, -P]] ⪯ 0
///   εI - P - tI ⪯ 0,  Tr P ≤ 1000n,  ‖M‖₂ ≤ ρ.
/// The source is the same problem in (P, F, t) with the bilinear products
/// written out. Recovery is F = MP⁻¹.
ChangeOfVariables control_map(const LtiSystem& sys, double epsilon);

/// Bound ρ on ‖M‖₂ used by control_map.
double gain_bound(const LtiSystem& sys);

struct SpotCheckReport {
  bool pass = false;
  int samples = 0;
  std::uint64_t seed = 0;
  double worst_roundtrip = 0.0;
  double worst_source_violation = 0.0;
  double worst_transport = 0.0;
  int failures = 0;
  std::string message;
};

/// Samples strictly feasible points of `c.region`, recovers them and checks
/// h(q(v)) = v (≤ 1e-8 relative to max(1, ‖v‖∞)), source residuals ≤ 1e-7
/// and the transport of objective and constraints (≤ 1e-8 relative).
/// Throws SamplingFailed when the region has no strictly feasible point.
SpotCheckReport surjection_spotcheck(const ChangeOfVariables& c, int nsamples, std::uint64_t seed);

/// Strictly feasible points of `region` drawn as convex combinations of the
/// analytic center (weight ≥ 0.05) and optima of 10 random linear
/// objectives. Deterministic in `seed`.
std::vector<Eigen::VectorXd> sample_region(const SdpProblem& region, int nsamples, std::uint64_t seed);

/// A point (Ū, t) of constraint-objective space.
struct EpigraphPoint {
  std::vector<SymMat> U;
  double t = 0.0;
};

/// Φᵢ(x) ⪯ Uᵢ (tol 1e-10) for every i and f(x) ≤ t + 1e-10.
bool epigraph_member_source(const BmiProblem& p, const EpigraphPoint& pt, const Assignment& x);

/// Φ'ᵢ(v) ⪯ Uᵢ and f'(v) ≤ t, with tolerance `tol`.
bool epigraph_member_target(const ChangeOfVariables& c, const EpigraphPoint& pt, const Assignment& v,
                            double tol = 1e-10);

/// Draws x from the source box (standard normal where unbounded), lifts it
/// to a dominated point (Ū, t) = (Φ(x) + W, f(x) + r) with W ⪰ 0, r ≥ 0, and
/// checks that the point also lies in the target epigraph at v = h(x).
/// pass iff there is no counterexample.
SpotCheckReport inclusion_spotcheck(const BmiProblem& p, const ChangeOfVariables& c, int nsamples,
                                    std::uint64_t seed);

}  // namespace lcvx
