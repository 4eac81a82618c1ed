#include "lcvx/sdp.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include <Eigen/Cholesky>
#include <Eigen/QR>

#include "lcvx/errors.hpp"

namespace lcvx {

SymMat AffineMatrixExpr::evaluate(const Eigen::VectorXd& v) const {
  Eigen::MatrixXd m = constant.matrix();
  for (const auto& [j, f] : coeffs) {
    if (j < 0 || j >= v.size()) throw DimensionMismatch("AffineMatrixExpr: variable index out of range");
    if (v(j) != 0.0) m.noalias() += v(j) * f.matrix();
  }
  return SymMat(m);
}

AffineMatrixExpr linearize(const VariableTable& vars, int dim,
                           const std::function<Eigen::MatrixXd(const Assignment&)>& map) {
  const int n = vars.size();
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(n);
  const Eigen::MatrixXd base = map(vars.unpack(zero));
  if (base.rows() != dim || base.cols() != dim) {
    throw DimensionMismatch("linearize: map returned a block of the wrong size");
  }
  AffineMatrixExpr expr{SymMat(base), {}};
  Eigen::MatrixXd predicted = base;
  for (int j = 0; j < n; ++j) {
    Eigen::VectorXd e = zero;
    e(j) = 1.0;
    const Eigen::MatrixXd diff = map(vars.unpack(e)) - base;
    predicted += diff;
    if (diff.cwiseAbs().maxCoeff() > 0.0) expr.coeffs.emplace_back(j, SymMat(diff));
  }
  const Eigen::MatrixXd at_ones = map(vars.unpack(Eigen::VectorXd::Ones(n)));
  const double scale = std::max(1.0, at_ones.cwiseAbs().maxCoeff());
  if ((at_ones - predicted).cwiseAbs().maxCoeff() > 1e-9 * scale) {
    throw Error("linearize: map is not affine in the declared variables");
  }
  return expr;
}

void SdpProblem::add_block(std::string name, AffineMatrixExpr block) {
  block_names.push_back(std::move(name));
  blocks.push_back(std::move(block));
}

void SdpProblem::validate() const {
  if (objective.size() != nvars()) {
    throw DimensionMismatch("SdpProblem: objective length does not match variable count");
  }
  if (!block_names.empty() && block_names.size() != blocks.size()) {
    throw DimensionMismatch("SdpProblem: block name table does not match block list");
  }
  for (const auto& b : blocks) {
    for (const auto& [j, f] : b.coeffs) {
      if (j < 0 || j >= nvars()) throw DimensionMismatch("SdpProblem: coefficient index out of range");
      if (f.dim() != b.dim()) throw DimensionMismatch("SdpProblem: coefficient size differs from block size");
    }
  }
}

std::string to_string(SdpStatus status) {
  switch (status) {
    case SdpStatus::Optimal:
      return "Optimal";
    case SdpStatus::Infeasible:
      return "Infeasible";
    case SdpStatus::Unbounded:
      return "Unbounded";
    case SdpStatus::NumericalFailure:
      return "NumericalFailure";
  }
  return "Unknown";
}

namespace {

constexpr double kCenteringDecrement = 1e-4;  // λ² at which an iterate counts as centered
constexpr int kMaxHalvings = 80;

using MatrixL = Eigen::Matrix<long double, Eigen::Dynamic, Eigen::Dynamic>;
using VectorL = Eigen::Matrix<long double, Eigen::Dynamic, 1>;

struct NewtonStep {
  Eigen::VectorXd step;  // full-length, zero on inactive variables
  double decrement2 = 0.0;
};

/// Log-barrier machinery for one problem: -Σ log det(-Fᵢ(v)).
class Barrier {
 public:
  explicit Barrier(const SdpProblem& p) : p_(p) {
    std::vector<bool> used(p.nvars(), false);
    for (const auto& b : p.blocks) {
      for (const auto& [j, f] : b.coeffs) used[j] = true;
    }
    position_.assign(p.nvars(), -1);
    for (int j = 0; j < p.nvars(); ++j) {
      if (used[j]) {
        position_[j] = static_cast<int>(active_.size());
        active_.push_back(j);
      }
    }
  }

  const std::vector<int>& active() const { return active_; }

  /// Inverse Cholesky factors L⁻¹ of Sᵢ = -Fᵢ(v) = L Lᵀ; false when some Sᵢ
  /// is not PD. Sᵢ is formed and factored in extended precision: with large
  /// iterates its small eigenvalues are otherwise lost to cancellation.
  bool factor(const Eigen::VectorXd& v, std::vector<Eigen::MatrixXd>& inv_lowers) const {
    inv_lowers.resize(p_.blocks.size());
    for (std::size_t i = 0; i < p_.blocks.size(); ++i) {
      const auto& b = p_.blocks[i];
      MatrixL s = -b.constant.matrix().cast<long double>();
      for (const auto& [j, f] : b.coeffs) {
        if (v(j) != 0.0) s.noalias() -= static_cast<long double>(v(j)) * f.matrix().cast<long double>();
      }
      const Eigen::LLT<MatrixL> llt(s);
      if (llt.info() != Eigen::Success) return false;
      const MatrixL lower = llt.matrixL();
      if (!(lower.diagonal().array() > 0.0L).all()) return false;
      const MatrixL inv = lower.triangularView<Eigen::Lower>().solve(MatrixL::Identity(b.dim(), b.dim()));
      inv_lowers[i] = inv.cast<double>();
      if (!inv_lowers[i].allFinite()) return false;
    }
    return true;
  }

  static double value(const std::vector<Eigen::MatrixXd>& inv_lowers) {
    double sum = 0.0;
    for (const auto& l : inv_lowers) sum += 2.0 * l.diagonal().array().log().sum();
    return sum;
  }

  /// Newton step for cᵀv/μ + barrier(v) from the factors of `factor`.
  NewtonStep newton(const Eigen::VectorXd& c, double mu, const std::vector<Eigen::MatrixXd>& lower_invs) const {
    const int na = static_cast<int>(active_.size());
    VectorL g = VectorL::Zero(na);
    MatrixL h = MatrixL::Zero(na, na);
    for (int a = 0; a < na; ++a) g(a) = static_cast<long double>(c(active_[a])) / mu;

    std::vector<MatrixL> gs;
    std::vector<int> idx;
    for (std::size_t i = 0; i < p_.blocks.size(); ++i) {
      const auto& b = p_.blocks[i];
      const MatrixL linv = lower_invs[i].cast<long double>();
      gs.clear();
      idx.clear();
      for (const auto& [j, f] : b.coeffs) {
        gs.push_back(linv * f.matrix().cast<long double>() * linv.transpose());
        idx.push_back(position_[j]);
      }
      for (std::size_t k = 0; k < gs.size(); ++k) {
        g(idx[k]) += gs[k].trace();
        for (std::size_t l = 0; l <= k; ++l) {
          const long double hv = gs[k].cwiseProduct(gs[l]).sum();
          h(idx[k], idx[l]) += hv;
          if (l != k) h(idx[l], idx[k]) += hv;
        }
      }
    }

    const VectorL da = solve_system(h, -g);
    NewtonStep out;
    out.step = Eigen::VectorXd::Zero(p_.nvars());
    for (int a = 0; a < na; ++a) out.step(active_[a]) = static_cast<double>(da(a));
    out.decrement2 = std::max(0.0, static_cast<double>(-g.dot(da)));
    return out;
  }

  /// Zᵢ = μ L⁻ᵀ (I + Σⱼ Δⱼ Gⱼ) L⁻¹, which satisfies c + adjoint(Z) = 0 up to
  /// the accuracy of the Newton solve and is PSD whenever the decrement is
  /// below one.
  std::vector<SymMat> duals(const Eigen::VectorXd& step, double mu,
                            const std::vector<Eigen::MatrixXd>& lower_invs) const {
    std::vector<SymMat> out;
    out.reserve(p_.blocks.size());
    for (std::size_t i = 0; i < p_.blocks.size(); ++i) {
      const auto& b = p_.blocks[i];
      Eigen::MatrixXd df = Eigen::MatrixXd::Zero(b.dim(), b.dim());
      for (const auto& [j, f] : b.coeffs) df.noalias() += step(j) * f.matrix();
      const Eigen::MatrixXd& linv = lower_invs[i];
      Eigen::MatrixXd inner = symmetric_part(linv * df * linv.transpose()).matrix();
      inner.diagonal().array() += 1.0;
      out.push_back(symmetric_part(mu * (linv.transpose() * inner * linv)));
    }
    return out;
  }

 private:
  static VectorL solve_system(const MatrixL& h, const VectorL& rhs) {
    const Eigen::Index n = h.rows();
    if (n == 0) return VectorL();
    // Symmetric diagonal scaling keeps the factorization well conditioned
    // when barrier curvature differs by many orders between coordinates.
    VectorL scale(n);
    for (Eigen::Index i = 0; i < n; ++i) scale(i) = h(i, i) > 0.0 ? 1.0L / std::sqrt(h(i, i)) : 1.0L;
    MatrixL hs = scale.asDiagonal() * h * scale.asDiagonal();
    const VectorL rs = scale.cwiseProduct(rhs);
    Eigen::LLT<MatrixL> llt(hs);
    if (llt.info() == Eigen::Success) {
      VectorL y = llt.solve(rs);
      // One step of iterative refinement.
      y += llt.solve(rs - hs * y);
      return scale.cwiseProduct(y);
    }
    long double ridge = 1e-14L;
    for (int attempt = 0; attempt < 12; ++attempt, ridge *= 10.0L) {
      MatrixL reg = hs;
      reg.diagonal().array() += ridge;
      Eigen::LDLT<MatrixL> ldlt(reg);
      if (ldlt.info() == Eigen::Success && ldlt.isPositive()) return scale.cwiseProduct(ldlt.solve(rs));
    }
    throw SolverFailure("Newton system is singular");
  }

  const SdpProblem& p_;
  std::vector<int> active_;
  std::vector<int> position_;
};

struct CenterOutcome {
  bool ok = false;
  std::string message;
  bool unbounded = false;
};

/// Damped Newton centering of cᵀv/μ + barrier(v). `v` must be strictly
/// feasible on entry and stays so.
CenterOutcome center(const Barrier& barrier, const Eigen::VectorXd& c, double mu, double tol_decrement2,
                     Eigen::VectorXd& v, int& iterations, int max_iterations, NewtonStep& last,
                     std::vector<Eigen::MatrixXd>& lower_invs,
                     double objective_floor = -std::numeric_limits<double>::infinity()) {
  std::vector<Eigen::MatrixXd> trial;
  if (!barrier.factor(v, lower_invs)) return {false, "iterate left the interior"};
  double phi = c.dot(v) / mu + Barrier::value(lower_invs);
  while (true) {
    last = barrier.newton(c, mu, lower_invs);
    if (last.decrement2 <= tol_decrement2) return {true, {}};
    if (iterations >= max_iterations) return {false, "iteration cap reached"};
    ++iterations;

    const double lambda = std::sqrt(last.decrement2);
    double alpha = 1.0;
    int halvings = 0;
    while (true) {
      const Eigen::VectorXd cand = v + alpha * last.step;
      if (barrier.factor(cand, trial)) {
        const double phi_new = c.dot(cand) / mu + Barrier::value(trial);
        if (lambda < 0.25 || phi_new <= phi - 0.25 * alpha * last.decrement2) {
          v = cand;
          lower_invs.swap(trial);
          phi = phi_new;
          break;
        }
      }
      alpha *= 0.5;
      if (++halvings > kMaxHalvings) return {false, "line search failed"};
    }
    if (c.dot(v) < objective_floor) return {false, "objective decreased below the unboundedness threshold", true};
    if (!v.allFinite() || v.cwiseAbs().maxCoeff() > 1e15) return {false, "iterate diverged"};
  }
}

struct PathResult {
  SdpStatus status = SdpStatus::NumericalFailure;
  Eigen::VectorXd v;
  std::vector<SymMat> duals;
  double primal = 0.0;
  double dual = -std::numeric_limits<double>::infinity();
  int iterations = 0;
  std::string message;
};

/// Correction of dual blocks onto c + adjoint(Z) = 0 of the form
/// ΔZ = -Σⱼ yⱼ Z Fⱼ Z. Near the central path Z ≈ μ S⁻¹, so this is the
/// slack-weighted minimum-norm correction: its pairing with S stays at the
/// size of the complementarity term, and it is built from O(1) entries of Z
/// rather than from S⁻¹.
std::vector<SymMat> project_duals(const SdpProblem& p, const std::vector<SymMat>& duals) {
  const int n = p.nvars();
  std::vector<SymMat> out = duals;
  Eigen::VectorXd r = p.objective + adjoint(p, out);
  // A few passes act as iterative refinement for the badly conditioned
  // weighted Gram matrix; a pass is kept only if it shrinks the residual.
  for (int pass = 0; pass < 4 && r.norm() > 0.0; ++pass) {
    std::vector<std::vector<Eigen::MatrixXd>> zfz(p.blocks.size());
    Eigen::MatrixXd h = Eigen::MatrixXd::Zero(n, n);
    for (std::size_t i = 0; i < p.blocks.size(); ++i) {
      const auto& b = p.blocks[i];
      const Eigen::MatrixXd& z = out[i].matrix();
      for (const auto& [j, f] : b.coeffs) zfz[i].push_back(z * f.matrix() * z);
      for (std::size_t a = 0; a < b.coeffs.size(); ++a) {
        for (std::size_t c = 0; c < b.coeffs.size(); ++c) {
          h(b.coeffs[a].first, b.coeffs[c].first) += b.coeffs[a].second.inner(SymMat(symmetric_part(zfz[i][c])));
        }
      }
    }
    Eigen::VectorXd scale(n);
    for (int j = 0; j < n; ++j) scale(j) = h(j, j) > 0.0 ? 1.0 / std::sqrt(h(j, j)) : 1.0;
    const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(scale.asDiagonal() * h * scale.asDiagonal());
    const Eigen::VectorXd y = scale.cwiseProduct(cod.solve(scale.cwiseProduct(r)));
    std::vector<SymMat> next;
    next.reserve(out.size());
    for (std::size_t i = 0; i < out.size(); ++i) {
      const auto& b = p.blocks[i];
      Eigen::MatrixXd z = out[i].matrix();
      for (std::size_t a = 0; a < b.coeffs.size(); ++a) z.noalias() -= y(b.coeffs[a].first) * zfz[i][a];
      next.push_back(symmetric_part(z));
    }
    const Eigen::VectorXd r_next = p.objective + adjoint(p, next);
    if (!(r_next.norm() < r.norm())) break;
    out = std::move(next);
    r = r_next;
  }
  return out;
}

double dual_objective(const SdpProblem& p, const std::vector<SymMat>& duals) {
  double d = 0.0;
  for (std::size_t i = 0; i < p.blocks.size(); ++i) d += duals[i].inner(p.blocks[i].constant);
  return d;
}

/// Barrier path following from a strictly feasible `start`. `stop_early`
/// may end the run after any centering stage.
PathResult path_follow(const SdpProblem& p, Eigen::VectorXd start, const SolverOptions& opts,
                       const std::function<bool(double primal, double dual)>& stop_early = {}) {
  const Barrier barrier(p);
  PathResult out;
  out.v = std::move(start);
  double mu = opts.mu_initial;
  NewtonStep last;
  std::vector<Eigen::MatrixXd> lower_invs;
  while (true) {
    const auto outcome =
        center(barrier, p.objective, mu, kCenteringDecrement, out.v, out.iterations, opts.max_iterations, last,
               lower_invs, opts.unbounded_threshold);
    out.primal = p.objective.dot(out.v);
    if (!outcome.ok) {
      out.status = outcome.unbounded ? SdpStatus::Unbounded : SdpStatus::NumericalFailure;
      out.message = outcome.message;
      return out;
    }
    out.duals = project_duals(p, barrier.duals(last.step, mu, lower_invs));
    out.dual = dual_objective(p, out.duals);
    if (out.primal < opts.unbounded_threshold) {
      out.status = SdpStatus::Unbounded;
      out.message = "objective decreased below the unboundedness threshold";
      return out;
    }
    if (out.primal - out.dual <= opts.tol_gap * (1.0 + std::abs(out.primal)) ||
        (stop_early && stop_early(out.primal, out.dual))) {
      out.status = SdpStatus::Optimal;
      return out;
    }
    mu /= opts.mu_factor;
    if (mu < 1e-300) {
      out.status = SdpStatus::NumericalFailure;
      out.message = "barrier parameter underflow";
      return out;
    }
  }
}

bool strictly_feasible(const SdpProblem& p, const Eigen::VectorXd& v) {
  const Barrier barrier(p);
  std::vector<Eigen::MatrixXd> inv_lowers;
  return barrier.factor(v, inv_lowers);
}

}  // namespace

PhaseOneResult phase_one(const SdpProblem& p, const SolverOptions& opts) {
  p.validate();
  const int n = p.nvars();
  const double radius = opts.phase_one_radius;

  SdpProblem aug;
  for (const auto& b : p.variables.blocks()) aug.variables.add(b);
  aug.variables.add(VarBlock::scalar("__phase_one_t"));
  const int t_index = n;
  aug.objective = Eigen::VectorXd::Zero(n + 1);
  aug.objective(t_index) = 1.0;
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    AffineMatrixExpr b = p.blocks[i];
    b.coeffs.emplace_back(t_index, SymMat::identity(b.dim()) * -1.0);
    aug.add_block(p.block_names.empty() ? "block" : p.block_names[i], std::move(b));
  }
  aug.add_block("floor", AffineMatrixExpr{SymMat::identity(1) * -1.0, {{t_index, SymMat::identity(1) * -1.0}}});
  for (int j = 0; j < n; ++j) {
    aug.add_block("box+", AffineMatrixExpr{SymMat::identity(1) * -radius, {{j, SymMat::identity(1)}}});
    aug.add_block("box-", AffineMatrixExpr{SymMat::identity(1) * -radius, {{j, SymMat::identity(1) * -1.0}}});
  }

  Eigen::VectorXd start = Eigen::VectorXd::Zero(n + 1);
  double worst = -1.0;
  for (const auto& b : p.blocks) worst = std::max(worst, max_eig(b.evaluate(start.head(n))));
  start(t_index) = worst + 1.0;

  SolverOptions phase_opts = opts;
  phase_opts.unbounded_threshold = -std::numeric_limits<double>::infinity();
  // Once the dual bound on t* is positive the problem is certainly infeasible.
  const auto result = path_follow(aug, start, phase_opts,
                                  [&](double, double dual) { return dual > 10.0 * opts.tol_feas; });

  PhaseOneResult out;
  out.status = result.status;
  out.iterations = result.iterations;
  out.t = result.v(t_index);
  out.v = result.v.head(n);
  if (!result.duals.empty()) out.duals.assign(result.duals.begin(), result.duals.begin() + p.blocks.size());
  return out;
}

SdpSolution solve(const SdpProblem& p, double tol_gap, double tol_feas) {
  SolverOptions opts;
  opts.tol_gap = tol_gap;
  opts.tol_feas = tol_feas;
  return solve(p, opts);
}

SdpSolution solve(const SdpProblem& p, const SolverOptions& opts, const std::optional<Eigen::VectorXd>& start) {
  p.validate();
  SdpSolution sol;
  const int n = p.nvars();

  std::vector<bool> used(n, false);
  for (const auto& b : p.blocks) {
    for (const auto& [j, f] : b.coeffs) used[j] = true;
  }
  for (int j = 0; j < n; ++j) {
    if (!used[j] && p.objective(j) != 0.0) {
      sol.status = SdpStatus::Unbounded;
      sol.v = Eigen::VectorXd::Zero(n);
      sol.message = "objective depends on an unconstrained variable";
      return sol;
    }
  }

  Eigen::VectorXd v0;
  if (start && start->size() == n && strictly_feasible(p, *start)) {
    v0 = *start;
  } else {
    const PhaseOneResult ph = phase_one(p, opts);
    sol.phase_one_value = ph.t;
    sol.iterations = 0;
    if (ph.status != SdpStatus::Optimal) {
      sol.status = SdpStatus::NumericalFailure;
      sol.v = ph.v;
      sol.message = "phase 1 failed";
      return sol;
    }
    if (!ph.strictly_feasible(opts.tol_feas)) {
      sol.status = SdpStatus::Infeasible;
      sol.v = ph.v;
      double total = 0.0;
      for (const auto& w : ph.duals) total += w.trace();
      for (const auto& w : ph.duals) sol.farkas.push_back(total > 0.0 ? w * (1.0 / total) : w);
      sol.message = "no strictly feasible point: phase-1 optimum " + std::to_string(ph.t);
      return sol;
    }
    v0 = ph.v;
  }

  const auto result = path_follow(p, v0, opts);
  sol.status = result.status;
  sol.v = result.v;
  sol.duals = result.duals;
  sol.primal_value = result.primal;
  sol.dual_value = result.dual;
  sol.iterations = result.iterations;
  sol.message = result.message;
  return sol;
}

Eigen::VectorXd analytic_center(const SdpProblem& p, const Eigen::VectorXd& start, const SolverOptions& opts) {
  p.validate();
  const Barrier barrier(p);
  Eigen::VectorXd v = start;
  int iterations = 0;
  NewtonStep last;
  std::vector<Eigen::MatrixXd> lower_invs;
  const Eigen::VectorXd zero = Eigen::VectorXd::Zero(p.nvars());
  const auto outcome = center(barrier, zero, 1.0, 1e-12, v, iterations, 10 * opts.max_iterations, last, lower_invs);
  if (!outcome.ok) throw SolverFailure("analytic_center: " + outcome.message);
  return v;
}

double sdp_dual_value(const SdpProblem& p, const SdpSolution& sol) {
  if (sol.duals.size() != p.blocks.size()) throw DimensionMismatch("sdp_dual_value: solution has no dual blocks");
  return dual_objective(p, sol.duals);
}

Eigen::VectorXd adjoint(const SdpProblem& p, const std::vector<SymMat>& duals) {
  if (duals.size() != p.blocks.size()) throw DimensionMismatch("adjoint: wrong number of dual blocks");
  Eigen::VectorXd out = Eigen::VectorXd::Zero(p.nvars());
  for (std::size_t i = 0; i < p.blocks.size(); ++i) {
    for (const auto& [j, f] : p.blocks[i].coeffs) out(j) += duals[i].inner(f);
  }
  return out;
}

std::vector<double> residuals(const SdpProblem& p, const Eigen::VectorXd& v) {
  if (v.size() != p.nvars()) throw DimensionMismatch("residuals: wrong vector length");
  std::vector<double> out;
  out.reserve(p.blocks.size());
  for (const auto& b : p.blocks) out.push_back(max_eig(b.evaluate(v)));
  return out;
}

SdpProblem with_box(const SdpProblem& p, const Eigen::VectorXd& center, double radius) {
  if (center.size() != p.nvars()) throw DimensionMismatch("with_box: wrong center length");
  SdpProblem out = p;
  if (out.block_names.size() != out.blocks.size()) out.block_names.resize(out.blocks.size(), "block");
  for (int j = 0; j < p.nvars(); ++j) {
    out.add_block("box+", AffineMatrixExpr{SymMat::identity(1) * (-center(j) - radius), {{j, SymMat::identity(1)}}});
    out.add_block("box-", AffineMatrixExpr{SymMat::identity(1) * (center(j) - radius),
                                           {{j, SymMat::identity(1) * -1.0}}});
  }
  return out;
}

}  // namespace lcvx
