#include "lcvx/convexify.hpp"

#include <algorithm>
#include <cmath>
#include <memory>
#include <random>
#include <utility>

#include <Eigen/Cholesky>

#include "lcvx/errors.hpp"

namespace lcvx {

namespace {

Eigen::MatrixXd scalar_matrix(double a) { return Eigen::MatrixXd::Constant(1, 1, a); }

double scalar_of(const Assignment& a, const std::string& name) {
  const auto it = a.find(name);
  if (it == a.end()) throw MissingBlock("assignment lacks block '" + name + "'");
  return it->second(0, 0);
}

const Eigen::MatrixXd& block_of(const Assignment& a, const std::string& name) {
  const auto it = a.find(name);
  if (it == a.end()) throw MissingBlock("assignment lacks block '" + name + "'");
  return it->second;
}

void require_scalar_blocks(const BmiProblem& p, const std::vector<std::string>& names, const char* who) {
  for (const auto& name : names) {
    if (!p.variables.contains(name) || p.variables.block(name).kind != VarKind::Scalar) {
      throw SchemaMismatch(std::string(who) + ": source must declare scalar block '" + name + "'");
    }
  }
}

MatrixMonomial mono(double scale, std::vector<Factor> factors, bool add_transpose = false) {
  MatrixMonomial m;
  m.scale = scale;
  m.factors = std::move(factors);
  m.add_transpose = add_transpose;
  return m;
}

AffineMatrixExpr scalar_block(double constant, std::vector<std::pair<int, double>> coeffs) {
  AffineMatrixExpr e;
  e.constant = SymMat::identity(1) * constant;
  for (const auto& [j, a] : coeffs) e.coeffs.emplace_back(j, SymMat::identity(1) * a);
  return e;
}

constexpr double kTraceBoundPerState = 1000.0;

/// Data shared by the control map closures.
struct ControlData {
  LtiSystem sys;
  double epsilon = 0.0;
  double rho = 1.0;

  int n() const { return sys.states(); }
  int m() const { return sys.inputs(); }

  Eigen::MatrixXd closed(const Eigen::MatrixXd& P, const Eigen::MatrixXd& M) const { return sys.A * P + sys.B * M; }

  Eigen::MatrixXd lyapunov(const Eigen::MatrixXd& P, const Eigen::MatrixXd& M, double t) const {
    const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n(), n());
    const Eigen::MatrixXd K = closed(P, M);
    if (sys.clock == Clock::ContinuousTime) return K + K.transpose() + (epsilon - t) * I;
    Eigen::MatrixXd out(2 * n(), 2 * n());
    out << -P + (epsilon - t) * I, K, K.transpose(), -P;
    return out;
  }

  Eigen::MatrixXd positivity(const Eigen::MatrixXd& P, double t) const {
    return (epsilon - t) * Eigen::MatrixXd::Identity(n(), n()) - P;
  }

  Eigen::MatrixXd trace_bound(const Eigen::MatrixXd& P) const {
    return scalar_matrix(P.trace() - kTraceBoundPerState * n());
  }

  Eigen::MatrixXd gain(const Eigen::MatrixXd& M) const {
    Eigen::MatrixXd out = Eigen::MatrixXd::Zero(m() + n(), m() + n());
    out.topLeftCorner(m(), m()).diagonal().setConstant(-rho);
    out.bottomRightCorner(n(), n()).diagonal().setConstant(-rho);
    out.topRightCorner(m(), n()) = M;
    out.bottomLeftCorner(n(), m()) = M.transpose();
    return out;
  }
};

/// Smallest eigenvalue of P; throws SingularP when P is nearly singular.
double check_invertible(const Eigen::MatrixXd& P) {
  const SymMat s(P);
  const EigenDecomp eig = sym_eig(s);
  if (eig.values.cwiseAbs().minCoeff() <= 1e-10 * std::max(1.0, s.frobenius_norm())) {
    throw SingularP("P is singular");
  }
  return eig.values(0);
}

Eigen::LLT<Eigen::MatrixXd> factor_lyapunov(const Eigen::MatrixXd& P) {
  if (check_invertible(P) < 0.0) throw DomainViolation("P is not positive definite");
  return Eigen::LLT<Eigen::MatrixXd>(SymMat(P).matrix());
}

BmiProblem control_source(const ControlData& d) {
  const int n = d.n();
  const int m = d.m();
  const Eigen::MatrixXd& A = d.sys.A;
  const Eigen::MatrixXd& B = d.sys.B;
  const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  const auto P = Factor::variable("P");
  const auto F = Factor::variable("F");
  const auto Ft = Factor::variable("F", true);
  const auto t = Factor::variable("t");

  BmiProblem p;
  p.variables.add(VarBlock::symmetric("P", n));
  p.variables.add(VarBlock::matrix("F", m, n));
  p.variables.add(VarBlock::scalar("t"));
  p.objective.terms.push_back(Polynomial::term(1.0, {"t"}));

  BilinearMatrixExpr lyap;
  lyap.constant = SymMat::identity(n) * d.epsilon;
  lyap.terms.push_back(mono(-1.0, {t, Factor::matrix(I)}));
  if (d.sys.clock == Clock::ContinuousTime) {
    lyap.terms.push_back(mono(1.0, {Factor::matrix(A), P}, true));
    lyap.terms.push_back(mono(1.0, {Factor::matrix(B), F, P}, true));
  } else {
    lyap.terms.push_back(mono(1.0, {Factor::matrix(A), P, Factor::matrix(A.transpose())}));
    lyap.terms.push_back(mono(1.0, {Factor::matrix(B), F, P, Factor::matrix(A.transpose())}, true));
    lyap.terms.push_back(mono(1.0, {Factor::matrix(B), F, P, Ft, Factor::matrix(B.transpose())}));
    lyap.terms.push_back(mono(-1.0, {P}));
  }
  p.add_constraint("lyapunov", std::move(lyap));

  BilinearMatrixExpr pos;
  pos.constant = SymMat::identity(n) * d.epsilon;
  pos.terms.push_back(mono(-1.0, {P}));
  pos.terms.push_back(mono(-1.0, {t, Factor::matrix(I)}));
  p.add_constraint("positivity", std::move(pos));

  BilinearMatrixExpr tr;
  tr.constant = SymMat::identity(1) * (-kTraceBoundPerState * n);
  for (int i = 0; i < n; ++i) {
    const Eigen::MatrixXd e = I.col(i);
    tr.terms.push_back(mono(1.0, {Factor::matrix(e.transpose()), P, Factor::matrix(e)}));
  }
  p.add_constraint("trace", std::move(tr));

  BilinearMatrixExpr gain;
  Eigen::MatrixXd g0 = Eigen::MatrixXd::Identity(m + n, m + n) * -d.rho;
  gain.constant = SymMat(g0);
  Eigen::MatrixXd top = Eigen::MatrixXd::Zero(m + n, m);
  top.topRows(m) = Eigen::MatrixXd::Identity(m, m);
  Eigen::MatrixXd bottom = Eigen::MatrixXd::Zero(m + n, n);
  bottom.bottomRows(n) = I;
  gain.terms.push_back(mono(1.0, {Factor::matrix(top), F, P, Factor::matrix(bottom.transpose())}, true));
  p.add_constraint("gain_bound", std::move(gain));

  p.validate();
  return p;
}

SdpProblem control_target(const ControlData& d) {
  SdpProblem p;
  p.variables.add(VarBlock::symmetric("P", d.n()));
  p.variables.add(VarBlock::matrix("M", d.m(), d.n()));
  p.variables.add(VarBlock::scalar("t"));
  p.objective = Eigen::VectorXd::Zero(p.nvars());
  p.objective(p.variables.index("t")) = 1.0;

  const VariableTable& vars = p.variables;
  const int lyap_dim = d.sys.clock == Clock::ContinuousTime ? d.n() : 2 * d.n();
  p.add_block("lyapunov", linearize(vars, lyap_dim, [&](const Assignment& a) {
                return d.lyapunov(a.at("P"), a.at("M"), a.at("t")(0, 0));
              }));
  p.add_block("positivity", linearize(vars, d.n(), [&](const Assignment& a) {
                return d.positivity(a.at("P"), a.at("t")(0, 0));
              }));
  p.add_block("trace", linearize(vars, 1, [&](const Assignment& a) { return d.trace_bound(a.at("P")); }));
  p.add_block("gain_bound", linearize(vars, d.m() + d.n(), [&](const Assignment& a) { return d.gain(a.at("M")); }));
  p.validate();
  return p;
}

std::vector<double> normal_vector(std::mt19937_64& rng, int n) {
  std::normal_distribution<double> normal;
  std::vector<double> out(n);
  for (auto& x : out) x = normal(rng);
  return out;
}

double max_abs(const Eigen::MatrixXd& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

}  // namespace

std::string to_string(MapKind kind) {
  switch (kind) {
    case MapKind::Example1:
      return "example1";
    case MapKind::Example2:
      return "example2";
    case MapKind::ControlCT:
      return "control_ct";
    case MapKind::ControlDT:
      return "control_dt";
  }
  return "unknown";
}

Assignment forward(const ChangeOfVariables& c, const Assignment& x) {
  if (!c.forward) throw Error("ChangeOfVariables has no forward map");
  return c.forward(x);
}

Assignment recover(const ChangeOfVariables& c, const Assignment& v) {
  if (!c.recover) throw Error("ChangeOfVariables has no recovery map");
  return c.recover(v);
}

BmiProblem example1_problem() {
  BmiProblem p;
  p.variables.add(VarBlock::scalar("x", -3.0, 3.0));
  p.objective.terms.push_back(Polynomial::term(1.0, {"x", "x"}));
  BilinearMatrixExpr phi;
  phi.constant = SymMat::identity(1);
  phi.terms.push_back(Polynomial::term(-1.0, {"x", "x"}));
  p.add_constraint("phi1", std::move(phi));
  return p;
}

BmiProblem example2_problem() {
  BmiProblem p;
  p.variables.add(VarBlock::scalar("x1", 0.5, 3.0));
  p.variables.add(VarBlock::scalar("x2", 0.5, 3.0));
  p.objective.terms.push_back(Polynomial::term(1.0, {"x1", "x1"}));
  p.objective.terms.push_back(Polynomial::term(1.0, {"x1", "x2", "x2"}));
  BilinearMatrixExpr phi1;
  phi1.constant = SymMat::identity(1);
  phi1.terms.push_back(Polynomial::term(-1.0, {"x1", "x2", "x2"}));
  p.add_constraint("phi1", std::move(phi1));
  BilinearMatrixExpr phi2;
  phi2.constant = SymMat::identity(1);
  phi2.terms.push_back(Polynomial::term(-1.0, {"x1"}));
  p.add_constraint("phi2", std::move(phi2));
  return p;
}

ChangeOfVariables example1_map(BmiProblem source) {
  require_scalar_blocks(source, {"x"}, "example1_map");
  if (source.constraints.size() != 1) throw SchemaMismatch("example1_map: source must have one constraint");
  source.validate();

  ChangeOfVariables c;
  c.kind = MapKind::Example1;
  c.source = std::move(source);
  c.target.variables.add(VarBlock::scalar("v"));
  c.target.objective = Eigen::VectorXd::Constant(1, -1.0);
  c.target.add_block("phi1", scalar_block(1.0, {{0, 1.0}}));
  c.region = c.target;

  c.forward = [](const Assignment& x) {
    const double xv = scalar_of(x, "x");
    return Assignment{{"v", scalar_matrix(-xv * xv)}};
  };
  c.recover = [](const Assignment& v) {
    const double vv = scalar_of(v, "v");
    if (vv > -1.0 + 1e-9) throw DomainViolation("example1 recovery needs v <= -1");
    return Assignment{{"x", scalar_matrix(std::sqrt(-vv))}};
  };
  c.target_constraint = [](std::size_t, const Assignment& v) {
    return SymMat::identity(1) * (scalar_of(v, "v") + 1.0);
  };
  c.target_objective = [](const Assignment& v) { return -scalar_of(v, "v"); };
  return c;
}

ChangeOfVariables example2_map(BmiProblem source) {
  require_scalar_blocks(source, {"x1", "x2"}, "example2_map");
  if (source.constraints.size() != 2) throw SchemaMismatch("example2_map: source must have two constraints");
  source.validate();

  ChangeOfVariables c;
  c.kind = MapKind::Example2;
  c.source = std::move(source);
  c.target.variables.add(VarBlock::scalar("v1"));
  c.target.variables.add(VarBlock::scalar("v2"));
  c.target.variables.add(VarBlock::scalar("s"));
  c.target.objective = Eigen::Vector3d(0.0, 1.0, 1.0);
  c.target.add_block("phi1", scalar_block(1.0, {{1, -1.0}}));
  c.target.add_block("phi2", scalar_block(1.0, {{0, -1.0}}));
  AffineMatrixExpr epi;
  epi.constant = SymMat::from_rows({{0.0, 0.0}, {0.0, -1.0}});
  epi.coeffs.emplace_back(0, SymMat::from_rows({{0.0, -1.0}, {-1.0, 0.0}}));
  epi.coeffs.emplace_back(2, SymMat::from_rows({{-1.0, 0.0}, {0.0, 0.0}}));
  c.target.add_block("epigraph", std::move(epi));
  c.region = c.target;
  c.auxiliary = {"s"};

  c.forward = [](const Assignment& x) {
    const double x1 = scalar_of(x, "x1");
    const double x2 = scalar_of(x, "x2");
    return Assignment{{"v1", scalar_matrix(x1)}, {"v2", scalar_matrix(x1 * x2 * x2)}, {"s", scalar_matrix(x1 * x1)}};
  };
  c.recover = [](const Assignment& v) {
    const double v1 = scalar_of(v, "v1");
    const double v2 = scalar_of(v, "v2");
    if (v1 < 1.0 - 1e-9) throw DomainViolation("example2 recovery needs v1 >= 1");
    if (v2 < 0.0) throw DomainViolation("example2 recovery needs v2 >= 0");
    return Assignment{{"x1", scalar_matrix(v1)}, {"x2", scalar_matrix(std::sqrt(v2 / v1))}};
  };
  c.target_constraint = [](std::size_t i, const Assignment& v) {
    const double value = i == 0 ? 1.0 - scalar_of(v, "v2") : 1.0 - scalar_of(v, "v1");
    return SymMat::identity(1) * value;
  };
  c.target_objective = [](const Assignment& v) {
    const double v1 = scalar_of(v, "v1");
    return v1 * v1 + scalar_of(v, "v2");
  };
  return c;
}

double gain_bound(const LtiSystem& sys) {
  const double b = sys.B.norm();
  if (b == 0.0) return 1.0;
  return 1e2 * sys.states() * (1.0 + sys.A.norm()) / b;
}

ChangeOfVariables control_map(const LtiSystem& sys, double epsilon) {
  sys.validate();
  if (!(epsilon > 0.0) || !std::isfinite(epsilon)) throw Error("control_map: epsilon must be positive");
  auto data = std::make_shared<ControlData>();
  data->sys = sys;
  data->epsilon = epsilon;
  data->rho = gain_bound(sys);

  ChangeOfVariables c;
  c.kind = sys.clock == Clock::ContinuousTime ? MapKind::ControlCT : MapKind::ControlDT;
  c.source = control_source(*data);
  c.target = control_target(*data);
  c.region = c.target;
  c.region.add_block("margin_cut", scalar_block(0.0, {{c.target.variables.index("t"), 1.0}}));

  c.forward = [data](const Assignment& x) {
    const Eigen::MatrixXd P_sym = SymMat(block_of(x, "P")).matrix();
    check_invertible(P_sym);
    return Assignment{{"P", P_sym}, {"M", block_of(x, "F") * P_sym}, {"t", block_of(x, "t")}};
  };
  c.recover = [data](const Assignment& v) {
    const Eigen::MatrixXd P = SymMat(block_of(v, "P")).matrix();
    const auto llt = factor_lyapunov(P);
    const Eigen::MatrixXd F = llt.solve(block_of(v, "M").transpose()).transpose();
    return Assignment{{"P", P}, {"F", F}, {"t", block_of(v, "t")}};
  };
  c.target_constraint = [data](std::size_t i, const Assignment& v) {
    const Eigen::MatrixXd& P = block_of(v, "P");
    const Eigen::MatrixXd& M = block_of(v, "M");
    const double t = scalar_of(v, "t");
    switch (i) {
      case 0: {
        if (data->sys.clock == Clock::ContinuousTime) return SymMat(data->lyapunov(P, M, t));
        const Eigen::MatrixXd K = data->closed(P, M);
        check_invertible(P);
        const Eigen::MatrixXd I = Eigen::MatrixXd::Identity(data->n(), data->n());
        return symmetric_part(K * P.ldlt().solve(K.transpose()) - P + (data->epsilon - t) * I);
      }
      case 1:
        return SymMat(data->positivity(P, t));
      case 2:
        return SymMat(data->trace_bound(P));
      case 3:
        return SymMat(data->gain(M));
      default:
        throw DimensionMismatch("control map has four constraints");
    }
  };
  c.target_objective = [](const Assignment& v) { return scalar_of(v, "t"); };
  return c;
}

std::vector<Eigen::VectorXd> sample_region(const SdpProblem& region, int nsamples, std::uint64_t seed) {
  if (nsamples < 0) throw Error("sample_region: negative sample count");
  SolverOptions opts;
  const PhaseOneResult ph = phase_one(region, opts);
  if (!ph.strictly_feasible(opts.tol_feas)) {
    throw SamplingFailed("no strictly feasible target point (phase-1 value " + std::to_string(ph.t) + ")");
  }
  const Eigen::VectorXd& v0 = ph.v;
  const double radius = 10.0 * std::max(1.0, v0.size() ? v0.cwiseAbs().maxCoeff() : 0.0);
  SdpProblem boxed = with_box(region, v0, radius);
  const Eigen::VectorXd center = analytic_center(boxed, v0, opts);

  std::mt19937_64 rng(seed);
  SolverOptions vertex_opts;
  vertex_opts.tol_gap = 1e-6;
  std::vector<Eigen::VectorXd> vertices;
  for (int k = 0; k < 10; ++k) {
    const auto dir = normal_vector(rng, boxed.nvars());
    Eigen::VectorXd c = Eigen::Map<const Eigen::VectorXd>(dir.data(), boxed.nvars());
    if (c.norm() > 0.0) c /= c.norm();
    boxed.objective = c;
    const SdpSolution sol = solve(boxed, vertex_opts, center);
    if (sol.status == SdpStatus::Optimal) vertices.push_back(sol.v);
  }

  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::exponential_distribution<double> expo(1.0);
  std::vector<Eigen::VectorXd> out;
  out.reserve(nsamples);
  for (int s = 0; s < nsamples; ++s) {
    const double w_center = vertices.empty() ? 1.0 : 0.05 + 0.45 * unit(rng);
    Eigen::VectorXd v = w_center * center;
    if (!vertices.empty()) {
      std::vector<double> w(vertices.size());
      double total = 0.0;
      for (auto& wi : w) total += (wi = expo(rng));
      for (std::size_t k = 0; k < vertices.size(); ++k) v += (1.0 - w_center) * (w[k] / total) * vertices[k];
    }
    out.push_back(std::move(v));
  }
  return out;
}

SpotCheckReport surjection_spotcheck(const ChangeOfVariables& c, int nsamples, std::uint64_t seed) {
  SpotCheckReport r;
  r.samples = nsamples;
  r.seed = seed;
  const auto samples = sample_region(c.region, nsamples, seed);
  const VariableTable& tv = c.target.variables;
  for (const auto& v : samples) {
    const Assignment va = tv.unpack(v);
    const double vscale = std::max(1.0, v.size() ? v.cwiseAbs().maxCoeff() : 0.0);
    try {
      const Assignment x = recover(c, va);
      const Assignment back = forward(c, x);
      for (const auto& b : tv.blocks()) {
        if (c.auxiliary.count(b.name)) continue;
        r.worst_roundtrip = std::max(r.worst_roundtrip, max_abs(block_of(back, b.name) - va.at(b.name)) / vscale);
      }
      const double f_src = objective_value(c.source, x);
      const double f_tgt = c.target_objective(va);
      r.worst_transport = std::max(r.worst_transport, std::abs(f_src - f_tgt) / std::max(1.0, std::abs(f_tgt)));
      for (std::size_t i = 0; i < c.source.constraints.size(); ++i) {
        const SymMat phi = eval_constraint(c.source.constraints[i], x);
        const SymMat phi_t = c.target_constraint(i, va);
        r.worst_source_violation = std::max(r.worst_source_violation, max_eig(phi));
        r.worst_transport = std::max(r.worst_transport, max_abs((phi - phi_t).matrix()) /
                                                            std::max(1.0, max_abs(phi_t.matrix())));
      }
    } catch (const Error& e) {
      ++r.failures;
      if (r.message.empty()) r.message = e.what();
    }
  }
  r.pass = r.failures == 0 && r.worst_roundtrip <= 1e-8 && r.worst_source_violation <= 1e-7 &&
           r.worst_transport <= 1e-8;
  if (r.message.empty() && !r.pass) r.message = "tolerance exceeded";
  return r;
}

bool epigraph_member_source(const BmiProblem& p, const EpigraphPoint& pt, const Assignment& x) {
  if (pt.U.size() != p.constraints.size()) throw DimensionMismatch("epigraph point has the wrong number of blocks");
  for (std::size_t i = 0; i < pt.U.size(); ++i) {
    if (max_eig(eval_constraint(p.constraints[i], x) - pt.U[i]) > 1e-10) return false;
  }
  return objective_value(p, x) <= pt.t + 1e-10;
}

bool epigraph_member_target(const ChangeOfVariables& c, const EpigraphPoint& pt, const Assignment& v, double tol) {
  if (pt.U.size() != c.source.constraints.size()) {
    throw DimensionMismatch("epigraph point has the wrong number of blocks");
  }
  for (std::size_t i = 0; i < pt.U.size(); ++i) {
    if (max_eig(c.target_constraint(i, v) - pt.U[i]) > tol) return false;
  }
  return c.target_objective(v) <= pt.t + tol;
}

SpotCheckReport inclusion_spotcheck(const BmiProblem& p, const ChangeOfVariables& c, int nsamples,
                                    std::uint64_t seed) {
  SpotCheckReport r;
  r.samples = nsamples;
  r.seed = seed;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> unit(0.0, 1.0);
  std::normal_distribution<double> normal;

  std::vector<double> lo, hi;
  for (const auto& b : p.variables.blocks()) {
    for (int k = 0; k < b.coordinates(); ++k) {
      lo.push_back(b.lower);
      hi.push_back(b.upper);
    }
  }

  for (int s = 0; s < nsamples; ++s) {
    Eigen::VectorXd xv(p.variables.size());
    for (int k = 0; k < xv.size(); ++k) {
      xv(k) = std::isfinite(lo[k]) && std::isfinite(hi[k]) ? lo[k] + (hi[k] - lo[k]) * unit(rng) : normal(rng);
    }
    const Assignment x = p.variables.unpack(xv);

    EpigraphPoint pt;
    double scale = 1.0;
    for (const auto& con : p.constraints) {
      Eigen::MatrixXd u = eval_constraint(con, x).matrix();
      if (unit(rng) >= 0.25) {
        Eigen::MatrixXd g(u.rows(), u.cols());
        for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = normal(rng);
        u += g * g.transpose();
      }
      scale = std::max(scale, max_abs(u));
      pt.U.emplace_back(u);
    }
    pt.t = objective_value(p, x) + (unit(rng) < 0.25 ? 0.0 : std::abs(normal(rng)));
    scale = std::max(scale, std::abs(pt.t));

    try {
      if (!epigraph_member_source(p, pt, x)) {
        ++r.failures;
        if (r.message.empty()) r.message = "lifted point is not in the source epigraph";
        continue;
      }
      const Assignment v = forward(c, x);
      double violation = c.target_objective(v) - pt.t;
      for (std::size_t i = 0; i < pt.U.size(); ++i) {
        violation = std::max(violation, max_eig(c.target_constraint(i, v) - pt.U[i]));
      }
      r.worst_transport = std::max(r.worst_transport, violation / scale);
      if (!epigraph_member_target(c, pt, v, 1e-9 * scale)) {
        ++r.failures;
        if (r.message.empty()) r.message = "source epigraph point missing from the target epigraph";
      }
    } catch (const Error& e) {
      ++r.failures;
      if (r.message.empty()) r.message = e.what();
    }
  }
  r.pass = r.failures == 0;
  return r;
}

}  // namespace lcvx
