#include "lcvx/bmi.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "lcvx/errors.hpp"

namespace lcvx {

namespace {

constexpr long long kGridBudget = 10'000'000;
constexpr double kUnboundedValue = -1e9;
constexpr double kPrimalFeasibilityTol = 1e-9;

const Eigen::MatrixXd& lookup(const Assignment& x, const std::string& name) {
  const auto it = x.find(name);
  if (it == x.end()) throw MissingBlock("assignment lacks block '" + name + "'");
  return it->second;
}

Eigen::MatrixXd multiply(const Eigen::MatrixXd& left, const Eigen::MatrixXd& right) {
  if (left.cols() == right.rows()) return left * right;
  if (left.rows() == 1 && left.cols() == 1) return left(0, 0) * right;
  if (right.rows() == 1 && right.cols() == 1) return left * right(0, 0);
  throw DimensionMismatch("MatrixMonomial: factor shapes " + std::to_string(left.rows()) + "x" +
                          std::to_string(left.cols()) + " and " + std::to_string(right.rows()) + "x" +
                          std::to_string(right.cols()) + " do not chain");
}

/// Odometer over a tensor grid of the table's scalar coordinates.
class Grid {
 public:
  Grid(const VariableTable& vars, int per_dim) : per_dim_(per_dim) {
    if (per_dim < 2) throw Error("grid oracle: need at least 2 points per dimension");
    for (const auto& b : vars.blocks()) {
      if (!std::isfinite(b.lower) || !std::isfinite(b.upper) || b.lower > b.upper) {
        throw Error("grid oracle: block '" + b.name + "' has no finite bounds box");
      }
      for (int c = 0; c < b.coordinates(); ++c) {
        lo_.push_back(b.lower);
        hi_.push_back(b.upper);
      }
    }
    double total = 1.0;
    for (std::size_t d = 0; d < lo_.size(); ++d) total *= per_dim;
    if (total > static_cast<double>(kGridBudget)) {
      throw GridBudgetExceeded("grid oracle: " + std::to_string(per_dim) + "^" + std::to_string(lo_.size()) +
                               " points exceed the budget of 1e7");
    }
    index_.assign(lo_.size(), 0);
    point_.resize(static_cast<Eigen::Index>(lo_.size()));
    for (std::size_t d = 0; d < lo_.size(); ++d) point_(d) = grid_point(lo_[d], hi_[d], 0, per_dim_);
  }

  const Eigen::VectorXd& point() const { return point_; }

  bool on_boundary() const {
    return std::any_of(index_.begin(), index_.end(), [&](int k) { return k == 0 || k == per_dim_ - 1; });
  }

  /// Point reflected outward: center + 2 (x - center).
  Eigen::VectorXd probe() const {
    Eigen::VectorXd out = point_;
    for (std::size_t d = 0; d < lo_.size(); ++d) {
      const double c = 0.5 * (lo_[d] + hi_[d]);
      out(d) = c + 2.0 * (point_(d) - c);
    }
    return out;
  }

  bool next() {
    for (std::size_t d = lo_.size(); d-- > 0;) {
      if (++index_[d] < per_dim_) {
        point_(d) = grid_point(lo_[d], hi_[d], index_[d], per_dim_);
        return true;
      }
      index_[d] = 0;
      point_(d) = grid_point(lo_[d], hi_[d], 0, per_dim_);
    }
    return false;
  }

 private:
  int per_dim_;
  std::vector<double> lo_, hi_;
  std::vector<int> index_;
  Eigen::VectorXd point_;
};

}  // namespace

Factor Factor::matrix(Eigen::MatrixXd m) {
  Factor f;
  f.constant = std::move(m);
  return f;
}

Factor Factor::variable(std::string name, bool transposed) {
  Factor f;
  f.var = std::move(name);
  f.transposed = transposed;
  return f;
}

int MatrixMonomial::degree() const {
  return static_cast<int>(std::count_if(factors.begin(), factors.end(), [](const Factor& f) { return f.is_variable(); }));
}

Eigen::MatrixXd MatrixMonomial::evaluate(const Assignment& x) const {
  if (factors.empty()) throw DimensionMismatch("MatrixMonomial: no factors");
  auto value = [&](const Factor& f) -> Eigen::MatrixXd {
    const Eigen::MatrixXd& m = f.is_variable() ? lookup(x, f.var) : f.constant;
    if (f.transposed) return m.transpose();
    return m;
  };
  Eigen::MatrixXd out = value(factors.front());
  for (std::size_t k = 1; k < factors.size(); ++k) out = multiply(out, value(factors[k]));
  out *= scale;
  if (add_transpose) {
    if (out.rows() != out.cols()) throw DimensionMismatch("MatrixMonomial: symmetrized term is not square");
    out += out.transpose().eval();
  }
  return out;
}

int BilinearMatrixExpr::degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.degree());
  return d;
}

MatrixMonomial Polynomial::term(double coef, const std::vector<std::string>& vars) {
  MatrixMonomial m;
  m.scale = coef;
  if (vars.empty()) {
    m.factors.push_back(Factor::matrix(Eigen::MatrixXd::Ones(1, 1)));
  }
  for (const auto& v : vars) m.factors.push_back(Factor::variable(v));
  return m;
}

int Polynomial::degree() const {
  int d = 0;
  for (const auto& t : terms) d = std::max(d, t.degree());
  return d;
}

double Polynomial::evaluate(const Assignment& x) const {
  double sum = constant;
  for (const auto& t : terms) {
    const Eigen::MatrixXd v = t.evaluate(x);
    if (v.rows() != 1 || v.cols() != 1) throw DimensionMismatch("Polynomial: term does not evaluate to a scalar");
    sum += v(0, 0);
  }
  return sum;
}

void BmiProblem::add_constraint(std::string name, BilinearMatrixExpr expr) {
  constraint_names.push_back(std::move(name));
  constraints.push_back(std::move(expr));
}

void BmiProblem::validate() const {
  auto check_refs = [&](const MatrixMonomial& t) {
    for (const auto& f : t.factors) {
      if (f.is_variable() && !variables.contains(f.var)) {
        throw MissingBlock("term references undeclared block '" + f.var + "'");
      }
    }
  };
  if (objective.degree() > kMaxObjectiveDegree) {
    throw DegreeTooHigh("objective degree " + std::to_string(objective.degree()) + " exceeds 4");
  }
  for (const auto& t : objective.terms) check_refs(t);
  if (!constraint_names.empty() && constraint_names.size() != constraints.size()) {
    throw DimensionMismatch("BmiProblem: constraint name table does not match constraint list");
  }
  for (const auto& c : constraints) {
    if (c.degree() > kMaxConstraintDegree) {
      throw DegreeTooHigh("constraint degree " + std::to_string(c.degree()) + " exceeds 3");
    }
    for (const auto& t : c.terms) check_refs(t);
  }
  // Shapes: evaluate everything at the all-ones point.
  const Assignment ones = variables.unpack(Eigen::VectorXd::Ones(variables.size()));
  (void)objective.evaluate(ones);
  for (const auto& c : constraints) (void)eval_constraint(c, ones);
}

Multipliers Multipliers::zeros(const BmiProblem& p) {
  Multipliers m;
  for (const auto& c : p.constraints) m.lambdas.push_back(SymMat::zero(c.dim()));
  return m;
}

Multipliers Multipliers::scalars(const std::vector<double>& values) {
  Multipliers m;
  for (double v : values) m.lambdas.push_back(SymMat::identity(1) * v);
  return m;
}

void Multipliers::validate(const BmiProblem& p) const {
  if (lambdas.size() != p.constraints.size()) {
    throw DimensionMismatch("Multipliers: expected " + std::to_string(p.constraints.size()) + " blocks");
  }
  for (std::size_t i = 0; i < lambdas.size(); ++i) {
    if (lambdas[i].dim() != p.constraints[i].dim()) throw DimensionMismatch("Multipliers: block size mismatch");
    if (!is_psd(lambdas[i], 1e-10)) throw Error("Multipliers: block " + std::to_string(i) + " is not PSD");
  }
}

SymMat eval_constraint(const BilinearMatrixExpr& e, const Assignment& x) {
  Eigen::MatrixXd m = e.constant.matrix();
  for (const auto& t : e.terms) {
    const Eigen::MatrixXd v = t.evaluate(x);
    if (v.rows() != m.rows() || v.cols() != m.cols()) {
      throw DimensionMismatch("eval_constraint: term of size " + std::to_string(v.rows()) + "x" +
                              std::to_string(v.cols()) + " in a block of size " + std::to_string(m.rows()));
    }
    m += v;
  }
  return SymMat(m);
}

double objective_value(const BmiProblem& p, const Assignment& x) { return p.objective.evaluate(x); }

double lagrangian(const BmiProblem& p, const Assignment& x, const Multipliers& m) {
  if (m.lambdas.size() != p.constraints.size()) throw DimensionMismatch("lagrangian: multiplier count mismatch");
  double value = objective_value(p, x);
  for (std::size_t i = 0; i < p.constraints.size(); ++i) {
    value += m.lambdas[i].inner(eval_constraint(p.constraints[i], x));
  }
  return value;
}

double grid_point(double lo, double hi, int k, int n) {
  const int rest = n - 1 - k;
  return (lo * rest + hi * k) / (n - 1);
}

DualOracleResult dual_oracle(const BmiProblem& p, const Multipliers& m, int grid_per_dim) {
  m.validate(p);
  Grid grid(p.variables, grid_per_dim);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_point;
  bool best_on_boundary = false;
  Eigen::VectorXd best_probe;
  do {
    const double value = lagrangian(p, p.variables.unpack(grid.point()), m);
    if (value <= best) {
      best = value;
      best_point = grid.point();
      best_on_boundary = grid.on_boundary();
      if (best_on_boundary) best_probe = grid.probe();
    }
  } while (grid.next());

  DualOracleResult out;
  out.value = best;
  out.argmin = p.variables.unpack(best_point);
  if (best < kUnboundedValue) {
    out.unbounded_below = true;
  } else if (best_on_boundary) {
    const double outward = lagrangian(p, p.variables.unpack(best_probe), m);
    out.unbounded_below = outward < best - 1e-12 * (1.0 + std::abs(best));
  }
  return out;
}

PrimalOracleResult primal_oracle(const BmiProblem& p, int grid_per_dim) {
  Grid grid(p.variables, grid_per_dim);
  double best = std::numeric_limits<double>::infinity();
  Eigen::VectorXd best_point;
  do {
    const Assignment x = p.variables.unpack(grid.point());
    bool feasible = true;
    for (const auto& c : p.constraints) {
      if (max_eig(eval_constraint(c, x)) > kPrimalFeasibilityTol) {
        feasible = false;
        break;
      }
    }
    if (!feasible) continue;
    const double value = objective_value(p, x);
    if (value <= best) {
      best = value;
      best_point = grid.point();
    }
  } while (grid.next());
  if (best_point.size() == 0 && p.variables.size() > 0) {
    throw NoFeasibleGridPoint("primal_oracle: no grid point satisfies the constraints");
  }
  return {best, p.variables.unpack(best_point)};
}

bool weak_duality_check(double p_val, double d_val, double tol) {
  if (d_val == -std::numeric_limits<double>::infinity()) return true;
  return d_val <= p_val + tol;
}

}  // namespace lcvx
