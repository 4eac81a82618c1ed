#pragma once

#include <string>
#include <vector>

#include <Eigen/Core>

#include "lcvx/symmat.hpp"
#include "lcvx/variables.hpp"

namespace lcvx {

/// One factor of a matrix product: either a constant matrix or a reference
/// to a variable block (optionally transposed).
struct Factor {
  std::string var;  // empty for constants
  Eigen::MatrixXd constant;
  bool transposed = false;

  static Factor matrix(Eigen::MatrixXd m);
  static Factor variable(std::string name, bool transposed = false);
  bool is_variable() const { return !var.empty(); }
};

/// scale · F₁ F₂ ⋯ F_k, plus its transpose when `add_transpose` is set.
/// A 1x1 factor multiplies as a scalar when its neighbour is not a row or
/// column vector of matching size, so t·I can be written as {t, I}.
struct MatrixMonomial {
  double scale = 1.0;
  std::vector<Factor> factors;
  bool add_transpose = false;

  int degree() const;
  Eigen::MatrixXd evaluate(const Assignment& x) const;
};

/// Φ(x) = constant + Σ terms. Terms of degree one are the linear part;
/// degree two and three carry the bilinear structure, e.g. B F P + (B F P)ᵀ
/// or B F P Fᵀ Bᵀ.
struct BilinearMatrixExpr {
  SymMat constant = SymMat::zero(1);
  std::vector<MatrixMonomial> terms;

  int dim() const { return constant.dim(); }
  int degree() const;
};

/// Scalar polynomial over block entries, each term evaluating to 1x1.
struct Polynomial {
  double constant = 0.0;
  std::vector<MatrixMonomial> terms;

  /// coef · Π vars, for scalar variables, e.g. term(1.0, {"x1", "x2", "x2"}).
  static MatrixMonomial term(double coef, const std::vector<std::string>& vars);

  int degree() const;
  double evaluate(const Assignment& x) const;
};

/// minimize f(x) subject to Φᵢ(x) ⪯ 0.
struct BmiProblem {
  VariableTable variables;
  Polynomial objective;
  std::vector<BilinearMatrixExpr> constraints;
  std::vector<std::string> constraint_names;

  static constexpr int kMaxObjectiveDegree = 4;
  static constexpr int kMaxConstraintDegree = 3;

  void add_constraint(std::string name, BilinearMatrixExpr expr);
  /// Checks that every referenced block exists, shapes agree and degree caps
  /// hold. Throws MissingBlock, DimensionMismatch or DegreeTooHigh.
  void validate() const;
};

/// Lagrange multipliers Λᵢ ⪰ 0, one per constraint.
struct Multipliers {
  std::vector<SymMat> lambdas;

  static Multipliers zeros(const BmiProblem& p);
  /// For problems whose constraints are all scalar.
  static Multipliers scalars(const std::vector<double>& values);
  /// Throws DimensionMismatch on wrong sizes, Error when some Λᵢ is not PSD
  /// within 1e-10.
  void validate(const BmiProblem& p) const;
};

SymMat eval_constraint(const BilinearMatrixExpr& e, const Assignment& x);

double objective_value(const BmiProblem& p, const Assignment& x);

/// f(x) + Σ Tr(Λᵢ Φᵢ(x)).
double lagrangian(const BmiProblem& p, const Assignment& x, const Multipliers& m);

struct DualOracleResult {
  bool unbounded_below = false;
  double value = 0.0;  // grid minimum; meaningful when bounded
  Assignment argmin;
};

/// Grid minimum of the Lagrangian over the bounds box. Reports unbounded
/// below when the minimizer sits on the box boundary and the Lagrangian keeps
/// decreasing at twice the box radius, or when the minimum is below -1e9.
/// Throws GridBudgetExceeded beyond 10⁷ points and Error for unbounded boxes.
DualOracleResult dual_oracle(const BmiProblem& p, const Multipliers& m, int grid_per_dim);

struct PrimalOracleResult {
  double value = 0.0;
  Assignment argmin;
};

/// Best grid point with every max_eig(Φᵢ(x)) ≤ 1e-9. Exact ties go to the
/// later grid point. Throws NoFeasibleGridPoint.
PrimalOracleResult primal_oracle(const BmiProblem& p, int grid_per_dim);

/// d ≤ p + tol; d = -∞ always passes.
bool weak_duality_check(double p_val, double d_val, double tol);

/// Grid coordinate k of N on [lo, hi], computed so that integer-valued
/// points and the midpoint of a symmetric box are hit exactly.
double grid_point(double lo, double hi, int k, int n);

}  // namespace lcvx
