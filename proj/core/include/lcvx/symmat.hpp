#pragma once

#include <Eigen/Core>

namespace lcvx {

/// Dense symmetric matrix. Entries are stored in full and are exactly
/// symmetric: construction averages the input with its transpose.
///
/// Inputs whose asymmetry exceeds 1e-9 (relative to the largest entry, with a
/// floor of 1) are rejected with SymmetryError; smaller drift, such as the
/// rounding left behind by products like A P Aᵀ, is absorbed.
class SymMat {
 public:
  explicit SymMat(const Eigen::MatrixXd& m);

  static SymMat identity(int n);
  static SymMat zero(int n);
  static SymMat diagonal(const Eigen::VectorXd& d);
  /// Builds a matrix from a row-major initializer, e.g. {{2, 1}, {1, 2}}.
  static SymMat from_rows(std::initializer_list<std::initializer_list<double>> rows);

  int dim() const { return static_cast<int>(m_.rows()); }
  const Eigen::MatrixXd& matrix() const { return m_; }
  double operator()(int i, int j) const { return m_(i, j); }

  double trace() const { return m_.trace(); }
  double frobenius_norm() const { return m_.norm(); }
  /// Tr(this · other), the Frobenius inner product.
  double inner(const SymMat& other) const;

  SymMat operator+(const SymMat& o) const;
  SymMat operator-(const SymMat& o) const;
  SymMat operator-() const;
  SymMat operator*(double s) const;

 private:
  struct Trusted {};
  SymMat(Eigen::MatrixXd m, Trusted) : m_(std::move(m)) {}

  Eigen::MatrixXd m_;
};

inline SymMat operator*(double s, const SymMat& m) { return m * s; }

/// (M + Mᵀ)/2 without the asymmetry check, for products that are symmetric
/// in exact arithmetic but may drift arbitrarily when ill-conditioned.
SymMat symmetric_part(const Eigen::MatrixXd& m);

struct EigenDecomp {
  Eigen::VectorXd values;   // ascending
  Eigen::MatrixXd vectors;  // orthonormal columns, matching `values`
};

/// Cyclic Jacobi eigensolver. Sweeps until the off-diagonal Frobenius norm is
/// at most 1e-12·‖S‖_F; throws InternalError after 100 sweeps.
EigenDecomp sym_eig(const SymMat& s);

double max_eig(const SymMat& s);
double min_eig(const SymMat& s);

/// max_eig(s) ≤ tol.
bool is_nsd(const SymMat& s, double tol);
/// min_eig(s) ≥ -tol.
bool is_psd(const SymMat& s, double tol);
/// max_eig(s) < -margin.
bool is_negative_definite(const SymMat& s, double margin = 0.0);

/// For M = [[X, Y], [Yᵀ, Z]] with X of size `split`, returns X - Y Z⁻¹ Yᵀ.
/// Throws SingularBlock when min |eig(Z)| ≤ 1e-12·‖Z‖_F.
SymMat schur_complement(const SymMat& m, int split);

/// Lower-triangular L with L Lᵀ = S. Throws NotPositiveDefinite when a pivot
/// is not strictly positive.
Eigen::MatrixXd cholesky(const SymMat& s);

/// Cholesky attempt that reports failure instead of throwing.
bool try_cholesky(const Eigen::MatrixXd& s, Eigen::MatrixXd& lower);

/// S⁻¹ for S ≻ 0, computed from its Cholesky factor.
SymMat inverse_pd(const SymMat& s);

/// log det S for S ≻ 0.
double log_det_pd(const SymMat& s);

}  // namespace lcvx
