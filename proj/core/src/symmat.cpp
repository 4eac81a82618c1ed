#include "lcvx/symmat.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "lcvx/errors.hpp"

namespace lcvx {

namespace {

constexpr double kAsymmetryTolerance = 1e-9;
constexpr double kJacobiTolerance = 1e-12;
constexpr int kMaxJacobiSweeps = 100;

double off_diagonal_norm(const Eigen::MatrixXd& a) {
  double sum = 0.0;
  for (Eigen::Index j = 0; j < a.cols(); ++j) {
    for (Eigen::Index i = 0; i < a.rows(); ++i) {
      if (i != j) sum += a(i, j) * a(i, j);
    }
  }
  return std::sqrt(sum);
}

}  // namespace

SymMat::SymMat(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) {
    throw DimensionMismatch("SymMat: matrix is " + std::to_string(m.rows()) + "x" +
                            std::to_string(m.cols()) + ", expected square");
  }
  if (m.rows() < 1) throw DimensionMismatch("SymMat: dimension must be at least 1");
  if (!m.allFinite()) throw SymmetryError("SymMat: non-finite entry");
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.transpose()).cwiseAbs().maxCoeff();
  if (asym > kAsymmetryTolerance * scale) {
    throw SymmetryError("SymMat: asymmetry " + std::to_string(asym) + " exceeds tolerance");
  }
  m_ = 0.5 * (m + m.transpose());
}

SymMat symmetric_part(const Eigen::MatrixXd& m) {
  if (m.rows() != m.cols()) throw DimensionMismatch("symmetric_part: matrix is not square");
  // Floating-point addition commutes, so the average is exactly symmetric.
  return SymMat(0.5 * (m + m.transpose()));
}

SymMat SymMat::identity(int n) { return SymMat(Eigen::MatrixXd::Identity(n, n)); }

SymMat SymMat::zero(int n) { return SymMat(Eigen::MatrixXd::Zero(n, n)); }

SymMat SymMat::diagonal(const Eigen::VectorXd& d) { return SymMat(Eigen::MatrixXd(d.asDiagonal())); }

SymMat SymMat::from_rows(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  Eigen::MatrixXd m(n, n);
  Eigen::Index i = 0;
  for (const auto& row : rows) {
    if (static_cast<Eigen::Index>(row.size()) != n) {
      throw DimensionMismatch("SymMat::from_rows: ragged rows");
    }
    Eigen::Index j = 0;
    for (double x : row) m(i, j++) = x;
    ++i;
  }
  return SymMat(m);
}

double SymMat::inner(const SymMat& other) const {
  if (other.dim() != dim()) throw DimensionMismatch("SymMat::inner: dimension mismatch");
  return m_.cwiseProduct(other.m_).sum();
}

SymMat SymMat::operator+(const SymMat& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("SymMat::operator+: dimension mismatch");
  return SymMat(m_ + o.m_, Trusted{});
}

SymMat SymMat::operator-(const SymMat& o) const {
  if (o.dim() != dim()) throw DimensionMismatch("SymMat::operator-: dimension mismatch");
  return SymMat(m_ - o.m_, Trusted{});
}

SymMat SymMat::operator-() const { return SymMat(-m_, Trusted{}); }

SymMat SymMat::operator*(double s) const { return SymMat(s * m_, Trusted{}); }

EigenDecomp sym_eig(const SymMat& s) {
  const int n = s.dim();
  Eigen::MatrixXd a = s.matrix();
  Eigen::MatrixXd v = Eigen::MatrixXd::Identity(n, n);
  const double threshold = kJacobiTolerance * a.norm();

  int sweep = 0;
  while (off_diagonal_norm(a) > threshold) {
    if (++sweep > kMaxJacobiSweeps) {
      throw InternalError("sym_eig: Jacobi iteration did not converge in 100 sweeps");
    }
    for (int p = 0; p < n - 1; ++p) {
      for (int q = p + 1; q < n; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        // Golub & Van Loan sym.schur2: rotation zeroing a(p, q).
        const double tau = (a(q, q) - a(p, p)) / (2.0 * apq);
        const double t = tau >= 0.0 ? 1.0 / (tau + std::sqrt(1.0 + tau * tau))
                                    : -1.0 / (-tau + std::sqrt(1.0 + tau * tau));
        const double c = 1.0 / std::sqrt(1.0 + t * t);
        const double sn = t * c;
        for (int k = 0; k < n; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - sn * akq;
          a(k, q) = sn * akp + c * akq;
        }
        for (int k = 0; k < n; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - sn * aqk;
          a(q, k) = sn * apk + c * aqk;
        }
        a(p, q) = 0.0;
        a(q, p) = 0.0;
        for (int k = 0; k < n; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - sn * vkq;
          v(k, q) = sn * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<int> order(n);
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(), [&](int i, int j) { return a(i, i) < a(j, j); });

  EigenDecomp out;
  out.values.resize(n);
  out.vectors.resize(n, n);
  for (int k = 0; k < n; ++k) {
    out.values(k) = a(order[k], order[k]);
    out.vectors.col(k) = v.col(order[k]);
  }
  return out;
}

double max_eig(const SymMat& s) {
  if (s.dim() == 1) return s(0, 0);
  const auto e = sym_eig(s);
  return e.values(e.values.size() - 1);
}

double min_eig(const SymMat& s) {
  if (s.dim() == 1) return s(0, 0);
  return sym_eig(s).values(0);
}

bool is_nsd(const SymMat& s, double tol) { return max_eig(s) <= tol; }

bool is_psd(const SymMat& s, double tol) { return min_eig(s) >= -tol; }

bool is_negative_definite(const SymMat& s, double margin) { return max_eig(s) < -margin; }

SymMat schur_complement(const SymMat& m, int split) {
  const int n = m.dim();
  if (split < 1 || split >= n) {
    throw DimensionMismatch("schur_complement: split must leave two non-empty blocks");
  }
  const int rest = n - split;
  const Eigen::MatrixXd& full = m.matrix();
  const Eigen::MatrixXd x = full.topLeftCorner(split, split);
  const Eigen::MatrixXd y = full.topRightCorner(split, rest);
  const SymMat z(full.bottomRightCorner(rest, rest));

  const auto ez = sym_eig(z);
  const double smallest = ez.values.cwiseAbs().minCoeff();
  if (!(smallest > 1e-12 * z.frobenius_norm())) {
    throw SingularBlock("schur_complement: lower-right block is singular");
  }
  const Eigen::MatrixXd z_inv =
      ez.vectors * ez.values.cwiseInverse().asDiagonal() * ez.vectors.transpose();
  return symmetric_part(x - y * z_inv * y.transpose());
}

bool try_cholesky(const Eigen::MatrixXd& s, Eigen::MatrixXd& lower) {
  const Eigen::Index n = s.rows();
  lower = Eigen::MatrixXd::Zero(n, n);
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = s(j, j);
    for (Eigen::Index k = 0; k < j; ++k) d -= lower(j, k) * lower(j, k);
    if (!(d > 0.0)) return false;
    const double ljj = std::sqrt(d);
    lower(j, j) = ljj;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      double sum = s(i, j);
      for (Eigen::Index k = 0; k < j; ++k) sum -= lower(i, k) * lower(j, k);
      lower(i, j) = sum / ljj;
    }
  }
  return true;
}

Eigen::MatrixXd cholesky(const SymMat& s) {
  Eigen::MatrixXd lower;
  if (!try_cholesky(s.matrix(), lower)) {
    throw NotPositiveDefinite("cholesky: matrix is not positive definite");
  }
  return lower;
}

SymMat inverse_pd(const SymMat& s) {
  const Eigen::MatrixXd lower = cholesky(s);
  const Eigen::MatrixXd lower_inv = lower.triangularView<Eigen::Lower>().solve(
      Eigen::MatrixXd::Identity(s.dim(), s.dim()));
  return SymMat(lower_inv.transpose() * lower_inv);
}

double log_det_pd(const SymMat& s) {
  const Eigen::MatrixXd lower = cholesky(s);
  return 2.0 * lower.diagonal().array().log().sum();
}

}  // namespace lcvx
