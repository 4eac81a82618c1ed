#pragma once

// Reference values computed without the library: closed forms, hand
// factorizations and brute-force searches.

#include <algorithm>
#include <cmath>
#include <complex>
#include <limits>
#include <random>
#include <utility>
#include <vector>

#include <Eigen/Core>

namespace oracle {

/// Eigenvalues (ascending) of [[a, b], [b, d]] from λ² - (a+d)λ + (ad - b²) = 0.
inline std::pair<double, double> sym2_eigenvalues(double a, double b, double d) {
  const double mean = 0.5 * (a + d);
  const double radius = std::sqrt(0.25 * (a - d) * (a - d) + b * b);
  return {mean - radius, mean + radius};
}

/// Lower Cholesky factor of [[a, b], [b, d]] by hand elimination.
inline Eigen::Matrix2d chol2(double a, double b, double d) {
  const double l11 = std::sqrt(a);
  const double l21 = b / l11;
  const double l22 = std::sqrt(d - l21 * l21);
  Eigen::Matrix2d l;
  l << l11, 0.0, l21, l22;
  return l;
}

/// g(λ) = inf_x x² + λ(1 - x²) = λ for 0 ≤ λ ≤ 1 and -∞ beyond.
inline double example1_dual(double lambda) {
  return lambda <= 1.0 ? lambda : -std::numeric_limits<double>::infinity();
}

/// g(λ₁, λ₂) for x₁² + x₁x₂² + λ₁(1 - x₁x₂²) + λ₂(1 - x₁) at λ₁ = 1:
/// inf over x₁ of x₁² - λ₂x₁ + 1 + λ₂ = -λ₂²/4 + λ₁ + λ₂.
inline double example2_dual_at_unit_lambda1(double lambda2) { return -lambda2 * lambda2 / 4.0 + 1.0 + lambda2; }

/// Brute-force minimum of f over a uniform grid on [lo, hi] subject to g ≤ 0.
template <class F, class G>
double grid_min_1d(F f, G g, double lo, double hi, int n) {
  double best = std::numeric_limits<double>::infinity();
  for (int k = 0; k < n; ++k) {
    const double x = lo + (hi - lo) * k / (n - 1);
    if (g(x) <= 0.0) best = std::min(best, f(x));
  }
  return best;
}

/// Roots of the monic polynomial with coefficients c (c[0] + c[1] z + ...
/// + z^n) by Durand-Kerner iteration.
inline std::vector<std::complex<double>> poly_roots(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size());
  std::vector<std::complex<double>> z(n);
  const std::complex<double> seed(0.4, 0.9);
  for (int k = 0; k < n; ++k) z[k] = std::pow(seed, k);
  auto eval = [&](std::complex<double> x) {
    std::complex<double> acc(1.0, 0.0);
    for (int k = n - 1; k >= 0; --k) acc = acc * x + c[k];
    return acc;
  };
  for (int it = 0; it < 2000; ++it) {
    for (int k = 0; k < n; ++k) {
      std::complex<double> denom(1.0, 0.0);
      for (int j = 0; j < n; ++j) {
        if (j != k) denom *= z[k] - z[j];
      }
      z[k] -= eval(z[k]) / denom;
    }
  }
  return z;
}

/// Companion matrix of the monic polynomial with coefficients c.
inline Eigen::MatrixXd companion(const std::vector<double>& c) {
  const int n = static_cast<int>(c.size());
  Eigen::MatrixXd m = Eigen::MatrixXd::Zero(n, n);
  for (int k = 1; k < n; ++k) m(k, k - 1) = 1.0;
  for (int k = 0; k < n; ++k) m(k, n - 1) = -c[k];
  return m;
}

inline Eigen::MatrixXd random_symmetric(std::mt19937_64& rng, int n, double scale = 1.0) {
  std::normal_distribution<double> normal(0.0, scale);
  Eigen::MatrixXd m(n, n);
  for (int i = 0; i < n; ++i) {
    for (int j = i; j < n; ++j) m(i, j) = m(j, i) = normal(rng);
  }
  return m;
}

inline Eigen::MatrixXd random_spd(std::mt19937_64& rng, int n, double floor = 0.1) {
  std::normal_distribution<double> normal;
  Eigen::MatrixXd g(n, n);
  for (Eigen::Index k = 0; k < g.size(); ++k) g(k) = normal(rng);
  return g * g.transpose() + floor * Eigen::MatrixXd::Identity(n, n);
}

/// Largest eigenvalue of a symmetric matrix by power iteration on a
/// shifted copy (independent of the library's Jacobi solver).
inline double max_eig_power(const Eigen::MatrixXd& s) {
  const double shift = s.cwiseAbs().rowwise().sum().maxCoeff();
  const Eigen::MatrixXd t = s + shift * Eigen::MatrixXd::Identity(s.rows(), s.cols());
  Eigen::VectorXd v = Eigen::VectorXd::Ones(s.rows()) / std::sqrt(static_cast<double>(s.rows()));
  v(0) += 0.1;
  double lambda = 0.0;
  for (int it = 0; it < 20000; ++it) {
    Eigen::VectorXd w = t * v;
    const double norm = w.norm();
    if (norm == 0.0) return -shift;
    w /= norm;
    lambda = w.dot(t * w);
    if ((w - v).norm() < 1e-14) break;
    v = w;
  }
  return lambda - shift;
}

}  // namespace oracle
