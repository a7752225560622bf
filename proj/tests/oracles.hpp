#pragma once

// Independent reference computations for the tests. Nothing here calls the
// library's eigenvalue, norm or search code.

#include "jsr/matrix_core.hpp"

#include <Eigen/Eigenvalues>
#include <Eigen/SVD>

#include <algorithm>
#include <cmath>
#include <complex>
#include <cstdint>
#include <random>
#include <vector>

namespace oracle {

using jsr::Complex;
using jsr::Matrix;

inline const double kPhi = (1.0 + std::sqrt(5.0)) / 2.0;

inline Matrix golden_a() { return jsr::real_matrix({{1, 1}, {0, 1}}); }
inline Matrix golden_b() { return jsr::real_matrix({{1, 0}, {1, 1}}); }
inline jsr::MatrixFamily golden_pair() { return jsr::MatrixFamily{golden_a(), golden_b()}; }
inline jsr::MatrixFamily shear() { return jsr::MatrixFamily{golden_a()}; }

/// Roots of x^2 - tr x + det for a 2x2 matrix.
inline std::pair<Complex, Complex> quadratic_eigenvalues(const Matrix& m) {
  const Complex tr = m(0, 0) + m(1, 1);
  const Complex det = m(0, 0) * m(1, 1) - m(0, 1) * m(1, 0);
  const Complex disc = std::sqrt(tr * tr - 4.0 * det);
  return {(tr + disc) / 2.0, (tr - disc) / 2.0};
}

/// Largest singular value of a real 2x2 matrix from the eigenvalues of M^T M.
inline double singular_max_2x2(const Eigen::Matrix2d& m) {
  const Eigen::Matrix2d g = m.transpose() * m;
  const double tr = g.trace(), det = g.determinant();
  return std::sqrt((tr + std::sqrt(std::max(0.0, tr * tr - 4.0 * det))) / 2.0);
}

inline std::vector<Complex> eigen_oracle(const Matrix& m) {
  Eigen::ComplexEigenSolver<Matrix> es(m, false);
  std::vector<Complex> out(es.eigenvalues().data(), es.eigenvalues().data() + es.eigenvalues().size());
  return out;
}

inline double rho_oracle(const Matrix& m) {
  double r = 0.0;
  for (const Complex& z : eigen_oracle(m)) r = std::max(r, std::abs(z));
  return r;
}

inline double norm_oracle(const Matrix& m) {
  Eigen::JacobiSVD<Matrix> svd(m);
  return svd.singularValues()(0);
}

/// Greedy matching distance between two eigenvalue multisets.
inline double multiset_distance(std::vector<Complex> a, std::vector<Complex> b) {
  if (a.size() != b.size()) return INFINITY;
  double worst = 0.0;
  for (const Complex& z : a) {
    auto it = std::min_element(b.begin(), b.end(),
                               [&](const Complex& x, const Complex& y) { return std::abs(x - z) < std::abs(y - z); });
    worst = std::max(worst, std::abs(*it - z));
    b.erase(it);
  }
  return worst;
}

inline Matrix product_oracle(const jsr::MatrixFamily& f, const std::vector<int>& w) {
  Matrix m = Matrix::Identity(f.dim(), f.dim());
  for (int letter : w) m = m * f[static_cast<std::size_t>(letter - 1)];
  return m;
}

/// Every word of length n over {1..k}, lexicographic.
inline std::vector<std::vector<int>> all_words(int k, int n) {
  std::vector<std::vector<int>> out;
  std::vector<int> w(static_cast<std::size_t>(n), 1);
  while (true) {
    out.push_back(w);
    int i = n - 1;
    while (i >= 0 && w[static_cast<std::size_t>(i)] == k) w[static_cast<std::size_t>(i--)] = 1;
    if (i < 0) break;
    ++w[static_cast<std::size_t>(i)];
  }
  return out;
}

struct Bracket {
  double lower = 0.0, upper = INFINITY;
};

/// Brute-force bracket using the Eigen eigen solver and SVD.
inline Bracket brute_bracket(const jsr::MatrixFamily& f, int depth) {
  Bracket b;
  for (int n = 1; n <= depth; ++n) {
    double level = 0.0;
    for (const auto& w : all_words(static_cast<int>(f.size()), n)) {
      const Matrix m = product_oracle(f, w);
      b.lower = std::max(b.lower, std::pow(rho_oracle(m), 1.0 / n));
      level = std::max(level, std::pow(norm_oracle(m), 1.0 / n));
    }
    b.upper = std::min(b.upper, level);
  }
  return b;
}

// --- seeded generators ------------------------------------------------------

class Gen {
public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}

  double uniform(double lo = -1.0, double hi = 1.0) { return std::uniform_real_distribution<double>(lo, hi)(rng_); }
  int integer(int lo, int hi) { return std::uniform_int_distribution<int>(lo, hi)(rng_); }

  Matrix real(int d, double scale = 1.0) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = uniform() * scale;
    return m;
  }

  Matrix complex(int d) {
    Matrix m(d, d);
    for (int i = 0; i < d; ++i)
      for (int j = 0; j < d; ++j) m(i, j) = Complex(uniform(), uniform());
    return m;
  }

  jsr::MatrixFamily real_family(int k, int d) {
    std::vector<Matrix> ms;
    for (int i = 0; i < k; ++i) ms.push_back(real(d));
    return jsr::MatrixFamily(ms);
  }

  /// I + 0.3 * (random with entries in [-1, 1]); condition number stays small
  /// for d <= 4.
  Matrix well_conditioned(int d) {
    return Matrix(Matrix::Identity(d, d) + real(d, 0.3 / d));
  }

  /// Random row-stochastic matrix with all entries positive.
  Eigen::MatrixXd stochastic(int k) {
    Eigen::MatrixXd p(k, k);
    for (int i = 0; i < k; ++i) {
      double s = 0.0;
      for (int j = 0; j < k; ++j) s += (p(i, j) = uniform(0.05, 1.0));
      p.row(i) /= s;
    }
    return p;
  }

  std::mt19937_64& engine() { return rng_; }

private:
  std::mt19937_64 rng_;
};

}  // namespace oracle
