#pragma once

#include <Eigen/Dense>

#include <complex>
#include <compare>
#include <cstddef>
#include <initializer_list>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace jsr {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using RowVector = Eigen::RowVectorXcd;

/// Raised when an iterative eigenvalue computation exhausts its step budget.
class ConvergenceError : public std::runtime_error {
public:
  ConvergenceError(const std::string& what, double residual)
      : std::runtime_error(what), residual_(residual) {}

  /// Smallest relative subdiagonal magnitude left in the active window.
  double residual() const noexcept { return residual_; }

private:
  double residual_;
};

class ValidationError : public std::invalid_argument {
public:
  using std::invalid_argument::invalid_argument;
};

/// Requested operation is not available for this input class (e.g. complex
/// families in polytope certification).
class UnsupportedError : public std::runtime_error {
public:
  using std::runtime_error::runtime_error;
};

/// A finite word over the alphabet {1, ..., K}. Letters are stored 1-based,
/// the same way they are written on the command line and in JSON files.
struct Word {
  std::vector<int> letters;

  Word() = default;
  Word(std::initializer_list<int> l) : letters(l) {}
  explicit Word(std::vector<int> l) : letters(std::move(l)) {}

  std::size_t size() const noexcept { return letters.size(); }
  bool empty() const noexcept { return letters.empty(); }
  int operator[](std::size_t i) const { return letters[i]; }

  auto operator<=>(const Word&) const = default;
  bool operator==(const Word&) const = default;
};

Word concat(const Word& a, const Word& b);
Word rotate_left(const Word& w, std::size_t r);
/// Lexicographically least cyclic rotation.
Word least_rotation(const Word& w);
bool is_least_rotation(const Word& w);
bool cyclically_equal(const Word& a, const Word& b);

std::string to_string(const Word& w);
/// Parses "1,2,1" (whitespace tolerated). Throws ValidationError.
Word parse_word(std::string_view text);

/// K square matrices of a common dimension. Entries must be finite.
class MatrixFamily {
public:
  MatrixFamily() = default;
  explicit MatrixFamily(std::vector<Matrix> matrices);
  MatrixFamily(std::initializer_list<Matrix> matrices)
      : MatrixFamily(std::vector<Matrix>(matrices)) {}

  std::size_t size() const noexcept { return mats_.size(); }
  Eigen::Index dim() const noexcept { return mats_.empty() ? 0 : mats_.front().rows(); }

  /// Zero-based access.
  const Matrix& operator[](std::size_t k) const { return mats_[k]; }
  /// One-based access by letter; throws std::out_of_range.
  const Matrix& generator(int letter) const;

  const std::vector<Matrix>& matrices() const noexcept { return mats_; }
  auto begin() const { return mats_.begin(); }
  auto end() const { return mats_.end(); }

  /// True when every imaginary part is at most `tol` in magnitude.
  bool is_real(double tol = 0.0) const;
  MatrixFamily scaled(double c) const;
  MatrixFamily transposed() const;
  /// Largest operator norm among the generators.
  double max_generator_norm() const;

private:
  std::vector<Matrix> mats_;
};

/// Convenience for tests and examples: build a complex matrix from real rows.
Matrix real_matrix(std::initializer_list<std::initializer_list<double>> rows);

struct EigenOptions {
  double deflation_tol = 1e-12;
  int budget_factor = 100;  // total QR steps allowed = budget_factor * d^2
};

/// All eigenvalues via Householder-Hessenberg reduction and shifted QR.
std::vector<Complex> eigenvalues(const Matrix& a, const EigenOptions& opts = {});

double spectral_radius(const Matrix& a, const EigenOptions& opts = {});

/// Norm induced by the Euclidean vector norm (largest singular value).
double operator_norm(const Matrix& a);

/// S_{i_1} S_{i_2} ... S_{i_n}; the empty word gives the identity.
Matrix word_product(const MatrixFamily& family, const Word& w);

/// rho(S_w)^{1/|w|}. Requires a non-empty word.
double averaged_spectral_value(const MatrixFamily& family, const Word& w);
/// ||S_w||^{1/|w|}. Requires a non-empty word.
double averaged_norm_value(const MatrixFamily& family, const Word& w);

/// Throws std::out_of_range if some letter is outside 1..K.
void check_word(const MatrixFamily& family, const Word& w);

}  // namespace jsr
