#include "jsr/matrix_core.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace jsr {

// ---------------------------------------------------------------------------
// Words

Word concat(const Word& a, const Word& b) {
  Word out = a;
  out.letters.insert(out.letters.end(), b.letters.begin(), b.letters.end());
  return out;
}

Word rotate_left(const Word& w, std::size_t r) {
  if (w.empty()) return w;
  Word out = w;
  std::rotate(out.letters.begin(), out.letters.begin() + static_cast<long>(r % w.size()),
              out.letters.end());
  return out;
}

Word least_rotation(const Word& w) {
  Word best = w;
  for (std::size_t r = 1; r < w.size(); ++r) {
    Word cand = rotate_left(w, r);
    if (cand < best) best = std::move(cand);
  }
  return best;
}

bool is_least_rotation(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t r = 1; r < n; ++r) {
    for (std::size_t i = 0; i < n; ++i) {
      const int a = w.letters[(i + r) % n];
      const int b = w.letters[i];
      if (a < b) return false;
      if (a > b) break;
    }
  }
  return true;
}

bool cyclically_equal(const Word& a, const Word& b) {
  return a.size() == b.size() && least_rotation(a) == least_rotation(b);
}

std::string to_string(const Word& w) {
  std::ostringstream os;
  for (std::size_t i = 0; i < w.size(); ++i) {
    if (i) os << ',';
    os << w.letters[i];
  }
  return os.str();
}

Word parse_word(std::string_view text) {
  Word w;
  std::string token;
  auto flush = [&] {
    if (token.empty()) throw ValidationError("empty letter in word '" + std::string(text) + "'");
    std::size_t pos = 0;
    int v = 0;
    try {
      v = std::stoi(token, &pos);
    } catch (const std::exception&) {
      throw ValidationError("bad letter '" + token + "' in word");
    }
    if (pos != token.size() || v < 1) throw ValidationError("bad letter '" + token + "' in word");
    w.letters.push_back(v);
    token.clear();
  };
  for (char c : text) {
    if (c == ',') {
      flush();
    } else if (c != ' ' && c != '\t') {
      token.push_back(c);
    }
  }
  if (!token.empty() || !w.empty()) flush();
  return w;
}

// ---------------------------------------------------------------------------
// Families

MatrixFamily::MatrixFamily(std::vector<Matrix> matrices) : mats_(std::move(matrices)) {
  if (mats_.empty()) throw ValidationError("matrix family must contain at least one matrix");
  const auto d = mats_.front().rows();
  if (d < 1) throw ValidationError("matrix dimension must be positive");
  for (std::size_t k = 0; k < mats_.size(); ++k) {
    const Matrix& m = mats_[k];
    if (m.rows() != m.cols())
      throw ValidationError("matrix " + std::to_string(k + 1) + " is not square");
    if (m.rows() != d)
      throw ValidationError("matrix " + std::to_string(k + 1) + " has dimension " +
                            std::to_string(m.rows()) + ", expected " + std::to_string(d));
    if (!m.allFinite())
      throw ValidationError("matrix " + std::to_string(k + 1) + " has non-finite entries");
  }
}

const Matrix& MatrixFamily::generator(int letter) const {
  if (letter < 1 || static_cast<std::size_t>(letter) > mats_.size())
    throw std::out_of_range("letter " + std::to_string(letter) + " outside 1.." +
                            std::to_string(mats_.size()));
  return mats_[static_cast<std::size_t>(letter - 1)];
}

bool MatrixFamily::is_real(double tol) const {
  return std::all_of(mats_.begin(), mats_.end(),
                     [tol](const Matrix& m) { return m.imag().cwiseAbs().maxCoeff() <= tol; });
}

MatrixFamily MatrixFamily::scaled(double c) const {
  std::vector<Matrix> out;
  out.reserve(mats_.size());
  for (const Matrix& m : mats_) out.push_back(m * c);
  return MatrixFamily(std::move(out));
}

MatrixFamily MatrixFamily::transposed() const {
  std::vector<Matrix> out;
  out.reserve(mats_.size());
  for (const Matrix& m : mats_) out.push_back(m.transpose());
  return MatrixFamily(std::move(out));
}

double MatrixFamily::max_generator_norm() const {
  double best = 0.0;
  for (const Matrix& m : mats_) best = std::max(best, operator_norm(m));
  return best;
}

Matrix real_matrix(std::initializer_list<std::initializer_list<double>> rows) {
  const auto n = static_cast<Eigen::Index>(rows.size());
  const auto m = n ? static_cast<Eigen::Index>(rows.begin()->size()) : 0;
  Matrix out(n, m);
  Eigen::Index i = 0;
  for (const auto& r : rows) {
    if (static_cast<Eigen::Index>(r.size()) != m) throw ValidationError("ragged matrix literal");
    Eigen::Index j = 0;
    for (double v : r) out(i, j++) = v;
    ++i;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Eigenvalues

namespace {

void reduce_to_hessenberg(Matrix& h) {
  const Eigen::Index n = h.rows();
  for (Eigen::Index k = 0; k + 2 < n; ++k) {
    const Eigen::Index len = n - k - 1;
    Eigen::VectorXcd v = h.block(k + 1, k, len, 1);
    const double xnorm = v.norm();
    if (xnorm == 0.0) continue;
    const Complex x0 = v(0);
    const Complex phase = std::abs(x0) == 0.0 ? Complex(1.0) : x0 / std::abs(x0);
    v(0) += phase * xnorm;
    const double vnorm = v.norm();
    if (vnorm == 0.0) continue;
    v /= vnorm;
    Matrix rows = h.bottomRows(len);
    h.bottomRows(len) = rows - 2.0 * v * (v.adjoint() * rows);
    Matrix cols = h.rightCols(len);
    h.rightCols(len) = cols - 2.0 * (cols * v) * v.adjoint();
    h.block(k + 2, k, len - 1, 1).setZero();
  }
}

struct Rotation {
  Complex a, b;
  double r;
};

Complex wilkinson_shift(const Matrix& h, Eigen::Index hi) {
  const Complex a = h(hi - 1, hi - 1), b = h(hi - 1, hi);
  const Complex c = h(hi, hi - 1), d = h(hi, hi);
  const Complex half = 0.5 * (a - d);
  const Complex disc = std::sqrt(half * half + b * c);
  const Complex mid = 0.5 * (a + d);
  const Complex mu1 = mid + disc, mu2 = mid - disc;
  return std::abs(mu1 - d) <= std::abs(mu2 - d) ? mu1 : mu2;
}

}  // namespace

std::vector<Complex> eigenvalues(const Matrix& a, const EigenOptions& opts) {
  if (a.rows() != a.cols()) throw ValidationError("eigenvalues of a non-square matrix");
  const Eigen::Index n = a.rows();
  std::vector<Complex> out;
  out.reserve(static_cast<std::size_t>(n));
  if (n == 0) return out;
  const double scale = a.cwiseAbs().maxCoeff();
  if (!std::isfinite(scale)) throw ValidationError("eigenvalues of a non-finite matrix");
  if (scale == 0.0) return std::vector<Complex>(static_cast<std::size_t>(n), Complex(0.0));

  Matrix h = a / scale;
  reduce_to_hessenberg(h);

  const long budget = static_cast<long>(opts.budget_factor) * n * n;
  long used = 0;
  int its = 0;
  std::vector<Rotation> rots(static_cast<std::size_t>(n));
  Eigen::Index hi = n - 1;
  while (hi >= 0) {
    Eigen::Index l = hi;
    while (l > 0) {
      double s = std::abs(h(l, l)) + std::abs(h(l - 1, l - 1));
      if (s == 0.0) s = 1.0;  // h is normalised to unit max-entry scale
      if (std::abs(h(l, l - 1)) <= opts.deflation_tol * s) {
        h(l, l - 1) = 0.0;
        break;
      }
      --l;
    }
    if (l == hi) {
      out.push_back(h(hi, hi) * scale);
      --hi;
      its = 0;
      continue;
    }
    if (used >= budget) {
      double best = std::numeric_limits<double>::infinity();
      for (Eigen::Index i = l + 1; i <= hi; ++i) {
        double s = std::abs(h(i, i)) + std::abs(h(i - 1, i - 1));
        if (s == 0.0) s = 1.0;
        best = std::min(best, std::abs(h(i, i - 1)) / s);
      }
      throw ConvergenceError("QR iteration did not converge within " + std::to_string(budget) +
                                 " steps",
                             best);
    }

    Complex mu;
    if (its > 0 && its % 10 == 0) {
      // exceptional shift to break symmetric stalls
      double s = std::abs(h(hi, hi - 1).real());
      if (hi - 2 >= l) s += std::abs(h(hi - 1, hi - 2).real());
      mu = h(hi, hi) + Complex(0.75 * s, 0.4375 * s);
    } else {
      mu = wilkinson_shift(h, hi);
    }

    for (Eigen::Index i = l; i <= hi; ++i) h(i, i) -= mu;
    for (Eigen::Index k = l; k < hi; ++k) {
      const Complex x = h(k, k), y = h(k + 1, k);
      const double r = std::hypot(std::abs(x), std::abs(y));
      rots[static_cast<std::size_t>(k)] = {x, y, r};
      if (r == 0.0) continue;
      for (Eigen::Index j = k; j <= hi; ++j) {
        const Complex u = h(k, j), v = h(k + 1, j);
        h(k, j) = (std::conj(x) * u + std::conj(y) * v) / r;
        h(k + 1, j) = (-y * u + x * v) / r;
      }
    }
    for (Eigen::Index k = l; k < hi; ++k) {
      const Rotation& g = rots[static_cast<std::size_t>(k)];
      if (g.r == 0.0) continue;
      for (Eigen::Index i = l; i <= std::min(k + 1, hi); ++i) {
        const Complex u = h(i, k), v = h(i, k + 1);
        h(i, k) = (u * g.a + v * g.b) / g.r;
        h(i, k + 1) = (-u * std::conj(g.b) + v * std::conj(g.a)) / g.r;
      }
    }
    for (Eigen::Index i = l; i <= hi; ++i) h(i, i) += mu;
    ++its;
    ++used;
  }
  return out;
}

double spectral_radius(const Matrix& a, const EigenOptions& opts) {
  double r = 0.0;
  for (const Complex& z : eigenvalues(a, opts)) r = std::max(r, std::abs(z));
  return r;
}

double operator_norm(const Matrix& a) {
  if (a.size() == 0) return 0.0;
  const double scale = a.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  if (!std::isfinite(scale)) return std::numeric_limits<double>::infinity();
  if (a.rows() == 1 || a.cols() == 1) return a.norm();
  const Matrix b = a / scale;
  const Matrix gram = b.adjoint() * b;
  double top = 0.0;
  for (const Complex& z : eigenvalues(gram)) top = std::max(top, z.real());
  return std::sqrt(top) * scale;
}

void check_word(const MatrixFamily& family, const Word& w) {
  const int k = static_cast<int>(family.size());
  for (int letter : w.letters)
    if (letter < 1 || letter > k)
      throw std::out_of_range("letter " + std::to_string(letter) + " outside 1.." +
                              std::to_string(k));
}

Matrix word_product(const MatrixFamily& family, const Word& w) {
  check_word(family, w);
  const auto d = family.dim();
  if (w.empty()) return Matrix::Identity(d, d);
  Matrix out = family.generator(w[0]);
  for (std::size_t i = 1; i < w.size(); ++i) out = out * family.generator(w[i]);
  return out;
}

double averaged_spectral_value(const MatrixFamily& family, const Word& w) {
  if (w.empty()) throw ValidationError("averaged spectral value of the empty word");
  return std::pow(spectral_radius(word_product(family, w)), 1.0 / static_cast<double>(w.size()));
}

double averaged_norm_value(const MatrixFamily& family, const Word& w) {
  if (w.empty()) throw ValidationError("averaged norm value of the empty word");
  return std::pow(operator_norm(word_product(family, w)), 1.0 / static_cast<double>(w.size()));
}

}  // namespace jsr
