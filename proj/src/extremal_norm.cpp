#include "jsr/extremal_norm.hpp"

#include "jsr/linprog.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <deque>
#include <limits>

namespace jsr {

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

Eigen::MatrixXd real_part(const Matrix& m) { return m.real(); }

int numeric_rank(const std::vector<Eigen::RowVectorXd>& rows, int dim) {
  if (rows.empty()) return 0;
  Eigen::MatrixXd v(static_cast<Eigen::Index>(rows.size()), dim);
  for (std::size_t i = 0; i < rows.size(); ++i) v.row(static_cast<Eigen::Index>(i)) = rows[i];
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(v);
  const auto& s = svd.singularValues();
  if (s.size() == 0 || s(0) == 0.0) return 0;
  int rank = 0;
  for (Eigen::Index i = 0; i < s.size(); ++i) rank += s(i) > 1e-10 * s(0) ? 1 : 0;
  return rank;
}

// Gauge of x for the symmetric hull of `vertices`:
//   min sum(l+ + l-)  s.t.  sum (l+_i - l-_i) v_i = x,  l+-, l- >= 0.
double polytope_gauge(const std::vector<Eigen::RowVectorXd>& vertices, const Eigen::RowVectorXd& x) {
  const double scale = x.cwiseAbs().maxCoeff();
  if (scale == 0.0) return 0.0;
  const auto d = x.size();
  const auto m = static_cast<Eigen::Index>(vertices.size());
  if (m == 0) return kInf;
  Eigen::MatrixXd a(d, 2 * m);
  for (Eigen::Index i = 0; i < m; ++i) {
    a.col(i) = vertices[static_cast<std::size_t>(i)].transpose();
    a.col(m + i) = -vertices[static_cast<std::size_t>(i)].transpose();
  }
  const Eigen::VectorXd b = x.transpose() / scale;
  const Eigen::VectorXd c = Eigen::VectorXd::Ones(2 * m);
  const lp::Result r = lp::solve_standard_form(a, b, c, 1e-10);
  if (r.status == lp::Status::infeasible) return kInf;
  if (r.status != lp::Status::optimal)
    throw ConvergenceError("gauge linear program did not reach an optimum", kInf);
  return r.objective * scale;
}

struct LeadingEigen {
  bool ok = false;
  double lambda = 0.0;
  Eigen::RowVectorXd left;
  double condition = kInf;
  std::string reason;
};

LeadingEigen leading_eigen(const Eigen::MatrixXd& m) {
  LeadingEigen out;
  Eigen::EigenSolver<Eigen::MatrixXd> right(m);
  Eigen::EigenSolver<Eigen::MatrixXd> left(m.transpose());
  if (right.info() != Eigen::Success || left.info() != Eigen::Success) {
    out.reason = "eigen decomposition failed";
    return out;
  }
  auto top_two = [](const Eigen::VectorXcd& ev) {
    Eigen::Index i1 = 0;
    for (Eigen::Index i = 1; i < ev.size(); ++i)
      if (std::abs(ev(i)) > std::abs(ev(i1))) i1 = i;
    double second = 0.0;
    for (Eigen::Index i = 0; i < ev.size(); ++i)
      if (i != i1) second = std::max(second, std::abs(ev(i)));
    return std::pair{i1, second};
  };
  const auto [ir, second] = top_two(right.eigenvalues());
  const auto [il, second_l] = top_two(left.eigenvalues());
  (void)second_l;
  const Complex lam = right.eigenvalues()(ir);
  const double mod = std::abs(lam);
  if (mod == 0.0) {
    out.reason = "leading eigenvalue is zero";
    return out;
  }
  if (std::abs(lam.imag()) > 1e-10 * mod) {
    out.reason = "leading eigenvalue is not real";
    return out;
  }
  if (second >= mod * (1.0 - 1e-8)) {
    out.reason = "leading eigenvalue is not simple";
    return out;
  }
  auto realify = [](Eigen::VectorXcd v) {
    Eigen::Index big = 0;
    for (Eigen::Index i = 1; i < v.size(); ++i)
      if (std::abs(v(i)) > std::abs(v(big))) big = i;
    v *= std::conj(v(big)) / std::abs(v(big));
    Eigen::VectorXd r = v.real();
    return Eigen::VectorXd(r / r.norm());
  };
  const Eigen::VectorXd x = realify(right.eigenvectors().col(ir));
  const Eigen::VectorXd y = realify(left.eigenvectors().col(il));
  const double overlap = std::abs(y.dot(x));
  out.ok = true;
  out.lambda = lam.real();
  out.left = y.transpose();
  out.condition = overlap > 0.0 ? 1.0 / overlap : kInf;
  return out;
}

}  // namespace

// ---------------------------------------------------------------------------

NormCertificate NormCertificate::euclidean(int dim) {
  NormCertificate n;
  n.kind = Kind::euclidean;
  n.dim = dim;
  return n;
}

NormCertificate NormCertificate::polytope(std::vector<Eigen::RowVectorXd> vertices) {
  NormCertificate n;
  n.kind = Kind::polytope;
  n.dim = vertices.empty() ? 0 : static_cast<int>(vertices.front().size());
  n.vertices = std::move(vertices);
  return n;
}

void validate_norm(const NormCertificate& n) {
  if (n.dim < 1) throw ValidationError("norm dimension must be positive");
  if (n.kind == NormCertificate::Kind::euclidean) return;
  for (const auto& v : n.vertices)
    if (v.size() != n.dim || !v.allFinite()) throw ValidationError("malformed polytope vertex");
  if (numeric_rank(n.vertices, n.dim) < n.dim)
    throw ValidationError("polytope vertices do not span the space; the gauge is not a norm");
}

double norm_value(const NormCertificate& n, const Eigen::RowVectorXd& x) {
  if (x.size() != n.dim) throw ValidationError("vector dimension does not match the norm");
  if (n.kind == NormCertificate::Kind::euclidean) return x.norm();
  return polytope_gauge(n.vertices, x);
}

double norm_value(const NormCertificate& n, const RowVector& x) {
  if (n.kind == NormCertificate::Kind::euclidean) {
    if (x.size() != n.dim) throw ValidationError("vector dimension does not match the norm");
    return x.norm();
  }
  if (x.imag().cwiseAbs().maxCoeff() > 0.0)
    throw UnsupportedError("polytope norms are defined on real vectors only");
  return norm_value(n, Eigen::RowVectorXd(x.real()));
}

double induced_norm(const NormCertificate& n, const Matrix& a) {
  if (a.rows() != n.dim) throw ValidationError("matrix dimension does not match the norm");
  if (n.kind == NormCertificate::Kind::euclidean) return operator_norm(a);
  if (a.imag().cwiseAbs().maxCoeff() > 0.0)
    throw UnsupportedError("polytope operator norms need a real matrix");
  const Eigen::MatrixXd ar = a.real();
  double best = 0.0;
  for (const auto& v : n.vertices) best = std::max(best, polytope_gauge(n.vertices, v * ar));
  return best;
}

NormCheck check_extremal_norm(const MatrixFamily& family, const NormCertificate& norm,
                              double rho_estimate, std::optional<double> rho_lower) {
  validate_norm(norm);
  if (norm.dim != family.dim()) throw ValidationError("norm dimension does not match the family");
  NormCheck out;
  for (const Matrix& m : family) out.attained = std::max(out.attained, induced_norm(norm, m));
  if (rho_estimate > 0.0) {
    out.gap = (out.attained - rho_estimate) / rho_estimate;
    out.extremal = std::abs(out.gap) <= 1e-8;
  } else {
    out.gap = out.attained;
    out.extremal = out.attained == 0.0;
  }
  if (rho_lower) out.sound = out.attained >= *rho_lower * (1.0 - 1e-12);
  return out;
}

// ---------------------------------------------------------------------------

ProbeResult boundedness_probe(const MatrixFamily& normalized, int depth, const ProbeOptions& opts) {
  if (depth < 1) throw ValidationError("probe depth must be at least 1");
  ProbeResult out;
  const int k = static_cast<int>(normalized.size());
  const auto d = normalized.dim();
  bool exceeded = false;

  if (k == 1) {
    Matrix m = Matrix::Identity(d, d);
    for (int n = 1; n <= depth && !exceeded; ++n) {
      m = m * normalized[0];
      const double nv = operator_norm(m);
      out.max_norm = std::max(out.max_norm, nv);
      out.running_max.push_back(out.max_norm);
      out.depth_reached = n;
      if (nv > opts.growth_threshold) {
        exceeded = true;
        out.witness = Word(std::vector<int>(static_cast<std::size_t>(n), 1));
      }
    }
  } else {
    int effective = 0;
    std::size_t total = 0, level = 1;
    while (effective < depth) {
      level *= static_cast<std::size_t>(k);
      if (total + level > opts.node_budget) break;
      total += level;
      ++effective;
    }
    effective = std::max(effective, 1);
    std::vector<double> level_max(static_cast<std::size_t>(effective), 0.0);
    Word w;
    auto walk = [&](auto&& self, const Matrix& prefix) -> void {
      for (int letter = 1; letter <= k && !exceeded; ++letter) {
        w.letters.push_back(letter);
        const Matrix m = prefix * normalized[static_cast<std::size_t>(letter - 1)];
        const double nv = operator_norm(m);
        auto& slot = level_max[w.size() - 1];
        slot = std::max(slot, nv);
        if (nv > opts.growth_threshold) {
          exceeded = true;
          out.witness = w;
        } else if (static_cast<int>(w.size()) < effective) {
          self(self, m);
        }
        w.letters.pop_back();
      }
    };
    walk(walk, Matrix::Identity(d, d));
    for (int n = 0; n < effective; ++n) {
      out.max_norm = std::max(out.max_norm, level_max[static_cast<std::size_t>(n)]);
      out.running_max.push_back(out.max_norm);
    }
    out.depth_reached = effective;
  }

  if (exceeded) {
    out.verdict = Boundedness::unbounded;
    return out;
  }
  const int q = out.depth_reached;
  if (q < 2) return out;
  const int ref = std::max(1, (3 * q) / 4);
  const double before = out.running_max[static_cast<std::size_t>(ref - 1)];
  const double after = out.running_max[static_cast<std::size_t>(q - 1)];
  if (after <= before * (1.0 + opts.stabilization_tol)) out.verdict = Boundedness::bounded_likely;
  return out;
}

// ---------------------------------------------------------------------------

FinitenessCertificate certify_finiteness(const MatrixFamily& family, const Word& word,
                                         const CertifyOptions& opts) {
  if (!family.is_real())
    throw UnsupportedError(
        "polytope certification needs a real matrix family; use bounds-only mode for complex input");
  if (word.empty()) throw ValidationError("certification needs a non-empty word");
  check_word(family, word);

  FinitenessCertificate out;
  out.word = word;
  out.value = averaged_spectral_value(family, word);
  const int dim = static_cast<int>(family.dim());
  out.certificate = NormCertificate::polytope({});
  out.certificate.dim = dim;
  out.certificate.status = CertificateStatus::failed;
  if (out.value == 0.0) {
    out.reason = "candidate word has zero spectral radius";
    return out;
  }

  std::vector<Eigen::MatrixXd> scaled;
  for (const Matrix& m : family) scaled.push_back(real_part(m) / out.value);

  // Seed rotation: best-conditioned leading eigenpair, ties to the
  // lexicographically least rotation.
  LeadingEigen seed;
  for (std::size_t r = 0; r < word.size(); ++r) {
    const Word rot = rotate_left(word, r);
    Eigen::MatrixXd prod = Eigen::MatrixXd::Identity(dim, dim);
    for (int letter : rot.letters) prod = prod * scaled[static_cast<std::size_t>(letter - 1)];
    LeadingEigen le = leading_eigen(prod);
    if (!le.ok) {
      if (seed.reason.empty()) seed.reason = le.reason;
      continue;
    }
    const bool better = !seed.ok || le.condition < seed.condition * (1.0 - 1e-12) ||
                        (le.condition <= seed.condition * (1.0 + 1e-12) && rot < out.seed_rotation);
    if (better) {
      const std::string keep = seed.reason;
      seed = std::move(le);
      seed.reason = keep;
      out.seed_rotation = rot;
    }
  }

  auto euclidean_fallback = [&](const std::string& why) {
    double top = 0.0;
    for (const auto& m : scaled) top = std::max(top, operator_norm(Matrix(m.cast<Complex>())));
    if (top <= 1.0 + opts.verify_tol) {
      out.certificate = NormCertificate::euclidean(dim);
      out.certificate.margin = std::max(0.0, top - 1.0);
      out.certificate.status = CertificateStatus::verified;
      out.verdict = FinitenessVerdict::certified;
      out.reason = "euclidean norm is invariant (" + why + ")";
    } else {
      out.reason = why;
    }
    return out;
  };

  if (!seed.ok) return euclidean_fallback(seed.reason);

  std::vector<Eigen::RowVectorXd> verts;
  std::deque<std::size_t> queue;
  bool over_budget = false;
  auto try_add = [&](const Eigen::RowVectorXd& u, double threshold) {
    if (polytope_gauge(verts, u) <= 1.0 + threshold) return;
    if (verts.size() >= opts.vertex_budget) {
      over_budget = true;
      return;
    }
    verts.push_back(u);
    queue.push_back(verts.size() - 1);
  };

  Eigen::RowVectorXd v0 = seed.left;
  if (v0(0) < 0.0) v0 = -v0;
  verts.push_back(v0);
  queue.push_back(0);
  {
    Eigen::RowVectorXd u = v0;
    for (std::size_t i = 0; i + 1 < out.seed_rotation.size(); ++i) {
      u = u * scaled[static_cast<std::size_t>(out.seed_rotation[i] - 1)];
      try_add(u, opts.escape_tol);
    }
  }

  auto close = [&] {
    while (!queue.empty() && !over_budget) {
      const std::size_t i = queue.front();
      queue.pop_front();
      for (const auto& s : scaled) {
        try_add(verts[i] * s, opts.escape_tol);
        if (over_budget) return;
      }
    }
  };

  double worst = kInf;
  for (int round = 0; round <= opts.refinement_rounds && !over_budget; ++round) {
    close();
    if (over_budget) break;
    // Complete the span with small vectors so the gauge is a genuine norm.
    if (numeric_rank(verts, dim) < dim) {
      double smallest = kInf;
      for (const auto& v : verts) smallest = std::min(smallest, v.norm());
      const double eps = 1e-3 * smallest;
      for (int j = 0; j < dim && numeric_rank(verts, dim) < dim; ++j) {
        Eigen::RowVectorXd e = Eigen::RowVectorXd::Zero(dim);
        e(j) = eps;
        auto trial = verts;
        trial.push_back(e);
        if (numeric_rank(trial, dim) > numeric_rank(verts, dim)) {
          verts.push_back(e);
          queue.push_back(verts.size() - 1);
        }
      }
      continue;
    }
    worst = 0.0;
    std::vector<Eigen::RowVectorXd> stragglers;
    for (const auto& v : verts) {
      for (const auto& s : scaled) {
        const Eigen::RowVectorXd u = v * s;
        const double g = polytope_gauge(verts, u);
        worst = std::max(worst, g);
        if (g > 1.0 + opts.verify_tol) stragglers.push_back(u);
      }
    }
    if (worst <= 1.0 + opts.verify_tol) break;
    for (const auto& u : stragglers) {
      if (verts.size() >= opts.vertex_budget) {
        over_budget = true;
        break;
      }
      verts.push_back(u);
      queue.push_back(verts.size() - 1);
    }
  }

  out.certificate = NormCertificate::polytope(std::move(verts));
  out.certificate.dim = dim;
  if (over_budget) {
    out.certificate.status = CertificateStatus::failed;
    return euclidean_fallback("vertex budget of " + std::to_string(opts.vertex_budget) +
                              " exhausted before the polytope closed");
  }
  if (!(worst <= 1.0 + opts.verify_tol)) {
    out.certificate.status = CertificateStatus::failed;
    return euclidean_fallback("polytope did not close within the refinement rounds");
  }
  out.certificate.margin = std::max(0.0, worst - 1.0);
  out.certificate.status = CertificateStatus::verified;
  out.verdict = FinitenessVerdict::certified;
  out.reason = "invariant polytope with " + std::to_string(out.certificate.vertices.size()) +
               " vertices";
  return out;
}

}  // namespace jsr
