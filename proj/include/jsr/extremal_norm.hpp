#pragma once

#include "jsr/matrix_core.hpp"

#include <optional>
#include <string>
#include <vector>

namespace jsr {

enum class CertificateStatus { verified, candidate, failed };

/// A vector norm on R^d (or C^d for the Euclidean kind) used as an
/// extremal-norm candidate. The polytope kind is the Minkowski gauge of the
/// symmetric hull of `vertices` (row vectors, acted on as x -> x S).
struct NormCertificate {
  enum class Kind { polytope, euclidean };

  Kind kind = Kind::polytope;
  int dim = 0;
  std::vector<Eigen::RowVectorXd> vertices;
  double margin = 0.0;  // images of the ball stay within (1 + margin) of it
  CertificateStatus status = CertificateStatus::candidate;

  static NormCertificate euclidean(int dim);
  static NormCertificate polytope(std::vector<Eigen::RowVectorXd> vertices);
};

/// Throws ValidationError when the vertices do not span R^dim.
void validate_norm(const NormCertificate& n);

/// Gauge of x with respect to the norm; +inf outside the span of a
/// degenerate vertex set.
double norm_value(const NormCertificate& n, const Eigen::RowVectorXd& x);
double norm_value(const NormCertificate& n, const RowVector& x);

/// Induced operator norm of x -> x A.
double induced_norm(const NormCertificate& n, const Matrix& a);

struct NormCheck {
  bool extremal = false;
  double attained = 0.0;   // max_k ||S_k|| in the given norm
  double gap = 0.0;        // (attained - rho_estimate) / rho_estimate
  bool sound = true;       // attained >= the supplied lower bound
};

/// Compares max_k ||S_k||_N with `rho_estimate` at 1e-8 relative tolerance.
NormCheck check_extremal_norm(const MatrixFamily& family, const NormCertificate& norm,
                              double rho_estimate, std::optional<double> rho_lower = std::nullopt);

enum class Boundedness { bounded_likely, unbounded, inconclusive };

struct ProbeOptions {
  double growth_threshold = 1e6;
  /// Relative increase of the running max norm tolerated over the last
  /// quarter of depths for a bounded-likely verdict.
  double stabilization_tol = 1e-3;
  std::size_t node_budget = 2'000'000;
};

struct ProbeResult {
  Boundedness verdict = Boundedness::inconclusive;
  double max_norm = 0.0;
  int depth_reached = 0;
  Word witness;                       // first word past the threshold
  std::vector<double> running_max;    // running max norm at depth 1..depth_reached
};

/// Growth probe on an already normalised family.
ProbeResult boundedness_probe(const MatrixFamily& normalized, int depth, const ProbeOptions& opts = {});

enum class FinitenessVerdict { certified, inconclusive };

struct FinitenessCertificate {
  Word word;
  double value = 0.0;       // averaged spectral value of `word`
  NormCertificate certificate;
  FinitenessVerdict verdict = FinitenessVerdict::inconclusive;
  Word seed_rotation;       // rotation of `word` used to seed the polytope
  std::string reason;
  double upper() const { return value * (1.0 + certificate.margin); }
};

struct CertifyOptions {
  std::size_t vertex_budget = 10'000;
  double escape_tol = 1e-9;   // a vertex is added only past this escape
  double verify_tol = 1e-10;  // final closure tolerance
  int refinement_rounds = 4;
};

/// Invariant-polytope certification that `word` is spectrum maximizing.
/// Real families only; throws UnsupportedError for complex entries.
FinitenessCertificate certify_finiteness(const MatrixFamily& family, const Word& word,
                                         const CertifyOptions& opts = {});

}  // namespace jsr
