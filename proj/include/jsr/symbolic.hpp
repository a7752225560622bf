#pragma once

#include "jsr/matrix_core.hpp"

#include <optional>
#include <utility>
#include <variant>
#include <vector>

namespace jsr {

/// Entries and probabilities at or below this are treated as zero when
/// walking supports.
inline constexpr double kSupportZero = 1e-14;

/// xi = period repeated forever. The stored period is always primitive.
class PeriodicSequence {
public:
  PeriodicSequence(int alphabet, Word period);

  int alphabet() const noexcept { return alphabet_; }
  const Word& period_word() const noexcept { return period_; }
  std::size_t period() const noexcept { return period_.size(); }
  /// Letter at zero-based position i of the infinite sequence.
  int at(std::size_t i) const { return period_[i % period_.size()]; }
  /// First n letters of the sequence shifted by `offset`.
  Word prefix(std::size_t n, std::size_t offset = 0) const;

  bool operator==(const PeriodicSequence&) const = default;

private:
  int alphabet_;
  Word period_;
};

PeriodicSequence shift(const PeriodicSequence& xi);

struct StationarityCheck {
  bool stationary;
  double residual;  // ||pP - p||_inf
};

/// Throws ValidationError if P is not row-stochastic or dimensions disagree.
StationarityCheck check_stationarity(const std::vector<double>& p, const Eigen::MatrixXd& transition);

/// Canonical (p, P)-Markovian measure on the one-sided shift.
class MarkovMeasure {
public:
  /// Validates p, P and stationarity.
  MarkovMeasure(std::vector<double> p, Eigen::MatrixXd transition);
  /// Computes the stationary distribution of an irreducible P.
  static MarkovMeasure from_transition(Eigen::MatrixXd transition);
  static MarkovMeasure uniform_bernoulli(int alphabet);

  int alphabet() const noexcept { return static_cast<int>(p_.size()); }
  const std::vector<double>& stationary() const noexcept { return p_; }
  const Eigen::MatrixXd& transition() const noexcept { return P_; }
  double p(int letter) const { return p_[static_cast<std::size_t>(letter - 1)]; }
  double P(int from, int to) const { return P_(from - 1, to - 1); }

private:
  std::vector<double> p_;
  Eigen::MatrixXd P_;
};

/// The ergodic measure equidistributed on the orbit of a periodic point.
struct PeriodicMeasure {
  PeriodicSequence base;
  int alphabet() const noexcept { return base.alphabet(); }
};

using ShiftMeasure = std::variant<MarkovMeasure, PeriodicMeasure>;

int alphabet_of(const ShiftMeasure& mu);

double cylinder_probability(const ShiftMeasure& mu, const Word& w);

enum class CertificateKind { structural, horizon_checked };

struct DensityDecision {
  bool is_density_point;
  CertificateKind kind;
  std::size_t letters_examined;
};

/// Exact for both measure variants; `horizon` only caps diagnostic work.
DensityDecision is_density_point(const ShiftMeasure& mu, const PeriodicSequence& xi,
                                 std::size_t horizon = 64);

/// Words of length n with positive measure, sorted lexicographically, with
/// their cylinder probabilities. Enumerated by walking the support.
std::vector<std::pair<Word, double>> support_cylinders(const ShiftMeasure& mu, std::size_t n);
std::vector<Word> support_words(const ShiftMeasure& mu, std::size_t n);

/// When the chain restricted to supp(p) is a single deterministic cycle the
/// Markov measure coincides with a periodic-orbit measure.
std::optional<PeriodicSequence> as_periodic(const MarkovMeasure& mu);

}  // namespace jsr
