#pragma once

#include "jsr/extremal_norm.hpp"
#include "jsr/matrix_core.hpp"
#include "jsr/spectral_bounds.hpp"
#include "jsr/symbolic.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <utility>
#include <vector>

namespace jsr {

enum class LyapunovMethod { exact_finite_n, periodic_exact, monte_carlo };

/// Growth rate on the log scale (nats); -inf is a legitimate value.
struct LyapunovEstimate {
  double value = 0.0;
  LyapunovMethod method = LyapunovMethod::exact_finite_n;
  std::size_t n_or_samples = 0;
  double std_error = 0.0;       // monte-carlo only
  std::size_t length = 0;       // path length for monte-carlo
};

inline constexpr std::size_t kDefaultWordBudget = 10'000'000;

/// (1/n) sum over support words of mu([w]) log ||S_w||.
LyapunovEstimate lyapunov_exact_finite(const MatrixFamily& family, const ShiftMeasure& mu, std::size_t n,
                                       std::size_t word_budget = kDefaultWordBudget);

/// (1/period) log rho(S_period).
LyapunovEstimate lyapunov_periodic(const MatrixFamily& family, const PeriodicSequence& xi);

/// Mean over `samples` Markov paths of (1/length) log ||product||. Each path
/// has its own seeded stream, so the result does not depend on `threads`.
/// The standard error never drops below the floating-point floor of the
/// renormalised product (about 1e-15).
LyapunovEstimate lyapunov_monte_carlo(const MatrixFamily& family, const MarkovMeasure& mu,
                                      std::size_t samples, std::size_t length, std::uint64_t seed,
                                      unsigned threads = 0);

enum class Verdict { extremal, not_extremal, undetermined };

struct ExtremalityVerdict {
  Verdict verdict = Verdict::undetermined;
  LyapunovEstimate lyapunov;                 // value used for the decision
  std::optional<LyapunovEstimate> exact;     // exact finite-n value for Markov measures
  BoundsBracket jsr_bracket;
  double gap = 0.0;                          // log(upper) - lyapunov.value
  double tol = 0.0;                          // decision tolerance on the log scale
  std::string note;
};

struct VerdictOptions {
  double tol = 1e-6;
  std::size_t exact_n = 12;            // largest exact finite n tried
  std::size_t word_budget = kDefaultWordBudget;
  std::size_t mc_samples = 1000;
  std::size_t mc_length = 1000;
  std::uint64_t seed = 0;
  SearchOptions search;
  std::size_t vertex_budget = 2000;    // used when sharpening the bracket
  bool sharpen_bracket = true;         // certification and pruned search if the bracket is wide
};

/// Sound JSR bracket at `depth`, sharpened by certification of the best word
/// and by branch and bound when the exhaustive bracket is wider than tol.
BoundsBracket resolve_bracket(const MatrixFamily& family, int depth, const VerdictOptions& opts = {});

ExtremalityVerdict extremality_verdict(const MatrixFamily& family, const ShiftMeasure& mu, int depth,
                                       const VerdictOptions& opts = {});

std::pair<PeriodicMeasure, ExtremalityVerdict> finiteness_to_measure(const MatrixFamily& family,
                                                                     const Word& w, int depth,
                                                                     const VerdictOptions& opts = {});

enum class PipelineStep { none, density_point, extremality, candidate, certification };

struct MainTheoremReport {
  bool success = false;
  PipelineStep failed_step = PipelineStep::none;
  DensityDecision density{false, CertificateKind::structural, 0};
  std::optional<ExtremalityVerdict> extremality;
  Word candidate;
  double candidate_value = 0.0;
  std::optional<FinitenessCertificate> certificate;
  std::string message;
};

MainTheoremReport measure_to_finiteness(const MatrixFamily& family, const ShiftMeasure& mu,
                                        const PeriodicSequence& xi, int depth,
                                        const VerdictOptions& opts = {});

enum class StabilityConclusion { confirmed, unconfirmed, hypothesis_not_met, not_applicable };

struct CorollaryReport {
  ExtremalityVerdict verdict;
  std::vector<FinitenessCertificate> attempts;     // top candidates tried when extremal
  std::optional<FinitenessCertificate> finiteness; // first certified candidate
  double scan_max = 0.0;
  Word scan_word;
  double certified_upper = 0.0;
  std::string upper_source;
  StabilityConclusion stability = StabilityConclusion::not_applicable;
};

CorollaryReport corollary_reports(const MatrixFamily& family, const MarkovMeasure& mu, int depth,
                                  const VerdictOptions& opts = {});

std::string to_string(LyapunovMethod m);
std::string to_string(Verdict v);
std::string to_string(PipelineStep s);
std::string to_string(StabilityConclusion s);

}  // namespace jsr
