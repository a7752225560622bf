#include "jsr/ergodic.hpp"

#include <algorithm>
#include <atomic>
#include <cfloat>
#include <cmath>
#include <limits>
#include <random>
#include <set>
#include <thread>

namespace jsr {

namespace {

constexpr double kNegInf = -std::numeric_limits<double>::infinity();
constexpr std::size_t kRenormEvery = 32;

// Neumaier compensated summation.
class Accumulator {
public:
  void add(double x) {
    const double t = sum_ + x;
    if (std::abs(sum_) >= std::abs(x))
      comp_ += (sum_ - t) + x;
    else
      comp_ += (x - t) + sum_;
    sum_ = t;
  }
  double value() const { return sum_ + comp_; }

private:
  double sum_ = 0.0, comp_ = 0.0;
};

double safe_log(double x) { return x > 0.0 ? std::log(x) : kNegInf; }

void check_alphabet(const MatrixFamily& family, int alphabet) {
  if (alphabet != static_cast<int>(family.size()))
    throw ValidationError("measure alphabet size " + std::to_string(alphabet) +
                          " does not match the family size " + std::to_string(family.size()));
}

// log ||S_w|| with renormalisation every kRenormEvery factors.
double log_norm(const MatrixFamily& family, const Word& w) {
  const Eigen::Index d = family.dim();
  Matrix m = Matrix::Identity(d, d);
  double acc = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    m = m * family.generator(w[i]);
    if ((i + 1) % kRenormEvery == 0) {
      const double f = m.norm();
      if (f == 0.0) return kNegInf;
      m /= f;
      acc += std::log(f);
    }
  }
  return acc + safe_log(operator_norm(m));
}

double support_word_count(const MarkovMeasure& mu, std::size_t n) {
  const int k = mu.alphabet();
  std::vector<double> c(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) c[static_cast<std::size_t>(i - 1)] = mu.p(i) > kSupportZero ? 1.0 : 0.0;
  for (std::size_t m = 1; m < n; ++m) {
    std::vector<double> next(static_cast<std::size_t>(k), 0.0);
    for (int i = 1; i <= k; ++i)
      for (int j = 1; j <= k; ++j)
        if (mu.P(i, j) > kSupportZero) next[static_cast<std::size_t>(j - 1)] += c[static_cast<std::size_t>(i - 1)];
    c = std::move(next);
  }
  double total = 0.0;
  for (double x : c) total += x;
  return total;
}

std::optional<PeriodicSequence> periodic_view(const ShiftMeasure& mu) {
  if (const auto* pm = std::get_if<PeriodicMeasure>(&mu)) return pm->base;
  return as_periodic(std::get<MarkovMeasure>(mu));
}

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

// ---------------------------------------------------------------------------

LyapunovEstimate lyapunov_exact_finite(const MatrixFamily& family, const ShiftMeasure& mu, std::size_t n,
                                       std::size_t word_budget) {
  if (n == 0) throw ValidationError("exact Lyapunov estimate needs n >= 1");
  check_alphabet(family, alphabet_of(mu));
  LyapunovEstimate out;
  out.method = LyapunovMethod::exact_finite_n;
  out.n_or_samples = n;
  const double dn = static_cast<double>(n);

  if (std::holds_alternative<PeriodicMeasure>(mu)) {
    Accumulator acc;
    for (const auto& [w, prob] : support_cylinders(mu, n)) {
      const double ln = log_norm(family, w);
      if (ln == kNegInf) {
        out.value = kNegInf;
        return out;
      }
      acc.add(prob * ln);
    }
    out.value = acc.value() / dn;
    return out;
  }

  const auto& markov = std::get<MarkovMeasure>(mu);
  const double count = support_word_count(markov, n);
  if (count > static_cast<double>(word_budget))
    throw ValidationError("exact Lyapunov estimate at n = " + std::to_string(n) + " needs " +
                          std::to_string(static_cast<long long>(count)) +
                          " support words, over the budget; use the monte-carlo estimator");

  const int k = markov.alphabet();
  const Eigen::Index d = family.dim();
  Accumulator acc;
  bool neg_inf = false;
  auto walk = [&](auto&& self, const Matrix& prefix, double log_scale, double prob, std::size_t m,
                  int last) -> void {
    for (int letter = 1; letter <= k && !neg_inf; ++letter) {
      const double step = m == 0 ? markov.p(letter) : markov.P(last, letter);
      if (step <= kSupportZero) continue;
      const double q = m == 0 ? step : prob * step;
      Matrix cur = prefix * family.generator(letter);
      double ls = log_scale;
      if ((m + 1) % kRenormEvery == 0) {
        const double f = cur.norm();
        if (f == 0.0) {
          neg_inf = true;
          return;
        }
        cur /= f;
        ls += std::log(f);
      }
      if (m + 1 == n) {
        const double nv = operator_norm(cur);
        if (nv == 0.0) {
          neg_inf = true;
          return;
        }
        acc.add(q * (ls + std::log(nv)));
      } else {
        self(self, cur, ls, q, m + 1, letter);
      }
    }
  };
  walk(walk, Matrix::Identity(d, d), 0.0, 1.0, 0, 0);
  out.value = neg_inf ? kNegInf : acc.value() / dn;
  return out;
}

LyapunovEstimate lyapunov_periodic(const MatrixFamily& family, const PeriodicSequence& xi) {
  check_alphabet(family, xi.alphabet());
  LyapunovEstimate out;
  out.method = LyapunovMethod::periodic_exact;
  out.n_or_samples = xi.period();
  out.value = safe_log(spectral_radius(word_product(family, xi.period_word()))) /
              static_cast<double>(xi.period());
  return out;
}

LyapunovEstimate lyapunov_monte_carlo(const MatrixFamily& family, const MarkovMeasure& mu,
                                      std::size_t samples, std::size_t length, std::uint64_t seed,
                                      unsigned threads) {
  if (samples < 2) throw ValidationError("monte-carlo estimate needs at least 2 samples");
  if (length < 1) throw ValidationError("monte-carlo path length must be at least 1");
  check_alphabet(family, mu.alphabet());
  const int k = mu.alphabet();
  const Eigen::Index d = family.dim();

  std::vector<double> initial(mu.stationary());
  std::vector<std::vector<double>> rows(static_cast<std::size_t>(k));
  for (int i = 1; i <= k; ++i) {
    auto& row = rows[static_cast<std::size_t>(i - 1)];
    double total = 0.0;
    for (int j = 1; j <= k; ++j) {
      row.push_back(mu.P(i, j));
      total += mu.P(i, j);
    }
    if (total <= 0.0) row.clear();
  }

  std::vector<double> values(samples);
  std::atomic<std::size_t> next{0};
  std::atomic<bool> degenerate{false};
  auto worker = [&] {
    for (std::size_t s = next++; s < samples; s = next++) {
      std::mt19937_64 rng(splitmix64(seed ^ splitmix64(s)));
      std::discrete_distribution<int> first(initial.begin(), initial.end());
      int letter = first(rng) + 1;
      Matrix m = family.generator(letter);
      double acc = 0.0;
      bool zero = false;
      for (std::size_t t = 1; t < length && !zero; ++t) {
        const auto& row = rows[static_cast<std::size_t>(letter - 1)];
        if (row.empty()) {
          degenerate = true;
          return;
        }
        std::discrete_distribution<int> step(row.begin(), row.end());
        letter = step(rng) + 1;
        m = m * family.generator(letter);
        if ((t + 1) % kRenormEvery == 0) {
          const double f = m.norm();
          if (f == 0.0) {
            zero = true;
            break;
          }
          m /= f;
          acc += std::log(f);
        }
      }
      values[s] = zero ? kNegInf : (acc + safe_log(operator_norm(m))) / static_cast<double>(length);
    }
  };
  const unsigned nthreads = std::max(1u, std::min<unsigned>(threads ? threads : std::thread::hardware_concurrency(),
                                                            static_cast<unsigned>(samples)));
  if (nthreads == 1) {
    worker();
  } else {
    std::vector<std::thread> pool;
    for (unsigned t = 0; t < nthreads; ++t) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (degenerate) throw ValidationError("Markov chain visited a state with an all-zero transition row");

  LyapunovEstimate out;
  out.method = LyapunovMethod::monte_carlo;
  out.n_or_samples = samples;
  out.length = length;
  const double floor = 64.0 * DBL_EPSILON * static_cast<double>(d);
  if (std::any_of(values.begin(), values.end(), [](double v) { return v == kNegInf; })) {
    out.value = kNegInf;
    out.std_error = floor;
    return out;
  }
  Accumulator sum;
  for (double v : values) sum.add(v);
  const double mean = sum.value() / static_cast<double>(samples);
  Accumulator sq;
  for (double v : values) sq.add((v - mean) * (v - mean));
  const double var = sq.value() / static_cast<double>(samples - 1);
  out.value = mean;
  out.std_error = std::max(std::sqrt(var / static_cast<double>(samples)), floor);
  return out;
}

// ---------------------------------------------------------------------------

BoundsBracket resolve_bracket(const MatrixFamily& family, int depth, const VerdictOptions& opts) {
  if (family.size() == 1) {
    BoundsBracket b;
    b.lower = b.upper = spectral_radius(family[0]);
    b.best_word = Word{1};
    b.depth_explored = 1;
    b.nodes_visited = 1;
    return b;
  }
  BoundsBracket b = exhaustive_bracket(family, depth, opts.search);
  auto tight = [&] { return b.lower > 0.0 && std::log(b.upper) - std::log(b.lower) <= opts.tol; };
  if (!opts.sharpen_bracket || b.upper == 0.0 || tight()) return b;
  if (b.lower > 0.0 && family.is_real()) {
    try {
      CertifyOptions co;
      co.vertex_budget = opts.vertex_budget;
      const FinitenessCertificate fc = certify_finiteness(family, b.best_word, co);
      if (fc.verdict == FinitenessVerdict::certified) {
        BoundsBracket c;
        c.lower = fc.value;
        c.upper = fc.upper();
        c.best_word = fc.word;
        b = intersect(b, c);
        b.partial = false;
      }
    } catch (const std::exception&) {
      // Certification is an optional refinement; the exhaustive bracket stands.
    }
  }
  if (tight()) return b;
  PrunedSearchOptions po;
  po.node_budget = opts.search.node_budget;
  const double abs_tol = std::max(opts.tol * b.lower, 1e-15 * b.upper);
  const BoundsBracket pruned = pruned_search(family, abs_tol, po);
  const bool partial = b.partial && pruned.partial;
  b = intersect(b, pruned);
  b.partial = partial;
  return b;
}

ExtremalityVerdict extremality_verdict(const MatrixFamily& family, const ShiftMeasure& mu, int depth,
                                       const VerdictOptions& opts) {
  check_alphabet(family, alphabet_of(mu));
  ExtremalityVerdict out;
  out.jsr_bracket = resolve_bracket(family, depth, opts);
  const double log_lower = safe_log(out.jsr_bracket.lower);
  const double log_upper = safe_log(out.jsr_bracket.upper);
  out.tol = opts.tol;

  if (const auto xi = periodic_view(mu)) {
    out.lyapunov = lyapunov_periodic(family, *xi);
    const double v = out.lyapunov.value;
    if (out.jsr_bracket.upper == 0.0 || v >= log_upper - opts.tol)
      out.verdict = Verdict::extremal;
    else if (v < log_lower - opts.tol)
      out.verdict = Verdict::not_extremal;
    else
      out.note = "periodic exponent lies inside the JSR bracket";
  } else {
    const auto& markov = std::get<MarkovMeasure>(mu);
    std::size_t n = 1;
    while (n < opts.exact_n && support_word_count(markov, n + 1) <= static_cast<double>(opts.word_budget)) ++n;
    out.exact = lyapunov_exact_finite(family, mu, n, opts.word_budget);
    out.lyapunov = lyapunov_monte_carlo(family, markov, opts.mc_samples, opts.mc_length, opts.seed,
                                        opts.search.threads);
    const double v = out.lyapunov.value, se3 = 3.0 * out.lyapunov.std_error;
    out.tol = opts.tol + se3;
    if (out.jsr_bracket.upper == 0.0) {
      out.verdict = Verdict::extremal;
    } else if (out.exact->value < log_lower - opts.tol) {
      out.verdict = Verdict::not_extremal;
      out.note = "exact finite-n value, an upper estimate of the exponent, is below the JSR lower bound";
    } else if (v + se3 < log_lower - opts.tol) {
      out.verdict = Verdict::not_extremal;
      out.note = "sampled exponent is below the JSR lower bound beyond 3 standard errors";
    } else if (v - se3 >= log_upper - opts.tol) {
      out.verdict = Verdict::extremal;
    } else {
      out.note = "sampled exponent is not separated from the JSR bracket";
    }
  }
  if (out.jsr_bracket.upper == 0.0)
    out.gap = 0.0;
  else
    out.gap = log_upper - out.lyapunov.value;
  return out;
}

std::pair<PeriodicMeasure, ExtremalityVerdict> finiteness_to_measure(const MatrixFamily& family,
                                                                     const Word& w, int depth,
                                                                     const VerdictOptions& opts) {
  if (w.empty()) throw ValidationError("finiteness word must be non-empty");
  check_word(family, w);
  PeriodicMeasure m{PeriodicSequence(static_cast<int>(family.size()), w)};
  ExtremalityVerdict v = extremality_verdict(family, m, depth, opts);
  return {std::move(m), std::move(v)};
}

MainTheoremReport measure_to_finiteness(const MatrixFamily& family, const ShiftMeasure& mu,
                                        const PeriodicSequence& xi, int depth,
                                        const VerdictOptions& opts) {
  check_alphabet(family, alphabet_of(mu));
  check_alphabet(family, xi.alphabet());
  MainTheoremReport r;
  r.candidate = xi.period_word();

  r.density = is_density_point(mu, xi);
  if (!r.density.is_density_point) {
    r.failed_step = PipelineStep::density_point;
    r.message = "periodic point " + to_string(xi.period_word()) +
                " is not a density point of the measure: a cylinder along it has measure zero";
    return r;
  }

  r.extremality = extremality_verdict(family, mu, depth, opts);
  if (r.extremality->verdict != Verdict::extremal) {
    r.failed_step = PipelineStep::extremality;
    r.message = "measure is " + to_string(r.extremality->verdict) + " (" + r.extremality->note + ")";
    return r;
  }

  r.candidate_value = averaged_spectral_value(family, r.candidate);
  const double log_upper = safe_log(r.extremality->jsr_bracket.upper);
  if (r.extremality->jsr_bracket.upper > 0.0 && safe_log(r.candidate_value) < log_upper - opts.tol) {
    r.failed_step = PipelineStep::candidate;
    r.message = "candidate value falls below the JSR bracket";
    return r;
  }

  try {
    CertifyOptions co;
    co.vertex_budget = opts.vertex_budget;
    r.certificate = certify_finiteness(family, r.candidate, co);
  } catch (const UnsupportedError& e) {
    r.failed_step = PipelineStep::certification;
    r.message = e.what();
    return r;
  }
  if (r.certificate->verdict != FinitenessVerdict::certified) {
    r.failed_step = PipelineStep::certification;
    r.message = "certification inconclusive: " + r.certificate->reason;
    return r;
  }
  r.success = true;
  r.message = "certified: " + r.certificate->reason;
  return r;
}

// ---------------------------------------------------------------------------

namespace {

struct Ranked {
  double value;
  Word word;
};

// Primitive least-rotation words up to `max_len`, best averaged spectral
// value first.
std::vector<Ranked> rank_words(const MatrixFamily& family, int max_len, std::size_t node_cap) {
  std::vector<Ranked> out;
  std::set<Word> seen;
  const int k = static_cast<int>(family.size());
  std::size_t nodes = 0;
  Word w;
  auto walk = [&](auto&& self, const Matrix& prefix) -> void {
    for (int letter = 1; letter <= k && nodes < node_cap; ++letter) {
      ++nodes;
      w.letters.push_back(letter);
      const Matrix m = prefix * family.generator(letter);
      const Word root = PeriodicSequence(k, w).period_word();
      if (root == w && is_least_rotation(w) && seen.insert(w).second)
        out.push_back({std::pow(spectral_radius(m), 1.0 / static_cast<double>(w.size())), w});
      if (static_cast<int>(w.size()) < max_len) self(self, m);
      w.letters.pop_back();
    }
  };
  walk(walk, Matrix::Identity(family.dim(), family.dim()));
  std::stable_sort(out.begin(), out.end(), [](const Ranked& a, const Ranked& b) {
    const double scale = std::max(a.value, b.value);
    if (std::abs(a.value - b.value) > 1e-12 * scale) return a.value > b.value;
    if (a.word.size() != b.word.size()) return a.word.size() < b.word.size();
    return a.word < b.word;
  });
  return out;
}

}  // namespace

CorollaryReport corollary_reports(const MatrixFamily& family, const MarkovMeasure& mu, int depth,
                                  const VerdictOptions& opts) {
  CorollaryReport r;
  r.verdict = extremality_verdict(family, mu, depth, opts);
  const bool real = family.is_real();
  CertifyOptions co;
  co.vertex_budget = opts.vertex_budget;

  if (r.verdict.verdict == Verdict::extremal && real) {
    const auto ranked = rank_words(family, std::min(depth, 6), 100'000);
    for (std::size_t i = 0; i < ranked.size() && i < 5; ++i) {
      FinitenessCertificate fc = certify_finiteness(family, ranked[i].word, co);
      r.attempts.push_back(fc);
      if (fc.verdict == FinitenessVerdict::certified) {
        r.finiteness = std::move(fc);
        break;
      }
    }
  }

  const LowerBoundResult scan = lower_bound(family, depth, opts.search);
  r.scan_max = scan.value;
  r.scan_word = scan.best_word;

  r.certified_upper = r.verdict.jsr_bracket.upper;
  r.upper_source = "bracket";
  if (real && scan.value > 0.0) {
    const FinitenessCertificate fc = certify_finiteness(family, scan.best_word, co);
    if (fc.verdict == FinitenessVerdict::certified && fc.upper() <= r.certified_upper) {
      r.certified_upper = fc.upper();
      r.upper_source = "certificate for " + to_string(fc.word);
    }
  }

  if (r.scan_max >= 1.0)
    r.stability = StabilityConclusion::not_applicable;
  else if (r.verdict.verdict != Verdict::extremal)
    r.stability = StabilityConclusion::hypothesis_not_met;
  else if (r.certified_upper < 1.0)
    r.stability = StabilityConclusion::confirmed;
  else
    r.stability = StabilityConclusion::unconfirmed;
  return r;
}

// ---------------------------------------------------------------------------

std::string to_string(LyapunovMethod m) {
  switch (m) {
    case LyapunovMethod::exact_finite_n: return "exact-finite-n";
    case LyapunovMethod::periodic_exact: return "periodic-exact";
    case LyapunovMethod::monte_carlo: return "monte-carlo";
  }
  return "?";
}

std::string to_string(Verdict v) {
  switch (v) {
    case Verdict::extremal: return "extremal";
    case Verdict::not_extremal: return "not-extremal";
    case Verdict::undetermined: return "undetermined";
  }
  return "?";
}

std::string to_string(PipelineStep s) {
  switch (s) {
    case PipelineStep::none: return "none";
    case PipelineStep::density_point: return "density-point";
    case PipelineStep::extremality: return "extremality";
    case PipelineStep::candidate: return "candidate";
    case PipelineStep::certification: return "certification";
  }
  return "?";
}

std::string to_string(StabilityConclusion s) {
  switch (s) {
    case StabilityConclusion::confirmed: return "confirmed";
    case StabilityConclusion::unconfirmed: return "unconfirmed";
    case StabilityConclusion::hypothesis_not_met: return "hypothesis-not-met";
    case StabilityConclusion::not_applicable: return "not-applicable";
  }
  return "?";
}

}  // namespace jsr
