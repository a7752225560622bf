#include "jsr/symbolic.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <numeric>

namespace jsr {

namespace {

Word primitive_period(const Word& w) {
  const std::size_t n = w.size();
  for (std::size_t p = 1; p < n; ++p) {
    if (n % p) continue;
    bool ok = true;
    for (std::size_t i = p; i < n && ok; ++i) ok = w[i] == w[i - p];
    if (ok) return Word(std::vector<int>(w.letters.begin(), w.letters.begin() + static_cast<long>(p)));
  }
  return w;
}

void validate_stochastic(const Eigen::MatrixXd& P) {
  if (P.rows() != P.cols() || P.rows() < 1)
    throw ValidationError("transition matrix must be square and non-empty");
  for (Eigen::Index i = 0; i < P.rows(); ++i) {
    double sum = 0.0;
    for (Eigen::Index j = 0; j < P.cols(); ++j) {
      const double v = P(i, j);
      if (!std::isfinite(v) || v < 0.0)
        throw ValidationError("transition entry (" + std::to_string(i + 1) + "," +
                              std::to_string(j + 1) + ") is negative or non-finite");
      sum += v;
    }
    if (std::abs(sum - 1.0) > 1e-12)
      throw ValidationError("transition row " + std::to_string(i + 1) + " sums to " +
                            std::to_string(sum) + ", not 1");
  }
}

void check_alphabet(int expected, int got) {
  if (expected != got)
    throw ValidationError("alphabet mismatch: " + std::to_string(expected) + " vs " +
                          std::to_string(got));
}

}  // namespace

// ---------------------------------------------------------------------------

PeriodicSequence::PeriodicSequence(int alphabet, Word period) : alphabet_(alphabet) {
  if (alphabet < 1) throw ValidationError("alphabet size must be positive");
  if (period.empty()) throw ValidationError("periodic sequence needs a non-empty period");
  for (int letter : period.letters)
    if (letter < 1 || letter > alphabet)
      throw ValidationError("period letter " + std::to_string(letter) + " outside 1.." +
                            std::to_string(alphabet));
  period_ = primitive_period(period);
}

Word PeriodicSequence::prefix(std::size_t n, std::size_t offset) const {
  Word w;
  w.letters.reserve(n);
  for (std::size_t i = 0; i < n; ++i) w.letters.push_back(at(offset + i));
  return w;
}

PeriodicSequence shift(const PeriodicSequence& xi) {
  return PeriodicSequence(xi.alphabet(), rotate_left(xi.period_word(), 1));
}

// ---------------------------------------------------------------------------

StationarityCheck check_stationarity(const std::vector<double>& p, const Eigen::MatrixXd& P) {
  validate_stochastic(P);
  if (static_cast<Eigen::Index>(p.size()) != P.rows())
    throw ValidationError("stationary vector length " + std::to_string(p.size()) +
                          " does not match transition size " + std::to_string(P.rows()));
  double residual = 0.0;
  for (Eigen::Index j = 0; j < P.cols(); ++j) {
    double s = 0.0;
    for (Eigen::Index i = 0; i < P.rows(); ++i) s += p[static_cast<std::size_t>(i)] * P(i, j);
    residual = std::max(residual, std::abs(s - p[static_cast<std::size_t>(j)]));
  }
  return {residual <= 1e-10, residual};
}

MarkovMeasure::MarkovMeasure(std::vector<double> p, Eigen::MatrixXd transition)
    : p_(std::move(p)), P_(std::move(transition)) {
  double sum = 0.0;
  for (double v : p_) {
    if (!std::isfinite(v) || v < 0.0) throw ValidationError("stationary vector has a negative entry");
    sum += v;
  }
  if (std::abs(sum - 1.0) > 1e-12) throw ValidationError("stationary vector does not sum to 1");
  const StationarityCheck check = check_stationarity(p_, P_);
  if (!check.stationary)
    throw ValidationError("p is not stationary for P (residual " + std::to_string(check.residual) +
                          ")");
}

MarkovMeasure MarkovMeasure::from_transition(Eigen::MatrixXd P) {
  validate_stochastic(P);
  const Eigen::Index k = P.rows();
  // The lazy chain (P + I)/2 has the same stationary vector and is aperiodic.
  const Eigen::MatrixXd lazy = 0.5 * (P + Eigen::MatrixXd::Identity(k, k));
  Eigen::RowVectorXd p = Eigen::RowVectorXd::Constant(k, 1.0 / static_cast<double>(k));
  // Iterate to roundoff; a stalled but tiny update still counts as converged.
  double delta = INFINITY;
  for (int it = 0; it < 1'000'000 && delta > 1e-16; ++it) {
    Eigen::RowVectorXd next = p * lazy;
    next /= next.sum();
    delta = (next - p).cwiseAbs().maxCoeff();
    p = next;
  }
  if (delta > 1e-12) throw ValidationError("stationary distribution iteration did not converge");
  std::vector<double> pv(p.data(), p.data() + k);
  for (double& v : pv) v = std::max(v, 0.0);
  const double s = std::accumulate(pv.begin(), pv.end(), 0.0);
  for (double& v : pv) v /= s;
  return MarkovMeasure(std::move(pv), std::move(P));
}

MarkovMeasure MarkovMeasure::uniform_bernoulli(int alphabet) {
  if (alphabet < 1) throw ValidationError("alphabet size must be positive");
  const double u = 1.0 / alphabet;
  return MarkovMeasure(std::vector<double>(static_cast<std::size_t>(alphabet), u),
                       Eigen::MatrixXd::Constant(alphabet, alphabet, u));
}

// ---------------------------------------------------------------------------

int alphabet_of(const ShiftMeasure& mu) {
  return std::visit([](const auto& m) { return m.alphabet(); }, mu);
}

double cylinder_probability(const ShiftMeasure& mu, const Word& w) {
  const int k = alphabet_of(mu);
  for (int letter : w.letters)
    if (letter < 1 || letter > k)
      throw std::out_of_range("letter " + std::to_string(letter) + " outside 1.." +
                              std::to_string(k));
  if (w.empty()) return 1.0;
  if (const auto* m = std::get_if<MarkovMeasure>(&mu)) {
    double prob = m->p(w[0]);
    for (std::size_t i = 1; i < w.size(); ++i) prob *= m->P(w[i - 1], w[i]);
    return prob;
  }
  const auto& base = std::get<PeriodicMeasure>(mu).base;
  const std::size_t pi = base.period();
  std::size_t hits = 0;
  for (std::size_t j = 0; j < pi; ++j) {
    bool match = true;
    for (std::size_t i = 0; i < w.size() && match; ++i) match = base.at(j + i) == w[i];
    hits += match ? 1 : 0;
  }
  return static_cast<double>(hits) / static_cast<double>(pi);
}

DensityDecision is_density_point(const ShiftMeasure& mu, const PeriodicSequence& xi,
                                 std::size_t horizon) {
  check_alphabet(alphabet_of(mu), xi.alphabet());
  const std::size_t pi = xi.period();
  if (const auto* m = std::get_if<MarkovMeasure>(&mu)) {
    // Every transition of xi occurs within its first pi + 1 letters, so the
    // decision never needs more than that regardless of the horizon.
    const std::size_t span = pi + 1;
    (void)horizon;
    bool ok = m->p(xi.at(0)) > kSupportZero;
    std::size_t examined = 1;
    for (std::size_t i = 0; i + 1 < span && ok; ++i, ++examined)
      ok = m->P(xi.at(i), xi.at(i + 1)) > kSupportZero;
    return {ok, CertificateKind::structural, examined};
  }
  const auto& base = std::get<PeriodicMeasure>(mu).base;
  bool member = false;
  if (base.period() == pi) {
    for (std::size_t j = 0; j < pi && !member; ++j)
      member = rotate_left(base.period_word(), j) == xi.period_word();
  }
  return {member, CertificateKind::structural, pi};
}

std::vector<std::pair<Word, double>> support_cylinders(const ShiftMeasure& mu, std::size_t n) {
  if (n < 1) throw ValidationError("support word length must be positive");
  std::vector<std::pair<Word, double>> out;
  if (const auto* m = std::get_if<MarkovMeasure>(&mu)) {
    const int k = m->alphabet();
    Word w;
    w.letters.reserve(n);
    auto walk = [&](auto&& self, double prob) -> void {
      if (w.size() == n) {
        out.emplace_back(w, prob);
        return;
      }
      const int last = w.letters.back();
      for (int next = 1; next <= k; ++next) {
        const double t = m->P(last, next);
        if (t <= kSupportZero) continue;
        w.letters.push_back(next);
        self(self, prob * t);
        w.letters.pop_back();
      }
    };
    for (int first = 1; first <= k; ++first) {
      if (m->p(first) <= kSupportZero) continue;
      w.letters.assign(1, first);
      walk(walk, m->p(first));
    }
    return out;  // DFS over ascending letters is already lexicographic
  }
  const auto& base = std::get<PeriodicMeasure>(mu).base;
  std::map<Word, std::size_t> counts;
  for (std::size_t j = 0; j < base.period(); ++j) ++counts[base.prefix(n, j)];
  for (const auto& [w, c] : counts)
    out.emplace_back(w, static_cast<double>(c) / static_cast<double>(base.period()));
  return out;
}

std::vector<Word> support_words(const ShiftMeasure& mu, std::size_t n) {
  std::vector<Word> out;
  for (auto& [w, prob] : support_cylinders(mu, n)) out.push_back(std::move(w));
  return out;
}

std::optional<PeriodicSequence> as_periodic(const MarkovMeasure& mu) {
  const int k = mu.alphabet();
  std::vector<int> next(static_cast<std::size_t>(k) + 1, 0);
  int states = 0, start = 0;
  for (int i = 1; i <= k; ++i) {
    if (mu.p(i) <= kSupportZero) continue;
    ++states;
    if (!start) start = i;
    for (int j = 1; j <= k; ++j) {
      if (mu.P(i, j) <= kSupportZero) continue;
      if (next[static_cast<std::size_t>(i)]) return std::nullopt;  // branching
      next[static_cast<std::size_t>(i)] = j;
    }
  }
  Word cycle;
  int s = start;
  do {
    cycle.letters.push_back(s);
    s = next[static_cast<std::size_t>(s)];
    if (s == 0 || mu.p(s) <= kSupportZero) return std::nullopt;
  } while (s != start && static_cast<int>(cycle.size()) <= states);
  if (s != start || static_cast<int>(cycle.size()) != states) return std::nullopt;
  return PeriodicSequence(k, cycle);
}

}  // namespace jsr
