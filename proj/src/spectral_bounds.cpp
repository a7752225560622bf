#include "jsr/spectral_bounds.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <limits>
#include <thread>

namespace jsr {

namespace {

struct Candidate {
  double value = -1.0;
  Word word;
};

// Values equal to 1e-12 relative are ties: shorter word first, then
// lexicographic. The rule does not depend on visiting order.
bool beats(double va, const Word& wa, double vb, const Word& wb) {
  const double scale = std::max(std::abs(va), std::abs(vb));
  if (std::abs(va - vb) > 1e-12 * scale) return va > vb;
  if (wa.size() != wb.size()) return wa.size() < wb.size();
  return wa < wb;
}

double root(double x, std::size_t n) { return std::pow(x, 1.0 / static_cast<double>(n)); }

struct LevelStats {
  std::vector<Candidate> best;
  std::vector<double> max_norm;
  std::size_t nodes = 0;

  explicit LevelStats(int depth)
      : best(static_cast<std::size_t>(depth)), max_norm(static_cast<std::size_t>(depth), 0.0) {}

  void visit(const Word& w, const Matrix& m, bool dedup) {
    const std::size_t n = w.size();
    ++nodes;
    max_norm[n - 1] = std::max(max_norm[n - 1], root(operator_norm(m), n));
    if (dedup && !is_least_rotation(w)) return;
    const double rv = root(spectral_radius(m), n);
    Candidate& c = best[n - 1];
    if (beats(rv, w, c.value, c.word)) c = {rv, w};
  }

  void merge(const LevelStats& o) {
    nodes += o.nodes;
    for (std::size_t i = 0; i < best.size(); ++i) {
      max_norm[i] = std::max(max_norm[i], o.max_norm[i]);
      if (o.best[i].value >= 0.0 && beats(o.best[i].value, o.best[i].word, best[i].value, best[i].word))
        best[i] = o.best[i];
    }
  }
};

void descend(const MatrixFamily& family, Word& w, const Matrix& prefix, int depth, bool dedup,
             LevelStats& stats) {
  const int k = static_cast<int>(family.size());
  for (int letter = 1; letter <= k; ++letter) {
    w.letters.push_back(letter);
    const Matrix m = prefix * family[static_cast<std::size_t>(letter - 1)];
    stats.visit(w, m, dedup);
    if (static_cast<int>(w.size()) < depth) descend(family, w, m, depth, dedup, stats);
    w.letters.pop_back();
  }
}

struct Subtree {
  Word word;
  Matrix product;
};

void collect_frontier(const MatrixFamily& family, Word& w, const Matrix& prefix, int level,
                      bool dedup, LevelStats& stats, std::vector<Subtree>& out) {
  const int k = static_cast<int>(family.size());
  for (int letter = 1; letter <= k; ++letter) {
    w.letters.push_back(letter);
    const Matrix m = prefix * family[static_cast<std::size_t>(letter - 1)];
    stats.visit(w, m, dedup);
    if (static_cast<int>(w.size()) < level)
      collect_frontier(family, w, m, level, dedup, stats, out);
    else
      out.push_back({w, m});
    w.letters.pop_back();
  }
}

std::size_t tree_size(std::size_t k, int depth) {
  std::size_t total = 0, level = 1;
  for (int n = 1; n <= depth; ++n) {
    if (level > std::numeric_limits<std::size_t>::max() / k) return std::numeric_limits<std::size_t>::max();
    level *= k;
    if (total > std::numeric_limits<std::size_t>::max() - level) return std::numeric_limits<std::size_t>::max();
    total += level;
  }
  return total;
}

unsigned resolve_threads(unsigned requested) {
  if (requested) return requested;
  return std::max(1u, std::thread::hardware_concurrency());
}

// Traverses the complete word tree up to `depth`. Subtrees below a fixed
// split level are processed in parallel and merged in subtree order, so the
// outcome does not depend on scheduling.
LevelStats enumerate_levels(const MatrixFamily& family, int depth, const SearchOptions& opts) {
  const std::size_t k = family.size();
  const unsigned threads = resolve_threads(opts.threads);
  LevelStats stats(depth);
  const Matrix id = Matrix::Identity(family.dim(), family.dim());
  Word w;

  int split = 0;
  if (threads > 1) {
    std::size_t roots = 1;
    while (split < depth - 1 && roots < 4u * threads) {
      roots *= k;
      ++split;
    }
  }
  if (split == 0) {
    descend(family, w, id, depth, opts.cyclic_dedup, stats);
    return stats;
  }

  std::vector<Subtree> frontier;
  collect_frontier(family, w, id, split, opts.cyclic_dedup, stats, frontier);
  std::vector<LevelStats> partials(frontier.size(), LevelStats(depth));
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < frontier.size(); i = next++) {
      Word local = frontier[i].word;
      descend(family, local, frontier[i].product, depth, opts.cyclic_dedup, partials[i]);
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 0; t < threads; ++t) pool.emplace_back(worker);
  for (auto& t : pool) t.join();
  for (const auto& p : partials) stats.merge(p);
  return stats;
}

struct Enumeration {
  LevelStats stats;
  double scale;
  int depth;
  bool partial;
};

Enumeration run_enumeration(const MatrixFamily& family, int depth, const SearchOptions& opts) {
  if (depth < 1) throw ValidationError("search depth must be at least 1");
  int effective = depth;
  bool partial = false;
  while (effective > 1 && tree_size(family.size(), effective) > opts.node_budget) {
    --effective;
    partial = true;
  }
  const double scale = family.max_generator_norm();
  if (scale == 0.0) return {LevelStats(effective), 0.0, effective, partial};
  return {enumerate_levels(family.scaled(1.0 / scale), effective, opts), scale, effective, partial};
}

}  // namespace

LowerBoundResult lower_bound(const MatrixFamily& family, int depth, const SearchOptions& opts) {
  const Enumeration e = run_enumeration(family, depth, opts);
  LowerBoundResult out;
  out.depth = e.depth;
  out.partial = e.partial;
  out.nodes = e.stats.nodes;
  if (e.scale == 0.0) {
    out.best_word = Word{1};
    return out;
  }
  Candidate best;
  for (const Candidate& c : e.stats.best)
    if (c.value >= 0.0 && beats(c.value, c.word, best.value, best.word)) best = c;
  out.value = best.value * e.scale;
  out.best_word = best.word;
  return out;
}

UpperBoundResult upper_bound(const MatrixFamily& family, int depth, const SearchOptions& opts) {
  const Enumeration e = run_enumeration(family, depth, opts);
  UpperBoundResult out;
  out.depth = e.depth;
  out.partial = e.partial;
  out.nodes = e.stats.nodes;
  if (e.scale == 0.0) {
    out.attained_length = 1;
    return out;
  }
  double best = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.stats.max_norm.size(); ++i) {
    if (e.stats.max_norm[i] < best) {
      best = e.stats.max_norm[i];
      out.attained_length = static_cast<int>(i + 1);
    }
  }
  out.value = best * e.scale;
  return out;
}

BoundsBracket exhaustive_bracket(const MatrixFamily& family, int depth, const SearchOptions& opts) {
  const Enumeration e = run_enumeration(family, depth, opts);
  BoundsBracket b;
  b.depth_explored = e.depth;
  b.partial = e.partial;
  b.nodes_visited = e.stats.nodes;
  if (e.scale == 0.0) {
    b.best_word = Word{1};
    return b;
  }
  Candidate best;
  double upper = std::numeric_limits<double>::infinity();
  for (std::size_t i = 0; i < e.stats.best.size(); ++i) {
    const Candidate& c = e.stats.best[i];
    if (c.value >= 0.0 && beats(c.value, c.word, best.value, best.word)) best = c;
    upper = std::min(upper, e.stats.max_norm[i]);
  }
  b.lower = best.value * e.scale;
  // Both bounds equal the JSR when it is attained at short length; keep roundoff from crossing them.
  b.upper = std::max(upper * e.scale, b.lower);
  b.best_word = best.word;
  return b;
}

std::vector<BergerWangRow> berger_wang_report(const MatrixFamily& family, int depth,
                                              const SearchOptions& opts) {
  const Enumeration e = run_enumeration(family, depth, opts);
  std::vector<BergerWangRow> rows;
  double lower = 0.0, upper = std::numeric_limits<double>::infinity();
  for (int n = 1; n <= e.depth; ++n) {
    const auto i = static_cast<std::size_t>(n - 1);
    const double ls = e.scale == 0.0 ? 0.0 : std::max(0.0, e.stats.best[i].value) * e.scale;
    const double ln = e.scale == 0.0 ? 0.0 : e.stats.max_norm[i] * e.scale;
    lower = std::max(lower, ls);
    upper = std::max(std::min(upper, ln), lower);
    rows.push_back({n, ls, ln, lower, upper});
  }
  return rows;
}

BoundsBracket pruned_search(const MatrixFamily& family, double tol, const PrunedSearchOptions& opts) {
  if (!(tol > 0.0)) throw ValidationError("pruned search tolerance must be positive");
  BoundsBracket out;
  out.best_word = Word{1};

  // Work with the family rescaled to unit estimated radius.
  double scale = 0.0;
  for (const Matrix& m : family) scale = std::max(scale, spectral_radius(m));
  if (scale == 0.0) scale = family.max_generator_norm();
  if (scale == 0.0) {
    out.depth_explored = 1;
    return out;
  }
  const MatrixFamily hat = family.scaled(1.0 / scale);
  const double tol_hat = tol / scale;
  const double delta = tol_hat * (1.0 - 1e-9);
  const int k = static_cast<int>(hat.size());

  double alpha = -1.0;
  Word best;
  double upper = hat.max_generator_norm();
  std::size_t nodes = 0;
  bool aborted = false;
  bool converged = false;

  for (int depth = 1; depth <= opts.max_depth && !converged; ++depth) {
    double stop_max = 0.0;
    Word w;
    auto walk = [&](auto&& self, const Matrix& prefix) -> void {
      for (int letter = 1; letter <= k && !aborted; ++letter) {
        if (++nodes > opts.node_budget) {
          aborted = true;
          return;
        }
        w.letters.push_back(letter);
        const Matrix m = prefix * hat[static_cast<std::size_t>(letter - 1)];
        const double rv = root(spectral_radius(m), w.size());
        if (beats(rv, w, alpha, best)) {
          alpha = rv;
          best = w;
        }
        const double nv = root(operator_norm(m), w.size());
        if (nv <= alpha + delta || static_cast<int>(w.size()) == depth)
          stop_max = std::max(stop_max, nv);
        else
          self(self, m);
        w.letters.pop_back();
      }
    };
    walk(walk, Matrix::Identity(hat.dim(), hat.dim()));
    if (aborted) break;
    out.depth_explored = depth;
    upper = std::min(upper, stop_max);
    converged = upper - alpha <= tol_hat;
  }

  out.lower = std::max(alpha, 0.0) * scale;
  out.upper = std::max(upper, std::max(alpha, 0.0)) * scale;
  out.best_word = best.empty() ? Word{1} : best;
  out.nodes_visited = std::min(nodes, opts.node_budget);
  out.partial = !converged;
  return out;
}

BoundsBracket intersect(const BoundsBracket& a, const BoundsBracket& b) {
  BoundsBracket out;
  const bool a_wins = !beats(b.lower, b.best_word, a.lower, a.best_word);
  out.lower = a_wins ? a.lower : b.lower;
  out.best_word = a_wins ? a.best_word : b.best_word;
  out.upper = std::max(std::min(a.upper, b.upper), out.lower);
  out.depth_explored = std::max(a.depth_explored, b.depth_explored);
  out.nodes_visited = a.nodes_visited + b.nodes_visited;
  out.partial = a.partial && b.partial;
  return out;
}

}  // namespace jsr
