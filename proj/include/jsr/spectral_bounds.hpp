#pragma once

#include "jsr/matrix_core.hpp"

#include <cstddef>
#include <vector>

namespace jsr {

inline constexpr std::size_t kDefaultNodeBudget = 10'000'000;

/// Certified bracket lower <= JSR <= upper.
struct BoundsBracket {
  double lower = 0.0;
  double upper = 0.0;
  Word best_word;            // attains `lower`
  int depth_explored = 0;
  std::size_t nodes_visited = 0;
  bool partial = false;      // budget cut the search short
  double width() const { return upper - lower; }
};

struct SearchOptions {
  std::size_t node_budget = kDefaultNodeBudget;
  bool cyclic_dedup = true;
  unsigned threads = 0;  // 0: hardware concurrency
};

struct LowerBoundResult {
  double value = 0.0;
  Word best_word;
  int depth = 0;
  std::size_t nodes = 0;
  bool partial = false;
};

struct UpperBoundResult {
  double value = 0.0;
  int attained_length = 0;  // n at which the minimum over n is reached
  int depth = 0;
  std::size_t nodes = 0;
  bool partial = false;
};

/// max over |w| <= depth of rho(S_w)^{1/|w|}; ties go to the shorter, then
/// lexicographically least word.
LowerBoundResult lower_bound(const MatrixFamily& family, int depth, const SearchOptions& opts = {});

/// min over n <= depth of max over |w| = n of ||S_w||^{1/n}.
UpperBoundResult upper_bound(const MatrixFamily& family, int depth, const SearchOptions& opts = {});

/// Both bounds from one traversal of the word tree.
BoundsBracket exhaustive_bracket(const MatrixFamily& family, int depth, const SearchOptions& opts = {});

struct BergerWangRow {
  int n;
  double level_spectral;  // max over |w| = n of rho^{1/n}
  double level_norm;      // max over |w| = n of ||.||^{1/n}
  double lower;           // running max of level_spectral
  double upper;           // running min of level_norm
};

std::vector<BergerWangRow> berger_wang_report(const MatrixFamily& family, int depth,
                                              const SearchOptions& opts = {});

struct PrunedSearchOptions {
  std::size_t node_budget = kDefaultNodeBudget;
  int max_depth = 64;
};

/// Branch and bound over the word tree with iterative deepening. A node is
/// not extended once its averaged norm cannot beat the current lower bound by
/// more than `tol`; the stopped nodes and the deepest level together cover
/// every infinite product, which makes the reported upper bound sound.
BoundsBracket pruned_search(const MatrixFamily& family, double tol,
                            const PrunedSearchOptions& opts = {});

/// Intersection of two sound brackets for the same family; keeps the better
/// witness word.
BoundsBracket intersect(const BoundsBracket& a, const BoundsBracket& b);

}  // namespace jsr
