#pragma once

#include "jsr/extremal_norm.hpp"
#include "jsr/matrix_core.hpp"
#include "jsr/spectral_bounds.hpp"

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace jsr {

struct AlgebraDimension {
  int dimension = 0;
  /// Some rank decision fell within two orders of magnitude of the
  /// tolerance; `gap` is the closest residual ratio seen.
  bool uncertain = false;
  double gap = 0.0;
};

/// Dimension of the unital algebra generated by the family.
AlgebraDimension algebra_dimension_report(const MatrixFamily& family);
int algebra_dimension(const MatrixFamily& family);

/// Orthonormal basis (rows, complex) of the generated algebra, each element
/// flattened column-major to length d^2 and reshaped back to d x d.
std::vector<Matrix> algebra_basis(const MatrixFamily& family);

bool is_irreducible(const MatrixFamily& family);

/// Largest ||x - proj_W(x S_k)|| over orthonormal rows x of W.
double invariance_residual(const MatrixFamily& family, const Matrix& basis_rows);

/// Rows of the result span a proper, nonzero subspace W with W S_k inside W
/// for every k. Orthonormal rows; real whenever the family is real. Returns
/// nullopt when the family is numerically irreducible.
std::optional<Matrix> find_invariant_subspace(const MatrixFamily& family, std::uint64_t seed = 0);

struct ReductionResult {
  Matrix transform;                  // P, unitary
  std::vector<int> block_sizes;      // d_1, ..., d_r
  std::vector<MatrixFamily> blocks;  // diagonal blocks of P^{-1} S_k P
  bool lower_block_triangular = true;
  double residual = 0.0;             // largest off-structure entry, scale relative
  bool uncertain = false;            // some block's algebra test was flagged

  std::size_t block_count() const { return block_sizes.size(); }
  /// Row offset of block j (0-based).
  int offset(std::size_t j) const;
};

ReductionResult block_triangularize(const MatrixFamily& family, std::uint64_t seed = 0);

/// P^{-1} S_k P for every k.
std::vector<Matrix> conjugated(const MatrixFamily& family, const ReductionResult& r);

struct DominantBlocks {
  std::vector<int> indices;             // 1-based block indices
  bool ambiguous = false;
  BoundsBracket family_bracket;
  std::vector<BoundsBracket> block_brackets;
};

DominantBlocks dominant_blocks(const MatrixFamily& family, const ReductionResult& r, int depth,
                               const SearchOptions& opts = {});

struct ExtremalSubspace {
  bool determined = false;
  Matrix basis;                        // rows span E (dim x d)
  MatrixFamily restricted_family;      // action on E in the coordinates of `basis`
  std::optional<NormCertificate> norm; // on the coordinates of `basis`
  double rho_estimate = 0.0;
  double attained = 0.0;               // max_k |S_k restricted to E| in `norm`
  BoundsBracket family_bracket;
  std::string diagnostics;

  int dimension() const { return static_cast<int>(basis.rows()); }
};

ExtremalSubspace extremal_subspace(const MatrixFamily& family, int depth, std::uint64_t seed = 0,
                                   const SearchOptions& opts = {});

}  // namespace jsr
