#pragma once

#include <string>
#include <vector>

#include "strkern/dense.hpp"
#include "strkern/ngram_kernel.hpp"

namespace strkern {

/// Similarities between source samples (rows) and unlabeled target samples
/// (columns): values(i, j) = <x_i, z_j>, or K(x_i, z_j) for implicit
/// feature spaces.
struct SimilarityBlock {
  std::vector<std::string> source_ids;
  std::vector<std::string> target_ids;
  RowMatrix values;

  std::size_t targets() const noexcept { return target_ids.size(); }
};

/// X Z^T for explicit features. Throws argument_error on a dimension
/// mismatch.
SimilarityBlock similarity_block(const DenseMatrix& x, const DenseMatrix& z);

/// Wraps a base-kernel block K(source, target) as a similarity block.
SimilarityBlock similarity_from_kernel(const KernelMatrix& k_source_target);

KernelMatrix to_kernel_matrix(const SimilarityBlock& s, KernelKind kind, unsigned n);

/// Appends the similarity row to every feature vector: p + r columns.
/// `scale` multiplies the appended block and is 1 in the standard method.
DenseMatrix augment_features(const DenseMatrix& x, const SimilarityBlock& sim, double scale = 1.0);

/// Gram matrix of augmented vectors without materializing them:
/// K'(a, b) = K(a, b) + scale^2 * sum_l S_a(a, l) S_b(b, l).
/// For a square block with identical row and column ids the result is
/// mirrored from its upper triangle so it stays exactly symmetric.
KernelMatrix augment_gram(const KernelMatrix& k, const SimilarityBlock& rows_sim,
                          const SimilarityBlock& cols_sim, double scale = 1.0);

}  // namespace strkern
