#include "strkern/domain_adapt.hpp"

#include "strkern/errors.hpp"

namespace strkern {

SimilarityBlock similarity_block(const DenseMatrix& x, const DenseMatrix& z) {
  if (x.dim() != z.dim() && z.rows() != 0) {
    throw argument_error("source and target feature dimensions differ (" +
                         std::to_string(x.dim()) + " vs " + std::to_string(z.dim()) + ")");
  }
  SimilarityBlock s;
  s.source_ids = x.row_ids;
  s.target_ids = z.row_ids;
  if (z.rows() == 0) {
    s.values = RowMatrix::Zero(x.values.rows(), 0);
  } else {
    s.values = x.values * z.values.transpose();
  }
  return s;
}

SimilarityBlock similarity_from_kernel(const KernelMatrix& k) {
  return SimilarityBlock{k.row_ids, k.col_ids, k.values};
}

KernelMatrix to_kernel_matrix(const SimilarityBlock& s, KernelKind kind, unsigned n) {
  return KernelMatrix{s.source_ids, s.target_ids, s.values, kind, n};
}

DenseMatrix augment_features(const DenseMatrix& x, const SimilarityBlock& sim, double scale) {
  if (sim.source_ids != x.row_ids) {
    throw argument_error("similarity rows are not aligned with the feature rows");
  }
  DenseMatrix out;
  out.row_ids = x.row_ids;
  out.values.resize(x.values.rows(), x.values.cols() + sim.values.cols());
  out.values.leftCols(x.values.cols()) = x.values;
  out.values.rightCols(sim.values.cols()) = scale * sim.values;
  return out;
}

KernelMatrix augment_gram(const KernelMatrix& k, const SimilarityBlock& rows_sim,
                          const SimilarityBlock& cols_sim, double scale) {
  if (rows_sim.target_ids != cols_sim.target_ids) {
    throw argument_error("row and column similarity blocks use different target sets");
  }
  if (rows_sim.source_ids != k.row_ids) {
    throw argument_error("row similarity block is not aligned with the kernel rows");
  }
  if (cols_sim.source_ids != k.col_ids) {
    throw argument_error("column similarity block is not aligned with the kernel columns");
  }
  KernelMatrix out = k;
  if (rows_sim.targets() == 0) return out;

  RowMatrix extra = rows_sim.values * cols_sim.values.transpose();
  if (scale != 1.0) extra *= scale * scale;
  out.values += extra;
  if (k.row_ids == k.col_ids) {
    for (Eigen::Index i = 0; i < out.values.rows(); ++i) {
      for (Eigen::Index j = 0; j < i; ++j) out.values(i, j) = out.values(j, i);
    }
  }
  return out;
}

}  // namespace strkern
