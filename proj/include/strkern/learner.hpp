#pragma once

#include <filesystem>
#include <functional>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "strkern/dense.hpp"
#include "strkern/errors.hpp"
#include "strkern/ngram_kernel.hpp"

namespace strkern {

/// Class decision for a regression score: +1 when score >= 0, else -1.
/// Throws numerical_error on NaN.
int decide(double score);

struct Predictions {
  std::vector<double> scores;
  std::vector<int> labels;
};

struct DualModel {
  std::vector<std::string> train_ids;
  Vector coefficients;
  double lambda = 0;
  KernelKind kind = KernelKind::linear;
  unsigned n = 0;
  bool domain_adapted = false;
  /// max |(K + lambda I) alpha - y| after refinement.
  double residual = 0;
};

struct PrimalModel {
  Vector weights;
  double lambda = 0;
  double residual = 0;

  std::size_t dim() const noexcept { return static_cast<std::size_t>(weights.size()); }
};

/// Kernel ridge regression: solves (K + lambda I) alpha = y with a Cholesky
/// factorization. K must be square and symmetric with matching row/col ids.
/// No jitter is added; a non-SPD system raises numerical_error with the
/// failing pivot.
DualModel fit_krr(const KernelMatrix& k_train, std::span<const int> y, double lambda);
Predictions predict_krr(const DualModel& model, const KernelMatrix& k_cross);

/// Ridge regression in the primal: (X^T X + lambda I) w = X^T y.
PrimalModel fit_rr(const DenseMatrix& x, std::span<const int> y, double lambda);
Predictions predict_rr(const PrimalModel& model, const DenseMatrix& x);

/// Ordered, strictly positive, duplicate-free regularization grid.
class LambdaGrid {
 public:
  explicit LambdaGrid(std::vector<double> values);
  /// 1e-1, 1e-2, ..., 1e-7.
  static LambdaGrid standard();

  const std::vector<double>& values() const noexcept { return values_; }

 private:
  std::vector<double> values_;
};

struct LambdaPoint {
  double lambda = 0;
  double accuracy = 0;
  bool failed = false;
  std::string message;
};

struct TuneResult {
  double best_lambda = 0;
  double best_accuracy = 0;
  std::vector<LambdaPoint> table;
};

/// Picks the lambda with the highest validation accuracy; ties go to the
/// larger lambda. A trainer that throws strkern::error marks that lambda as
/// failed. Throws numerical_error when every lambda failed.
template <typename Model>
TuneResult tune_lambda(const std::function<Model(double)>& trainer,
                       const std::function<double(const Model&)>& scorer,
                       const LambdaGrid& grid) {
  TuneResult result;
  bool any = false;
  for (double lambda : grid.values()) {
    LambdaPoint point{lambda, 0.0, false, {}};
    try {
      point.accuracy = scorer(trainer(lambda));
    } catch (const error& e) {
      point.failed = true;
      point.message = e.what();
    }
    result.table.push_back(point);
    if (point.failed) continue;
    const bool better = !any || point.accuracy > result.best_accuracy ||
                        (point.accuracy == result.best_accuracy && lambda > result.best_lambda);
    if (better) {
      result.best_lambda = lambda;
      result.best_accuracy = point.accuracy;
      any = true;
    }
  }
  if (!any) throw numerical_error("training failed for every lambda in the grid");
  return result;
}

/// "FSDL" v1: u8 kind, u32 n, u8 flags (bit 0: domain adapted), f64 lambda,
/// u32 m, m f64 coefficients, m length-prefixed ids.
void write_dual_model(std::ostream& out, const DualModel& model);
DualModel read_dual_model(std::istream& in);
void save_dual_model(const std::filesystem::path& path, const DualModel& model);
DualModel load_dual_model(const std::filesystem::path& path);

/// "FSPL" v1: f64 lambda, u32 p, p f64 weights.
void write_primal_model(std::ostream& out, const PrimalModel& model);
PrimalModel read_primal_model(std::istream& in);
void save_primal_model(const std::filesystem::path& path, const PrimalModel& model);
PrimalModel load_primal_model(const std::filesystem::path& path);

}  // namespace strkern
