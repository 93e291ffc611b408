#include "strkern/learner.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <set>

#include "strkern/binary_io.hpp"

namespace strkern {

int decide(double score) {
  if (std::isnan(score)) throw numerical_error("NaN prediction score");
  return score >= 0.0 ? 1 : -1;
}

namespace {

void check_labels(std::span<const int> y, std::size_t expected) {
  if (y.size() != expected) {
    throw argument_error("label vector has " + std::to_string(y.size()) + " entries, expected " +
                         std::to_string(expected));
  }
  for (int v : y) {
    if (v != 1 && v != -1) throw argument_error("labels must be -1 or +1");
  }
}

void check_lambda(double lambda) {
  if (!(lambda > 0) || !std::isfinite(lambda)) throw argument_error("lambda must be positive");
}

/// Index of the first non-positive pivot of an unpivoted Cholesky of a.
std::size_t failing_pivot(Eigen::MatrixXd a) {
  const Eigen::Index n = a.rows();
  for (Eigen::Index j = 0; j < n; ++j) {
    double d = a(j, j) - a.row(j).head(j).squaredNorm();
    if (!(d > 0) || !std::isfinite(d)) return static_cast<std::size_t>(j);
    d = std::sqrt(d);
    a(j, j) = d;
    for (Eigen::Index i = j + 1; i < n; ++i) {
      a(i, j) = (a(i, j) - a.row(i).head(j).dot(a.row(j).head(j))) / d;
    }
  }
  return numerical_error::npos;
}

/// Solves the SPD system with up to two steps of iterative refinement.
/// Returns the solution and writes the final max-norm residual.
Vector spd_solve(const Eigen::MatrixXd& a, const Vector& b, double& residual) {
  Eigen::LLT<Eigen::MatrixXd> llt(a);
  if (llt.info() != Eigen::Success) {
    const auto pivot = failing_pivot(a);
    throw numerical_error("system matrix is not positive definite (pivot " +
                              std::to_string(pivot) + ")",
                          pivot);
  }
  Vector x = llt.solve(b);
  const double bound = 1e-8 * (1.0 + (b.size() ? b.cwiseAbs().maxCoeff() : 0.0));
  Vector r = b - a * x;
  residual = r.size() ? r.cwiseAbs().maxCoeff() : 0.0;
  for (int step = 0; step < 2 && residual > bound; ++step) {
    x += llt.solve(r);
    r = b - a * x;
    residual = r.cwiseAbs().maxCoeff();
  }
  if (!x.allFinite()) throw numerical_error("non-finite solution");
  return x;
}

Vector to_vector(std::span<const int> y) {
  Vector v(static_cast<Eigen::Index>(y.size()));
  for (std::size_t i = 0; i < y.size(); ++i) v(static_cast<Eigen::Index>(i)) = y[i];
  return v;
}

Predictions finish(const Vector& scores) {
  Predictions p;
  p.scores.assign(scores.data(), scores.data() + scores.size());
  p.labels.reserve(p.scores.size());
  for (double s : p.scores) p.labels.push_back(decide(s));
  return p;
}

}  // namespace

DualModel fit_krr(const KernelMatrix& k, std::span<const int> y, double lambda) {
  check_lambda(lambda);
  if (k.rows() != k.cols()) throw argument_error("training kernel must be square");
  if (k.row_ids != k.col_ids) throw argument_error("training kernel row and column ids differ");
  check_labels(y, k.rows());
  const double scale = std::max(1.0, k.values.size() ? k.values.cwiseAbs().maxCoeff() : 0.0);
  for (Eigen::Index i = 0; i < k.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < i; ++j) {
      if (std::abs(k.values(i, j) - k.values(j, i)) > 1e-12 * scale) {
        throw argument_error("training kernel is not symmetric");
      }
    }
  }
  Eigen::MatrixXd a = k.values;
  a.diagonal().array() += lambda;

  DualModel model;
  model.train_ids = k.row_ids;
  model.lambda = lambda;
  model.kind = k.kind;
  model.n = k.n;
  model.coefficients = spd_solve(a, to_vector(y), model.residual);
  return model;
}

Predictions predict_krr(const DualModel& model, const KernelMatrix& k_cross) {
  if (k_cross.col_ids != model.train_ids) {
    throw argument_error("cross kernel columns are not aligned with the training ids");
  }
  return finish(k_cross.values * model.coefficients);
}

PrimalModel fit_rr(const DenseMatrix& x, std::span<const int> y, double lambda) {
  check_lambda(lambda);
  check_labels(y, x.rows());
  Eigen::MatrixXd a = x.values.transpose() * x.values;
  a.diagonal().array() += lambda;
  const Vector b = x.values.transpose() * to_vector(y);
  PrimalModel model;
  model.lambda = lambda;
  model.weights = spd_solve(a, b, model.residual);
  return model;
}

Predictions predict_rr(const PrimalModel& model, const DenseMatrix& x) {
  if (x.dim() != model.dim()) {
    throw argument_error("feature dimension " + std::to_string(x.dim()) +
                         " does not match model dimension " + std::to_string(model.dim()));
  }
  return finish(x.values * model.weights);
}

LambdaGrid::LambdaGrid(std::vector<double> values) : values_(std::move(values)) {
  if (values_.empty()) throw argument_error("lambda grid is empty");
  std::set<double> seen;
  for (double v : values_) {
    if (!(v > 0) || !std::isfinite(v)) throw argument_error("lambda grid values must be positive");
    if (!seen.insert(v).second) throw argument_error("lambda grid has duplicates");
  }
}

LambdaGrid LambdaGrid::standard() { return LambdaGrid({1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7}); }

namespace {
constexpr char kDualMagic[5] = "FSDL";
constexpr char kPrimalMagic[5] = "FSPL";
}  // namespace

void write_dual_model(std::ostream& out, const DualModel& m) {
  if (static_cast<std::size_t>(m.coefficients.size()) != m.train_ids.size()) {
    throw argument_error("dual model coefficients do not match training ids");
  }
  binary::put_magic(out, kDualMagic, 1);
  binary::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(m.kind));
  binary::put_le<std::uint32_t>(out, m.n);
  binary::put_le<std::uint8_t>(out, m.domain_adapted ? 1 : 0);
  binary::put_f64(out, m.lambda);
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.train_ids.size()));
  for (Eigen::Index i = 0; i < m.coefficients.size(); ++i) binary::put_f64(out, m.coefficients(i));
  for (const auto& id : m.train_ids) binary::put_string(out, id);
}

DualModel read_dual_model(std::istream& in) {
  binary::expect_magic(in, kDualMagic, 1);
  DualModel m;
  const auto kind = binary::get_le<std::uint8_t>(in);
  if (kind > 2) throw format_error("FSDL: unknown kernel kind");
  m.kind = static_cast<KernelKind>(kind);
  m.n = binary::get_le<std::uint32_t>(in);
  m.domain_adapted = (binary::get_le<std::uint8_t>(in) & 1) != 0;
  m.lambda = binary::get_f64(in);
  const auto count = binary::get_le<std::uint32_t>(in);
  m.coefficients.resize(count);
  for (std::uint32_t i = 0; i < count; ++i) m.coefficients(i) = binary::get_f64(in);
  m.train_ids.reserve(count);
  for (std::uint32_t i = 0; i < count; ++i) m.train_ids.push_back(binary::get_string(in));
  return m;
}

void write_primal_model(std::ostream& out, const PrimalModel& m) {
  binary::put_magic(out, kPrimalMagic, 1);
  binary::put_f64(out, m.lambda);
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.weights.size()));
  for (Eigen::Index i = 0; i < m.weights.size(); ++i) binary::put_f64(out, m.weights(i));
}

PrimalModel read_primal_model(std::istream& in) {
  binary::expect_magic(in, kPrimalMagic, 1);
  PrimalModel m;
  m.lambda = binary::get_f64(in);
  const auto dim = binary::get_le<std::uint32_t>(in);
  m.weights.resize(dim);
  for (std::uint32_t i = 0; i < dim; ++i) m.weights(i) = binary::get_f64(in);
  return m;
}

namespace {

template <typename Model, typename Writer>
void save_with(const std::filesystem::path& path, const Model& m, Writer write) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw error("cannot write " + path.string());
  write(out, m);
}

std::ifstream open_binary(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path.string());
  return in;
}

}  // namespace

void save_dual_model(const std::filesystem::path& path, const DualModel& model) {
  save_with(path, model, write_dual_model);
}

DualModel load_dual_model(const std::filesystem::path& path) {
  auto in = open_binary(path);
  return read_dual_model(in);
}

void save_primal_model(const std::filesystem::path& path, const PrimalModel& model) {
  save_with(path, model, write_primal_model);
}

PrimalModel load_primal_model(const std::filesystem::path& path) {
  auto in = open_binary(path);
  return read_primal_model(in);
}

}  // namespace strkern
