#include "strkern/kernel_cache.hpp"

#include <fstream>

#include "strkern/binary_io.hpp"

namespace strkern {

namespace {
constexpr char kMagic[5] = "FSKM";
constexpr std::uint32_t kVersion = 1;
}  // namespace

void write_kernel_matrix(std::ostream& out, const KernelMatrix& m) {
  if (m.row_ids.size() != m.rows() || m.col_ids.size() != m.cols()) {
    throw argument_error("kernel matrix ids do not match its dimensions");
  }
  binary::put_magic(out, kMagic, kVersion);
  binary::put_le<std::uint8_t>(out, static_cast<std::uint8_t>(m.kind));
  binary::put_le<std::uint32_t>(out, m.n);
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.rows()));
  binary::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(m.cols()));
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) binary::put_f64(out, m.values(i, j));
  }
  for (const auto& id : m.row_ids) binary::put_string(out, id);
  for (const auto& id : m.col_ids) binary::put_string(out, id);
}

KernelMatrix read_kernel_matrix(std::istream& in) {
  binary::expect_magic(in, kMagic, kVersion);
  KernelMatrix m;
  const auto kind = binary::get_le<std::uint8_t>(in);
  if (kind > 2) throw format_error("FSKM: unknown kernel kind " + std::to_string(kind));
  m.kind = static_cast<KernelKind>(kind);
  m.n = binary::get_le<std::uint32_t>(in);
  const auto rows = binary::get_le<std::uint32_t>(in);
  const auto cols = binary::get_le<std::uint32_t>(in);
  m.values.resize(rows, cols);
  for (Eigen::Index i = 0; i < m.values.rows(); ++i) {
    for (Eigen::Index j = 0; j < m.values.cols(); ++j) m.values(i, j) = binary::get_f64(in);
  }
  m.row_ids.reserve(rows);
  m.col_ids.reserve(cols);
  for (std::uint32_t i = 0; i < rows; ++i) m.row_ids.push_back(binary::get_string(in));
  for (std::uint32_t j = 0; j < cols; ++j) m.col_ids.push_back(binary::get_string(in));
  return m;
}

void save_kernel_matrix(const std::filesystem::path& path, const KernelMatrix& matrix) {
  // written under a temporary name, then renamed into place
  auto tmp = path;
  tmp += ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary);
    if (!out) throw error("cannot write " + tmp.string());
    write_kernel_matrix(out, matrix);
    if (!out) throw error("write failed for " + tmp.string());
  }
  std::filesystem::rename(tmp, path);
}

KernelMatrix load_kernel_matrix(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw format_error("cannot open " + path.string());
  return read_kernel_matrix(in);
}

}  // namespace strkern
