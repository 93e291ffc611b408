#pragma once

#include <filesystem>
#include <iosfwd>

#include "strkern/ngram_kernel.hpp"

namespace strkern {

/// FSKM v1: "FSKM", u32 version, u8 kind, u32 n, u32 rows, u32 cols,
/// rows*cols f64 row-major, then row ids and col ids as u32-length-prefixed
/// UTF-8 strings. All integers little-endian.
void write_kernel_matrix(std::ostream& out, const KernelMatrix& matrix);
KernelMatrix read_kernel_matrix(std::istream& in);

void save_kernel_matrix(const std::filesystem::path& path, const KernelMatrix& matrix);
KernelMatrix load_kernel_matrix(const std::filesystem::path& path);

}  // namespace strkern
