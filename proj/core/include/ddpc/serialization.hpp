#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ddpc/types.hpp"

namespace ddpc {

// Shortest exact decimal form of a double (17 significant digits).
std::string format_double(double v);

// FNV-1a 64-bit over raw bytes; used for file provenance stamps.
std::uint64_t fnv1a64(const void* data, std::size_t size);
std::string fnv1a64_hex(const void* data, std::size_t size);
std::uint64_t fnv1a64_file(const std::string& path);

void write_text_file(const std::string& path, const std::string& content);
std::string read_text_file(const std::string& path);

// Matrix-market-style text dump of a dense matrix (debug aid).
void write_matrix_text(const std::string& path, const Matrix& m, const std::string& comment);

}  // namespace ddpc
