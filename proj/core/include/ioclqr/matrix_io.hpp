#pragma once

#include <filesystem>
#include <string>

#include "ioclqr/types.hpp"

namespace ioclqr {

/// Formats a double with 17 significant digits, enough to round-trip
/// any IEEE-754 binary64 value through text exactly.
std::string format_double(double v);

/// Writes a matrix as CSV, one row per line, 17-significant-digit cells.
void write_matrix_csv(const std::filesystem::path& path, const Matrix& m);

/// Reads a rectangular CSV of doubles. Throws IoError on ragged rows or
/// unparsable cells.
Matrix read_matrix_csv(const std::filesystem::path& path);

}  // namespace ioclqr
