#pragma once

// Text formats.
//
// Matrix file: optional leading lines starting with '#', then "rows cols",
// then one line per row with space-separated reals at 17 significant
// digits, which round-trips every finite double.
//
// Support file: one zero-based "i j" pair per line listing Omega.

#include "rpca/support.hpp"

#include <string>
#include <string_view>

namespace rpca {

std::string render_matrix(const Matrix& m, std::string_view comment = {});
Matrix parse_matrix(std::string_view text, const std::string& origin = "<string>");

Matrix read_matrix(const std::string& path);
void write_matrix(const std::string& path, const Matrix& m, std::string_view comment = {});

std::string render_support(const SupportMask& s);
SupportMask parse_support(std::string_view text, Eigen::Index rows, Eigen::Index cols,
                          const std::string& origin = "<string>");
SupportMask read_support(const std::string& path, Eigen::Index rows, Eigen::Index cols);
void write_support(const std::string& path, const SupportMask& s);

// Shortest-safe rendering used everywhere: 17 significant digits, "%g" style.
std::string format_real(double v);

std::string read_file(const std::string& path);
// Writes to a sibling temporary and renames it over `path`.
void write_file_atomic(const std::string& path, std::string_view content);

}  // namespace rpca
